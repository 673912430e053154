#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtkit/core.hpp"
#include "mtkit/directional.hpp"
#include "mtkit/methods.hpp"

namespace mtkit::sim {

enum class Effect { NormalShift, BetaAlternative };
enum class Sidedness { OneSided, TwoSided, Directional };

/// Hypotheses 1..m0 are true nulls and m0+1..m are false nulls.
///
/// Latent statistics are z_i = sqrt(rho) W + sqrt(1 - rho) e_i + delta_i s_i,
/// giving an intraclass correlation rho. Under BetaAlternative false-null
/// p-values are Beta(a, 1) draws u^(1/a) and the statistics are independent.
struct SimConfig {
  std::uint64_t m = 100;
  std::uint64_t m0 = 100;
  Effect effect = Effect::NormalShift;
  /// One shared shift or one per false null; must be positive.
  std::vector<double> delta{1.0};
  double beta_a = 0.5;
  Sidedness sidedness = Sidedness::OneSided;
  double tau = 0.5;
  double rho = 0.0;
  std::uint64_t reps = 1000;
  std::uint64_t seed = 1;
  std::vector<Method> procedures;
  double alpha = 0.05;
  std::vector<std::uint64_t> k_list;
  std::vector<double> gamma_list;
  /// Weight of FDR in the combined FNR + lambda * FDR risk.
  double loss_lambda = 1.0;
  /// Per-false-null effect signs; empty means the default for the sidedness.
  std::vector<std::int8_t> signs;
  /// 1-based hypothesis numbers whose individual rejection rate is reported.
  std::vector<std::uint64_t> power_targets;

  [[nodiscard]] std::uint64_t m1() const noexcept { return m - m0; }

  /// Throws InputError for malformed values and IncompatibleError for
  /// combinations the model cannot serve.
  void validate() const;
};

/// Truth labels, signs and shifts shared by every replicate.
struct Layout {
  std::vector<std::uint8_t> null_true;
  std::vector<std::int8_t> sign;
  std::vector<double> shift;  // delta_i * sign_i
};

Layout layout(const SimConfig& config);

/// One replicate's data. `z` is empty under BetaAlternative.
struct Draw {
  std::vector<double> p;
  std::vector<double> z;
};

/// Pure function of (config, replicate index).
Draw draw(const SimConfig& config, const Layout& lay, std::uint64_t replicate);

/// Same draw packaged with ids "h1".."hm", truth and signs.
PVector generate(const SimConfig& config, std::uint64_t replicate);

struct ProcedureReport {
  std::string label;
  MetricsReport metrics;
  std::optional<directional::DirectionalMetrics> directional;
};

struct RunManifest {
  SimConfig config;
  std::string generator;
  std::string version;
  std::vector<ProcedureReport> reports;
};

struct RunOptions {
  unsigned threads = 1;
  std::uint64_t block = 4096;
};

/// Replicates are evaluated in parallel blocks and folded strictly in index
/// order, so the manifest does not depend on `threads`.
RunManifest run(const SimConfig& config, const RunOptions& options = {});

/// Rejection rate of one false null as true nulls are added to the family.
/// The configured false nulls are kept; for each m in `family_sizes`,
/// m0 = m - m1. `target` is 1-based among the false nulls.
struct TrendPoint {
  std::uint64_t m = 0;
  Estimate rejection_rate;
};

struct RejectionTrend {
  std::vector<TrendPoint> points;
  /// No estimate exceeds its predecessor by more than 3 combined standard errors.
  bool nonincreasing = true;
};

RejectionTrend rejection_trend(const SimConfig& config, const Method& method, std::uint64_t target,
                               const std::vector<std::uint64_t>& family_sizes,
                               const RunOptions& options = {});

std::string effect_name(Effect e);
std::string sidedness_name(Sidedness s);

}  // namespace mtkit::sim
