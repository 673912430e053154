#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mtkit/core.hpp"

namespace mtkit {

inline constexpr double kDefaultPi0Lambda = 0.5;

/// Storey's estimate of the true-null proportion with the +1 finite-sample
/// correction: raw = (1 + #{p > lambda}) / (m (1 - lambda)), value = min(1, raw).
struct Pi0Estimate {
  double value = 1.0;
  double raw = 1.0;
  double lambda = kDefaultPi0Lambda;
  std::size_t m = 0;
  std::size_t above = 0;
};

/// Throws InputError for lambda outside (0,1) or an empty input.
Pi0Estimate pi0_storey(std::span<const double> p, double lambda = kDefaultPi0Lambda);

/// Counting processes V(t), S(t), R(t) on a grid of thresholds. V and S are
/// present only when the input carries truth labels.
struct EmpiricalProcesses {
  std::vector<double> grid;
  std::vector<std::uint64_t> r;
  std::optional<std::vector<std::uint64_t>> v;
  std::optional<std::vector<std::uint64_t>> s;
};

/// Throws InputError when the grid is unsorted or leaves [0,1].
EmpiricalProcesses processes(const PVector& p, std::span<const double> grid);

/// Plug-in FDR estimate for the rule "reject every p <= t":
/// pi0_hat * m * t / max(R(t), 1).
double fdr_hat(double t, std::span<const double> p, double lambda = kDefaultPi0Lambda);
double fdr_hat(double t, double pi0, std::size_t m, std::uint64_t rejections);

/// BH step-up at level min(1, alpha / pi0_hat(lambda)).
DecisionVector adaptive_bh(std::span<const double> p, double alpha,
                           double lambda = kDefaultPi0Lambda);

/// Benjamini-Krieger-Yekutieli two-stage adaptive step-up. Emits decisions
/// only; the procedure has no level duality, so there are no adjusted p-values.
struct TwoStageResult {
  DecisionVector decisions;
  std::size_t stage1_rejections = 0;
  /// Estimated number of true nulls used by stage 2 (m - r1); set only when
  /// stage 2 ran.
  std::optional<std::size_t> m0_hat;
  double stage1_level = 0.0;
  std::optional<double> stage2_level;
};

TwoStageResult bky_two_stage(std::span<const double> p, double alpha);

}  // namespace mtkit
