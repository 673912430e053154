#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtkit/core.hpp"

namespace mtkit {

enum class ProcedureKind {
  Bonferroni,
  Holm,
  Hochberg,
  BH,
  BY,
  GenBonferroniK,  // single-step, controls P(V > k)
  LRStepdownK,     // Lehmann-Romano step-down, controls P(V > k)
  LRStepdownFDP,   // Lehmann-Romano step-down, controls P(FDP > gamma)
};

enum class StepType { Down, Up };

struct ProcedureSpec {
  ProcedureKind kind = ProcedureKind::BH;
  std::uint32_t k = 0;
  double gamma = 0.0;
  bool directional = false;
  /// Rejections whose raw p exceeds the cap are demoted after the procedure runs.
  std::optional<double> cap;

  /// Throws InputError unless gamma is in [0,1) and cap in (0,1].
  void validate() const;
  [[nodiscard]] StepType step() const noexcept;
  [[nodiscard]] std::string label() const;
};

/// Critical-value coefficients c_1..c_m stored as ratios numer/denom, so that
/// the level-alpha critical value at rank i is min(1, c_i * alpha).
///
/// Engines compare the scaled p-value min(1, p * denom / numer) with alpha;
/// adjusted p-values are running max/min of the same scaled values, which is
/// what makes "reject at alpha" and "adjusted p <= alpha" agree bit for bit.
class ThresholdSequence {
 public:
  ThresholdSequence(std::vector<double> numer, std::vector<double> denom);

  [[nodiscard]] std::size_t size() const noexcept { return numer_.size(); }
  /// c_i for 0-based rank index i.
  [[nodiscard]] double coefficient(std::size_t i) const { return numer_[i] / denom_[i]; }
  [[nodiscard]] double critical(std::size_t i, double alpha) const;
  [[nodiscard]] double scaled(std::size_t i, double p) const;
  [[nodiscard]] std::vector<double> critical_values(double alpha) const;

 private:
  std::vector<double> numer_;
  std::vector<double> denom_;
};

/// Throws InputError for m == 0 or an invalid spec.
ThresholdSequence thresholds(const ProcedureSpec& spec, std::size_t m);

/// Throws InputError unless 0 < alpha <= 1.
void check_alpha(double alpha);

/// P-values sorted ascending together with the permutation that sorts them.
/// Ties keep index order; ids never affect decisions because thresholds are
/// monotone, so tied p-values always share a decision.
struct Ranking {
  std::vector<std::size_t> order;  // order[rank] = original index
  std::vector<double> sorted;

  static Ranking of(std::span<const double> p);
  /// Ties broken by id.
  static Ranking of(const PVector& p);
};

/// Number of hypotheses rejected (a prefix of the ranking).
std::size_t step_down_count(const Ranking& ranked, const ThresholdSequence& t, double alpha);
std::size_t step_up_count(const Ranking& ranked, const ThresholdSequence& t, double alpha);

DecisionVector step_down(std::span<const double> p, const ThresholdSequence& t, double alpha);
DecisionVector step_up(std::span<const double> p, const ThresholdSequence& t, double alpha);
DecisionVector step_down(const PVector& p, const ThresholdSequence& t, double alpha);
DecisionVector step_up(const PVector& p, const ThresholdSequence& t, double alpha);

/// Rejects the first `count` ranks.
DecisionVector reject_prefix(const Ranking& ranked, std::size_t count);

std::vector<double> adjusted_p(const ProcedureSpec& spec, std::span<const double> p);
std::vector<double> adjusted_p(const ProcedureSpec& spec, const Ranking& ranked);

/// Runs the procedure, then the optional cap, then attaches directions when
/// `spec.directional` is set (Upper iff z > 0). Throws InputError when
/// direction mode is requested without one statistic per p-value.
DecisionVector apply(const ProcedureSpec& spec, std::span<const double> p, double alpha,
                     std::span<const double> z = {});
DecisionVector apply(const ProcedureSpec& spec, const Ranking& ranked, double alpha,
                     std::span<const double> p, std::span<const double> z = {});
DecisionVector apply(const ProcedureSpec& spec, const PVector& p, double alpha);

/// Cap demotion and direction labelling shared by every procedure family.
void finalize_decisions(DecisionVector& decisions, std::span<const double> p,
                        std::optional<double> cap, bool directional, std::span<const double> z);

}  // namespace mtkit
