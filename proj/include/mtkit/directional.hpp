#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtkit/core.hpp"

namespace mtkit::directional {

/// A signed statistic with a continuous null distribution symmetric about 0,
/// carried as its two tail p-values (p_upper + p_lower = 1).
class SignedStatistic {
 public:
  /// Standard normal null.
  static SignedStatistic from_normal(double z);
  /// Any symmetric null, given P(Z >= z) under it. Throws InputError outside [0,1].
  static SignedStatistic from_upper_tail(double p_upper);

  [[nodiscard]] double z() const noexcept { return z_; }
  [[nodiscard]] double p_upper() const noexcept { return p_upper_; }
  [[nodiscard]] double p_lower() const noexcept { return p_lower_; }
  [[nodiscard]] double p_two() const noexcept;

 private:
  SignedStatistic(double z, double p_upper, double p_lower) noexcept
      : z_(z), p_upper_(p_upper), p_lower_(p_lower) {}

  double z_;
  double p_upper_;
  double p_lower_;
};

/// `tau` is the share of alpha placed in the upper tail; 0.5 is equal tails.
/// Upper iff p_upper <= tau*alpha, Lower iff p_lower <= (1-tau)*alpha.
/// Throws InputError unless 0 < alpha < 1 and 0 < tau < 1.
Direction decide(const SignedStatistic& s, double alpha, double tau = 0.5);

/// Level-alpha p-value of the directional pair with tail split tau:
/// min(1, p_upper/tau, p_lower/(1-tau)). It is <= alpha exactly when `decide`
/// rejects, which lets any p-value procedure run on directional pairs.
double pair_p_value(const SignedStatistic& s, double tau = 0.5);

/// Same as pair_p_value, starting from a two-sided p-value and the sign of z.
double pair_p_value_from_two_sided(double p_two, double z, double tau = 0.5);

enum class ErrorClass { TypeI, TypeII, TypeIII, CorrectRejection, CorrectAcceptance };

/// Total over every (decision, true sign) pair; throws InputError for signs
/// outside {-1, 0, +1}.
ErrorClass classify(Direction decision, int true_sign);

/// One replicate's directional error counts.
struct DirectionalTally {
  std::uint64_t m = 0;
  std::uint64_t m1 = 0;  // nonzero true signs
  std::uint64_t type1 = 0;
  std::uint64_t type2 = 0;
  std::uint64_t type3 = 0;
  std::uint64_t correct_rejections = 0;
  std::uint64_t correct_acceptances = 0;

  [[nodiscard]] std::uint64_t rejections() const noexcept {
    return type1 + type3 + correct_rejections;
  }
};

/// Throws InputError when sizes differ or direction labels are missing.
DirectionalTally tally(const DecisionVector& decisions, std::span<const std::int8_t> true_sign);

/// Monte Carlo directional error rates. Familywise rates are P(count > 0);
/// per-hypothesis rates are E(count)/m. `dfdr` counts Type I and Type III
/// rejections as false discoveries; `type3_fdr` counts Type III only. Both
/// use 0/0 = 0. `correct_direction_power` is E(correct rejections / m1) with
/// m1 = 0 contributing 0.
struct DirectionalMetrics {
  Estimate type1_familywise, type1_per_hypothesis;
  Estimate type2_familywise, type2_per_hypothesis;
  Estimate type3_familywise, type3_per_hypothesis;
  Estimate dfdr, type3_fdr;
  Estimate correct_direction_power;

  [[nodiscard]] std::vector<CriterionRow> rows() const;
};

/// Reduces tallies in order. Throws InputError on an empty input.
DirectionalMetrics directional_metrics(std::span<const DirectionalTally> replicates);

/// Streaming form of directional_metrics; replicates must be added in index order.
class DirectionalAccumulator {
 public:
  void add(const DirectionalTally& t);
  [[nodiscard]] DirectionalMetrics finish() const;

 private:
  MeanAccumulator t1f_, t1h_, t2f_, t2h_, t3f_, t3h_, dfdr_, t3fdr_, power_;
};

/// Exact decision probabilities of the pair for z ~ Normal(delta, 1).
/// For delta > 0 the correct direction is Upper, for delta < 0 Lower. At
/// delta = 0 both are Type I errors; by convention `correct` then reports the
/// Upper rate and `type3` the Lower rate.
struct DirectionPower {
  double delta = 0.0;
  double upper = 0.0;
  double lower = 0.0;
  double correct = 0.0;
  double type3 = 0.0;
  double accept = 0.0;
};

std::vector<DirectionPower> direction_powers(std::span<const double> deltas, double alpha,
                                             double tau = 0.5);

}  // namespace mtkit::directional
