#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mtkit {

enum class Decision : std::uint8_t { Accept = 0, Reject = 1 };
enum class Direction : std::int8_t { Lower = -1, None = 0, Upper = 1 };

/// Identified p-values with optional ground truth.
///
/// `null_true[i] == 1` marks a true null hypothesis (it counts toward m0).
/// `sign` is the true effect direction in {-1, 0, +1}; `z` is the observed
/// signed statistic used for directional decisions.
struct PVector {
  std::vector<std::string> ids;
  std::vector<double> p;
  std::optional<std::vector<std::uint8_t>> null_true;
  std::optional<std::vector<std::int8_t>> sign;
  std::optional<std::vector<double>> z;

  [[nodiscard]] std::size_t size() const noexcept { return p.size(); }

  /// Throws InputError on out-of-range p, duplicate ids, length mismatches
  /// or a sign/truth pair that disagrees (sign == 0 iff the null is true).
  void validate() const;

  /// Builds a vector with ids "1".."m".
  static PVector from_values(std::vector<double> p);
};

/// Per-hypothesis decisions, aligned by position with the source PVector.
struct DecisionVector {
  std::vector<Decision> decisions;
  std::optional<std::vector<Direction>> directions;

  [[nodiscard]] std::size_t size() const noexcept { return decisions.size(); }
  [[nodiscard]] bool rejected(std::size_t i) const { return decisions[i] == Decision::Reject; }
  [[nodiscard]] std::size_t rejections() const noexcept;

  static DecisionVector accept_all(std::size_t m);
};

/// The 2x2 table of true states against decisions.
///
///                 not rejected   rejected
///   true nulls         U            V       m0
///   false nulls        T            S       m1
///                     m-R           R       m
class ConfusionTable {
 public:
  ConfusionTable() = default;
  ConfusionTable(std::uint64_t u, std::uint64_t v, std::uint64_t t, std::uint64_t s) noexcept
      : u_(u), v_(v), t_(t), s_(s) {}

  [[nodiscard]] std::uint64_t u() const noexcept { return u_; }
  [[nodiscard]] std::uint64_t v() const noexcept { return v_; }
  [[nodiscard]] std::uint64_t t() const noexcept { return t_; }
  [[nodiscard]] std::uint64_t s() const noexcept { return s_; }
  [[nodiscard]] std::uint64_t m0() const noexcept { return u_ + v_; }
  [[nodiscard]] std::uint64_t m1() const noexcept { return t_ + s_; }
  [[nodiscard]] std::uint64_t r() const noexcept { return v_ + s_; }
  [[nodiscard]] std::uint64_t m() const noexcept { return m0() + m1(); }

  bool operator==(const ConfusionTable&) const = default;

 private:
  std::uint64_t u_ = 0;
  std::uint64_t v_ = 0;
  std::uint64_t t_ = 0;
  std::uint64_t s_ = 0;
};

/// Throws InputError when the two inputs differ in length.
ConfusionTable tabulate(const DecisionVector& decisions, std::span<const std::uint8_t> null_true);

struct ReplicateIndicators {
  double fdp = 0.0;
  double fnp = 0.0;
  std::uint64_t v = 0;
  std::uint64_t r = 0;
  std::uint64_t s = 0;
  std::uint64_t t = 0;
  bool any_power = false;
  bool all_power = false;
  double frac_power = 0.0;
  std::uint64_t misclassified = 0;
  bool any_error_family = false;
  std::vector<std::uint8_t> v_exceeds;    // 1[V > k], one per k
  std::vector<std::uint8_t> s_exceeds;    // 1[S > k], one per k
  std::vector<std::uint8_t> fdp_exceeds;  // 1[FDP > gamma], one per gamma
  std::vector<std::uint8_t> target_rejected;  // filled by the caller for per-id power
};

ReplicateIndicators replicate_indicators(const ConfusionTable& table,
                                         std::span<const std::uint64_t> k_list,
                                         std::span<const double> gamma_list);

/// A Monte Carlo mean. `value` is empty when the estimand is undefined
/// (pFDR with no replicate rejecting anything); `se` is empty with fewer
/// than two contributing replicates.
struct Estimate {
  std::optional<double> value;
  std::optional<double> se;
  std::uint64_t replicates = 0;

  bool operator==(const Estimate&) const = default;
};

struct AggregateOptions {
  std::uint64_t m = 0;
  std::uint64_t m1 = 0;
  std::vector<std::uint64_t> k_list;
  std::vector<double> gamma_list;
  double lambda = 1.0;
  std::vector<std::string> power_targets;
};

struct CriterionRow {
  std::string criterion;
  std::string parameter;
  Estimate estimate;
};

struct MetricsReport {
  std::uint64_t m = 0;
  std::uint64_t m1 = 0;
  std::uint64_t replicates = 0;
  double lambda = 1.0;

  Estimate pcer, pfer, fwer, fdr, pfdr, fnr, frr, far;
  Estimate power_a, power_b, power_d;
  Estimate classification_risk, family_loss, combined_risk;

  std::vector<std::pair<std::uint64_t, Estimate>> kfwer;
  std::vector<std::pair<double, Estimate>> fdp_exceedance;
  std::vector<std::pair<std::uint64_t, Estimate>> power_e;
  std::vector<std::pair<std::string, Estimate>> power_c;

  /// Flattened view in a fixed order, for serialization.
  [[nodiscard]] std::vector<CriterionRow> rows() const;
};

/// Running mean with Neumaier-compensated sums of x and x^2. Results depend
/// only on the order of `add` calls.
class MeanAccumulator {
 public:
  void add(double x) noexcept;
  [[nodiscard]] std::uint64_t count() const noexcept { return n_; }
  [[nodiscard]] double sum() const noexcept { return sum_.value(); }
  [[nodiscard]] Estimate estimate() const;

 private:
  struct Neumaier {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) noexcept;
    [[nodiscard]] double value() const noexcept { return sum + comp; }
  };
  Neumaier sum_;
  Neumaier sumsq_;
  std::uint64_t n_ = 0;
};

/// Folds replicate indicators into a MetricsReport. Replicates may arrive in
/// any order; they are reduced strictly by index, so the report is the same
/// for every producer interleaving.
class Aggregator {
 public:
  explicit Aggregator(AggregateOptions options);

  /// Throws InputError on a duplicate index or mismatched vector lengths.
  void add(std::uint64_t index, ReplicateIndicators indicators);

  /// Throws InputError when no replicates arrived or indices have gaps.
  [[nodiscard]] MetricsReport finish() const;

 private:
  void fold(const ReplicateIndicators& ind);

  AggregateOptions options_;
  std::uint64_t next_ = 0;
  std::map<std::uint64_t, ReplicateIndicators> pending_;

  MeanAccumulator v_, t_, fwer_, fdp_, fdp_given_r_, fnp_;
  MeanAccumulator any_power_, all_power_, frac_power_;
  MeanAccumulator misclassified_, family_loss_, combined_;
  std::vector<MeanAccumulator> kfwer_, power_e_, fdp_exc_, targets_;
};

MetricsReport aggregate(std::span<const ReplicateIndicators> replicates,
                        const AggregateOptions& options);

}  // namespace mtkit
