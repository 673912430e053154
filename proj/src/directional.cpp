#include "mtkit/directional.hpp"

#include <algorithm>
#include <cmath>

#include "mtkit/error.hpp"
#include "mtkit/normal.hpp"

namespace mtkit::directional {

namespace {

void check_level(double alpha, double tau) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
  if (!(tau > 0.0 && tau < 1.0)) throw InputError("tau must lie in (0,1)");
}

}  // namespace

SignedStatistic SignedStatistic::from_normal(double z) {
  if (std::isnan(z)) throw InputError("signed statistic is NaN");
  return {z, normal::sf(z), normal::cdf(z)};
}

SignedStatistic SignedStatistic::from_upper_tail(double p_upper) {
  if (!(p_upper >= 0.0 && p_upper <= 1.0)) throw InputError("tail p-value outside [0,1]");
  return {-normal::quantile(p_upper), p_upper, 1.0 - p_upper};
}

double SignedStatistic::p_two() const noexcept {
  return std::min(1.0, 2.0 * std::min(p_upper_, p_lower_));
}

Direction decide(const SignedStatistic& s, double alpha, double tau) {
  check_level(alpha, tau);
  if (s.p_upper() <= tau * alpha) return Direction::Upper;
  if (s.p_lower() <= (1.0 - tau) * alpha) return Direction::Lower;
  return Direction::None;
}

double pair_p_value(const SignedStatistic& s, double tau) {
  check_level(0.5, tau);
  return std::min({1.0, s.p_upper() / tau, s.p_lower() / (1.0 - tau)});
}

double pair_p_value_from_two_sided(double p_two, double z, double tau) {
  check_level(0.5, tau);
  if (!(p_two >= 0.0 && p_two <= 1.0)) throw InputError("two-sided p-value outside [0,1]");
  // Under a symmetric null the tail on the side of z carries p_two / 2.
  const double near = 0.5 * p_two;
  const double far = 1.0 - near;
  const double p_upper = z > 0.0 ? near : far;
  const double p_lower = z > 0.0 ? far : near;
  return std::min({1.0, p_upper / tau, p_lower / (1.0 - tau)});
}

ErrorClass classify(Direction decision, int true_sign) {
  if (true_sign < -1 || true_sign > 1) throw InputError("true sign must be -1, 0 or +1");
  if (decision == Direction::None) {
    return true_sign == 0 ? ErrorClass::CorrectAcceptance : ErrorClass::TypeII;
  }
  if (true_sign == 0) return ErrorClass::TypeI;
  const int decided = decision == Direction::Upper ? 1 : -1;
  return decided == true_sign ? ErrorClass::CorrectRejection : ErrorClass::TypeIII;
}

DirectionalTally tally(const DecisionVector& decisions, std::span<const std::int8_t> true_sign) {
  if (decisions.size() != true_sign.size()) throw InputError("tally: size mismatch");
  if (!decisions.directions) throw InputError("tally: decisions carry no directions");
  const auto& dirs = *decisions.directions;
  DirectionalTally out;
  out.m = true_sign.size();
  for (std::size_t i = 0; i < true_sign.size(); ++i) {
    if (true_sign[i] != 0) ++out.m1;
    const Direction d = decisions.rejected(i) ? dirs[i] : Direction::None;
    switch (classify(d, true_sign[i])) {
      case ErrorClass::TypeI: ++out.type1; break;
      case ErrorClass::TypeII: ++out.type2; break;
      case ErrorClass::TypeIII: ++out.type3; break;
      case ErrorClass::CorrectRejection: ++out.correct_rejections; break;
      case ErrorClass::CorrectAcceptance: ++out.correct_acceptances; break;
    }
  }
  return out;
}

void DirectionalAccumulator::add(const DirectionalTally& t) {
  const double m = static_cast<double>(t.m);
  const auto r = t.rejections();
  t1f_.add(t.type1 > 0 ? 1.0 : 0.0);
  t1h_.add(static_cast<double>(t.type1) / m);
  t2f_.add(t.type2 > 0 ? 1.0 : 0.0);
  t2h_.add(static_cast<double>(t.type2) / m);
  t3f_.add(t.type3 > 0 ? 1.0 : 0.0);
  t3h_.add(static_cast<double>(t.type3) / m);
  dfdr_.add(r == 0 ? 0.0 : static_cast<double>(t.type1 + t.type3) / static_cast<double>(r));
  t3fdr_.add(r == 0 ? 0.0 : static_cast<double>(t.type3) / static_cast<double>(r));
  power_.add(t.m1 == 0 ? 0.0
                       : static_cast<double>(t.correct_rejections) / static_cast<double>(t.m1));
}

DirectionalMetrics DirectionalAccumulator::finish() const {
  if (t1f_.count() == 0) throw InputError("directional metrics: no replicates");
  return {t1f_.estimate(),  t1h_.estimate(),  t2f_.estimate(),
          t2h_.estimate(),  t3f_.estimate(),  t3h_.estimate(),
          dfdr_.estimate(), t3fdr_.estimate(), power_.estimate()};
}

DirectionalMetrics directional_metrics(std::span<const DirectionalTally> replicates) {
  DirectionalAccumulator acc;
  for (const auto& t : replicates) acc.add(t);
  return acc.finish();
}

std::vector<CriterionRow> DirectionalMetrics::rows() const {
  return {{"typeI_familywise", "", type1_familywise},
          {"typeI_per_hypothesis", "", type1_per_hypothesis},
          {"typeII_familywise", "", type2_familywise},
          {"typeII_per_hypothesis", "", type2_per_hypothesis},
          {"typeIII_familywise", "", type3_familywise},
          {"typeIII_per_hypothesis", "", type3_per_hypothesis},
          {"DFDR", "", dfdr},
          {"typeIII_FDR", "", type3_fdr},
          {"correct_direction_power", "", correct_direction_power}};
}

std::vector<DirectionPower> direction_powers(std::span<const double> deltas, double alpha,
                                             double tau) {
  check_level(alpha, tau);
  // Null-calibrated cut points: Upper iff z >= upper_cut, Lower iff z <= lower_cut.
  const double upper_cut = -normal::quantile(tau * alpha);
  const double lower_cut = normal::quantile((1.0 - tau) * alpha);
  std::vector<DirectionPower> out;
  out.reserve(deltas.size());
  for (const double delta : deltas) {
    DirectionPower row;
    row.delta = delta;
    row.upper = normal::sf(upper_cut - delta);
    row.lower = normal::cdf(lower_cut - delta);
    row.accept = normal::cdf(upper_cut - delta) - normal::cdf(lower_cut - delta);
    if (delta < 0.0) {
      row.correct = row.lower;
      row.type3 = row.upper;
    } else {
      row.correct = row.upper;
      row.type3 = row.lower;
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace mtkit::directional
