#include "mtkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "mtkit/error.hpp"

namespace mtkit {

void PVector::validate() const {
  if (ids.size() != p.size()) {
    throw InputError("PVector: " + std::to_string(ids.size()) + " ids for " +
                     std::to_string(p.size()) + " p-values");
  }
  std::unordered_set<std::string> seen;
  seen.reserve(ids.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
      std::ostringstream os;
      os << "p-value for id '" << ids[i] << "' is outside [0,1]: " << p[i];
      throw InputError(os.str());
    }
    if (!seen.insert(ids[i]).second) throw InputError("duplicate id '" + ids[i] + "'");
  }
  if (null_true) {
    if (null_true->size() != p.size()) throw InputError("truth column length mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      if ((*null_true)[i] > 1) throw InputError("truth for id '" + ids[i] + "' must be 0 or 1");
    }
  }
  if (sign) {
    if (sign->size() != p.size()) throw InputError("sign column length mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const int s = (*sign)[i];
      if (s < -1 || s > 1) throw InputError("sign for id '" + ids[i] + "' must be -1, 0 or 1");
      if (null_true && ((s == 0) != ((*null_true)[i] == 1))) {
        throw InputError("id '" + ids[i] + "': sign 0 must coincide with a true null");
      }
    }
  }
  if (z) {
    if (z->size() != p.size()) throw InputError("z column length mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!std::isfinite((*z)[i])) throw InputError("z for id '" + ids[i] + "' is not finite");
    }
  }
}

PVector PVector::from_values(std::vector<double> p) {
  PVector out;
  out.ids.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out.ids.push_back(std::to_string(i + 1));
  out.p = std::move(p);
  return out;
}

std::size_t DecisionVector::rejections() const noexcept {
  return static_cast<std::size_t>(
      std::count(decisions.begin(), decisions.end(), Decision::Reject));
}

DecisionVector DecisionVector::accept_all(std::size_t m) {
  DecisionVector out;
  out.decisions.assign(m, Decision::Accept);
  return out;
}

ConfusionTable tabulate(const DecisionVector& decisions, std::span<const std::uint8_t> null_true) {
  if (decisions.size() != null_true.size()) {
    throw InputError("tabulate: " + std::to_string(decisions.size()) + " decisions for " +
                     std::to_string(null_true.size()) + " truth labels");
  }
  std::uint64_t u = 0, v = 0, t = 0, s = 0;
  for (std::size_t i = 0; i < null_true.size(); ++i) {
    const bool reject = decisions.rejected(i);
    if (null_true[i]) {
      reject ? ++v : ++u;
    } else {
      reject ? ++s : ++t;
    }
  }
  return {u, v, t, s};
}

ReplicateIndicators replicate_indicators(const ConfusionTable& table,
                                         std::span<const std::uint64_t> k_list,
                                         std::span<const double> gamma_list) {
  ReplicateIndicators out;
  out.v = table.v();
  out.r = table.r();
  out.s = table.s();
  out.t = table.t();
  const std::uint64_t accepted = table.m() - table.r();
  out.fdp = out.r == 0 ? 0.0 : static_cast<double>(out.v) / static_cast<double>(out.r);
  out.fnp = accepted == 0 ? 0.0 : static_cast<double>(out.t) / static_cast<double>(accepted);
  out.any_power = out.s >= 1;
  // With no false nulls every power is 0, keeping power_b <= power_d <= power_a.
  out.all_power = table.m1() > 0 && out.s == table.m1();
  out.frac_power =
      table.m1() == 0 ? 0.0 : static_cast<double>(out.s) / static_cast<double>(table.m1());
  out.misclassified = out.v + out.t;
  out.any_error_family = out.misclassified > 0;

  out.v_exceeds.reserve(k_list.size());
  out.s_exceeds.reserve(k_list.size());
  for (const auto k : k_list) {
    out.v_exceeds.push_back(out.v > k ? 1 : 0);
    out.s_exceeds.push_back(out.s > k ? 1 : 0);
  }
  out.fdp_exceeds.reserve(gamma_list.size());
  for (const double g : gamma_list) out.fdp_exceeds.push_back(out.fdp > g ? 1 : 0);
  return out;
}

void MeanAccumulator::Neumaier::add(double x) noexcept {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) {
    comp += (sum - t) + x;
  } else {
    comp += (x - t) + sum;
  }
  sum = t;
}

void MeanAccumulator::add(double x) noexcept {
  sum_.add(x);
  sumsq_.add(x * x);
  ++n_;
}

Estimate MeanAccumulator::estimate() const {
  Estimate e;
  e.replicates = n_;
  if (n_ == 0) return e;
  const double n = static_cast<double>(n_);
  const double mean = sum_.value() / n;
  e.value = mean;
  if (n_ >= 2) {
    const double ss = std::max(0.0, sumsq_.value() - n * mean * mean);
    e.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

namespace {

Estimate per_hypothesis(Estimate e, double m) {
  if (e.value) *e.value /= m;
  if (e.se) *e.se /= m;
  return e;
}

}  // namespace

Aggregator::Aggregator(AggregateOptions options)
    : options_(std::move(options)),
      kfwer_(options_.k_list.size()),
      power_e_(options_.k_list.size()),
      fdp_exc_(options_.gamma_list.size()),
      targets_(options_.power_targets.size()) {
  if (options_.m == 0) throw InputError("aggregate: m must be positive");
  if (options_.m1 > options_.m) throw InputError("aggregate: m1 exceeds m");
}

void Aggregator::add(std::uint64_t index, ReplicateIndicators indicators) {
  if (indicators.v_exceeds.size() != options_.k_list.size() ||
      indicators.s_exceeds.size() != options_.k_list.size() ||
      indicators.fdp_exceeds.size() != options_.gamma_list.size() ||
      indicators.target_rejected.size() != options_.power_targets.size()) {
    throw InputError("aggregate: replicate indicator vectors do not match the options");
  }
  if (index < next_ || pending_.contains(index)) {
    throw InputError("aggregate: duplicate replicate index " + std::to_string(index));
  }
  pending_.emplace(index, std::move(indicators));
  for (auto it = pending_.begin(); it != pending_.end() && it->first == next_;
       it = pending_.erase(it)) {
    fold(it->second);
    ++next_;
  }
}

void Aggregator::fold(const ReplicateIndicators& ind) {
  v_.add(static_cast<double>(ind.v));
  t_.add(static_cast<double>(ind.t));
  fwer_.add(ind.v > 0 ? 1.0 : 0.0);
  fdp_.add(ind.fdp);
  if (ind.r > 0) fdp_given_r_.add(ind.fdp);
  fnp_.add(ind.fnp);
  any_power_.add(ind.any_power ? 1.0 : 0.0);
  all_power_.add(ind.all_power ? 1.0 : 0.0);
  frac_power_.add(ind.frac_power);
  misclassified_.add(static_cast<double>(ind.misclassified));
  family_loss_.add(ind.any_error_family ? 1.0 : 0.0);
  combined_.add(ind.fnp + options_.lambda * ind.fdp);
  for (std::size_t j = 0; j < kfwer_.size(); ++j) {
    kfwer_[j].add(ind.v_exceeds[j]);
    power_e_[j].add(ind.s_exceeds[j]);
  }
  for (std::size_t j = 0; j < fdp_exc_.size(); ++j) fdp_exc_[j].add(ind.fdp_exceeds[j]);
  for (std::size_t j = 0; j < targets_.size(); ++j) targets_[j].add(ind.target_rejected[j]);
}

MetricsReport Aggregator::finish() const {
  if (next_ == 0) throw InputError("aggregate: no replicates");
  if (!pending_.empty()) {
    throw InputError("aggregate: replicate " + std::to_string(next_) + " is missing");
  }
  const double m = static_cast<double>(options_.m);

  MetricsReport rep;
  rep.m = options_.m;
  rep.m1 = options_.m1;
  rep.replicates = next_;
  rep.lambda = options_.lambda;

  rep.pfer = v_.estimate();
  rep.frr = rep.pfer;
  rep.pcer = per_hypothesis(rep.pfer, m);
  rep.far = t_.estimate();
  rep.fwer = fwer_.estimate();
  rep.fdr = fdp_.estimate();
  rep.pfdr = fdp_given_r_.estimate();
  rep.fnr = fnp_.estimate();
  rep.power_a = any_power_.estimate();
  rep.power_b = all_power_.estimate();
  rep.power_d = frac_power_.estimate();
  rep.family_loss = family_loss_.estimate();

  rep.classification_risk = per_hypothesis(misclassified_.estimate(), m);
  rep.classification_risk.value = (*rep.pfer.value + *rep.far.value) / m;

  rep.combined_risk = combined_.estimate();
  rep.combined_risk.value = *rep.fnr.value + options_.lambda * *rep.fdr.value;

  for (std::size_t j = 0; j < kfwer_.size(); ++j) {
    rep.kfwer.emplace_back(options_.k_list[j], kfwer_[j].estimate());
    rep.power_e.emplace_back(options_.k_list[j], power_e_[j].estimate());
  }
  for (std::size_t j = 0; j < fdp_exc_.size(); ++j) {
    rep.fdp_exceedance.emplace_back(options_.gamma_list[j], fdp_exc_[j].estimate());
  }
  for (std::size_t j = 0; j < targets_.size(); ++j) {
    rep.power_c.emplace_back(options_.power_targets[j], targets_[j].estimate());
  }
  return rep;
}

MetricsReport aggregate(std::span<const ReplicateIndicators> replicates,
                        const AggregateOptions& options) {
  Aggregator agg(options);
  for (std::size_t i = 0; i < replicates.size(); ++i) agg.add(i, replicates[i]);
  return agg.finish();
}

namespace {

std::string format_param(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::vector<CriterionRow> MetricsReport::rows() const {
  std::vector<CriterionRow> out{
      {"PCER", "", pcer},
      {"PFER", "", pfer},
      {"FWER", "", fwer},
      {"FDR", "", fdr},
      {"pFDR", "", pfdr},
  };
  for (const auto& [k, e] : kfwer) out.push_back({"kFWER", std::to_string(k), e});
  for (const auto& [g, e] : fdp_exceedance) out.push_back({"FDPexc", format_param(g), e});
  out.push_back({"FNR", "", fnr});
  out.push_back({"FRR", "", frr});
  out.push_back({"FAR", "", far});
  out.push_back({"power_a", "", power_a});
  out.push_back({"power_b", "", power_b});
  for (const auto& [id, e] : power_c) out.push_back({"power_c", id, e});
  out.push_back({"power_d", "", power_d});
  for (const auto& [k, e] : power_e) out.push_back({"power_e", std::to_string(k), e});
  out.push_back({"classification_risk", "", classification_risk});
  out.push_back({"family_loss", "", family_loss});
  out.push_back({"combined_risk", format_param(lambda), combined_risk});
  return out;
}

}  // namespace mtkit
