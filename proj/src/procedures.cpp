#include "mtkit/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mtkit/error.hpp"

namespace mtkit {

void ProcedureSpec::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InputError("gamma must lie in [0,1)");
  if (cap && !(*cap > 0.0 && *cap <= 1.0)) throw InputError("cap must lie in (0,1]");
}

StepType ProcedureSpec::step() const noexcept {
  switch (kind) {
    case ProcedureKind::Hochberg:
    case ProcedureKind::BH:
    case ProcedureKind::BY:
      return StepType::Up;
    default:
      return StepType::Down;
  }
}

std::string ProcedureSpec::label() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case ProcedureKind::Bonferroni: os << "bonferroni"; break;
    case ProcedureKind::Holm: os << "holm"; break;
    case ProcedureKind::Hochberg: os << "hochberg"; break;
    case ProcedureKind::BH: os << "bh"; break;
    case ProcedureKind::BY: os << "by"; break;
    case ProcedureKind::GenBonferroniK: os << "kfwer-ss:" << k; break;
    case ProcedureKind::LRStepdownK: os << "kfwer-sd:" << k; break;
    case ProcedureKind::LRStepdownFDP: os << "fdp-sd:" << gamma; break;
  }
  if (cap) os << "@cap=" << *cap;
  return os.str();
}

ThresholdSequence::ThresholdSequence(std::vector<double> numer, std::vector<double> denom)
    : numer_(std::move(numer)), denom_(std::move(denom)) {
  if (numer_.size() != denom_.size()) throw InputError("threshold numerators/denominators differ");
  for (std::size_t i = 0; i < numer_.size(); ++i) {
    if (!(numer_[i] > 0.0 && denom_[i] > 0.0)) throw InputError("threshold coefficients must be positive");
  }
}

double ThresholdSequence::critical(std::size_t i, double alpha) const {
  return std::min(1.0, numer_[i] * alpha / denom_[i]);
}

double ThresholdSequence::scaled(std::size_t i, double p) const {
  return std::min(1.0, p * denom_[i] / numer_[i]);
}

std::vector<double> ThresholdSequence::critical_values(double alpha) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = critical(i, alpha);
  return out;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    std::ostringstream os;
    os << "alpha must lie in (0,1], got " << alpha;
    throw InputError(os.str());
  }
}

ThresholdSequence thresholds(const ProcedureSpec& spec, std::size_t m) {
  spec.validate();
  if (m == 0) throw InputError("thresholds: m must be at least 1");
  const double md = static_cast<double>(m);
  const double k1 = static_cast<double>(spec.k) + 1.0;
  std::vector<double> numer(m), denom(m);

  double harmonic = 0.0;
  if (spec.kind == ProcedureKind::BY) {
    for (std::size_t j = m; j >= 1; --j) harmonic += 1.0 / static_cast<double>(j);
  }

  for (std::size_t idx = 0; idx < m; ++idx) {
    const double i = static_cast<double>(idx + 1);
    switch (spec.kind) {
      case ProcedureKind::Bonferroni:
        numer[idx] = 1.0;
        denom[idx] = md;
        break;
      case ProcedureKind::Holm:
      case ProcedureKind::Hochberg:
        numer[idx] = 1.0;
        denom[idx] = md - i + 1.0;
        break;
      case ProcedureKind::BH:
        numer[idx] = i;
        denom[idx] = md;
        break;
      case ProcedureKind::BY:
        numer[idx] = i;
        denom[idx] = md * harmonic;
        break;
      case ProcedureKind::GenBonferroniK:
        numer[idx] = k1;
        denom[idx] = md;
        break;
      case ProcedureKind::LRStepdownK:
        numer[idx] = k1;
        denom[idx] = i <= k1 ? md : md + k1 - i;
        break;
      case ProcedureKind::LRStepdownFDP: {
        const double f = std::floor(spec.gamma * i);
        numer[idx] = f + 1.0;
        denom[idx] = md + f + 1.0 - i;
        break;
      }
    }
  }
  return {std::move(numer), std::move(denom)};
}

Ranking Ranking::of(std::span<const double> p) {
  Ranking r;
  r.order.resize(p.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  r.sorted.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r.sorted[i] = p[r.order[i]];
  return r;
}

Ranking Ranking::of(const PVector& pv) {
  const auto& p = pv.p;
  const auto& ids = pv.ids;
  Ranking r;
  r.order.resize(p.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    if (p[a] != p[b]) return p[a] < p[b];
    return ids[a] < ids[b];
  });
  r.sorted.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r.sorted[i] = p[r.order[i]];
  return r;
}

namespace {

void check_sizes(const Ranking& ranked, const ThresholdSequence& t) {
  if (ranked.sorted.size() != t.size()) {
    throw InputError("threshold sequence built for m=" + std::to_string(t.size()) +
                     " applied to " + std::to_string(ranked.sorted.size()) + " p-values");
  }
}

}  // namespace

std::size_t step_down_count(const Ranking& ranked, const ThresholdSequence& t, double alpha) {
  check_alpha(alpha);
  check_sizes(ranked, t);
  std::size_t j = 0;
  while (j < ranked.sorted.size() && t.scaled(j, ranked.sorted[j]) <= alpha) ++j;
  return j;
}

std::size_t step_up_count(const Ranking& ranked, const ThresholdSequence& t, double alpha) {
  check_alpha(alpha);
  check_sizes(ranked, t);
  for (std::size_t j = ranked.sorted.size(); j > 0; --j) {
    if (t.scaled(j - 1, ranked.sorted[j - 1]) <= alpha) return j;
  }
  return 0;
}

DecisionVector reject_prefix(const Ranking& ranked, std::size_t count) {
  auto out = DecisionVector::accept_all(ranked.order.size());
  for (std::size_t i = 0; i < count; ++i) out.decisions[ranked.order[i]] = Decision::Reject;
  return out;
}

DecisionVector step_down(std::span<const double> p, const ThresholdSequence& t, double alpha) {
  const auto ranked = Ranking::of(p);
  return reject_prefix(ranked, step_down_count(ranked, t, alpha));
}

DecisionVector step_up(std::span<const double> p, const ThresholdSequence& t, double alpha) {
  const auto ranked = Ranking::of(p);
  return reject_prefix(ranked, step_up_count(ranked, t, alpha));
}

DecisionVector step_down(const PVector& p, const ThresholdSequence& t, double alpha) {
  const auto ranked = Ranking::of(p);
  return reject_prefix(ranked, step_down_count(ranked, t, alpha));
}

DecisionVector step_up(const PVector& p, const ThresholdSequence& t, double alpha) {
  const auto ranked = Ranking::of(p);
  return reject_prefix(ranked, step_up_count(ranked, t, alpha));
}

std::vector<double> adjusted_p(const ProcedureSpec& spec, const Ranking& ranked) {
  const std::size_t m = ranked.sorted.size();
  std::vector<double> out(m);
  if (m == 0) return out;
  const auto t = thresholds(spec, m);
  if (spec.step() == StepType::Down) {
    double running = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      running = std::max(running, t.scaled(i, ranked.sorted[i]));
      out[ranked.order[i]] = running;
    }
  } else {
    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
      running = std::min(running, t.scaled(i, ranked.sorted[i]));
      out[ranked.order[i]] = running;
    }
  }
  return out;
}

std::vector<double> adjusted_p(const ProcedureSpec& spec, std::span<const double> p) {
  return adjusted_p(spec, Ranking::of(p));
}

void finalize_decisions(DecisionVector& decisions, std::span<const double> p,
                        std::optional<double> cap, bool directional, std::span<const double> z) {
  const std::size_t m = decisions.size();
  if (cap) {
    for (std::size_t i = 0; i < m; ++i) {
      if (decisions.rejected(i) && p[i] > *cap) decisions.decisions[i] = Decision::Accept;
    }
  }
  if (directional) {
    if (z.size() != m) {
      throw InputError("direction mode needs one signed statistic per hypothesis");
    }
    std::vector<Direction> dirs(m, Direction::None);
    for (std::size_t i = 0; i < m; ++i) {
      if (decisions.rejected(i)) dirs[i] = z[i] > 0.0 ? Direction::Upper : Direction::Lower;
    }
    decisions.directions = std::move(dirs);
  }
}

DecisionVector apply(const ProcedureSpec& spec, const Ranking& ranked, double alpha,
                     std::span<const double> p, std::span<const double> z) {
  if (spec.directional && z.size() != p.size()) {
    throw InputError("direction mode needs one signed statistic per hypothesis");
  }
  const auto t = thresholds(spec, ranked.sorted.size());
  const std::size_t count = spec.step() == StepType::Down ? step_down_count(ranked, t, alpha)
                                                          : step_up_count(ranked, t, alpha);
  auto out = reject_prefix(ranked, count);
  finalize_decisions(out, p, spec.cap, spec.directional, z);
  return out;
}

DecisionVector apply(const ProcedureSpec& spec, std::span<const double> p, double alpha,
                     std::span<const double> z) {
  return apply(spec, Ranking::of(p), alpha, p, z);
}

DecisionVector apply(const ProcedureSpec& spec, const PVector& p, double alpha) {
  std::span<const double> z;
  if (p.z) z = *p.z;
  return apply(spec, Ranking::of(p), alpha, p.p, z);
}

}  // namespace mtkit
