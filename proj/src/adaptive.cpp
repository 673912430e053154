#include "mtkit/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include "mtkit/error.hpp"
#include "mtkit/procedures.hpp"

namespace mtkit {

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("lambda must lie in (0,1)");
}

void check_p(std::span<const double> p) {
  if (p.empty()) throw InputError("no p-values");
  for (const double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("p-value outside [0,1]");
  }
}

std::size_t bh_count(const Ranking& ranked, double level) {
  ProcedureSpec bh;
  bh.kind = ProcedureKind::BH;
  return step_up_count(ranked, thresholds(bh, ranked.sorted.size()), std::min(1.0, level));
}

}  // namespace

Pi0Estimate pi0_storey(std::span<const double> p, double lambda) {
  check_lambda(lambda);
  check_p(p);
  Pi0Estimate est;
  est.lambda = lambda;
  est.m = p.size();
  est.above = static_cast<std::size_t>(
      std::count_if(p.begin(), p.end(), [&](double x) { return x > lambda; }));
  est.raw = (1.0 + static_cast<double>(est.above)) / (static_cast<double>(est.m) * (1.0 - lambda));
  est.value = std::min(1.0, est.raw);
  return est;
}

EmpiricalProcesses processes(const PVector& p, std::span<const double> grid) {
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!(grid[g] >= 0.0 && grid[g] <= 1.0)) throw InputError("grid point outside [0,1]");
    if (g > 0 && grid[g] < grid[g - 1]) throw InputError("grid must be sorted ascending");
  }
  EmpiricalProcesses out;
  out.grid.assign(grid.begin(), grid.end());
  out.r.assign(grid.size(), 0);
  if (p.null_true) {
    out.v.emplace(grid.size(), 0);
    out.s.emplace(grid.size(), 0);
  }

  // Sweep sorted p-values against the sorted grid.
  const auto ranked = Ranking::of(p.p);
  std::size_t j = 0;
  std::uint64_t v = 0, s = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    while (j < ranked.sorted.size() && ranked.sorted[j] <= grid[g]) {
      if (p.null_true) {
        (*p.null_true)[ranked.order[j]] ? ++v : ++s;
      }
      ++j;
    }
    out.r[g] = j;
    if (p.null_true) {
      (*out.v)[g] = v;
      (*out.s)[g] = s;
    }
  }
  return out;
}

double fdr_hat(double t, double pi0, std::size_t m, std::uint64_t rejections) {
  return pi0 * static_cast<double>(m) * t /
         static_cast<double>(std::max<std::uint64_t>(rejections, 1));
}

double fdr_hat(double t, std::span<const double> p, double lambda) {
  if (!(t > 0.0 && t < 1.0)) throw InputError("t must lie in (0,1)");
  const auto pi0 = pi0_storey(p, lambda);
  const auto r = static_cast<std::uint64_t>(
      std::count_if(p.begin(), p.end(), [&](double x) { return x <= t; }));
  return fdr_hat(t, pi0.value, p.size(), r);
}

DecisionVector adaptive_bh(std::span<const double> p, double alpha, double lambda) {
  check_alpha(alpha);
  const auto pi0 = pi0_storey(p, lambda);
  const auto ranked = Ranking::of(p);
  return reject_prefix(ranked, bh_count(ranked, alpha / pi0.value));
}

TwoStageResult bky_two_stage(std::span<const double> p, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
  check_p(p);
  const std::size_t m = p.size();
  const auto ranked = Ranking::of(p);

  TwoStageResult out;
  out.stage1_level = alpha / (1.0 + alpha);
  out.stage1_rejections = bh_count(ranked, out.stage1_level);
  const std::size_t r1 = out.stage1_rejections;
  if (r1 == 0) {
    out.decisions = DecisionVector::accept_all(m);
    return out;
  }
  if (r1 == m) {
    out.decisions = reject_prefix(ranked, m);
    return out;
  }
  out.m0_hat = m - r1;
  out.stage2_level = out.stage1_level * static_cast<double>(m) / static_cast<double>(*out.m0_hat);
  out.decisions = reject_prefix(ranked, bh_count(ranked, *out.stage2_level));
  return out;
}

}  // namespace mtkit
