#include "mtkit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "mtkit/error.hpp"
#include "mtkit/normal.hpp"
#include "mtkit/rng.hpp"
#include "mtkit/version.hpp"

namespace mtkit::sim {

std::string effect_name(Effect e) {
  return e == Effect::NormalShift ? "normal_shift" : "beta";
}

std::string sidedness_name(Sidedness s) {
  switch (s) {
    case Sidedness::OneSided: return "one_sided";
    case Sidedness::TwoSided: return "two_sided";
    case Sidedness::Directional: return "directional";
  }
  return "?";
}

void SimConfig::validate() const {
  if (m == 0) throw InputError("m must be at least 1");
  if (m0 > m) throw InputError("m0 must lie in [0, m]");
  if (reps == 0) throw InputError("reps must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
  if (!(rho >= 0.0 && rho < 1.0)) throw InputError("rho must lie in [0,1)");
  if (!(tau > 0.0 && tau < 1.0)) throw InputError("tau must lie in (0,1)");
  if (!std::isfinite(loss_lambda) || loss_lambda < 0.0) throw InputError("loss_lambda must be >= 0");
  if (procedures.empty()) throw InputError("no procedures configured");
  for (const double g : gamma_list) {
    if (!(g >= 0.0 && g < 1.0)) throw InputError("gamma_list entries must lie in [0,1)");
  }
  if (effect == Effect::NormalShift) {
    if (delta.size() != 1 && delta.size() != m1()) {
      throw InputError("delta needs one value or one per false null (" + std::to_string(m1()) + ")");
    }
    for (const double d : delta) {
      if (!(d > 0.0) || !std::isfinite(d)) throw InputError("delta values must be positive");
    }
  } else {
    if (!(beta_a > 0.0 && beta_a < 1.0)) throw InputError("beta_a must lie in (0,1)");
    if (rho > 0.0) throw InputError("the beta alternative is only defined for rho = 0");
    if (sidedness == Sidedness::Directional) {
      throw IncompatibleError("directional metrics need signed statistics; the beta alternative has none");
    }
  }
  if (!signs.empty()) {
    if (signs.size() != m1()) throw InputError("signs needs one entry per false null");
    for (const auto s : signs) {
      if (s != -1 && s != 1) throw InputError("false-null signs must be -1 or +1");
    }
  }
  for (const auto t : power_targets) {
    if (t < 1 || t > m) throw InputError("power target " + std::to_string(t) + " is out of range");
    if (t <= m0) {
      throw IncompatibleError("power target " + std::to_string(t) + " is a true null");
    }
  }
  for (const auto& proc : procedures) {
    if (proc.spec.directional && effect == Effect::BetaAlternative) {
      throw IncompatibleError("procedure " + proc.label() + " needs signed statistics");
    }
  }
}

Layout layout(const SimConfig& config) {
  Layout lay;
  const auto m = static_cast<std::size_t>(config.m);
  const auto m0 = static_cast<std::size_t>(config.m0);
  lay.null_true.assign(m, 0);
  lay.sign.assign(m, 0);
  lay.shift.assign(m, 0.0);
  for (std::size_t i = 0; i < m0; ++i) lay.null_true[i] = 1;
  for (std::size_t j = 0; j + m0 < m; ++j) {
    std::int8_t s = 1;
    if (!config.signs.empty()) {
      s = config.signs[j];
    } else if (config.sidedness != Sidedness::OneSided) {
      s = j % 2 == 0 ? 1 : -1;
    }
    const double d = config.effect == Effect::NormalShift
                         ? (config.delta.size() == 1 ? config.delta[0] : config.delta[j])
                         : 0.0;
    lay.sign[m0 + j] = s;
    lay.shift[m0 + j] = d * s;
  }
  return lay;
}

Draw draw(const SimConfig& config, const Layout& lay, std::uint64_t replicate) {
  const CounterRng rng(config.seed);
  const auto m = static_cast<std::size_t>(config.m);
  Draw out;
  out.p.resize(m);

  if (config.effect == Effect::BetaAlternative) {
    for (std::size_t i = 0; i < m; ++i) {
      const double u = rng.uniforms(replicate, i + 1)[0];
      out.p[i] = lay.null_true[i] ? u : std::pow(u, 1.0 / config.beta_a);
    }
    return out;
  }

  out.z.resize(m);
  const double common = config.rho > 0.0 ? std::sqrt(config.rho) * rng.normal(replicate, 0) : 0.0;
  const double own = std::sqrt(1.0 - config.rho);
  for (std::size_t i = 0; i < m; ++i) {
    const double z = common + own * rng.normal(replicate, i + 1) + lay.shift[i];
    out.z[i] = z;
    switch (config.sidedness) {
      case Sidedness::OneSided:
        out.p[i] = normal::sf(z);
        break;
      case Sidedness::TwoSided:
        out.p[i] = std::min(1.0, 2.0 * normal::sf(std::abs(z)));
        break;
      case Sidedness::Directional:
        out.p[i] = directional::pair_p_value(directional::SignedStatistic::from_normal(z), config.tau);
        break;
    }
  }
  return out;
}

PVector generate(const SimConfig& config, std::uint64_t replicate) {
  config.validate();
  const auto lay = layout(config);
  auto d = draw(config, lay, replicate);
  PVector out;
  out.ids.reserve(config.m);
  for (std::uint64_t i = 1; i <= config.m; ++i) out.ids.push_back("h" + std::to_string(i));
  out.p = std::move(d.p);
  out.null_true = lay.null_true;
  out.sign = lay.sign;
  if (!d.z.empty()) out.z = std::move(d.z);
  return out;
}

namespace {

struct ReplicateOutcome {
  ReplicateIndicators indicators;
  directional::DirectionalTally tally;
};

std::vector<Method> effective_methods(const SimConfig& config) {
  auto methods = config.procedures;
  if (config.sidedness == Sidedness::Directional) {
    for (auto& m : methods) m.spec.directional = true;
  }
  return methods;
}

void evaluate(const SimConfig& config, const Layout& lay, const std::vector<Method>& methods,
              std::uint64_t replicate, std::span<ReplicateOutcome> out) {
  const auto d = draw(config, lay, replicate);
  const auto ranked = Ranking::of(d.p);
  for (std::size_t j = 0; j < methods.size(); ++j) {
    const auto res = run_method(methods[j], d.p, config.alpha, d.z, &ranked, false);
    const auto table = tabulate(res.decisions, lay.null_true);
    auto ind = replicate_indicators(table, config.k_list, config.gamma_list);
    ind.target_rejected.reserve(config.power_targets.size());
    for (const auto t : config.power_targets) {
      ind.target_rejected.push_back(res.decisions.rejected(t - 1) ? 1 : 0);
    }
    out[j].indicators = std::move(ind);
    if (config.sidedness == Sidedness::Directional) {
      out[j].tally = directional::tally(res.decisions, lay.sign);
    }
  }
}

}  // namespace

RunManifest run(const SimConfig& config, const RunOptions& options) {
  config.validate();
  const auto lay = layout(config);
  const auto methods = effective_methods(config);
  const std::size_t nproc = methods.size();
  const bool directional_mode = config.sidedness == Sidedness::Directional;

  AggregateOptions agg_opts;
  agg_opts.m = config.m;
  agg_opts.m1 = config.m1();
  agg_opts.k_list = config.k_list;
  agg_opts.gamma_list = config.gamma_list;
  agg_opts.lambda = config.loss_lambda;
  for (const auto t : config.power_targets) agg_opts.power_targets.push_back("h" + std::to_string(t));

  std::vector<Aggregator> aggregators(nproc, Aggregator(agg_opts));
  std::vector<directional::DirectionalAccumulator> dir_acc(nproc);

  const unsigned threads = std::max(1u, options.threads);
  const std::uint64_t block = std::max<std::uint64_t>(1, options.block);
  std::vector<ReplicateOutcome> buffer;

  for (std::uint64_t start = 0; start < config.reps; start += block) {
    const std::uint64_t count = std::min(block, config.reps - start);
    buffer.assign(count * nproc, ReplicateOutcome{});
    auto work = [&](unsigned worker) {
      for (std::uint64_t r = worker; r < count; r += threads) {
        evaluate(config, lay, methods, start + r,
                 std::span<ReplicateOutcome>(buffer).subspan(r * nproc, nproc));
      }
    };
    if (threads == 1 || count == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(threads);
      for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    }
    for (std::uint64_t r = 0; r < count; ++r) {
      for (std::size_t j = 0; j < nproc; ++j) {
        auto& outcome = buffer[r * nproc + j];
        aggregators[j].add(start + r, std::move(outcome.indicators));
        if (directional_mode) dir_acc[j].add(outcome.tally);
      }
    }
  }

  RunManifest manifest;
  manifest.config = config;
  manifest.generator = std::string(Philox4x32::kName) + "; normals by AS241 inversion";
  manifest.version = kVersion;
  for (std::size_t j = 0; j < nproc; ++j) {
    ProcedureReport rep;
    rep.label = config.procedures[j].label();
    rep.metrics = aggregators[j].finish();
    if (directional_mode) rep.directional = dir_acc[j].finish();
    manifest.reports.push_back(std::move(rep));
  }
  return manifest;
}

RejectionTrend rejection_trend(const SimConfig& config, const Method& method, std::uint64_t target,
                               const std::vector<std::uint64_t>& family_sizes,
                               const RunOptions& options) {
  const std::uint64_t m1 = config.m1();
  if (target < 1 || target > m1) throw InputError("target must index one of the false nulls");
  RejectionTrend trend;
  for (const auto m : family_sizes) {
    if (m < m1) throw InputError("family size smaller than the number of false nulls");
    SimConfig c = config;
    c.m = m;
    c.m0 = m - m1;
    c.procedures = {method};
    c.power_targets = {c.m0 + target};
    const auto manifest = run(c, options);
    trend.points.push_back({m, manifest.reports.front().metrics.power_c.front().second});
  }
  for (std::size_t i = 1; i < trend.points.size(); ++i) {
    const auto& prev = trend.points[i - 1].rejection_rate;
    const auto& cur = trend.points[i].rejection_rate;
    const double se = std::hypot(prev.se.value_or(0.0), cur.se.value_or(0.0));
    if (*cur.value > *prev.value + 3.0 * se) trend.nonincreasing = false;
  }
  return trend;
}

}  // namespace mtkit::sim
