#include "mtkit/methods.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "mtkit/error.hpp"

namespace mtkit {

namespace {

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw InputError("invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::uint32_t parse_k(std::string_view s) {
  std::uint32_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw InputError("invalid k '" + std::string(s) + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"bonferroni", "holm",     "hochberg", "bh",
                                              "by",         "kfwer-ss", "kfwer-sd", "fdp-sd",
                                              "adaptive-bh", "bky"};
  return names;
}

std::string Method::name() const {
  switch (family) {
    case MethodFamily::AdaptiveBH: return "adaptive-bh";
    case MethodFamily::TwoStage: return "bky";
    case MethodFamily::Linear: break;
  }
  switch (spec.kind) {
    case ProcedureKind::Bonferroni: return "bonferroni";
    case ProcedureKind::Holm: return "holm";
    case ProcedureKind::Hochberg: return "hochberg";
    case ProcedureKind::BH: return "bh";
    case ProcedureKind::BY: return "by";
    case ProcedureKind::GenBonferroniK: return "kfwer-ss";
    case ProcedureKind::LRStepdownK: return "kfwer-sd";
    case ProcedureKind::LRStepdownFDP: return "fdp-sd";
  }
  return "?";
}

std::string Method::label() const {
  std::ostringstream os;
  os.precision(17);
  if (family == MethodFamily::Linear) {
    os << spec.label();
    return os.str();
  }
  os << name();
  if (family == MethodFamily::AdaptiveBH) os << ':' << lambda;
  if (spec.cap) os << "@cap=" << *spec.cap;
  return os.str();
}

Method parse_method(std::string_view text) {
  Method m;
  if (const auto at = text.find('@'); at != std::string_view::npos) {
    const auto suffix = text.substr(at + 1);
    if (!suffix.starts_with("cap=")) throw InputError("unknown method suffix '" + std::string(suffix) + "'");
    m.spec.cap = parse_double(suffix.substr(4), "cap");
    text = text.substr(0, at);
  }
  std::string_view name = text;
  std::string_view arg;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    name = text.substr(0, colon);
    arg = text.substr(colon + 1);
  }
  auto no_arg = [&] {
    if (!arg.empty()) throw InputError("method '" + std::string(name) + "' takes no parameter");
  };
  auto need_arg = [&] {
    if (arg.empty()) throw InputError("method '" + std::string(name) + "' needs a parameter");
  };

  if (name == "bonferroni") { no_arg(); m.spec.kind = ProcedureKind::Bonferroni; }
  else if (name == "holm") { no_arg(); m.spec.kind = ProcedureKind::Holm; }
  else if (name == "hochberg") { no_arg(); m.spec.kind = ProcedureKind::Hochberg; }
  else if (name == "bh") { no_arg(); m.spec.kind = ProcedureKind::BH; }
  else if (name == "by") { no_arg(); m.spec.kind = ProcedureKind::BY; }
  else if (name == "kfwer-ss") { need_arg(); m.spec.kind = ProcedureKind::GenBonferroniK; m.spec.k = parse_k(arg); }
  else if (name == "kfwer-sd") { need_arg(); m.spec.kind = ProcedureKind::LRStepdownK; m.spec.k = parse_k(arg); }
  else if (name == "fdp-sd") { need_arg(); m.spec.kind = ProcedureKind::LRStepdownFDP; m.spec.gamma = parse_double(arg, "gamma"); }
  else if (name == "adaptive-bh") {
    m.family = MethodFamily::AdaptiveBH;
    if (!arg.empty()) m.lambda = parse_double(arg, "lambda");
    if (!(m.lambda > 0.0 && m.lambda < 1.0)) throw InputError("lambda must lie in (0,1)");
  } else if (name == "bky") { no_arg(); m.family = MethodFamily::TwoStage; }
  else throw InputError("unknown method '" + std::string(name) + "'");
  m.spec.validate();
  return m;
}

MethodResult run_method(const Method& method, std::span<const double> p, double alpha,
                        std::span<const double> z, const Ranking* ranked, bool want_adjusted) {
  if (method.spec.directional && z.size() != p.size()) {
    throw InputError("direction mode needs one signed statistic per hypothesis");
  }
  MethodResult out;
  switch (method.family) {
    case MethodFamily::Linear: {
      Ranking local;
      if (ranked == nullptr) {
        local = Ranking::of(p);
        ranked = &local;
      }
      out.decisions = apply(method.spec, *ranked, alpha, p, z);
      if (want_adjusted) out.adjusted = adjusted_p(method.spec, *ranked);
      return out;
    }
    case MethodFamily::AdaptiveBH: {
      out.pi0 = pi0_storey(p, method.lambda);
      out.decisions = adaptive_bh(p, alpha, method.lambda);
      if (want_adjusted) {
        ProcedureSpec bh;
        bh.kind = ProcedureKind::BH;
        auto q = ranked ? adjusted_p(bh, *ranked) : adjusted_p(bh, p);
        for (auto& x : q) x = std::min(1.0, out.pi0->value * x);
        out.adjusted = std::move(q);
      }
      break;
    }
    case MethodFamily::TwoStage: {
      auto res = bky_two_stage(p, alpha);
      out.decisions = std::move(res.decisions);
      res.decisions = {};
      out.two_stage = std::move(res);
      break;
    }
  }
  finalize_decisions(out.decisions, p, method.spec.cap, method.spec.directional, z);
  return out;
}

}  // namespace mtkit
