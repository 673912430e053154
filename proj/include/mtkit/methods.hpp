#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtkit/adaptive.hpp"
#include "mtkit/procedures.hpp"

namespace mtkit {

enum class MethodFamily { Linear, AdaptiveBH, TwoStage };

/// Any procedure the toolkit can run: a linear step-down/step-up kind, the
/// pi0-adaptive BH, or the two-stage BKY procedure. `spec.cap` and
/// `spec.directional` apply to every family; `spec.kind` only to Linear.
struct Method {
  MethodFamily family = MethodFamily::Linear;
  ProcedureSpec spec;
  double lambda = kDefaultPi0Lambda;

  [[nodiscard]] std::string name() const;   // CLI method name, e.g. "kfwer-sd"
  [[nodiscard]] std::string label() const;  // name plus parameters, e.g. "kfwer-sd:2"
};

/// Parses "bh", "holm", "kfwer-ss:2", "fdp-sd:0.1", "adaptive-bh:0.4", "bky"...
/// An optional "@cap=X" suffix sets the p-cap. Throws InputError.
Method parse_method(std::string_view text);

/// Names accepted by parse_method, in documentation order.
const std::vector<std::string>& method_names();

struct MethodResult {
  DecisionVector decisions;
  std::optional<std::vector<double>> adjusted;  // absent for the two-stage procedure
  std::optional<Pi0Estimate> pi0;               // adaptive BH
  std::optional<TwoStageResult> two_stage;      // two-stage procedure (decisions moved out)
};

/// `ranked`, when given, must be Ranking::of(p).
MethodResult run_method(const Method& method, std::span<const double> p, double alpha,
                        std::span<const double> z = {}, const Ranking* ranked = nullptr,
                        bool want_adjusted = true);

}  // namespace mtkit
