#include "mtkit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mtkit/adaptive.hpp"
#include "mtkit/directional.hpp"
#include "mtkit/error.hpp"
#include "mtkit/io.hpp"
#include "mtkit/methods.hpp"
#include "mtkit/simulation.hpp"
#include "mtkit/symmetric_tests.hpp"
#include "mtkit/version.hpp"

namespace mtkit::cli {

namespace {

/// Raised for flag combinations that make no sense together (exit 3).
struct FlagConflict : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdjustArgs {
  std::string method;
  double alpha = 0.05;
  std::optional<std::uint32_t> k;
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::optional<double> cap;
  bool directional = false;
  std::optional<double> tau;
  std::string input;
  std::string output;
};

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
};

struct ExampleArgs {
  std::string mode;
  double alpha = 0.05;
  double gamma_max = 2.0;
  long long steps = 21;
  std::string output;
};

struct Pi0Args {
  double lambda = kDefaultPi0Lambda;
  std::string input;
};

Method build_method(const AdjustArgs& a) {
  const bool kfwer = a.method == "kfwer-ss" || a.method == "kfwer-sd";
  if (a.k && !kfwer) throw FlagConflict("--k applies only to kfwer-ss and kfwer-sd");
  if (kfwer && !a.k) throw FlagConflict("--method " + a.method + " requires --k");
  if (a.gamma && a.method != "fdp-sd") throw FlagConflict("--gamma applies only to fdp-sd");
  if (a.method == "fdp-sd" && !a.gamma) throw FlagConflict("--method fdp-sd requires --gamma");
  if (a.lambda && a.method != "adaptive-bh") throw FlagConflict("--lambda applies only to adaptive-bh");
  if (a.tau && !a.directional) throw FlagConflict("--tau requires --directional");

  std::ostringstream text;
  text.precision(17);
  text << a.method;
  if (a.k) text << ':' << *a.k;
  if (a.gamma) text << ':' << *a.gamma;
  if (a.lambda) text << ':' << *a.lambda;
  auto method = parse_method(text.str());
  if (a.cap) {
    method.spec.cap = *a.cap;
    method.spec.validate();
  }
  method.spec.directional = a.directional;
  return method;
}

int cmd_adjust(const AdjustArgs& a, std::ostream& out) {
  const auto method = build_method(a);
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw InputError("--alpha must lie in (0,1)");
  const double tau = a.tau.value_or(0.5);
  if (!(tau > 0.0 && tau < 1.0)) throw InputError("--tau must lie in (0,1)");

  const auto data = io::read_pvector(std::filesystem::path(a.input));
  std::vector<double> p = data.p;
  std::span<const double> z;
  if (a.directional) {
    if (!data.z) throw InputError("--directional needs a z column with signed statistics");
    z = *data.z;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = directional::pair_p_value_from_two_sided(data.p[i], z[i], tau);
    }
  }
  const auto res = run_method(method, p, a.alpha, z);

  std::ostringstream csv;
  csv << "id,p,adjusted_p,reject,direction\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool rej = res.decisions.rejected(i);
    std::string dir;
    if (rej && res.decisions.directions) {
      dir = (*res.decisions.directions)[i] == Direction::Upper ? "U" : "L";
    }
    std::string id = data.ids[i];
    if (id.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (const char c : id) {
        if (c == '"') quoted.push_back('"');
        quoted.push_back(c);
      }
      id = quoted + "\"";
    }
    csv << id << ',' << io::format_double(data.p[i]) << ','
        << (res.adjusted ? io::format_double((*res.adjusted)[i]) : "") << ',' << (rej ? 1 : 0)
        << ',' << dir << '\n';
  }
  csv << "# method=" << method.name() << '\n' << "# alpha=" << io::format_double(a.alpha) << '\n';
  if (a.k) csv << "# k=" << *a.k << '\n';
  if (a.gamma) csv << "# gamma=" << io::format_double(*a.gamma) << '\n';
  if (method.family == MethodFamily::AdaptiveBH) {
    csv << "# lambda=" << io::format_double(method.lambda) << '\n'
        << "# pi0=" << io::format_double(res.pi0->value) << '\n';
  }
  if (res.two_stage) {
    csv << "# stage1_rejections=" << res.two_stage->stage1_rejections << '\n';
    csv << "# m0_hat=" << (res.two_stage->m0_hat ? std::to_string(*res.two_stage->m0_hat) : "NA")
        << '\n';
  }
  if (a.cap) csv << "# cap=" << io::format_double(*a.cap) << '\n';
  if (a.directional) csv << "# directional=1\n# tau=" << io::format_double(tau) << '\n';
  csv << "# version=" << kVersion << '\n';

  io::write_file_atomic(a.output, csv.str());
  out << "rejected " << res.decisions.rejections() << " of " << data.size() << '\n';
  return kOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  auto config = io::read_sim_config(std::filesystem::path(a.config));
  if (a.seed) config.seed = *a.seed;
  config.validate();

  sim::RunOptions options;
  options.threads = threads_from_env();
  const auto manifest = sim::run(config, options);

  const std::filesystem::path dir(a.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir.string() + "'");
  const auto metrics = io::metrics_csv(manifest);
  const auto json = io::manifest_json(manifest);
  io::write_file_atomic(dir / "metrics.csv", metrics);
  io::write_file_atomic(dir / "manifest.json", json);
  out << "wrote " << (dir / "metrics.csv").string() << " and " << (dir / "manifest.json").string()
      << '\n';
  return kOk;
}

int cmd_example(const ExampleArgs& a, std::ostream& out) {
  if (a.steps <= 0) throw InputError("--steps must be at least 1");
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw InputError("--alpha must lie in (0,1)");
  const auto grid = symtest::uniform_grid(a.gamma_max, static_cast<std::size_t>(a.steps));
  const bool dir = a.mode == "dir";
  const auto rows =
      symtest::curves(dir ? symtest::CurveMode::Directional : symtest::CurveMode::Nondirectional,
                      a.alpha, grid);
  std::ostringstream csv;
  csv << (dir ? "gamma,shape,correct,typeIII\n" : "gamma,shape,power\n");
  for (const auto& r : rows) {
    csv << io::format_double(r.gamma) << ',' << symtest::shape_name(r.shape) << ','
        << io::format_double(r.power);
    if (dir) csv << ',' << io::format_double(r.type3);
    csv << '\n';
  }
  io::write_file_atomic(a.output, csv.str());
  out << "wrote " << rows.size() << " rows to " << a.output << '\n';
  return kOk;
}

int cmd_pi0(const Pi0Args& a, std::ostream& out) {
  if (!(a.lambda > 0.0 && a.lambda < 1.0)) throw InputError("--lambda must lie in (0,1)");
  const auto data = io::read_pvector(std::filesystem::path(a.input));
  const auto est = pi0_storey(data.p, a.lambda);
  out << "m=" << est.m << " above_lambda=" << est.above
      << " lambda=" << io::format_double(est.lambda) << " raw=" << io::format_double(est.raw)
      << " pi0=" << io::format_double(est.value) << '\n';
  return kOk;
}

}  // namespace

unsigned threads_from_env() {
  const char* env = std::getenv("MTKIT_THREADS");
  if (env == nullptr) return 1;
  unsigned v = 0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) return 1;
  return std::min(v, 256u);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mtkit: multiple-testing procedures, error-rate simulation and power curves",
               "mtkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  AdjustArgs adjust;
  auto* sub_adjust = app.add_subcommand("adjust", "Apply a multiple-testing procedure to a CSV of p-values");
  sub_adjust->add_option("--method", adjust.method, "Procedure")
      ->required()
      ->check(CLI::IsMember(method_names()));
  sub_adjust->add_option("--alpha", adjust.alpha, "Level")->required();
  sub_adjust->add_option("--k", adjust.k, "Tolerated false rejections for kfwer methods");
  sub_adjust->add_option("--gamma", adjust.gamma, "FDP bound for fdp-sd");
  sub_adjust->add_option("--lambda", adjust.lambda, "pi0 tuning for adaptive-bh");
  sub_adjust->add_option("--cap", adjust.cap, "Demote rejections with raw p above this value");
  sub_adjust->add_flag("--directional", adjust.directional, "Label rejections by the sign of z");
  sub_adjust->add_option("--tau", adjust.tau, "Upper-tail share of alpha in directional mode");
  sub_adjust->add_option("--input", adjust.input, "Input CSV")->required();
  sub_adjust->add_option("--output", adjust.output, "Output CSV")->required();

  SimulateArgs simulate;
  auto* sub_sim = app.add_subcommand("simulate", "Run a Monte Carlo campaign from a config file");
  sub_sim->add_option("--config", simulate.config, "key = value config")->required();
  sub_sim->add_option("--seed", simulate.seed, "Overrides the config seed");
  sub_sim->add_option("--output", simulate.output, "Output directory")->required();

  ExampleArgs example;
  auto* sub_example = app.add_subcommand("example", "Power curves of the central and extreme-tails tests");
  sub_example->add_option("--mode", example.mode, "nondir or dir")
      ->required()
      ->check(CLI::IsMember({"nondir", "dir"}));
  sub_example->add_option("--alpha", example.alpha, "Level");
  sub_example->add_option("--gamma-max", example.gamma_max, "Largest gamma on the grid");
  sub_example->add_option("--steps", example.steps, "Number of grid points");
  sub_example->add_option("--output", example.output, "Output CSV")->required();

  Pi0Args pi0;
  auto* sub_pi0 = app.add_subcommand("pi0", "Estimate the proportion of true nulls");
  sub_pi0->add_option("--lambda", pi0.lambda, "Tuning threshold in (0,1)");
  sub_pi0->add_option("--input", pi0.input, "Input CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    if (*sub_adjust) return cmd_adjust(adjust, out);
    if (*sub_sim) return cmd_simulate(simulate, out);
    if (*sub_example) return cmd_example(example, out);
    if (*sub_pi0) return cmd_pi0(pi0, out);
  } catch (const FlagConflict& e) {
    err << "error: " << e.what() << '\n';
    return kFlagConflict;
  } catch (const IncompatibleError& e) {
    err << "error: " << e.what() << '\n';
    return kIncompatible;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInvalidInput;
}

}  // namespace mtkit::cli
