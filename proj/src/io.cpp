#include "mtkit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mtkit/error.hpp"

namespace mtkit::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Comma-separated fields; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw InputError("unterminated quote");
  fields.emplace_back(trim(cur));
  return fields;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

double to_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end) {
    throw InputError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

template <typename Int>
Int to_int(std::string_view s, std::string_view what) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  Int v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end) {
    throw InputError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

template <typename T, typename Parse>
std::vector<T> to_list(std::string_view s, Parse parse) {
  std::vector<T> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    out.push_back(parse(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_optional(const std::optional<double>& x) {
  return x ? format_double(*x) : "NA";
}

PVector read_pvector(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = split_csv(t);
    break;
  }
  if (header.empty()) throw InputError("input is empty: expected a header with columns id,p");

  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto id_col = column("id");
  const auto p_col = column("p");
  if (!id_col || !p_col) throw InputError("header must name columns 'id' and 'p'");
  const auto truth_col = column("truth");
  const auto sign_col = column("sign");
  const auto z_col = column("z");

  PVector out;
  if (truth_col) out.null_true.emplace();
  if (sign_col) out.sign.emplace();
  if (z_col) out.z.emplace();

  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv(t);
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (fields.size() != header.size()) {
      throw InputError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    try {
      out.ids.push_back(fields[*id_col]);
      out.p.push_back(to_double(fields[*p_col], "p"));
      if (truth_col) {
        const int v = to_int<int>(fields[*truth_col], "truth");
        if (v != 0 && v != 1) throw InputError("truth must be 0 or 1");
        out.null_true->push_back(static_cast<std::uint8_t>(v));
      }
      if (sign_col) {
        const int v = to_int<int>(fields[*sign_col], "sign");
        if (v < -1 || v > 1) throw InputError("sign must be -1, 0 or 1");
        out.sign->push_back(static_cast<std::int8_t>(v));
      }
      if (z_col) out.z->push_back(to_double(fields[*z_col], "z"));
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.p.empty()) throw InputError("input has a header but no rows");
  out.validate();
  return out;
}

PVector read_pvector(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_pvector(in);
}

sim::SimConfig read_sim_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key(trim(t.substr(0, eq)));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, std::string(trim(t.substr(eq + 1)))).second) {
      throw InputError("config key '" + key + "' given twice");
    }
  }

  sim::SimConfig c;
  std::optional<double> pi0_lambda;
  std::vector<std::string> procedure_texts;
  for (const auto& [key, value] : kv) {
    const std::string_view v = value;
    try {
      if (key == "m") c.m = to_int<std::uint64_t>(v, key);
      else if (key == "m0") c.m0 = to_int<std::uint64_t>(v, key);
      else if (key == "effect") {
        if (v == "normal_shift") c.effect = sim::Effect::NormalShift;
        else if (v == "beta") c.effect = sim::Effect::BetaAlternative;
        else throw InputError("effect must be normal_shift or beta");
      } else if (key == "delta") c.delta = to_list<double>(v, [](auto s) { return to_double(s, "delta"); });
      else if (key == "beta_a") c.beta_a = to_double(v, key);
      else if (key == "sidedness") {
        if (v == "one_sided") c.sidedness = sim::Sidedness::OneSided;
        else if (v == "two_sided") c.sidedness = sim::Sidedness::TwoSided;
        else if (v == "directional") c.sidedness = sim::Sidedness::Directional;
        else throw InputError("sidedness must be one_sided, two_sided or directional");
      } else if (key == "tau") c.tau = to_double(v, key);
      else if (key == "rho") c.rho = to_double(v, key);
      else if (key == "reps") c.reps = to_int<std::uint64_t>(v, key);
      else if (key == "seed") c.seed = to_int<std::uint64_t>(v, key);
      else if (key == "alpha") c.alpha = to_double(v, key);
      else if (key == "procedures") {
        procedure_texts = to_list<std::string>(v, [](auto s) { return std::string(trim(s)); });
      } else if (key == "k_list") c.k_list = to_list<std::uint64_t>(v, [](auto s) { return to_int<std::uint64_t>(s, "k"); });
      else if (key == "gamma_list") c.gamma_list = to_list<double>(v, [](auto s) { return to_double(s, "gamma"); });
      else if (key == "loss_lambda") c.loss_lambda = to_double(v, key);
      else if (key == "pi0_lambda") pi0_lambda = to_double(v, key);
      else if (key == "signs") {
        c.signs = to_list<std::int8_t>(v, [](auto s) { return static_cast<std::int8_t>(to_int<int>(s, "sign")); });
      } else if (key == "power_targets") {
        c.power_targets = to_list<std::uint64_t>(v, [](auto s) { return to_int<std::uint64_t>(s, "power target"); });
      } else {
        throw InputError("unknown key");
      }
    } catch (const InputError& e) {
      throw InputError("config key '" + key + "': " + e.what());
    }
  }
  if (procedure_texts.empty()) throw InputError("config must list procedures");
  for (const auto& text : procedure_texts) {
    auto method = parse_method(text);
    if (method.family == MethodFamily::AdaptiveBH && pi0_lambda &&
        text.find(':') == std::string::npos) {
      method.lambda = *pi0_lambda;
    }
    c.procedures.push_back(method);
  }
  return c;
}

sim::SimConfig read_sim_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_sim_config(in);
}

namespace {

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

nlohmann::ordered_json estimate_json(const CriterionRow& row) {
  nlohmann::ordered_json j;
  j["criterion"] = row.criterion;
  j["parameter"] = row.parameter;
  j["estimate"] = row.estimate.value ? nlohmann::ordered_json(*row.estimate.value) : nullptr;
  j["se"] = row.estimate.se ? nlohmann::ordered_json(*row.estimate.se) : nullptr;
  j["replicates"] = row.estimate.replicates;
  return j;
}

}  // namespace

std::string write_sim_config(const sim::SimConfig& c) {
  std::ostringstream os;
  os << "m = " << c.m << '\n'
     << "m0 = " << c.m0 << '\n'
     << "effect = " << sim::effect_name(c.effect) << '\n';
  if (c.effect == sim::Effect::NormalShift) {
    os << "delta = " << join(c.delta, format_double) << '\n';
  } else {
    os << "beta_a = " << format_double(c.beta_a) << '\n';
  }
  os << "sidedness = " << sim::sidedness_name(c.sidedness) << '\n'
     << "tau = " << format_double(c.tau) << '\n'
     << "rho = " << format_double(c.rho) << '\n'
     << "reps = " << c.reps << '\n'
     << "seed = " << c.seed << '\n'
     << "alpha = " << format_double(c.alpha) << '\n'
     << "procedures = " << join(c.procedures, [](const Method& m) { return m.label(); }) << '\n';
  if (!c.k_list.empty()) os << "k_list = " << join(c.k_list, [](auto k) { return std::to_string(k); }) << '\n';
  if (!c.gamma_list.empty()) os << "gamma_list = " << join(c.gamma_list, format_double) << '\n';
  os << "loss_lambda = " << format_double(c.loss_lambda) << '\n';
  if (!c.signs.empty()) os << "signs = " << join(c.signs, [](auto s) { return std::to_string(int{s}); }) << '\n';
  if (!c.power_targets.empty()) {
    os << "power_targets = " << join(c.power_targets, [](auto t) { return std::to_string(t); }) << '\n';
  }
  return os.str();
}

std::string manifest_json(const sim::RunManifest& manifest) {
  const auto& c = manifest.config;
  nlohmann::ordered_json j;
  j["artifact"] = "mtkit";
  j["version"] = manifest.version;
  j["generator"] = manifest.generator;
  j["seed"] = c.seed;

  nlohmann::ordered_json cfg;
  cfg["m"] = c.m;
  cfg["m0"] = c.m0;
  cfg["effect"] = sim::effect_name(c.effect);
  if (c.effect == sim::Effect::NormalShift) cfg["delta"] = c.delta;
  else cfg["beta_a"] = c.beta_a;
  cfg["sidedness"] = sim::sidedness_name(c.sidedness);
  cfg["tau"] = c.tau;
  cfg["rho"] = c.rho;
  cfg["reps"] = c.reps;
  cfg["alpha"] = c.alpha;
  auto procs = nlohmann::ordered_json::array();
  for (const auto& p : c.procedures) procs.push_back(p.label());
  cfg["procedures"] = procs;
  cfg["k_list"] = c.k_list;
  cfg["gamma_list"] = c.gamma_list;
  cfg["loss_lambda"] = c.loss_lambda;
  auto signs = nlohmann::ordered_json::array();
  for (const auto s : c.signs) signs.push_back(int{s});
  cfg["signs"] = signs;
  cfg["power_targets"] = c.power_targets;
  j["config"] = cfg;

  auto reports = nlohmann::ordered_json::array();
  for (const auto& rep : manifest.reports) {
    nlohmann::ordered_json r;
    r["procedure"] = rep.label;
    r["replicates"] = rep.metrics.replicates;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : rep.metrics.rows()) rows.push_back(estimate_json(row));
    r["metrics"] = rows;
    if (rep.directional) {
      auto drows = nlohmann::ordered_json::array();
      for (const auto& row : rep.directional->rows()) drows.push_back(estimate_json(row));
      r["directional"] = drows;
    }
    reports.push_back(r);
  }
  j["reports"] = reports;
  return j.dump(2) + "\n";
}

std::string metrics_csv(const sim::RunManifest& manifest) {
  std::ostringstream os;
  os << "procedure,criterion,parameter,estimate,se,replicates\n";
  auto emit = [&](const std::string& label, const CriterionRow& row) {
    os << csv_field(label) << ',' << row.criterion << ',' << csv_field(row.parameter) << ','
       << format_optional(row.estimate.value) << ',' << format_optional(row.estimate.se) << ','
       << row.estimate.replicates << '\n';
  };
  for (const auto& rep : manifest.reports) {
    for (const auto& row : rep.metrics.rows()) emit(rep.label, row);
    if (rep.directional) {
      for (const auto& row : rep.directional->rows()) emit(rep.label, row);
    }
  }
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace mtkit::io
