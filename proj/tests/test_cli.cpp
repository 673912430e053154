#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <cstdlib>
#include <random>
#include <sstream>

#include "mtkit/cli.hpp"
#include "mtkit/error.hpp"
#include "mtkit/io.hpp"

namespace fs = std::filesystem;
using namespace mtkit;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("mtkit_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  [[nodiscard]] std::string file(const std::string& name, const std::string& content = {}) const {
    const auto p = path / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Row {
  std::string id;
  double p;
  std::string adjusted;
  int reject;
  std::string direction;
};

std::vector<Row> rows_of(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "id,p,adjusted_p,reject,direction");
  std::vector<Row> out;
  while (std::getline(in, line)) {
    if (line.starts_with('#')) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.ends_with(',')) f.emplace_back();
    REQUIRE(f.size() == 5);
    out.push_back({f[0], std::stod(f[1]), f[2], std::stoi(f[3]), f[4]});
  }
  return out;
}

const std::string kBhInput = "id,p\na,0.01\nb,0.02\nc,0.03\nd,0.04\ne,0.20\n";

}  // namespace

TEST_CASE("adjust with BH") {
  TempDir dir;
  const auto in = dir.file("in.csv", kBhInput);
  const auto out = dir.file("out.csv");
  const auto r = run({"adjust", "--method", "bh", "--alpha", "0.05", "--input", in, "--output", out});
  REQUIRE(r.code == 0);
  const auto text = slurp(out);
  const auto rows = rows_of(text);
  REQUIRE(rows.size() == 5);
  const std::vector<double> q{0.05, 0.05, 0.05, 0.05, 0.20};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(rows[i].reject == (i < 4 ? 1 : 0));
    CHECK(std::stod(rows[i].adjusted) == Catch::Approx(q[i]).epsilon(1e-12));
    CHECK(rows[i].direction.empty());
  }
  CHECK(text.find("# method=bh") != std::string::npos);
  CHECK(text.find("# alpha=0.05") != std::string::npos);
  CHECK(text.find("# version=") != std::string::npos);
}

TEST_CASE("adjust with Holm rejects nothing") {
  TempDir dir;
  const auto in = dir.file("in.csv", "id,p\nx,0.02\ny,0.049\nz,0.049\n");
  const auto out = dir.file("out.csv");
  REQUIRE(run({"adjust", "--method", "holm", "--alpha", "0.05", "--input", in, "--output", out}).code == 0);
  for (const auto& row : rows_of(slurp(out))) CHECK(row.reject == 0);
}

TEST_CASE("adjust output round-trips") {
  TempDir dir;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  std::string csv = "id,p\n";
  for (int i = 0; i < 60; ++i) csv += "h" + std::to_string(i) + "," + io::format_double(u(rng)) + "\n";
  const auto in = dir.file("in.csv", csv);
  for (const std::string method : {"bh", "hochberg", "by", "bky", "adaptive-bh"}) {
    const auto first = dir.file("first.csv");
    const auto second = dir.file("second.csv");
    REQUIRE(run({"adjust", "--method", method, "--alpha", "0.1", "--input", in, "--output", first}).code == 0);
    REQUIRE(run({"adjust", "--method", method, "--alpha", "0.1", "--input", first, "--output", second}).code == 0);
    const auto a = io::read_pvector(fs::path(first));
    const auto b = io::read_pvector(fs::path(second));
    CHECK(a.p == b.p);
    CHECK(a.ids == b.ids);
    std::vector<int> ra, rb;
    for (const auto& r : rows_of(slurp(first))) ra.push_back(r.reject);
    for (const auto& r : rows_of(slurp(second))) rb.push_back(r.reject);
    CHECK(ra == rb);
  }
}

TEST_CASE("adjust parameters and metadata") {
  TempDir dir;
  const auto in = dir.file("in.csv", "id,p,z\na,0.001,3.3\nb,0.002,-3.1\nc,0.5,0.7\n");
  const auto out = dir.file("out.csv");

  REQUIRE(run({"adjust", "--method", "kfwer-sd", "--k", "1", "--alpha", "0.05", "--input", in, "--output", out}).code == 0);
  CHECK(slurp(out).find("# k=1") != std::string::npos);

  REQUIRE(run({"adjust", "--method", "bky", "--alpha", "0.05", "--input", in, "--output", out}).code == 0);
  const auto bky = slurp(out);
  for (const auto& row : rows_of(bky)) CHECK(row.adjusted.empty());
  CHECK(bky.find("# stage1_rejections=") != std::string::npos);

  REQUIRE(run({"adjust", "--method", "holm", "--alpha", "0.05", "--directional", "--input", in, "--output", out}).code == 0);
  const auto rows = rows_of(slurp(out));
  CHECK(rows[0].direction == "U");
  CHECK(rows[1].direction == "L");
  CHECK(rows[2].direction.empty());

  REQUIRE(run({"adjust", "--method", "bh", "--alpha", "0.5", "--cap", "0.01", "--input", in, "--output", out}).code == 0);
  const auto capped = rows_of(slurp(out));
  CHECK(capped[2].reject == 0);
  CHECK(slurp(out).find("# cap=0.01") != std::string::npos);
}

TEST_CASE("adjust exit codes") {
  TempDir dir;
  const auto in = dir.file("in.csv", kBhInput);
  const auto out = dir.file("out.csv");
  auto adjust = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"adjust", "--input", in, "--output", out};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args).code;
  };
  CHECK(adjust({"--method", "holm", "--alpha", "0.05", "--k", "1"}) == 3);
  CHECK(adjust({"--method", "kfwer-ss", "--alpha", "0.05"}) == 3);
  CHECK(adjust({"--method", "bh", "--alpha", "0.05", "--gamma", "0.1"}) == 3);
  CHECK(adjust({"--method", "fdp-sd", "--alpha", "0.05"}) == 3);
  CHECK(adjust({"--method", "bh", "--alpha", "0.05", "--lambda", "0.5"}) == 3);
  CHECK(adjust({"--method", "bh", "--alpha", "0.05", "--tau", "0.5"}) == 3);
  CHECK(adjust({"--method", "bh", "--alpha", "0.05", "--directional"}) == 2);
  CHECK(adjust({"--method", "sidak", "--alpha", "0.05"}) == 2);
  CHECK(adjust({"--method", "bh", "--alpha", "1.5"}) == 2);
  CHECK(adjust({"--method", "fdp-sd", "--gamma", "1.0", "--alpha", "0.05"}) == 2);
  CHECK_FALSE(fs::exists(out));

  const auto empty = dir.file("empty.csv", "");
  std::ofstream(empty).close();
  const auto r = run({"adjust", "--method", "bh", "--alpha", "0.05", "--input", empty, "--output", out});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());

  const auto bad = dir.file("bad.csv", "id,p\na,0.1\na,0.2\n");
  CHECK(run({"adjust", "--method", "bh", "--alpha", "0.05", "--input", bad, "--output", out}).code == 2);
  const auto range = dir.file("range.csv", "id,p\na,1.2\n");
  CHECK(run({"adjust", "--method", "bh", "--alpha", "0.05", "--input", range, "--output", out}).code == 2);
  CHECK(run({"adjust", "--method", "bh", "--alpha", "0.05", "--input", (dir.path / "missing.csv").string(), "--output", out}).code == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(run({}).code == 2);
}

TEST_CASE("input reader") {
  std::istringstream in("# comment\nz,p,extra,id,truth,sign\n1.5,0.1,x,a,0,1\n\n-0.2,0.9,y,\"b,c\",1,0\n");
  const auto pv = io::read_pvector(in);
  CHECK(pv.ids == std::vector<std::string>{"a", "b,c"});
  CHECK(*pv.null_true == std::vector<std::uint8_t>{0, 1});
  CHECK(*pv.sign == std::vector<std::int8_t>{1, 0});
  CHECK(*pv.z == std::vector<double>{1.5, -0.2});

  std::istringstream no_p("id,q\na,0.1\n");
  CHECK_THROWS_AS(io::read_pvector(no_p), InputError);
  std::istringstream header_only("id,p\n");
  CHECK_THROWS_AS(io::read_pvector(header_only), InputError);
  std::istringstream bad_truth("id,p,truth\na,0.1,1\nb,0.2,2\n");
  CHECK_THROWS_AS(io::read_pvector(bad_truth), InputError);

  for (const double x : {0.1, 1.0 / 3.0, 1e-300, 0.049999999999999996, 5e-324}) {
    CHECK(std::strtod(io::format_double(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("config reader") {
  std::istringstream in(
      "# campaign\nm = 10\nm0 = 7\ndelta = 1.5\nprocedures = bh, adaptive-bh, holm@cap=0.5\n"
      "pi0_lambda = 0.3\nk_list = 0,2\ngamma_list = 0.1\nreps = 5 # few\nseed = 9\n");
  const auto c = io::read_sim_config(in);
  CHECK(c.m == 10);
  CHECK(c.m0 == 7);
  CHECK(c.procedures.size() == 3);
  CHECK(c.procedures[1].lambda == 0.3);
  CHECK(*c.procedures[2].spec.cap == 0.5);
  CHECK(c.k_list == std::vector<std::uint64_t>{0, 2});
  CHECK(c.reps == 5);

  std::istringstream echo(io::write_sim_config(c));
  const auto again = io::read_sim_config(echo);
  CHECK(io::write_sim_config(again) == io::write_sim_config(c));

  std::istringstream dup("m = 3\nm = 4\nprocedures = bh\n");
  CHECK_THROWS_AS(io::read_sim_config(dup), InputError);
  std::istringstream unknown("m = 3\nwidth = 4\nprocedures = bh\n");
  CHECK_THROWS_AS(io::read_sim_config(unknown), InputError);
  std::istringstream none("m = 3\n");
  CHECK_THROWS_AS(io::read_sim_config(none), InputError);
}

TEST_CASE("simulate") {
  TempDir dir;
  const auto cfg = dir.file("sim.cfg",
                            "m = 40\nm0 = 30\ndelta = 2\nreps = 300\nseed = 5\n"
                            "procedures = bh, holm, bky\nk_list = 1\ngamma_list = 0.1\npower_targets = 31\n");
  const auto a = (dir.path / "a").string();
  const auto b = (dir.path / "b").string();
  REQUIRE(run({"simulate", "--config", cfg, "--output", a}).code == 0);
  REQUIRE(run({"simulate", "--config", cfg, "--output", b}).code == 0);
  CHECK(slurp(a + "/metrics.csv") == slurp(b + "/metrics.csv"));
  CHECK(slurp(a + "/manifest.json") == slurp(b + "/manifest.json"));
  const auto metrics = slurp(a + "/metrics.csv");
  CHECK(metrics.starts_with("procedure,criterion,parameter,estimate,se,replicates\n"));
  CHECK(metrics.find("bh,FDR,,") != std::string::npos);
  CHECK(metrics.find("holm,power_c,h31,") != std::string::npos);

  const auto c = (dir.path / "c").string();
  REQUIRE(run({"simulate", "--config", cfg, "--seed", "6", "--output", c}).code == 0);
  CHECK(slurp(c + "/manifest.json") != slurp(a + "/manifest.json"));
  CHECK(slurp(c + "/manifest.json").find("\"seed\": 6") != std::string::npos);

  const auto single = dir.file("one.cfg", "m = 5\nm0 = 5\nreps = 1\nprocedures = bh\n");
  REQUIRE(run({"simulate", "--config", single, "--output", (dir.path / "d").string()}).code == 0);
  const auto one = slurp((dir.path / "d" / "metrics.csv").string());
  CHECK(one.find("bh,FDR,,0,NA,1") != std::string::npos);

  const auto beta_dir = dir.file("bd.cfg", "m = 5\nm0 = 2\neffect = beta\nsidedness = directional\nprocedures = bh\n");
  CHECK(run({"simulate", "--config", beta_dir, "--output", (dir.path / "e").string()}).code == 4);
  const auto target = dir.file("t.cfg", "m = 5\nm0 = 2\nprocedures = bh\npower_targets = 1\n");
  CHECK(run({"simulate", "--config", target, "--output", (dir.path / "f").string()}).code == 4);
  const auto beta_rho = dir.file("br.cfg", "m = 5\nm0 = 2\neffect = beta\nrho = 0.3\nprocedures = bh\n");
  CHECK(run({"simulate", "--config", beta_rho, "--output", (dir.path / "g").string()}).code == 2);
  const auto malformed = dir.file("bad.cfg", "m = five\nprocedures = bh\n");
  CHECK(run({"simulate", "--config", malformed, "--output", (dir.path / "h").string()}).code == 2);
  CHECK_FALSE(fs::exists(dir.path / "h" / "manifest.json"));
}

TEST_CASE("example") {
  TempDir dir;
  const auto out = dir.file("curve.csv");
  REQUIRE(run({"example", "--mode", "nondir", "--alpha", "0.05", "--steps", "3", "--gamma-max", "2", "--output", out}).code == 0);
  std::istringstream in(slurp(out));
  std::string line;
  std::getline(in, line);
  CHECK(line == "gamma,shape,power");
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0].starts_with("0,central,"));
  CHECK(std::stod(lines[4].substr(lines[4].rfind(',') + 1)) == Catch::Approx(0.03753125).epsilon(1e-13));
  CHECK(std::stod(lines[5].substr(lines[5].rfind(',') + 1)) == Catch::Approx(0.07315625).epsilon(1e-13));

  REQUIRE(run({"example", "--mode", "dir", "--steps", "5", "--gamma-max", "2", "--output", out}).code == 0);
  const auto dir_text = slurp(out);
  CHECK(dir_text.starts_with("gamma,shape,correct,typeIII\n"));
  CHECK(dir_text.find("0.5,extreme,") != std::string::npos);

  CHECK(run({"example", "--mode", "nondir", "--steps", "0", "--output", out}).code == 2);
  CHECK(run({"example", "--mode", "sideways", "--output", out}).code == 2);
}

TEST_CASE("pi0") {
  TempDir dir;
  std::string csv = "id,p\n";
  for (int i = 0; i < 20; ++i) csv += "h" + std::to_string(i) + "," + (i < 8 ? "0.75" : "0.1") + "\n";
  const auto in = dir.file("in.csv", csv);
  auto r = run({"pi0", "--lambda", "0.5", "--input", in});
  REQUIRE(r.code == 0);
  CHECK(r.out == "m=20 above_lambda=8 lambda=0.5 raw=0.9 pi0=0.9\n");

  const auto high = dir.file("high.csv", "id,p\na,0.99\nb,0.99\nc,0.99\n");
  r = run({"pi0", "--input", high});
  REQUIRE(r.code == 0);
  CHECK(r.out.ends_with("pi0=1\n"));
  CHECK(run({"pi0", "--lambda", "1", "--input", in}).code == 2);
}

TEST_CASE("thread count from the environment") {
  ::setenv("MTKIT_THREADS", "4", 1);
  CHECK(cli::threads_from_env() == 4);
  ::setenv("MTKIT_THREADS", "zero", 1);
  CHECK(cli::threads_from_env() == 1);
  ::unsetenv("MTKIT_THREADS");
  CHECK(cli::threads_from_env() == 1);
}

TEST_CASE("ids with commas and quotes survive adjust") {
  TempDir dir;
  const auto in = dir.file("in.csv", "id,p\n\"a,1\",0.001\n\"say \"\"hi\"\"\",0.5\n");
  const auto out = dir.file("out.csv");
  REQUIRE(run({"adjust", "--method", "bh", "--alpha", "0.05", "--input", in, "--output", out}).code == 0);
  const auto back = io::read_pvector(fs::path(out));
  CHECK(back.ids == std::vector<std::string>{"a,1", "say \"hi\""});
  CHECK(back.p == std::vector<double>{0.001, 0.5});
}
