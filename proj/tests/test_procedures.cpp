#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mtkit/error.hpp"
#include "mtkit/methods.hpp"
#include "mtkit/procedures.hpp"
#include "oracles.hpp"

using namespace mtkit;
using K = ProcedureKind;

namespace {

std::vector<int> rejected(const DecisionVector& d) {
  std::vector<int> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = d.rejected(i) ? 1 : 0;
  return out;
}

std::vector<ProcedureSpec> all_specs() {
  std::vector<ProcedureSpec> out;
  for (const K k : {K::Bonferroni, K::Holm, K::Hochberg, K::BH, K::BY}) out.push_back({k});
  for (const std::uint32_t k : {0u, 1u, 2u}) {
    out.push_back({K::GenBonferroniK, k});
    out.push_back({K::LRStepdownK, k});
  }
  for (const double g : {0.0, 0.1, 0.25, 0.5}) out.push_back({K::LRStepdownFDP, 0, g});
  return out;
}

bool subset(const DecisionVector& a, const DecisionVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.rejected(i) && !b.rejected(i)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("critical values") {
  const auto bh = thresholds({K::BH}, 5).critical_values(0.05);
  const std::vector<double> expect_bh{0.01, 0.02, 0.03, 0.04, 0.05};
  for (std::size_t i = 0; i < 5; ++i) CHECK(bh[i] == Catch::Approx(expect_bh[i]).epsilon(1e-15));

  const auto by = thresholds({K::BY}, 4).critical_values(0.05);
  const double c4 = 25.0 / 12.0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(by[i] == Catch::Approx((i + 1) * 0.05 / (4 * c4)).epsilon(1e-15));
  }
  CHECK(by[0] == Catch::Approx(0.006).epsilon(1e-15));

  const auto gb = thresholds({K::GenBonferroniK, 1}, 10).critical_values(0.05);
  for (const double c : gb) CHECK(c == Catch::Approx(0.01).epsilon(1e-15));

  CHECK_THROWS_AS(thresholds({K::BH}, 0), InputError);
  CHECK_THROWS_AS(thresholds({K::LRStepdownFDP, 0, 1.0}, 3), InputError);
  CHECK_THROWS_AS(check_alpha(0.0), InputError);
  CHECK_THROWS_AS(check_alpha(1.5), InputError);
}

TEST_CASE("thresholds are nondecreasing and match the oracle formulas") {
  for (const auto& spec : all_specs()) {
    for (const std::size_t m : {1u, 2u, 5u, 17u, 100u}) {
      const auto t = thresholds(spec, m);
      for (std::size_t i = 0; i < m; ++i) {
        const double c = oracle::coefficient(spec.kind, static_cast<int>(m), static_cast<int>(i + 1),
                                             static_cast<int>(spec.k), spec.gamma);
        CHECK(t.coefficient(i) == Catch::Approx(c).epsilon(1e-14));
        if (i > 0) CHECK(t.coefficient(i) >= t.coefficient(i - 1));
        CHECK(t.critical(i, 0.3) <= 1.0);
      }
    }
  }
}

TEST_CASE("step-down examples") {
  const auto holm = thresholds({K::Holm}, 3);
  CHECK(step_down(std::vector<double>{0.01, 0.02, 0.05}, holm, 0.05).rejections() == 3);
  CHECK(step_down(std::vector<double>{0.02, 0.049, 0.049}, holm, 0.05).rejections() == 0);
  const ThresholdSequence vacuous({1.0, 1.0}, {0.01, 0.01});
  CHECK(step_down(std::vector<double>{0.7, 1.0}, vacuous, 0.05).rejections() == 2);
}

TEST_CASE("step-up examples") {
  const auto bh = step_up(std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.20}, thresholds({K::BH}, 5), 0.05);
  CHECK(rejected(bh) == std::vector<int>{1, 1, 1, 1, 0});
  CHECK(step_up(std::vector<double>{0.02, 0.049, 0.049}, thresholds({K::Hochberg}, 3), 0.05)
            .rejections() == 3);
  CHECK(step_up(std::vector<double>(4, 1.0), thresholds({K::BH}, 4), 0.05).rejections() == 0);
}

TEST_CASE("adjusted p-value examples") {
  const auto holm = adjusted_p({K::Holm}, std::vector<double>{0.01, 0.02, 0.05});
  const std::vector<double> holm_expect{0.03, 0.04, 0.05};
  for (std::size_t i = 0; i < 3; ++i) CHECK(holm[i] == Catch::Approx(holm_expect[i]).epsilon(1e-14));

  const auto bh = adjusted_p({K::BH}, std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.20});
  const std::vector<double> bh_expect{0.05, 0.05, 0.05, 0.05, 0.20};
  for (std::size_t i = 0; i < 5; ++i) CHECK(bh[i] == Catch::Approx(bh_expect[i]).epsilon(1e-14));

  const std::vector<double> p{0.001, 0.3, 0.04, 0.5};
  const auto bonf = adjusted_p({K::Bonferroni}, p);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(bonf[i] == std::min(1.0, 4.0 * p[i]));
}

TEST_CASE("apply examples") {
  const std::vector<double> p{0.01, 0.02, 0.05};
  CHECK(rejected(apply({K::Bonferroni}, p, 0.05)) == std::vector<int>{1, 0, 0});
  CHECK(rejected(apply({K::Holm}, p, 0.05)) == std::vector<int>{1, 1, 1});

  const std::vector<double> q{0.01, 0.02, 0.03, 0.04, 0.06};
  ProcedureSpec capped{K::BH};
  capped.cap = 0.05;
  CHECK(apply({K::BH}, q, 0.05).rejections() == 4);
  CHECK(apply(capped, q, 0.05).rejections() == 4);

  const std::vector<double> tied{0.01, 0.01, 0.01, 0.01, 0.2};
  CHECK(apply({K::BH}, tied, 0.5).rejections() == 5);
  CHECK(rejected(apply(capped, tied, 0.5)) == std::vector<int>{1, 1, 1, 1, 0});
}

TEST_CASE("direction mode") {
  ProcedureSpec spec{K::Holm};
  spec.directional = true;
  const std::vector<double> p{0.001, 0.002, 0.9};
  CHECK_THROWS_AS(apply(spec, p, 0.05), InputError);
  const std::vector<double> z{3.2, -3.1, 0.1};
  const auto d = apply(spec, p, 0.05, z);
  REQUIRE(d.directions);
  CHECK((*d.directions)[0] == Direction::Upper);
  CHECK((*d.directions)[1] == Direction::Lower);
  CHECK((*d.directions)[2] == Direction::None);
}

TEST_CASE("zero-parameter step-down variants reduce to Holm") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 1 + trial % 12;
    const auto p = oracle::random_p(rng, m);
    const auto holm = rejected(apply({K::Holm}, p, 0.05));
    CHECK(rejected(apply({K::LRStepdownK, 0}, p, 0.05)) == holm);
    CHECK(rejected(apply({K::LRStepdownFDP, 0, 0.0}, p, 0.05)) == holm);
  }
}

TEST_CASE("engines match brute force for small m") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> level(0.001, 0.6);
  for (int trial = 0; trial < 3000; ++trial) {
    const int m = 1 + trial % 8;
    const auto p = oracle::random_p(rng, m);
    const double alpha = level(rng);
    for (const auto& spec : all_specs()) {
      const auto expect = oracle::brute_force(spec.kind, p, alpha, static_cast<int>(spec.k), spec.gamma);
      REQUIRE(rejected(apply(spec, p, alpha)) == expect);
    }
  }
}

TEST_CASE("adjusted p-values are dual to decisions") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = oracle::random_p(rng, 1 + trial % 30);
    for (const auto& spec : all_specs()) {
      const auto q = adjusted_p(spec, p);
      for (int a = 1; a <= 100; ++a) {
        const double alpha = a / 100.0;
        const auto d = apply(spec, p, alpha);
        for (std::size_t i = 0; i < p.size(); ++i) REQUIRE(d.rejected(i) == (q[i] <= alpha));
      }
    }
  }
}

TEST_CASE("Bonferroni within Holm within Hochberg") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> level(0.01, 0.5);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto p = oracle::random_p(rng, 1 + trial % 25);
    const double alpha = level(rng);
    const auto b = apply({K::Bonferroni}, p, alpha);
    const auto h = apply({K::Holm}, p, alpha);
    const auto hb = apply({K::Hochberg}, p, alpha);
    REQUIRE(subset(b, h));
    REQUIRE(subset(h, hb));
  }
}

TEST_CASE("lowering one p-value never loses rejections") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1500; ++trial) {
    const int m = 1 + trial % 15;
    auto p = oracle::random_p(rng, m);
    for (const auto& spec : all_specs()) {
      const auto before = apply(spec, p, 0.1).rejections();
      auto lowered = p;
      const auto i = static_cast<std::size_t>(trial) % p.size();
      lowered[i] *= u(rng);
      REQUIRE(apply(spec, lowered, 0.1).rejections() >= before);
    }
  }
}

TEST_CASE("permutation equivariance and tie handling") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 2 + trial % 20;
    const auto p = oracle::random_p(rng, m);
    std::vector<std::size_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> permuted(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) permuted[i] = p[perm[i]];
    for (const auto& spec : all_specs()) {
      const auto d = apply(spec, p, 0.2);
      const auto dp = apply(spec, permuted, 0.2);
      for (std::size_t i = 0; i < p.size(); ++i) {
        REQUIRE(dp.rejected(i) == d.rejected(perm[i]));
        for (std::size_t j = 0; j < p.size(); ++j) {
          if (p[i] == p[j]) REQUIRE(d.rejected(i) == d.rejected(j));
        }
      }
    }
  }
}

TEST_CASE("ties broken by id give the same decisions") {
  PVector pv;
  pv.ids = {"c", "a", "b", "d"};
  pv.p = {0.0125, 0.0125, 0.0125, 0.3};
  const auto t = thresholds({K::BH}, 4);
  CHECK(rejected(step_up(pv, t, 0.05)) == std::vector<int>{1, 1, 1, 0});
  CHECK(rejected(step_down(pv, thresholds({K::Holm}, 4), 0.05)) == std::vector<int>{1, 1, 1, 0});
  CHECK(rejected(apply(ProcedureSpec{K::Holm}, pv, 0.05)) == std::vector<int>{1, 1, 1, 0});
}

TEST_CASE("method parsing") {
  CHECK(parse_method("bh").spec.kind == K::BH);
  const auto k = parse_method("kfwer-sd:2");
  CHECK(k.spec.kind == K::LRStepdownK);
  CHECK(k.spec.k == 2);
  CHECK(k.label() == "kfwer-sd:2");
  const auto f = parse_method("fdp-sd:0.1@cap=0.5");
  CHECK(f.spec.gamma == 0.1);
  CHECK(*f.spec.cap == 0.5);
  CHECK(parse_method("adaptive-bh:0.4").lambda == 0.4);
  CHECK(parse_method("bky").family == MethodFamily::TwoStage);
  CHECK_THROWS_AS(parse_method("sidak"), InputError);
  CHECK_THROWS_AS(parse_method("kfwer-ss"), InputError);
  CHECK_THROWS_AS(parse_method("fdp-sd:1.2"), InputError);
  for (const auto& name : method_names()) CHECK_FALSE(name.empty());
}
