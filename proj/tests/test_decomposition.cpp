#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sslb/decomposition.hpp"
#include "sslb/prime_table.hpp"
#include "sslb/semiprime.hpp"

using namespace sslb;

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

DecompositionParams micro_params() {
  DecompositionParams p;
  p.x = 10;
  p.a = -1;
  p.theta = 0.624;
  p.epsilon = 0.009;
  p.q_override = 1.0;
  return p;
}

}  // namespace

TEST_CASE("compute_logR values", "[decomposition]") {
  auto table = PrimeTable::sieve(1001);
  auto r10 = compute_logR(10, -1, table);
  REQUIRE(rel_err(r10.value, std::log(1080.0)) <= 1e-12);
  REQUIRE(rel_err(r10.value, 6.984716320118265) <= 1e-12);
  REQUIRE_FALSE(r10.empty_range);
  REQUIRE(r10.skipped_terms == 0);

  auto r3 = compute_logR(3, -1, table);
  REQUIRE(r3.value == 0.0);
  REQUIRE(r3.empty_range);

  auto r1000 = compute_logR(1000, -1, table);
  REQUIRE(rel_err(r1000.value, 1752.5500257040142) <= 1e-12);

  // a = -4 drops n = 4 (n + a = 0) and n = 5 is not a semiprime
  auto skip = compute_logR(10, -4, table);
  REQUIRE(skip.skipped_terms == 1);
  REQUIRE(rel_err(skip.value, std::log(2.0 * 5.0 * 6.0)) <= 1e-12);
}

TEST_CASE("build_ledger micro case", "[decomposition]") {
  auto table = PrimeTable::sieve(1000);
  auto ledger = build_ledger(10, -1, table);
  REQUIRE(ledger.x == 10);
  REQUIRE(ledger.a == -1);
  REQUIRE(ledger.semiprime_count == 4);
  REQUIRE(ledger.entries.size() == 3);

  const auto* e2 = ledger.find(2);
  REQUIRE(e2 != nullptr);
  REQUIRE(e2->nu == 3);
  REQUIRE(e2->m == std::vector<std::uint32_t>{1, 1, 1});  // 8 = 2^3

  const auto* e3 = ledger.find(3);
  REQUIRE(e3->nu == 3);
  REQUIRE(e3->m == std::vector<std::uint32_t>{2, 1});  // 3 | 3, 9; 9 | 9

  const auto* e5 = ledger.find(5);
  REQUIRE(e5->nu == 1);
  REQUIRE(e5->m == std::vector<std::uint32_t>{1});
  REQUIRE(ledger.find(7) == nullptr);

  // R = 1080 = 2^3 * 3^3 * 5
  REQUIRE(rel_err(ledger.weighted_log_sum(), std::log(1080.0)) <= 1e-12);
}

TEST_CASE("ledger reconciles with compute_logR and m_s", "[decomposition]") {
  auto table = PrimeTable::sieve(2000);
  for (std::int64_t a : {-1, 1, -3}) {
    auto ledger = build_ledger(500, a, table);
    REQUIRE(rel_err(ledger.weighted_log_sum(), compute_logR(500, a, table).value) <= 1e-9);
    for (const auto& e : ledger.entries) {
      std::uint64_t nu = 0;
      for (std::size_t s = 0; s < e.m.size(); ++s) {
        REQUIRE(e.m[s] == m_s(e.q, static_cast<std::uint32_t>(s + 1), 500, a, table));
        nu += e.m[s];
      }
      REQUIRE(e.nu == nu);
      REQUIRE(e.m.back() > 0);  // trailing zeros never stored
    }
  }
}

TEST_CASE("classify micro worked case", "[decomposition]") {
  auto table = PrimeTable::sieve(100);
  auto rep = classify_incidences(micro_params(), table);

  REQUIRE(rep.counts[kA] == 0);
  REQUIRE(rep.counts[kB] == 3);
  REQUIRE(rep.counts[kC1] == 0);
  REQUIRE(rep.counts[kC2] == 0);
  REQUIRE(rep.counts[kC3] == 0);
  REQUIRE(rep.counts[kC4] == 0);
  REQUIRE(rep.counts[kC5] == 1);
  REQUIRE(rep.counts[kResidual] == 3);
  REQUIRE(rep.incidence_count == 7);

  REQUIRE(rep.sums[kA] == 0.0);
  REQUIRE(rel_err(rep.sums[kB], 2.4849066497880004) <= 1e-12);
  REQUIRE(rel_err(rep.sums[kC5], 1.6094379124341003) <= 1e-12);
  REQUIRE(rel_err(rep.sums[kResidual], 2.890371757896165) <= 1e-12);
  REQUIRE(rel_err(rep.bucket_total(), 6.984716320118266) <= 1e-12);
  REQUIRE(rel_err(rep.logR, std::log(1080.0)) <= 1e-12);

  REQUIRE(rep.max_pplus == 5);
  REQUIRE(rel_err(rep.theta_star, 0.6989700043360187) <= 1e-12);
  REQUIRE(rep.semiprime_count == 4);
  REQUIRE(rep.Q_floor == 1);
}

TEST_CASE("classify regression at 1e5", "[decomposition]") {
  auto table = PrimeTable::sieve(100001);
  DecompositionParams p;
  p.x = 100000;
  p.a = -1;
  p.theta = 0.62;
  p.epsilon = 0.005;
  p.bv_exponent = 0.0;
  auto rep = classify_incidences(p, table);

  const std::uint64_t counts[8] = {62018, 6602, 0, 9393, 3860, 2135, 8555, 4011};
  const double sums[8] = {68132.25796546908, 8958.303254264985, 0.0,
                          35848.437338213036, 23548.742433344334, 13331.64438782287,
                          75294.76455099885, 19397.298313873627};
  for (int k = 0; k < kNumBuckets; ++k) {
    REQUIRE(rep.counts[k] == counts[k]);
    if (sums[k] == 0.0)
      REQUIRE(rep.sums[k] == 0.0);
    else
      REQUIRE(rel_err(rep.sums[k], sums[k]) <= 1e-12);
  }
  REQUIRE(rel_err(rep.logR, 244511.4482439868) <= 1e-12);
  REQUIRE(rep.counts[kC2] == rep.c2_bv_count + rep.c2_bt_count);
  REQUIRE(rel_err(rep.sums[kC2], rep.c2_bv + rep.c2_bt) <= 1e-12);
}

TEST_CASE("tiling invariant on a parameter grid", "[decomposition]") {
  auto table = PrimeTable::sieve(10003);
  for (std::int64_t a : {-1, 1, -3})
    for (double theta : {0.61, 0.624})
      for (double eps : {0.001, 0.009}) {
        DecompositionParams p;
        p.x = 10000;
        p.a = a;
        p.theta = theta;
        p.epsilon = eps;
        auto rep = classify_incidences(p, table);  // throws InvariantError on violation
        REQUIRE(std::abs(rep.bucket_total() - rep.logR) <=
                1e-9 * std::max(1.0, std::abs(rep.logR)));
      }
}

TEST_CASE("classification agrees with the naive oracle", "[decomposition]") {
  auto table = PrimeTable::sieve(4000);
  std::mt19937_64 rng(20260822);
  std::uniform_int_distribution<std::uint64_t> xd(50, 2000);
  std::uniform_real_distribution<double> thd(0.602, 0.6245);
  const double epss[3] = {0.001, 0.005, 0.009};
  const double bvs[3] = {0.0, 0.5, 1.0};
  for (int trial = 0; trial < 20; ++trial) {
    DecompositionParams p;
    p.x = xd(rng);
    p.a = -1;
    p.theta = thd(rng);
    p.epsilon = epss[trial % 3];
    p.bv_exponent = bvs[trial % 3];
    if (trial % 3 == 2) p.q_override = static_cast<double>(1 + trial);
    auto rep = classify_incidences(p, table);
    auto naive = oracle::classify(p.x, p.a, p.theta, p.epsilon, p.bv_exponent, p.q_override);

    const char* keys[8] = {"A", "B", "C1", "C2", "C3", "C4", "C5", "R"};
    for (int k = 0; k < kNumBuckets; ++k) {
      INFO("trial " << trial << " x=" << p.x << " bucket " << keys[k]);
      REQUIRE(rep.counts[k] == naive.counts[keys[k]]);
      REQUIRE(rel_err(rep.sums[k], static_cast<double>(naive.sums[keys[k]])) <= 1e-12);
    }
    REQUIRE(rel_err(rep.logR, static_cast<double>(naive.logR)) <= 1e-12);
    REQUIRE(rep.max_pplus == naive.max_pplus);
  }
}

TEST_CASE("bucket A grows with the Q cutoff", "[decomposition]") {
  auto table = PrimeTable::sieve(10003);
  double prev_sum = -1.0;
  std::uint64_t prev_count = 0;
  for (double qov : {1.0, 10.0, 100.0, 10000.0}) {
    DecompositionParams p;
    p.x = 10000;
    p.a = -1;
    p.q_override = qov;
    auto rep = classify_incidences(p, table);
    REQUIRE(rep.sums[kA] >= prev_sum);
    REQUIRE(rep.counts[kA] >= prev_count);
    prev_sum = rep.sums[kA];
    prev_count = rep.counts[kA];
  }
}

TEST_CASE("c5_mass values and theorem equivalence", "[decomposition]") {
  auto table = PrimeTable::sieve(100);
  auto ledger = build_ledger(10, -1, table);
  REQUIRE(rel_err(c5_mass(ledger, 0.625), std::log(5.0)) <= 1e-12);
  REQUIRE(c5_mass(ledger, 0.7) == 0.0);  // 10^0.7 > 5

  // monotone nonincreasing in theta
  double prev = std::numeric_limits<double>::infinity();
  for (double th = 0.5; th <= 0.71; th += 0.02) {
    double m = c5_mass(ledger, th);
    REQUIRE(m <= prev);
    prev = m;
  }

  auto big = PrimeTable::sieve(10001);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> xd(10, 10000);
  std::uniform_real_distribution<double> thd(0.5, 0.9);
  for (int i = 0; i < 15; ++i) {
    std::uint64_t x = xd(rng);
    double th = thd(rng);
    auto led = build_ledger(x, -1, big);
    if (led.semiprime_count == 0) continue;
    bool pass = verify_theorem(x, -1, th, big).pass;
    REQUIRE((c5_mass(led, th) > 0.0) == pass);
  }
}

TEST_CASE("verify_theorem frozen checks", "[decomposition]") {
  auto table = PrimeTable::sieve(10001);
  auto c10 = verify_theorem(10, -1, 0.625, table);
  REQUIRE(c10.max_pplus == 5);
  REQUIRE(rel_err(c10.theta_star, 0.6989700043360187) <= 1e-12);
  REQUIRE(c10.pass);
  REQUIRE_FALSE(verify_theorem(10, -1, 0.7, table).pass);

  auto c1000 = verify_theorem(1000, -1, 0.624, table);
  REQUIRE(c1000.max_pplus == 997);
  REQUIRE(rel_err(c1000.theta_star, 0.999565052770552) <= 1e-12);

  auto c10000 = verify_theorem(10000, -1, 0.624, table);
  REQUIRE(c10000.max_pplus == 9973);
  REQUIRE(rel_err(c10000.theta_star, 0.9997064547600715) <= 1e-12);

  REQUIRE_THROWS_AS(verify_theorem(3, -1, 0.62, table), DomainError);
  REQUIRE_THROWS_AS(verify_theorem(10, 0, 0.62, table), DomainError);
  REQUIRE_THROWS_AS(verify_theorem(4, -4, 0.62, table), DomainError);  // no terms
  REQUIRE_THROWS_AS(verify_theorem(10000, 5, 0.62, table), RangeError);
}

TEST_CASE("theta_scan preserves input order", "[decomposition]") {
  auto table = PrimeTable::sieve(1001);
  auto rows = theta_scan({1000, 10}, -1, 0.62, table);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].x == 1000);
  REQUIRE(rows[0].max_pplus == 997);
  REQUIRE(rows[1].x == 10);
  REQUIRE(rows[1].max_pplus == 5);
  REQUIRE(theta_scan({}, -1, 0.62, table).empty());
}

TEST_CASE("worker count never changes results", "[decomposition]") {
  auto table = PrimeTable::sieve(10003);
  DecompositionParams p;
  p.x = 10000;
  p.a = -1;
  auto one = decompose_pass(p, table, 1, true);
  for (unsigned workers : {2u, 3u, 8u}) {
    auto many = decompose_pass(p, table, workers, true);
    for (int k = 0; k < kNumBuckets; ++k) {
      REQUIRE(many.report.sums[k] == one.report.sums[k]);  // bitwise
      REQUIRE(many.report.counts[k] == one.report.counts[k]);
    }
    REQUIRE(many.report.logR == one.report.logR);
    REQUIRE(many.report.c2_bv == one.report.c2_bv);
    REQUIRE(many.report.c2_bt == one.report.c2_bt);
    REQUIRE(many.report.max_pplus == one.report.max_pplus);
    REQUIRE(many.ledger.entries.size() == one.ledger.entries.size());
    for (std::size_t i = 0; i < one.ledger.entries.size(); ++i) {
      REQUIRE(many.ledger.entries[i].q == one.ledger.entries[i].q);
      REQUIRE(many.ledger.entries[i].nu == one.ledger.entries[i].nu);
      REQUIRE(many.ledger.entries[i].m == one.ledger.entries[i].m);
    }
  }
}

TEST_CASE("params validation", "[decomposition]") {
  auto table = PrimeTable::sieve(100);
  auto check_throws = [&](auto mutate) {
    DecompositionParams p;
    p.x = 10;
    p.a = -1;
    mutate(p);
    REQUIRE_THROWS_AS(p.validate(), DomainError);
  };
  check_throws([](DecompositionParams& p) { p.x = 3; });
  check_throws([](DecompositionParams& p) { p.a = 0; });
  check_throws([](DecompositionParams& p) { p.theta = 0.7; });
  check_throws([](DecompositionParams& p) { p.theta = 0.6; });
  check_throws([](DecompositionParams& p) { p.theta = 0.625; });
  check_throws([](DecompositionParams& p) {
    p.theta = 0.45;  // outside even the structural range
    p.allow_exploratory = true;
  });
  check_throws([](DecompositionParams& p) { p.epsilon = 0.0; });
  check_throws([](DecompositionParams& p) { p.epsilon = 0.011; });
  check_throws([](DecompositionParams& p) { p.bv_exponent = -0.1; });
  check_throws([](DecompositionParams& p) { p.bv_exponent_c2 = -0.1; });
  check_throws([](DecompositionParams& p) { p.r = 2.0; });
  check_throws([](DecompositionParams& p) { p.r = 1.0; });
  check_throws([](DecompositionParams& p) { p.q_override = 0.0; });
  check_throws([](DecompositionParams& p) { p.q_override = -5.0; });

  // exploratory widens the theta window
  DecompositionParams p;
  p.x = 10;
  p.a = -1;
  p.theta = 0.7;
  p.allow_exploratory = true;
  REQUIRE_NOTHROW(p.validate());
  auto rep = classify_incidences(p, table);
  REQUIRE(rep.semiprime_count == 4);

  // undersized table is a range error, not silent misreads
  DecompositionParams big;
  big.x = 5000;
  big.a = -1;
  REQUIRE_THROWS_AS(classify_incidences(big, table), RangeError);
}

TEST_CASE("asymptotic ratios", "[decomposition]") {
  auto table = PrimeTable::sieve(10003);

  // q_override = x pushes every incidence into A, so A = logR
  DecompositionParams p;
  p.x = 10000;
  p.a = -1;
  p.q_override = 10000.0;
  auto rep = classify_incidences(p, table);
  REQUIRE(rel_err(rep.sums[kA], rep.logR) <= 1e-12);
  double x = 10000.0;
  double want = rep.logR / (0.25 * x * std::log(std::log(x)));
  for (const auto& [name, value] : rep.ratios)
    if (name == "a_ratio") REQUIRE(rel_err(value, want) <= 1e-12);

  // theta = 0.625 exactly zeroes the C5 normalizer
  DecompositionParams p2;
  p2.x = 10000;
  p2.a = -1;
  p2.theta = 0.625;
  p2.allow_exploratory = true;
  auto rep2 = classify_incidences(p2, table);
  bool saw = false;
  for (const auto& [name, value] : rep2.ratios)
    if (name == "c5_ratio") {
      REQUIRE(std::isinf(value));
      saw = true;
    }
  REQUIRE(saw);
}
