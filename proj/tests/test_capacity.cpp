#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "rffcap/capacity.hpp"

using namespace rffcap;

namespace {

// Lower-bound ratio in extended precision, written out independently.
long double ratio_ld(long double emi, int n, long double pe) {
  const long double h = pe <= 0 || pe >= 1 ? 0.0L : -pe * std::log2(pe) - (1 - pe) * std::log2(1 - pe);
  return (std::log2(static_cast<long double>(n)) - emi - h) / std::log2(static_cast<long double>(n - 1));
}

int capacity_ld(long double emi, long double lambda, int n_max) {
  int best = 2;
  for (int n = 3; n <= n_max; ++n)
    if (ratio_ld(emi, n, lambda) <= lambda) best = n;
  return best;
}

}  // namespace

TEST_SUITE("capacity") {
  TEST_CASE("Fano lower bound examples") {
    CHECK(fano_lower_bound(std::log2(8.0), 8, 0.3).value == 0.0);
    CHECK(fano_lower_bound(0.0, 4, 0.0).value == doctest::Approx(2.0 / std::log2(3.0)));
    CHECK(fano_lower_bound(0.0, 4, 0.0).value == doctest::Approx(1.26186).epsilon(1e-5));
    const auto b = fano_lower_bound(3.5, 12, 0.01);
    CHECK(b.value == doctest::Approx(static_cast<double>(ratio_ld(3.5L, 12, 0.01L))).epsilon(1e-12));
    CHECK(b.value == doctest::Approx(0.00121).epsilon(0.005));
  }

  TEST_CASE("Fano lower bound keeps the raw value") {
    const auto b = fano_lower_bound(5.0, 4, 0.1);
    CHECK(b.raw < 0.0);
    CHECK(b.value == 0.0);
  }

  TEST_CASE("Fano lower bound needs three classes") {
    CHECK_THROWS_AS(fano_lower_bound(0.5, 2, 0.1), std::invalid_argument);
  }

  TEST_CASE("Fano upper bound examples") {
    CHECK(fano_upper_bound(std::log2(16.0), 16).value == 0.0);
    CHECK(fano_upper_bound(0.0, 4).raw == doctest::Approx(1.0));
    CHECK(fano_upper_bound(3.2, 16).raw == doctest::Approx(0.4));
    const auto big = fano_upper_bound(0.0, 64);
    CHECK(big.raw == doctest::Approx(3.0));
    CHECK(big.value == 1.0);
    CHECK(fano_upper_bound(5.0, 4).value == 0.0);
  }

  TEST_CASE("consistency verdicts") {
    CHECK(check_fano_consistency(std::log2(10.0), 10, 0.0));
    CHECK_FALSE(check_fano_consistency(0.0, 4, 0.01));
    CHECK(check_fano_consistency(3.5, 12, 0.0121));
  }

  TEST_CASE("capacity examples") {
    const auto zero = user_capacity(0.0, 0.01, 1000);
    CHECK(zero.below_min);
    CHECK(zero.n_c == 2);
    CHECK(zero.trace.front() == doctest::Approx(static_cast<double>(ratio_ld(0.0L, 3, 0.01L))));
    CHECK(zero.trace.front() == doctest::Approx(1.504).epsilon(0.001));

    const auto r = user_capacity(3.5, 0.01, 1000);
    CHECK(r.n_c == 12);
    CHECK_FALSE(r.saturated);
    CHECK_FALSE(r.below_min);
    CHECK(r.trace[12 - 3] == doctest::Approx(0.00121).epsilon(0.005));
    CHECK(r.trace[13 - 3] == doctest::Approx(0.03338).epsilon(0.001));
    CHECK(r.trace.size() == 1000 - 2);

    const auto sat = user_capacity(30.0, 0.1, 1000);
    CHECK(sat.saturated);
    CHECK(sat.n_c == 1000);
  }

  TEST_CASE("capacity matches the extended-precision scan on a grid") {
    for (double emi = 0.0; emi <= 8.0; emi += 0.173)
      for (double lambda : {0.005, 0.01, 0.05, 0.1, 0.3}) {
        CAPTURE(emi);
        CAPTURE(lambda);
        CHECK(user_capacity(emi, lambda, 2000).n_c == capacity_ld(emi, lambda, 2000));
      }
  }

  TEST_CASE("boundary exactness (property)") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> emi(0.0, 9.0);
    std::uniform_real_distribution<double> lam(0.001, 0.49);
    for (int t = 0; t < 300; ++t) {
      const double e = emi(rng), l = lam(rng);
      const auto r = user_capacity(e, l, 3000);
      if (r.saturated || r.below_min) continue;
      CHECK(fano_lower_bound(e, r.n_c, l).raw <= l);
      CHECK(fano_lower_bound(e, r.n_c + 1, l).raw > l);
    }
  }

  TEST_CASE("capacity is monotone in EMI and in the threshold (property)") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> emi(0.0, 8.0);
    std::uniform_real_distribution<double> lam(0.001, 0.45);
    for (int t = 0; t < 200; ++t) {
      const double e1 = emi(rng), e2 = emi(rng), l1 = lam(rng), l2 = lam(rng);
      const double elo = std::min(e1, e2), ehi = std::max(e1, e2);
      const double llo = std::min(l1, l2), lhi = std::max(l1, l2);
      CHECK(user_capacity(elo, llo, 2000).n_c <= user_capacity(ehi, llo, 2000).n_c);
      CHECK(user_capacity(elo, llo, 2000).n_c <= user_capacity(elo, lhi, 2000).n_c);
    }
  }

  TEST_CASE("capacity preconditions") {
    CHECK_THROWS_AS(user_capacity(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(user_capacity(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(user_capacity(1.0, 0.1, 2), std::invalid_argument);
  }

  TEST_CASE("capacity curve") {
    const std::vector<double> thresholds = {0.01, 0.10};
    CHECK(capacity_curve({}, thresholds).empty());

    const std::vector<std::pair<double, double>> one = {{1.0, 3.5}};
    const auto rows = capacity_curve(one, thresholds, 1000);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].per_threshold[0].n_c == 12);
    CHECK(rows[0].parameter == 1.0);

    std::vector<std::pair<double, double>> series;
    for (int i = 0; i < 30; ++i) series.emplace_back(i, 0.2 * i);
    const auto curve = capacity_curve(series, thresholds, 1000);
    for (std::size_t i = 1; i < curve.size(); ++i)
      for (std::size_t k = 0; k < thresholds.size(); ++k)
        CHECK(curve[i].per_threshold[k].n_c >= curve[i - 1].per_threshold[k].n_c);
  }
}
