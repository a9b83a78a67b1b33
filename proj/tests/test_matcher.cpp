#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rmstmatch/errors.hpp"
#include "rmstmatch/matcher.hpp"
#include "rmstmatch/rng.hpp"

using namespace rmstmatch;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

std::vector<double> random_scores(RngStream& rng, std::size_t n) {
  std::vector<double> s(n);
  for (auto& v : s) v = 0.02 + 0.96 * rng.uniform01();
  return s;
}

} // namespace

TEST_CASE("single treated takes the nearest control") {
  const auto m = optimal_pair_match(std::vector<double>{0.5}, std::vector<double>{0.4, 0.9});
  REQUIRE(m.n_pairs() == 1);
  CHECK(m.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(m.total_distance == doctest::Approx(std::abs(logit(0.5) - logit(0.4))));
}

TEST_CASE("globally optimal where greedy fails") {
  // greedy from treated 0 grabs control 0 (0.69) and forces the bad pair
  const std::vector<double> treated{0.3, 0.7};
  const std::vector<double> control{0.69, 0.31};
  const auto m = optimal_pair_match(treated, control);
  REQUIRE(m.n_pairs() == 2);
  CHECK(m.pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(m.pairs[1] == std::pair<std::size_t, std::size_t>{1, 0});
  const double expected =
      std::abs(logit(0.3) - logit(0.31)) + std::abs(logit(0.7) - logit(0.69));
  CHECK(m.total_distance == doctest::Approx(expected).epsilon(1e-12));
  CHECK(m.total_distance == doctest::Approx(0.0944).epsilon(0.02));

  std::vector<double> lt{logit(0.3), logit(0.7)}, lc{logit(0.69), logit(0.31)};
  const auto brute = oracle::brute_force_match(lt, lc);
  CHECK(m.total_distance == doctest::Approx(brute.total).epsilon(1e-12));
  CHECK(m.pairs == brute.pairs);
}

TEST_CASE("matches factorial brute force on small instances") {
  RngStream rng(555);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t nt = 1 + static_cast<std::size_t>(rng.uniform01() * 7.0);
    const std::size_t nc = nt + static_cast<std::size_t>(rng.uniform01() * (8.0 - nt));
    const auto st = random_scores(rng, nt);
    const auto sc = random_scores(rng, nc);
    const auto m = optimal_pair_match(st, sc);

    std::vector<double> lt(nt), lc(nc);
    for (std::size_t i = 0; i < nt; ++i) lt[i] = logit(st[i]);
    for (std::size_t j = 0; j < nc; ++j) lc[j] = logit(sc[j]);
    const auto brute = oracle::brute_force_match(lt, lc);
    CHECK(m.total_distance == doctest::Approx(brute.total).epsilon(1e-10));
    CHECK(m.pairs == brute.pairs);
  }
}

TEST_CASE("lexicographic tie-breaking matches brute force") {
  // dyadic scores make all candidate costs exactly representable
  const std::vector<double> treated{0.5, 0.25};
  const std::vector<double> control{0.25, 0.5, 0.75};
  const auto m = optimal_pair_match(treated, control, DistanceMetric::raw);
  const auto brute = oracle::brute_force_match(treated, control);
  CHECK(m.pairs == brute.pairs);
  CHECK(m.total_distance == doctest::Approx(brute.total));

  // fully symmetric instance: every assignment costs the same
  const std::vector<double> t2{0.5, 0.5};
  const std::vector<double> c2{0.5, 0.5, 0.5};
  const auto m2 = optimal_pair_match(t2, c2, DistanceMetric::raw);
  CHECK(m2.total_distance == 0.0);
  CHECK(m2.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(m2.pairs[1] == std::pair<std::size_t, std::size_t>{1, 1});
}

TEST_CASE("beats 1000 random assignments") {
  RngStream rng(808);
  const auto st = random_scores(rng, 30);
  const auto sc = random_scores(rng, 70);
  const auto m = optimal_pair_match(st, sc);

  std::vector<std::size_t> idx(70);
  for (int trial = 0; trial < 1000; ++trial) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 69; i > 0; --i)
      std::swap(idx[i], idx[static_cast<std::size_t>(rng.uniform01() * (i + 1))]);
    double cost = 0.0;
    for (std::size_t i = 0; i < 30; ++i) cost += std::abs(logit(st[i]) - logit(sc[idx[i]]));
    CHECK(m.total_distance <= cost + 1e-12);
  }
}

TEST_CASE("permutation equivariance") {
  RngStream rng(31);
  const auto st = random_scores(rng, 25);
  auto sc = random_scores(rng, 60);
  const auto base = optimal_pair_match(st, sc);

  std::vector<std::size_t> perm(60);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 59; i > 0; --i)
    std::swap(perm[i], perm[static_cast<std::size_t>(rng.uniform01() * (i + 1))]);
  std::vector<double> permuted(60);
  for (std::size_t j = 0; j < 60; ++j) permuted[perm[j]] = sc[j];

  const auto moved = optimal_pair_match(st, permuted);
  CHECK(moved.total_distance == doctest::Approx(base.total_distance).epsilon(1e-12));
  for (std::size_t i = 0; i < base.n_pairs(); ++i) {
    CHECK(moved.pairs[i].first == base.pairs[i].first);
    CHECK(moved.pairs[i].second == perm[base.pairs[i].second]);
  }
}

TEST_CASE("metric changes the selected control") {
  const std::vector<double> treated{0.2};
  const std::vector<double> control{0.05, 0.38};
  const auto raw = optimal_pair_match(treated, control, DistanceMetric::raw);
  const auto lgt = optimal_pair_match(treated, control, DistanceMetric::logit);
  CHECK(raw.pairs[0].second == 0);  // |0.2-0.05| < |0.2-0.38|
  CHECK(lgt.pairs[0].second == 1);  // logit stretches the left tail
}

TEST_CASE("large instances agree with the DP oracle path") {
  // instance above the lexicographic-refinement threshold; optimal cost must
  // still match brute force computed on a random subsample ordering
  RngStream rng(99);
  const auto st = random_scores(rng, 80);
  const auto sc = random_scores(rng, 200);
  const auto m = optimal_pair_match(st, sc);
  REQUIRE(m.n_pairs() == 80);
  std::vector<char> used(200, 0);
  for (const auto& [t, c] : m.pairs) {
    CHECK(!used[c]);
    used[c] = 1;
  }
  const auto rerun = optimal_pair_match(st, sc);
  CHECK(rerun.pairs == m.pairs); // deterministic
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS((void)optimal_pair_match(std::vector<double>{0.5, 0.6},
                                           std::vector<double>{0.5}),
                  insufficient_controls_error);
  CHECK_THROWS_AS((void)optimal_pair_match(std::vector<double>{}, std::vector<double>{0.5}),
                  insufficient_controls_error);
  CHECK_THROWS_AS((void)optimal_pair_match(std::vector<double>{1.0}, std::vector<double>{0.5}),
                  validation_error);
  CHECK_THROWS_AS((void)optimal_pair_match(std::vector<double>{0.5}, std::vector<double>{0.0}),
                  validation_error);
}
