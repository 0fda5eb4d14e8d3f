#include "grouptrack/meanshift.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace grouptrack;

namespace {

std::set<std::set<MobileId>> partition(const std::vector<Cluster>& cs) {
  std::set<std::set<MobileId>> out;
  for (const auto& c : cs) out.insert({c.members.begin(), c.members.end()});
  return out;
}

std::vector<FeaturePoint> line(std::initializer_list<double> xs) {
  std::vector<FeaturePoint> pts;
  MobileId id = 1;
  for (double x : xs) pts.push_back({{x}, id++});
  return pts;
}

std::vector<FeaturePoint> random_points(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<FeaturePoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i].owner = static_cast<MobileId>(i + 1);
    for (std::size_t d = 0; d < dim; ++d) pts[i].coords.push_back(u(rng));
  }
  return pts;
}

}  // namespace

TEST_CASE("single point") {
  auto cs = mean_shift(line({0.3}));
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].mode == std::vector<double>{0.3});
  CHECK(cs[0].members == std::vector<MobileId>{1});
}

TEST_CASE("two nearby points and a far one") {
  // fixed point by hand: 0.00 and 0.05 both move to 0.025, 0.90 stays
  auto cs = mean_shift(line({0.00, 0.05, 0.90}));
  CHECK(partition(cs) == std::set<std::set<MobileId>>{{1, 2}, {3}});
  for (const auto& c : cs)
    if (c.members.size() == 2) CHECK(c.mode[0] == doctest::Approx(0.025));
}

TEST_CASE("identical points form one cluster") {
  auto cs = mean_shift(line({0.4, 0.4, 0.4, 0.4}));
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].members.size() == 4);
}

TEST_CASE("default tolerance") {
  CHECK(tolerance_default() == 0.1);
  CHECK(MeanShiftParams{}.tolerance == 0.1);
}

TEST_CASE("invalid input") {
  CHECK_THROWS_AS(mean_shift(std::vector<FeaturePoint>{}), std::invalid_argument);
  std::vector<FeaturePoint> mixed{{{0.1}, 1}, {{0.1, 0.2}, 2}};
  CHECK_THROWS_AS(mean_shift(mixed), std::invalid_argument);
  CHECK_THROWS_AS(mean_shift(line({0.1}), {-0.1}), std::invalid_argument);
  CHECK_THROWS_AS(mean_shift(line({0.1}), {0.0}), std::invalid_argument);
}

TEST_CASE("property: clusters partition the owners") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = random_points(rng, 1 + rng() % 30, 1 + rng() % 6);
    auto cs = mean_shift(pts, {0.2});
    std::multiset<MobileId> seen;
    for (const auto& c : cs) {
      CHECK_FALSE(c.members.empty());
      seen.insert(c.members.begin(), c.members.end());
    }
    std::multiset<MobileId> owners;
    for (const auto& p : pts) owners.insert(p.owner);
    CHECK(seen == owners);
  }
}

TEST_CASE("property: input order does not matter") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = random_points(rng, 2 + rng() % 20, 1 + rng() % 4);
    const auto base = partition(mean_shift(pts, {0.25}));
    std::shuffle(pts.begin(), pts.end(), rng);
    CHECK(partition(mean_shift(pts, {0.25})) == base);
  }
}

TEST_CASE("property: modes stay within the input bounding box") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = random_points(rng, 1 + rng() % 20, 1 + rng() % 5);
    for (const auto& c : mean_shift(pts, {0.3}))
      for (std::size_t d = 0; d < c.mode.size(); ++d) {
        double lo = 1, hi = 0;
        for (const auto& p : pts) lo = std::min(lo, p.coords[d]), hi = std::max(hi, p.coords[d]);
        CHECK(c.mode[d] >= lo - 1e-12);
        CHECK(c.mode[d] <= hi + 1e-12);
      }
  }
}

TEST_CASE("property: parallel result is bit-identical to the reference") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = random_points(rng, 1 + rng() % 120, 1 + rng() % 40);
    const MeanShiftParams p{0.05 + 0.3 * (static_cast<double>(rng() % 100) / 100.0)};
    const auto a = mean_shift(pts, p);
    const auto b = mean_shift_reference(pts, p);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].members == b[i].members);
      CHECK(a[i].mode == b[i].mode);
    }
  }
}
