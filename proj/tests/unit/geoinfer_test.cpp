#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "geoaudit/geoinfer.hpp"

using namespace geoaudit;
using namespace geoaudit::geoinfer;
using measure::MeasurementResult;

namespace {

vantage::VantagePoint vp(const char* cc, double lat, double lon) {
  vantage::VantagePoint v;
  v.id = "v";
  v.country = CountryCode::parse(cc);
  v.lat = lat;
  v.lon = lon;
  return v;
}

CountryCode C(const char* s) { return CountryCode::parse(s); }

}  // namespace

TEST(MinRttTest, Examples) {
  const auto a = parse_address("192.0.2.1");
  const auto m = min_rtt({{"A", a, {10, 12}, 0}, {"B", a, {9, 30}, 0}});
  EXPECT_EQ(m.vantage_id, "B");
  EXPECT_EQ(m.rtt_ms, 9);
  EXPECT_EQ(min_rtt({{"Z", a, {4}, 0}}).vantage_id, "Z");
  EXPECT_EQ(min_rtt({{"20", a, {4}, 0}, {"3", a, {4}, 0}}).vantage_id, "3");
  try {
    min_rtt({{"A", a, {}, 0}, {"B", a, {}, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoResponses);
  }
}

TEST(RadiusTest, Examples) {
  EXPECT_NEAR(rtt_to_radius(100, 2.0 / 3.0), 9993.08, 0.01);
  EXPECT_NEAR(rtt_to_radius(100, 1.0), 14989.62, 0.01);
  EXPECT_EQ(rtt_to_radius(0, 2.0 / 3.0), 0.0);
  EXPECT_THROW(rtt_to_radius(-1, 1.0), Error);
}

TEST(HaversineTest, KnownAndProperties) {
  // A quarter meridian is pi/2 * R.
  EXPECT_NEAR(geo::haversine_km({0, 0}, {90, 0}), 3.14159265358979323846 / 2 * geo::kEarthRadiusKm, 1e-6);
  EXPECT_NEAR(geo::haversine_km({0, 0}, {0, 180}), geo::kMaxSurfaceDistanceKm, 1e-6);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> lat(-90, 90);
  std::uniform_real_distribution<double> lon(-180, 180);
  for (int i = 0; i < 1000; ++i) {
    const geo::LatLon a{lat(rng), lon(rng)};
    const geo::LatLon b{lat(rng), lon(rng)};
    const geo::LatLon c{lat(rng), lon(rng)};
    EXPECT_NEAR(geo::haversine_km(a, b), geo::haversine_km(b, a), 1e-9);
    EXPECT_LE(geo::haversine_km(a, c), geo::haversine_km(a, b) + geo::haversine_km(b, c) + 1e-6);
  }
}

TEST(GeometryTest, BuiltinCoversRegionMap) {
  EXPECT_TRUE(geo::CountryGeometry::builtin().missing_from(RegionMap::builtin()).empty());
  EXPECT_THROW(geo::CountryGeometry::load("a,b\n"), Error);
}

TEST(FeasibleTest, RadiusZeroIsOwnCountry) {
  Config cfg;
  EXPECT_EQ(feasible_countries(vp("MU", -20.16, 57.5), 0, cfg), (std::set<CountryCode>{C("MU")}));
}

TEST(FeasibleTest, GlobalRadiusCoversAll) {
  Config cfg;
  const auto all = feasible_countries(vp("US", 38.9, -77.0), 20037.5, cfg);
  EXPECT_EQ(all.size(), 244U);
  EXPECT_EQ(feasible_rirs(all, RegionMap::builtin()).rirs, RirSet::all());
}

TEST(FeasibleTest, FivePointFixture) {
  // Own country at the origin, four more along the equator.
  const std::map<CountryCode, std::vector<geo::LatLon>> pts = {
      {C("AA"), {{0, 0}}}, {C("BB"), {{0, 5}}}, {C("CC"), {{0, 12}}}, {C("DD"), {{0, 20}}}, {C("EE"), {{0, 33}}}};
  const geo::CountryGeometry g(pts);
  Config cfg;
  cfg.geometry = &g;
  const auto v = vp("AA", 0, 0);
  std::vector<std::pair<double, CountryCode>> dist;
  for (const auto& [cc, p] : pts) dist.emplace_back(geo::haversine_km({0, 0}, p[0]), cc);
  std::sort(dist.begin(), dist.end());
  // Radius between the 2nd and 3rd nearest non-own countries.
  const double radius = (dist[2].first + dist[3].first) / 2;
  EXPECT_EQ(feasible_countries(v, radius, cfg), (std::set<CountryCode>{C("AA"), dist[1].second, dist[2].second}));
  // Exactly on a point's distance counts as inside.
  EXPECT_EQ(feasible_countries(v, dist[1].first, cfg).size(), 2U);
}

TEST(FeasibleRirsTest, Examples) {
  const auto& m = RegionMap::builtin();
  RirSet ripe;
  ripe.insert(Rir::Ripe);
  EXPECT_EQ(feasible_rirs({C("DE"), C("FR")}, m).rirs, ripe);
  RirSet ab;
  ab.insert(Rir::Arin);
  ab.insert(Rir::Lacnic);
  EXPECT_EQ(feasible_rirs({C("US"), C("BR")}, m).rirs, ab);
  const auto img = feasible_rirs({C("US"), C("XK")}, m);
  EXPECT_EQ(img.unmapped, 1U);
}

TEST(FeasibleTest, MonotoneInFactorAndRadius) {
  Config cfg;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> rtt(0, 150);
  const auto v = vp("DE", 50.1, 8.7);
  for (int i = 0; i < 40; ++i) {
    const double r = rtt(rng);
    const auto slow = feasible_countries(v, rtt_to_radius(r, 2.0 / 3.0), cfg);
    const auto fast = feasible_countries(v, rtt_to_radius(r, 1.0), cfg);
    EXPECT_TRUE(std::includes(fast.begin(), fast.end(), slow.begin(), slow.end()));
    const auto bigger = feasible_countries(v, rtt_to_radius(r + 5, 2.0 / 3.0), cfg);
    EXPECT_TRUE(feasible_rirs(slow, *cfg.region_map).rirs.is_subset_of(feasible_rirs(bigger, *cfg.region_map).rirs));
  }
}

TEST(InferTest, EndToEnd) {
  Config cfg;
  auto de = vp("DE", 50.1, 8.7);
  de.id = "1";
  auto us = vp("US", 38.9, -77.0);
  us.id = "2";
  const std::map<std::string, const vantage::VantagePoint*> vs = {{"1", &de}, {"2", &us}};
  const auto a = parse_address("192.0.2.1");
  const auto region = infer({{"1", a, {3.0, 2.5}, 0}, {"2", a, {90}, 0}}, vs, cfg);
  EXPECT_EQ(region.min_vantage_id, "1");
  EXPECT_EQ(region.min_rtt_ms, 2.5);
  EXPECT_TRUE(region.countries.count(C("DE")));
  RirSet ripe;
  ripe.insert(Rir::Ripe);
  EXPECT_EQ(region.rirs, ripe);
  EXPECT_THROW(infer({{"9", a, {1}, 0}}, vs, cfg), Error);
}
