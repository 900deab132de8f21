#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "geoaudit/report.hpp"
#include "geoaudit/text.hpp"
#include "support/synthetic.hpp"

using namespace geoaudit;
using namespace geoaudit::report;
using classify::Consistency;

namespace {

Registration reg(const char* p, Rir rir, std::optional<const char*> cc) {
  Registration r;
  r.prefix = parse_prefix(p);
  r.rir = rir;
  if (cc) r.org_country = CountryCode::parse(*cc);
  return r;
}

ConsistencyRecord rec(const Prefix& p, Rir rir, Consistency c, Status status = Status::Allocated) {
  ConsistencyRecord r;
  r.prefix = p;
  r.rir_reg = rir;
  r.cls = c;
  r.status = status;
  r.targets.push_back({Address(p.family(), p.network().value() | 1), {}, {}, {}, {}, c});
  return r;
}

Prefix nth24(std::uint32_t i) { return Prefix(Address::v4(0x0A000000U | (i << 8)), 24); }

std::filesystem::path temp_dir(const char* name) {
  auto d = std::filesystem::temp_directory_path() / ("geoaudit_report_" + std::string(name));
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST(OroTest, Examples) {
  const auto& m = RegionMap::builtin();
  const auto s = oro_stats({reg("104.148.63.0/24", Rir::Arin, "BR"), reg("193.0.0.0/21", Rir::Ripe, "DE")}, m,
                           Family::V4);
  EXPECT_EQ(s.row(Rir::Arin).oro_prefixes, 1U);
  EXPECT_EQ(s.row(Rir::Ripe).oro_prefixes, 0U);
  EXPECT_EQ(s.row(Rir::Ripe).units, 8.0);
  EXPECT_EQ((s.flows.at({Rir::Arin, Rir::Lacnic})), 1U);
}

TEST(OroTest, FifteenPercentFixture) {
  // 100 AFRINIC registrations, three in every twenty with a European org.
  std::vector<Registration> regs;
  std::size_t oro = 0;
  for (std::uint32_t i = 0; i < 100; ++i) {
    Registration r;
    r.prefix = nth24(i);
    r.rir = Rir::Afrinic;
    r.org_country = CountryCode::parse(i % 20 < 3 ? "FR" : "ZA");
    oro += i % 20 < 3 ? 1 : 0;
    regs.push_back(r);
  }
  const auto s = oro_stats(regs, RegionMap::builtin(), Family::V4);
  EXPECT_EQ(s.row(Rir::Afrinic).prefixes, 100U);
  EXPECT_EQ(s.row(Rir::Afrinic).oro_prefixes, oro);
  EXPECT_DOUBLE_EQ(s.row(Rir::Afrinic).oro_prefix_fraction(), 0.15);
  EXPECT_DOUBLE_EQ(s.row(Rir::Afrinic).oro_unit_fraction(), 0.15);
}

TEST(OroTest, UnknownCountriesSeparate) {
  const auto s = oro_stats({reg("10.0.0.0/24", Rir::Arin, std::nullopt), reg("10.0.1.0/24", Rir::Arin, "XK"),
                            reg("10.0.2.0/24", Rir::Arin, "US")},
                           RegionMap::builtin(), Family::V4);
  EXPECT_EQ(s.row(Rir::Arin).unknown_country, 2U);
  EXPECT_EQ(s.row(Rir::Arin).oro_prefixes, 0U);
  EXPECT_EQ(s.row(Rir::Arin).unknown_units, 2.0);
}

TEST(OroTest, NestedSpaceCountedOnce) {
  // An ORO /24 inside an in-region /16.
  const auto s = oro_stats({reg("10.0.0.0/16", Rir::Arin, "US"), reg("10.0.5.0/24", Rir::Arin, "JP")},
                           RegionMap::builtin(), Family::V4);
  EXPECT_EQ(s.row(Rir::Arin).units, 256.0);
  EXPECT_EQ(s.row(Rir::Arin).oro_units, 1.0);
}

TEST(OroTest, UnitsAgainstBruteForce) {
  std::mt19937 rng(21);
  std::vector<Registration> regs;
  std::set<Prefix> seen;
  while (regs.size() < 200) {
    const auto p = Prefix::covering(Address::v4(0x0A000000U | (rng() & 0x000FFFFFU)), 12 + static_cast<int>(rng() % 13));
    if (!seen.insert(p).second) continue;
    Registration r;
    r.prefix = p;
    r.rir = Rir::Ripe;
    r.org_country = CountryCode::parse(rng() % 4 == 0 ? "US" : "DE");
    regs.push_back(r);
  }
  // Each /24 belongs to its most specific covering registration.
  double units = 0;
  double oro = 0;
  for (std::uint32_t b = 0; b < (1U << 12); ++b) {
    const auto block = Address::v4(0x0A000000U | (b << 8));
    const Registration* best = nullptr;
    for (const auto& r : regs) {
      if (r.prefix.contains(block) && (!best || r.prefix.length() > best->prefix.length())) best = &r;
    }
    if (!best) continue;
    units += 1;
    if (best->org_country->str() == "US") oro += 1;
  }
  const auto s = oro_stats(regs, RegionMap::builtin(), Family::V4);
  EXPECT_DOUBLE_EQ(s.row(Rir::Ripe).units, units);
  EXPECT_DOUBLE_EQ(s.row(Rir::Ripe).oro_units, oro);
  EXPECT_LE(s.row(Rir::Ripe).oro_units, s.row(Rir::Ripe).units);
}

TEST(DistributionTest, AllFcAndMix) {
  std::vector<ConsistencyRecord> rs;
  for (std::uint32_t i = 0; i < 10; ++i) rs.push_back(rec(nth24(i), kAllRirs[i % 5], Consistency::FC));
  const auto d = distribution(rs);
  for (Rir r : kAllRirs) EXPECT_EQ(d.fractions(r), (std::array<double, 5>{1, 0, 0, 0, 0}));

  // ARIN: 6 FC, 2 OC, 1 RI, 1 FI; LACNIC: 3 OI, 1 FC; one unclassified record.
  std::vector<ConsistencyRecord> mix;
  const Consistency arin[] = {Consistency::FC, Consistency::FC, Consistency::FC, Consistency::FC, Consistency::FC,
                              Consistency::FC, Consistency::OC, Consistency::OC, Consistency::RI, Consistency::FI};
  std::uint32_t n = 0;
  for (auto c : arin) mix.push_back(rec(nth24(n++), Rir::Arin, c));
  for (auto c : {Consistency::OI, Consistency::OI, Consistency::OI, Consistency::FC}) {
    mix.push_back(rec(nth24(n++), Rir::Lacnic, c));
  }
  auto dropped = rec(nth24(n++), Rir::Arin, Consistency::FC);
  dropped.cls.reset();
  dropped.filter_reason = classify::FilterReason::Anycast;
  mix.push_back(dropped);
  const auto m = distribution(mix);
  EXPECT_EQ(m.fractions(Rir::Arin), (std::array<double, 5>{0.6, 0.2, 0, 0.1, 0.1}));
  EXPECT_EQ(m.fractions(Rir::Lacnic), (std::array<double, 5>{0.25, 0, 0.75, 0, 0}));
  const auto all = m.fractions_all();
  EXPECT_DOUBLE_EQ(all[0], 7.0 / 14);
  EXPECT_DOUBLE_EQ(all[2], 3.0 / 14);
  double sum = 0;
  for (double f : all) sum += f;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_EQ(m.fractions(Rir::Apnic), (std::array<double, 5>{}));
}

TEST(DistributionTest, SimulatorTwoPercentPlant) {
  std::vector<synth::PrefixSpec> specs(500);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    specs[i].rir_reg = kAllRirs[i % 5];
    if (i % 50 == 17) specs[i].planted = i % 100 == 17 ? Consistency::RI : Consistency::FI;
  }
  synth::Campaign c;
  synth::make_campaign(c, specs, 77);
  measure::SimulatorBackend backend(c.world);
  const auto out = campaign::run(c.inputs, synth::options_for(c), backend);
  const auto d = distribution(out.audit.records);
  EXPECT_DOUBLE_EQ(d.fractions_all()[0], 0.98);
}

TEST(CharacteristicsTest, Matrices) {
  EXPECT_TRUE(characteristics({}, {}).by_year.empty());
  std::vector<ConsistencyRecord> rs;
  std::vector<Registration> regs;
  for (std::uint32_t i = 0; i < 12; ++i) {
    const bool fi = i < 4;
    rs.push_back(rec(nth24(i), Rir::Arin, fi ? Consistency::FI : Consistency::FC,
                     fi ? Status::LegacyOrUnknown : Status::Assigned));
    Registration r;
    r.prefix = nth24(i);
    r.rir = Rir::Arin;
    if (i != 11) r.last_updated = parse_date(i % 2 == 0 ? "2019-03-01" : "2023-12-31");
    regs.push_back(r);
  }
  const auto ch = characteristics(rs, regs);
  EXPECT_EQ(ch.by_status[static_cast<int>(Consistency::FI)], (std::array<std::size_t, 3>{0, 0, 4}));
  EXPECT_EQ(ch.by_status[static_cast<int>(Consistency::FC)], (std::array<std::size_t, 3>{0, 8, 0}));
  EXPECT_EQ(ch.by_year.at(2019)[static_cast<int>(Consistency::FI)], 2U);
  EXPECT_EQ(ch.by_year.at(2023)[static_cast<int>(Consistency::FC)], 3U);
  EXPECT_EQ(ch.by_year.at(0)[static_cast<int>(Consistency::FC)], 1U);
}

TEST(GeoDbTest, DetectionRule) {
  const auto& m = RegionMap::builtin();
  const auto p = nth24(1);
  const std::vector<ConsistencyRecord> rs = {rec(p, Rir::Arin, Consistency::RI)};
  EXPECT_EQ(geodb_detection(rs, load_geodb("prefix,country\n10.0.1.0/24,JP\n", "x"), m).providers["x"][0].detected, 1U);
  EXPECT_EQ(geodb_detection(rs, load_geodb("10.0.0.0/16,US\n", "x"), m).providers["x"][0].detected, 0U);
  const auto none = geodb_detection(rs, load_geodb("11.0.0.0/16,JP\n", "x"), m).providers["x"][0];
  EXPECT_EQ(none.covered, 0U);
  EXPECT_EQ(none.no_coverage(), 1U);
  EXPECT_THROW(load_geodb("10.0.0.0/16\n", "x"), Error);
}

TEST(GeoDbTest, NinetyTwoPercentFixture) {
  // 25 ARIN RI/FI records; provider A places 23 in Japan, 2 in the US.
  std::vector<ConsistencyRecord> rs;
  std::string csv = "prefix,country\n";
  std::size_t oor = 0;
  for (std::uint32_t i = 0; i < 25; ++i) {
    rs.push_back(rec(nth24(i), Rir::Arin, i % 3 == 0 ? Consistency::FI : Consistency::RI));
    const bool out_of_region = i != 4 && i != 19;
    oor += out_of_region ? 1 : 0;
    csv += format_prefix(nth24(i)) + (out_of_region ? ",JP\n" : ",US\n");
  }
  rs.push_back(rec(nth24(30), Rir::Arin, Consistency::FC));
  const auto entries = load_geodb(csv, "A");
  const auto row = geodb_detection(rs, entries, RegionMap::builtin()).providers["A"][0];
  EXPECT_EQ(row.inconsistent, 25U);
  EXPECT_EQ(row.detected, oor);
  EXPECT_DOUBLE_EQ(row.fraction(), 0.92);

  // Splitting every entry into two halves with the same country changes nothing.
  std::vector<GeoDbEntry> split;
  for (const auto& e : entries) {
    split.push_back({Prefix(e.prefix.network(), 25), e.country, "A"});
    split.push_back({Prefix(Address::v4(static_cast<std::uint32_t>(e.prefix.network().value()) + 128), 25), e.country, "A"});
  }
  const auto row2 = geodb_detection(rs, split, RegionMap::builtin()).providers["A"][0];
  EXPECT_EQ(row2.detected, row.detected);
  EXPECT_EQ(row2.covered, row.covered);
}

TEST(GeoDbTest, SameRegionVariant) {
  auto r = rec(nth24(1), Rir::Arin, Consistency::RI);
  r.rir_geo.insert(Rir::Ripe);
  const auto entries = load_geodb("10.0.1.0/24,JP\n", "x");
  EXPECT_EQ(geodb_detection({r}, entries, RegionMap::builtin(), false).providers["x"][0].detected, 1U);
  EXPECT_EQ(geodb_detection({r}, entries, RegionMap::builtin(), true).providers["x"][0].detected, 0U);
}

TEST(LeasingTest, Overlap) {
  const auto fi = rec(parse_prefix("10.0.5.0/24"), Rir::Arin, Consistency::FI);
  EXPECT_EQ(leasing_overlap({fi}, {parse_prefix("10.0.0.0/20")}).fi[0].leased, 1U);
  EXPECT_EQ(leasing_overlap({fi}, {parse_prefix("10.0.5.128/25")}).fi[0].leased, 1U);
  EXPECT_EQ(leasing_overlap({fi}, {}).fi[0].fraction(), 0.0);
  EXPECT_EQ(leasing_overlap({fi}, {parse_prefix("10.0.6.0/24")}).fi[0].leased, 0U);
}

TEST(LeasingTest, ThreeOfElevenArinFi) {
  std::vector<ConsistencyRecord> rs;
  for (std::uint32_t i = 0; i < 11; ++i) rs.push_back(rec(nth24(i * 16), Rir::Arin, Consistency::FI));
  for (std::uint32_t i = 0; i < 5; ++i) rs.push_back(rec(nth24(500 + i), Rir::Arin, Consistency::RI));
  const std::vector<Prefix> leased = {parse_prefix("10.0.0.0/20"), parse_prefix("10.0.16.0/24"),
                                      parse_prefix("10.0.32.0/23")};
  const auto l = leasing_overlap(rs, leased);
  EXPECT_EQ(l.fi[0].records, 11U);
  EXPECT_EQ(l.fi[0].leased, 3U);
  EXPECT_NEAR(l.fi[0].fraction(), 0.273, 0.0005);
  EXPECT_EQ(l.ri[0].leased, 0U);
}

TEST(WriteReportTest, FullAndMissingInputs) {
  std::vector<ConsistencyRecord> rs = {rec(nth24(1), Rir::Arin, Consistency::RI), rec(nth24(2), Rir::Ripe, Consistency::FC)};
  ReportInputs in;
  in.records = rs;
  in.regs = {reg("10.0.1.0/24", Rir::Arin, "US"), reg("10.0.2.0/24", Rir::Ripe, "DE")};
  in.geodb = load_geodb("10.0.0.0/16,JP\n", "prov");
  in.leased = std::vector<Prefix>{parse_prefix("10.0.1.0/24")};
  const auto dir = temp_dir("full");
  write_report(in, dir);
  for (const char* f : {"pipeline.csv", "distribution.csv", "characteristics_status.csv", "characteristics_age.csv",
                        "oro.csv", "oro_flows.csv", "geodb_detection.csv", "leasing.csv", "summary.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }

  ReportInputs bare;
  bare.records = rs;
  const auto dir2 = temp_dir("bare");
  const auto summary = write_report(bare, dir2);
  EXPECT_FALSE(std::filesystem::exists(dir2 / "geodb_detection.csv"));
  EXPECT_NE(summary.find("skipped (no geodb files)"), std::string::npos);

  const auto dir3 = temp_dir("empty");
  write_report(ReportInputs{}, dir3);
  const auto dist = text::read_file((dir3 / "distribution.csv").string());
  EXPECT_EQ(dist.substr(0, dist.find('\n')), "rir,prefixes,FC,OC,OI,RI,FI");
  EXPECT_NE(dist.find("ALL,0,0.000000"), std::string::npos);
}
