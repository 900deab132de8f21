#include "support/synthetic.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "geoaudit/whois.hpp"

namespace synth {

using namespace geoaudit;

const std::vector<Country>& countries() {
  // Region centres are at least 5,000 km apart; countries sit within 1.5
  // degrees of their centre.
  static const std::vector<Country> list = {
      {"US", Rir::Arin, {40.0, -100.0}},   {"CA", Rir::Arin, {41.5, -99.0}},    {"BS", Rir::Arin, {39.0, -101.0}},
      {"DE", Rir::Ripe, {50.0, 10.0}},     {"FR", Rir::Ripe, {49.0, 8.5}},      {"NL", Rir::Ripe, {51.2, 11.0}},
      {"JP", Rir::Apnic, {30.0, 110.0}},   {"AU", Rir::Apnic, {31.0, 111.5}},   {"IN", Rir::Apnic, {29.0, 109.0}},
      {"BR", Rir::Lacnic, {-15.0, -55.0}}, {"AR", Rir::Lacnic, {-16.0, -56.0}}, {"CL", Rir::Lacnic, {-14.0, -54.0}},
      {"ZA", Rir::Afrinic, {0.0, 25.0}},   {"NG", Rir::Afrinic, {1.0, 26.0}},   {"KE", Rir::Afrinic, {-1.0, 24.0}},
  };
  return list;
}

RegionMap region_map() {
  std::map<CountryCode, Rir> m;
  for (const auto& c : countries()) m.emplace(CountryCode::parse(c.code), c.rir);
  return RegionMap(std::move(m));
}

geo::CountryGeometry geometry() {
  std::map<CountryCode, std::vector<geo::LatLon>> m;
  for (const auto& c : countries()) m[CountryCode::parse(c.code)].push_back(c.at);
  return geo::CountryGeometry(std::move(m));
}

Prefix prefix_of(std::size_t i, Family family) {
  const auto n = static_cast<std::uint32_t>(i);
  if (family == Family::V4) return Prefix(Address::v4(0x0A000000U | (n << 8)), 24);
  const u128 net = (static_cast<u128>(0x20010db8U) << 96) | (static_cast<u128>(n) << 80);
  return Prefix(Address(Family::V6, net), 48);
}

Address target_of(const Prefix& p, int which) {
  return Address(p.family(), p.network().value() | static_cast<u128>(which == 0 ? 10 : 20));
}

std::vector<PrefixSpec> mixed_specs(std::size_t n, double inconsistent_rate, std::uint64_t seed, Family family) {
  std::mt19937_64 rng(seed);
  std::vector<PrefixSpec> out;
  const auto bad = static_cast<std::size_t>(inconsistent_rate * static_cast<double>(n) + 0.5);
  for (std::size_t i = 0; i < n; ++i) {
    PrefixSpec s;
    s.rir_reg = kAllRirs[i % 5];
    s.family = family;
    if (i < bad) {
      s.planted = rng() % 2 == 0 ? Consistency::RI : Consistency::FI;
    } else {
      static constexpr Consistency kGood[] = {Consistency::FC, Consistency::FC, Consistency::OC, Consistency::OI};
      s.planted = kGood[rng() % 4];
    }
    out.push_back(s);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

namespace {

std::vector<const Country*> in_region(Rir r) {
  std::vector<const Country*> out;
  for (const auto& c : countries()) {
    if (c.rir == r) out.push_back(&c);
  }
  return out;
}

Rir other_than(std::mt19937_64& rng, std::initializer_list<Rir> avoid) {
  while (true) {
    const Rir r = kAllRirs[rng() % 5];
    if (std::find(avoid.begin(), avoid.end(), r) == avoid.end()) return r;
  }
}

const Country* pick(std::mt19937_64& rng, Rir r) {
  const auto pool = in_region(r);
  return pool[rng() % pool.size()];
}

}  // namespace

void make_campaign(Campaign& out, const std::vector<PrefixSpec>& specs, std::uint64_t seed, double noise_ms) {
  out.region_map = region_map();
  out.geometry = geometry();
  out.world = {};
  out.world.noise_ms = noise_ms;
  out.world.seed = seed;
  auto& in = out.inputs;
  in = {};
  std::mt19937_64 rng(seed);

  int next_id = 1001;
  for (const auto& c : countries()) {
    for (int k = 0; k < 4; ++k) {
      vantage::VantagePoint v;
      v.id = std::to_string(next_id++);
      v.kind = k < 2 ? vantage::Kind::Anchor : vantage::Kind::Probe;
      v.country = CountryCode::parse(c.code);
      v.lat = c.at.lat + 0.1 * (k + 1);
      v.lon = c.at.lon;
      v.asn = static_cast<std::uint32_t>(next_id);
      in.vantages.push_back(v);
    }
  }

  std::size_t v4 = 0;
  std::size_t v6 = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const auto prefix = prefix_of(s.family == Family::V4 ? v4++ : v6++, s.family);
    const Rir reg_rir = s.rir_reg;
    Rir org_rir = reg_rir;
    Rir loc_rir = reg_rir;
    switch (s.planted) {
      case Consistency::FC: break;
      case Consistency::OC: org_rir = loc_rir = other_than(rng, {reg_rir}); break;
      case Consistency::OI: org_rir = other_than(rng, {reg_rir}); break;
      case Consistency::RI: loc_rir = other_than(rng, {reg_rir}); break;
      case Consistency::FI:
        org_rir = other_than(rng, {reg_rir});
        loc_rir = other_than(rng, {reg_rir, org_rir});
        break;
    }
    const auto* org = pick(rng, org_rir);
    const auto* loc = pick(rng, loc_rir);

    Registration r;
    r.prefix = prefix;
    r.rir = reg_rir;
    r.org_country = CountryCode::parse(org->code);
    r.org_id = "ORG-" + std::to_string(i);
    r.status = Status::Allocated;
    r.last_updated = parse_date("2020-01-01");
    in.regs.push_back(r);

    out.rib_text += format_prefix(prefix) + " " + std::to_string(64500 + i) + "\n";
    for (int t = 0; t < 2; ++t) {
      const auto a = target_of(prefix, t);
      in.hitlist.push_back({a, s.family == Family::V4 ? std::optional<int>(99) : std::nullopt});
      out.world.target_locations[a] = loc->at;
    }
    out.prefixes.push_back(prefix);
    out.truth[prefix] = s.planted;
    out.true_rir[prefix] = loc_rir;
  }
  in.rib = bgp::load_rib(out.rib_text);
}

campaign::Options options_for(const Campaign& c) {
  campaign::Options o;
  o.fraction_v4 = 1.0;
  o.fraction_v6 = 1.0;
  o.seed = 1;
  o.audit.geo.region_map = &c.region_map;
  o.audit.geo.geometry = &c.geometry;
  return o;
}

namespace {

void put(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
}

}  // namespace

void write_files(const Campaign& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream regs;
  whois::write_registrations(regs, c.inputs.regs);
  put(dir / "registrations.jsonl", regs.str());
  put(dir / "rib.txt", c.rib_text);
  std::string h4;
  std::string h6;
  for (const auto& e : c.inputs.hitlist) {
    if (e.addr.family() == Family::V4) {
      h4 += format_address(e.addr) + "," + std::to_string(e.score.value_or(99)) + "\n";
    } else {
      h6 += format_address(e.addr) + "\n";
    }
  }
  put(dir / "hitlist_v4.csv", h4);
  put(dir / "hitlist_v6.txt", h6);
  std::string vs;
  for (const auto& v : c.inputs.vantages) {
    std::ostringstream line;
    line.precision(17);
    line << R"({"id":")" << v.id << R"(","kind":")" << vantage::to_string(v.kind) << R"(","country":")"
         << v.country.str() << R"(","lat":)" << v.lat << R"(,"lon":)" << v.lon << R"(,"asn":)" << *v.asn
         << R"(,"connected":true})" << "\n";
    vs += line.str();
  }
  put(dir / "vantages.jsonl", vs);
  std::ostringstream world;
  world.precision(17);
  world << "# address,lat,lon[,dropout]\n";
  for (const auto& [a, at] : c.world.target_locations) {
    world << format_address(a) << "," << at.lat << "," << at.lon;
    if (c.world.dropout.count(a) != 0) world << ",dropout";
    world << "\n";
  }
  put(dir / "world.csv", world.str());
  std::string rm = "country,rir\n";
  for (const auto& [cc, rir] : c.region_map.entries()) rm += cc.str() + "," + std::string(to_string(rir)) + "\n";
  put(dir / "region_map.csv", rm);
  std::ostringstream pts;
  pts.precision(17);
  pts << "country,lat,lon\n";
  for (const auto& [cc, list] : c.geometry.points()) {
    for (const auto& p : list) pts << cc.str() << "," << p.lat << "," << p.lon << "\n";
  }
  put(dir / "country_points.csv", pts.str());
  std::string any;
  for (const auto& p : c.inputs.anycast) any += format_prefix(p) + "\n";
  put(dir / "anycast.txt", any);
  std::string nir;
  for (const auto& m : c.inputs.nir_markers) nir += m + "\n";
  put(dir / "nir.txt", nir);
}

void make_table4(Table4& out) {
  using classify::FilterReason;
  std::vector<PrefixSpec> specs(60);
  static constexpr Consistency kCycle[] = {Consistency::FC, Consistency::OC, Consistency::OI, Consistency::RI,
                                           Consistency::FI, Consistency::FC};
  for (std::size_t i = 0; i < specs.size(); ++i) {
    specs[i].rir_reg = kAllRirs[i % 5];
    specs[i].planted = i < 40 ? kCycle[i % 6] : Consistency::FC;
  }
  auto& c = out.campaign;
  make_campaign(c, specs, 4);
  auto pfx = [&](std::size_t i) { return c.prefixes[i]; };

  // 5: one of two targets silent; the prefix still counts.
  c.world.dropout.insert(target_of(pfx(5), 1));
  // 40-44: nothing answers.
  for (std::size_t i = 40; i < 45; ++i) {
    c.world.dropout.insert(target_of(pfx(i), 0));
    c.world.dropout.insert(target_of(pfx(i), 1));
  }
  // 45 exactly, 46-47 through a covering /23; 47 is also an NIR member but
  // anycast is tested first.
  c.inputs.anycast = {pfx(45), Prefix::covering(pfx(46).network(), 23)};
  c.inputs.nir_markers = {"org-47", "ORG-48", "ORG-49", "ORG-50", "ORG-51"};
  // 52-54 are announced only as two same-origin /25s, 55 as two /25s from
  // different origins, 56-57 not at all.
  std::string rib;
  for (std::size_t i = 0; i < 60; ++i) {
    const auto p = pfx(i);
    if (i >= 52 && i <= 55) {
      const auto lo = Prefix(p.network(), 25);
      const auto hi = Prefix(Address::v4(static_cast<std::uint32_t>(p.network().value()) + 128), 25);
      rib += format_prefix(lo) + " 65000\n" + format_prefix(hi) + (i == 55 ? " 65001\n" : " 65000\n");
    } else if (i != 56 && i != 57) {
      rib += format_prefix(p) + " " + std::to_string(64500 + i) + "\n";
    }
  }
  c.rib_text = rib;
  c.inputs.rib = bgp::load_rib(rib);
  // 58-59: the second target sits in another region, so the two targets
  // disagree (FC vs RI).
  for (std::size_t i : {58U, 59U}) {
    const Rir reg = c.inputs.regs[i].rir;
    for (const auto& k : countries()) {
      if (k.rir != reg) {
        c.world.target_locations[target_of(pfx(i), 1)] = k.at;
        break;
      }
    }
  }

  out.candidates = 60;
  out.targets = 120;
  out.responsive_targets = 120 - 1 - 10;
  out.filtered = {{FilterReason::Unresponsive, 5},       {FilterReason::Anycast, 3}, {FilterReason::Nir, 4},
                  {FilterReason::BgpSupernetOrMixed, 4}, {FilterReason::Unadvertised, 2},
                  {FilterReason::NoOrgCountry, 0},       {FilterReason::Conflicting, 2}};
  out.classified = 40;
}

}  // namespace synth
