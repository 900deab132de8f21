#include "geoaudit/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "geoaudit/prefix_trie.hpp"
#include "geoaudit/text.hpp"

namespace geoaudit::report {

namespace {

double ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

int idx(Rir r) { return static_cast<int>(r); }
int idx(Consistency c) { return static_cast<int>(c); }

}  // namespace

double OroRow::oro_prefix_fraction() const {
  return ratio(static_cast<double>(oro_prefixes), static_cast<double>(prefixes));
}
double OroRow::oro_unit_fraction() const { return ratio(oro_units, units); }

OroRow OroStats::total() const {
  OroRow t;
  for (const auto& r : rows) {
    t.prefixes += r.prefixes;
    t.oro_prefixes += r.oro_prefixes;
    t.unknown_country += r.unknown_country;
    t.units += r.units;
    t.oro_units += r.oro_units;
    t.unknown_units += r.unknown_units;
  }
  return t;
}

OroStats oro_stats(const std::vector<Registration>& regs, const RegionMap& region_map, Family family) {
  enum class Kind { In, Oro, Unknown };
  OroStats out;
  out.family = family;
  for (Rir rir : kAllRirs) {
    PrefixTrie<Kind> trie(family);
    auto& row = out.rows[idx(rir)];
    for (const auto& reg : regs) {
      if (reg.rir != rir || reg.prefix.family() != family) continue;
      Kind kind = Kind::Unknown;
      if (reg.org_country) {
        if (const auto org_rir = region_map.find(*reg.org_country)) {
          kind = *org_rir == rir ? Kind::In : Kind::Oro;
          ++out.flows[{rir, *org_rir}];
        }
      }
      ++row.prefixes;
      if (kind == Kind::Oro) ++row.oro_prefixes;
      if (kind == Kind::Unknown) ++row.unknown_country;
      // A repeated prefix keeps its first classification for the units.
      if (!trie.find_exact(reg.prefix)) trie.insert(reg.prefix, kind);
    }
    trie.for_each([&](const Prefix& p, const Kind& kind) {
      double units = address_units(p);
      for (const auto& child : trie.children_of(p)) units -= address_units(child.prefix);
      row.units += units;
      if (kind == Kind::Oro) row.oro_units += units;
      if (kind == Kind::Unknown) row.unknown_units += units;
    });
  }
  return out;
}

std::size_t Distribution::total(Rir r) const {
  std::size_t n = 0;
  for (auto c : counts[idx(r)]) n += c;
  return n;
}

std::array<double, 5> Distribution::fractions(Rir r) const {
  std::array<double, 5> out{};
  const auto n = static_cast<double>(total(r));
  for (std::size_t c = 0; c < 5; ++c) out[c] = ratio(static_cast<double>(counts[idx(r)][c]), n);
  return out;
}

std::array<double, 5> Distribution::fractions_all() const {
  std::array<double, 5> out{};
  std::size_t n = 0;
  for (Rir r : kAllRirs) n += total(r);
  for (std::size_t c = 0; c < 5; ++c) {
    std::size_t col = 0;
    for (Rir r : kAllRirs) col += counts[idx(r)][c];
    out[c] = ratio(static_cast<double>(col), static_cast<double>(n));
  }
  return out;
}

Distribution distribution(const std::vector<ConsistencyRecord>& records) {
  Distribution d;
  for (const auto& r : records) {
    if (r.cls) ++d.counts[idx(r.rir_reg)][idx(*r.cls)];
  }
  return d;
}

Characteristics characteristics(const std::vector<ConsistencyRecord>& records, const std::vector<Registration>& regs) {
  std::map<std::pair<Prefix, Rir>, const Registration*> by_prefix;
  for (const auto& reg : regs) by_prefix.emplace(std::make_pair(reg.prefix, reg.rir), &reg);
  Characteristics out;
  for (const auto& r : records) {
    if (!r.cls) continue;
    ++out.by_status[idx(*r.cls)][static_cast<int>(r.status)];
    int year = 0;
    const auto it = by_prefix.find({r.prefix, r.rir_reg});
    if (it != by_prefix.end() && it->second->last_updated) year = static_cast<int>(it->second->last_updated->year());
    ++out.by_year[year][idx(*r.cls)];
  }
  return out;
}

std::vector<GeoDbEntry> load_geodb(std::string_view csv, const std::string& provider) {
  std::vector<GeoDbEntry> out;
  bool first = true;
  for (const auto line : text::data_lines(csv)) {
    const auto cols = text::split(line, ',');
    const bool header = first && cols.size() == 2 && text::iequals(text::trim(cols[0]), "prefix");
    first = false;
    if (header) continue;
    const auto p = cols.size() == 2 ? try_parse_prefix(text::trim(cols[0])) : std::nullopt;
    const auto cc = cols.size() == 2 ? CountryCode::normalize(cols[1]) : std::nullopt;
    if (!p || !cc) throw Error(ErrorCode::MalformedConfig, "geodb " + provider + " row: " + std::string(line));
    out.push_back({*p, *cc, provider});
  }
  return out;
}

double DetectionRow::fraction() const { return ratio(static_cast<double>(detected), static_cast<double>(covered)); }

Detection geodb_detection(const std::vector<ConsistencyRecord>& records, const std::vector<GeoDbEntry>& entries,
                          const RegionMap& region_map, bool same_region) {
  std::map<std::string, DualTrie<CountryCode>> tries;
  for (const auto& e : entries) tries[e.provider].insert(e.prefix, e.country);
  Detection out;
  for (auto& [provider, trie] : tries) {
    trie.freeze();
    auto& rows = out.providers[provider];
    for (const auto& r : records) {
      if (!r.cls || (*r.cls != Consistency::RI && *r.cls != Consistency::FI)) continue;
      auto& row = rows[idx(r.rir_reg)];
      ++row.inconsistent;
      const auto m = r.targets.empty() ? trie.longest_covering(r.prefix, false)
                                       : trie.longest_match(r.targets.front().target);
      if (!m) continue;
      const auto rir = region_map.find(*m->value);
      if (!rir) continue;
      ++row.covered;
      bool hit = *rir != r.rir_reg;
      if (same_region) hit = hit && r.rir_geo.contains(*rir);
      if (hit) ++row.detected;
    }
  }
  return out;
}

double LeasingRow::fraction() const { return ratio(static_cast<double>(leased), static_cast<double>(records)); }

Leasing leasing_overlap(const std::vector<ConsistencyRecord>& records, const std::vector<Prefix>& leased) {
  DualTrie<bool> trie;
  for (const auto& p : leased) trie.insert(p, true);
  trie.freeze();
  Leasing out;
  for (const auto& r : records) {
    if (!r.cls || (*r.cls != Consistency::RI && *r.cls != Consistency::FI)) continue;
    auto& row = (*r.cls == Consistency::RI ? out.ri : out.fi)[idx(r.rir_reg)];
    ++row.records;
    if (trie.longest_covering(r.prefix, false) || !trie.enumerate_contained(r.prefix).empty()) ++row.leased;
  }
  return out;
}

namespace {

std::string family_name(Family f) { return f == Family::V4 ? "IPv4" : "IPv6"; }

std::string pct(double f) { return fmt::format("{:.1f}%", 100.0 * f); }

}  // namespace

std::string oro_csv(const OroStats& s) {
  std::string out = "family,rir,prefixes,oro_prefixes,unknown_country,units,oro_units,unknown_units\n";
  auto line = [&](std::string_view name, const OroRow& r) {
    out += fmt::format("{},{},{},{},{},{:.6f},{:.6f},{:.6f}\n", family_name(s.family), name, r.prefixes, r.oro_prefixes,
                       r.unknown_country, r.units, r.oro_units, r.unknown_units);
  };
  for (Rir r : kAllRirs) line(to_string(r), s.row(r));
  line("ALL", s.total());
  return out;
}

std::string oro_flows_csv(const OroStats& v4, const OroStats& v6) {
  std::string out = "family,source_rir,dest_rir,count\n";
  for (const auto* s : {&v4, &v6}) {
    for (const auto& [edge, n] : s->flows) {
      out += fmt::format("{},{},{},{}\n", family_name(s->family), to_string(edge.first), to_string(edge.second), n);
    }
  }
  return out;
}

std::string format_oro(const OroStats& v4, const OroStats& v6) {
  std::string out = fmt::format("{:<8} {:>10} {:>8} {:>10} {:>8} {:>8}\n", "RIR", "v4 pfx", "v4 ORO", "v6 pfx",
                                "v6 ORO", "unknown");
  auto line = [&](std::string_view name, const OroRow& a, const OroRow& b) {
    out += fmt::format("{:<8} {:>10} {:>8} {:>10} {:>8} {:>8}\n", name, a.prefixes, pct(a.oro_prefix_fraction()),
                       b.prefixes, pct(b.oro_prefix_fraction()), a.unknown_country + b.unknown_country);
  };
  for (Rir r : kAllRirs) line(to_string(r), v4.row(r), v6.row(r));
  line("ALL", v4.total(), v6.total());
  return out;
}

namespace {

void put(const std::filesystem::path& path, const std::string& content) { text::write_file(path.string(), content); }

std::string class_header() {
  std::string h;
  for (auto c : classify::kAllClasses) h += fmt::format(",{}", to_string(c));
  return h;
}

}  // namespace

std::string write_report(const ReportInputs& in, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string summary;

  const auto stages = classify::count_stages(in.records);
  {
    std::string csv = "stage,count\n";
    summary += "Pipeline\n";
    auto row = [&](std::string_view name, std::size_t n) {
      csv += fmt::format("{},{}\n", name, n);
      summary += fmt::format("  {:<24} {:>10}\n", name, n);
    };
    row("candidates", stages.candidates);
    row("targets_probed", stages.targets_probed);
    row("responsive_targets", stages.responsive_targets);
    for (auto r : classify::kAllFilterReasons) row(to_string(r), stages.filtered_by(r));
    row("final", stages.total_classified());
    put(dir / "pipeline.csv", csv);
  }

  const auto dist = distribution(in.records);
  {
    std::string csv = "rir,prefixes" + class_header() + "\n";
    summary += fmt::format("\nGeo-consistency\n  {:<8} {:>8}", "RIR", "prefixes");
    for (auto c : classify::kAllClasses) summary += fmt::format(" {:>7}", to_string(c));
    summary += "\n";
    auto row = [&](std::string_view name, std::size_t n, const std::array<double, 5>& f) {
      csv += fmt::format("{},{}", name, n);
      summary += fmt::format("  {:<8} {:>8}", name, n);
      for (double x : f) {
        csv += fmt::format(",{:.6f}", x);
        summary += fmt::format(" {:>7}", pct(x));
      }
      csv += "\n";
      summary += "\n";
    };
    std::size_t all = 0;
    for (Rir r : kAllRirs) {
      row(to_string(r), dist.total(r), dist.fractions(r));
      all += dist.total(r);
    }
    row("ALL", all, dist.fractions_all());
    put(dir / "distribution.csv", csv);
  }

  const auto chars = characteristics(in.records, in.regs);
  {
    std::string csv = "class,Allocated,Assigned,LegacyOrUnknown\n";
    for (auto c : classify::kAllClasses) {
      const auto& row = chars.by_status[idx(c)];
      csv += fmt::format("{},{},{},{}\n", to_string(c), row[0], row[1], row[2]);
    }
    put(dir / "characteristics_status.csv", csv);
    std::string age = "year" + class_header() + "\n";
    for (const auto& [year, row] : chars.by_year) {
      age += year == 0 ? std::string("unknown") : std::to_string(year);
      for (auto n : row) age += fmt::format(",{}", n);
      age += "\n";
    }
    put(dir / "characteristics_age.csv", age);
  }

  if (!in.regs.empty()) {
    const auto v4 = oro_stats(in.regs, *in.region_map, Family::V4);
    const auto v6 = oro_stats(in.regs, *in.region_map, Family::V6);
    put(dir / "oro.csv", oro_csv(v4) + oro_csv(v6).substr(oro_csv(v6).find('\n') + 1));
    put(dir / "oro_flows.csv", oro_flows_csv(v4, v6));
    summary += "\nOut-of-region owners\n" + format_oro(v4, v6);
  } else {
    summary += "\nOut-of-region owners: skipped (no registrations given)\n";
  }

  if (!in.geodb.empty()) {
    const auto det = geodb_detection(in.records, in.geodb, *in.region_map, in.strict_geodb);
    std::string csv = "provider,rir,inconsistent,covered,detected,fraction\n";
    summary += fmt::format("\nGeolocation database detection ({})\n", in.strict_geodb ? "same region" : "out of region");
    for (const auto& [provider, rows] : det.providers) {
      summary += fmt::format("  {:<16}", provider);
      for (Rir r : kAllRirs) {
        const auto& row = rows[idx(r)];
        csv += fmt::format("{},{},{},{},{},{:.6f}\n", provider, to_string(r), row.inconsistent, row.covered,
                           row.detected, row.fraction());
        summary += fmt::format(" {}={}", to_string(r), row.covered == 0 ? std::string("-") : pct(row.fraction()));
      }
      summary += "\n";
    }
    put(dir / "geodb_detection.csv", csv);
  } else {
    summary += "\nGeolocation database detection: skipped (no geodb files)\n";
  }

  if (in.leased) {
    const auto lease = leasing_overlap(in.records, *in.leased);
    std::string csv = "rir,class,records,leased,fraction\n";
    summary += "\nLeasing overlap\n";
    for (Rir r : kAllRirs) {
      for (const auto& [name, rows] : {std::pair{"RI", &lease.ri}, std::pair{"FI", &lease.fi}}) {
        const auto& row = (*rows)[idx(r)];
        csv += fmt::format("{},{},{},{},{:.6f}\n", to_string(r), name, row.records, row.leased, row.fraction());
        if (row.records > 0) {
          summary += fmt::format("  {:<8} {} {:>5}/{:<5} {}\n", to_string(r), name, row.leased, row.records,
                                 pct(row.fraction()));
        }
      }
    }
    put(dir / "leasing.csv", csv);
  } else {
    summary += "\nLeasing overlap: skipped (no leased prefix list)\n";
  }

  put(dir / "summary.txt", summary);
  return summary;
}

}  // namespace geoaudit::report
