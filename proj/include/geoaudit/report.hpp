#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoaudit/classify.hpp"
#include "geoaudit/registry.hpp"

namespace geoaudit::report {

using classify::Consistency;
using classify::ConsistencyRecord;

struct OroRow {
  std::size_t prefixes = 0;
  std::size_t oro_prefixes = 0;
  std::size_t unknown_country = 0;
  // /24-equivalents for IPv4, /48-equivalents for IPv6. Space covered by
  // several registrations counts once, under the most specific one.
  double units = 0;
  double oro_units = 0;
  double unknown_units = 0;

  double oro_prefix_fraction() const;
  double oro_unit_fraction() const;
};

struct OroStats {
  Family family = Family::V4;
  std::array<OroRow, 5> rows{};
  // (registering RIR, org RIR) -> registrations, known org countries only.
  std::map<std::pair<Rir, Rir>, std::size_t> flows;

  const OroRow& row(Rir r) const { return rows[static_cast<int>(r)]; }
  OroRow total() const;
};

// Registrations of the other family are ignored.
OroStats oro_stats(const std::vector<Registration>& regs, const RegionMap& region_map, Family family);

struct Distribution {
  std::array<std::array<std::size_t, 5>, 5> counts{};  // [rir][class]

  std::size_t total(Rir r) const;
  std::array<double, 5> fractions(Rir r) const;
  std::array<double, 5> fractions_all() const;
};

// Records without a class are skipped.
Distribution distribution(const std::vector<ConsistencyRecord>& records);

struct Characteristics {
  std::array<std::array<std::size_t, 3>, 5> by_status{};  // [class][status]
  // Year of last update -> per-class counts; year 0 collects unknown dates.
  std::map<int, std::array<std::size_t, 5>> by_year;
};

// Dates come from `regs`, joined on prefix and registering RIR.
Characteristics characteristics(const std::vector<ConsistencyRecord>& records, const std::vector<Registration>& regs);

struct GeoDbEntry {
  Prefix prefix;
  CountryCode country;
  std::string provider;
};

// prefix,country rows; an optional header row. Throws MalformedConfig.
std::vector<GeoDbEntry> load_geodb(std::string_view csv, const std::string& provider);

struct DetectionRow {
  std::size_t inconsistent = 0;
  std::size_t covered = 0;
  std::size_t detected = 0;

  std::size_t no_coverage() const { return inconsistent - covered; }
  double fraction() const;
};

struct Detection {
  std::map<std::string, std::array<DetectionRow, 5>> providers;  // provider -> [rir]
};

// Over RI and FI records. A provider covers a record when an entry matches the
// first target address (or, without targets, covers the prefix) and its
// country is in the region map. It detects the record when that country lies
// outside rir_reg's region; with `same_region` it must also be in rir_geo.
Detection geodb_detection(const std::vector<ConsistencyRecord>& records, const std::vector<GeoDbEntry>& entries,
                          const RegionMap& region_map, bool same_region = false);

struct LeasingRow {
  std::size_t records = 0;
  std::size_t leased = 0;

  double fraction() const;
};

struct Leasing {
  std::array<LeasingRow, 5> ri{};
  std::array<LeasingRow, 5> fi{};
};

// A record overlaps when its prefix equals, contains or lies inside a leased prefix.
Leasing leasing_overlap(const std::vector<ConsistencyRecord>& records, const std::vector<Prefix>& leased);

struct ReportInputs {
  std::vector<ConsistencyRecord> records;
  // Optional extras; empty means the table is skipped.
  std::vector<Registration> regs;
  std::vector<GeoDbEntry> geodb;
  std::optional<std::vector<Prefix>> leased;
  bool strict_geodb = false;
  const RegionMap* region_map = &RegionMap::builtin();
};

// Writes the CSV tables and summary.txt into `dir`; returns the summary text.
std::string write_report(const ReportInputs& in, const std::filesystem::path& dir);

// Aligned text table of the ORO statistics for both families.
std::string format_oro(const OroStats& v4, const OroStats& v6);
std::string oro_csv(const OroStats& s);
std::string oro_flows_csv(const OroStats& v4, const OroStats& v6);

}  // namespace geoaudit::report
