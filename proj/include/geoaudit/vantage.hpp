#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geoaudit/registry.hpp"

namespace geoaudit::vantage {

enum class Kind : std::uint8_t { Anchor, Probe };

std::string_view to_string(Kind k);

struct VantagePoint {
  std::string id;
  Kind kind = Kind::Probe;
  CountryCode country;
  double lat = 0;
  double lon = 0;
  std::optional<std::uint32_t> asn;
  bool connected = true;
};

struct VantageLoad {
  std::vector<VantagePoint> vantages;
  std::size_t malformed = 0;
};

// One JSON object per line:
//   {"id":"6001","kind":"anchor","country":"DE","lat":50.1,"lon":8.6,"asn":3320,"connected":true}
// asn may be null or absent; connected defaults to true. Lines with bad
// coordinates or an unknown kind are skipped and counted. A repeated id throws
// MalformedConfig.
VantageLoad load_vantages(std::string_view jsonl);

// One id per line.
std::set<std::string> load_bad_ids(std::string_view text);

struct Coord {
  double lat = 0;
  double lon = 0;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

// country,lat,lon rows with an optional header; only the coordinates are kept.
std::set<Coord> load_default_coords(std::string_view csv);

struct FilterReport {
  std::size_t disconnected = 0;
  std::size_t bad_id = 0;
  std::size_t default_coords = 0;
};

std::vector<VantagePoint> filter_vantages(const std::vector<VantagePoint>& all, const std::set<std::string>& bad_ids,
                                          const std::set<Coord>& default_coords, FilterReport* report = nullptr);

inline constexpr std::size_t kStableSetSize = 10;

struct VantageSet {
  std::array<std::vector<VantagePoint>, 5> per_rir;
  std::map<CountryCode, std::vector<VantagePoint>> per_country;
  // Vantages whose country is missing from the region map.
  std::size_t unmapped = 0;

  const std::vector<VantagePoint>& rir_pool(Rir r) const { return per_rir[static_cast<int>(r)]; }
  const std::vector<VantagePoint>* country_pool(const CountryCode& cc) const;
};

// Up to `size` members from `candidates`: anchors first, then a vantage in an
// AS not yet represented, then natural id order.
std::vector<VantagePoint> pick_stable(std::vector<VantagePoint> candidates, std::size_t size = kStableSetSize);

VantageSet select_stable_sets(const std::vector<VantagePoint>& filtered, const RegionMap& region_map);

inline constexpr std::size_t kPerRirVantages = 3;
inline constexpr std::size_t kInCountryVantages = 5;

struct VantagePlan {
  std::vector<const VantagePoint*> vantages;
  // The in-country pool was empty.
  bool no_country_vantage = false;
  // No org country was known; the extra vantages came from the registering
  // RIR's region.
  bool country_fallback = false;
};

// Three vantages from each RIR region plus five from the organization's
// country (or five more from rir_reg's region when the country is unknown),
// without repeats. Within each pool the window starts at a hash of the prefix
// text and wraps. Pointers refer into `vset`.
VantagePlan plan_vantages(const Prefix& prefix, std::optional<CountryCode> org_country, Rir rir_reg,
                          const VantageSet& vset);

}  // namespace geoaudit::vantage
