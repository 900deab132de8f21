#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "geoaudit/geo.hpp"
#include "geoaudit/measure.hpp"
#include "geoaudit/registry.hpp"
#include "geoaudit/vantage.hpp"

namespace geoaudit::geoinfer {

struct Config {
  double propagation_factor = geo::kFiberFactor;
  const geo::CountryGeometry* geometry = &geo::CountryGeometry::builtin();
  const RegionMap* region_map = &RegionMap::builtin();
};

struct MinRtt {
  std::string vantage_id;
  double rtt_ms = 0;
};

// Minimum over every sample of every result; ties go to the lower vantage id.
// Throws NoResponses when no result has a sample.
MinRtt min_rtt(const std::vector<measure::MeasurementResult>& results);

// (rtt / 2) * factor * c in km. Throws NegativeRtt.
double rtt_to_radius(double rtt_ms, double factor);

// Countries with a representative point within radius_km of the vantage,
// plus the vantage's own country.
std::set<CountryCode> feasible_countries(const vantage::VantagePoint& vp, double radius_km, const Config& cfg);

struct RirImage {
  RirSet rirs;
  // Countries absent from the region map.
  std::size_t unmapped = 0;
};

RirImage feasible_rirs(const std::set<CountryCode>& countries, const RegionMap& region_map);

struct FeasibleRegion {
  std::string min_vantage_id;
  double min_rtt_ms = 0;
  double radius_km = 0;
  std::set<CountryCode> countries;
  RirSet rirs;
  std::size_t unmapped = 0;
};

// Single-disc inference around the minimum-RTT vantage. Throws NoResponses,
// or MalformedConfig when that vantage is not in `vantages`.
FeasibleRegion infer(const std::vector<measure::MeasurementResult>& results,
                     const std::map<std::string, const vantage::VantagePoint*>& vantages, const Config& cfg);

}  // namespace geoaudit::geoinfer
