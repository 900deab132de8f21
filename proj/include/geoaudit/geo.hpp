#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "geoaudit/registry.hpp"

namespace geoaudit::geo {

inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kLightKmPerS = 299792.458;
inline constexpr double kFiberFactor = 2.0 / 3.0;
// Half the circumference of the spherical Earth model.
inline constexpr double kMaxSurfaceDistanceKm = 3.14159265358979323846 * kEarthRadiusKm;

struct LatLon {
  double lat = 0;
  double lon = 0;
};

// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const LatLon& a, const LatLon& b);

// Representative points per country (capital, large cities, extremes).
class CountryGeometry {
 public:
  CountryGeometry() = default;
  explicit CountryGeometry(std::map<CountryCode, std::vector<LatLon>> points);

  // country,lat,lon with a header row; several rows per country allowed.
  static CountryGeometry load(std::string_view csv);
  static const CountryGeometry& builtin();

  const std::map<CountryCode, std::vector<LatLon>>& points() const { return points_; }
  const std::vector<LatLon>* find(const CountryCode& cc) const;
  // Countries of the region map with no point.
  std::vector<CountryCode> missing_from(const RegionMap& region_map) const;

  double min_distance_km(const LatLon& from, const CountryCode& cc) const;

 private:
  std::map<CountryCode, std::vector<LatLon>> points_;
};

}  // namespace geoaudit::geo
