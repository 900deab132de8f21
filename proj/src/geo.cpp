#include "geoaudit/geo.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "embedded_data.hpp"
#include "geoaudit/text.hpp"

namespace geoaudit::geo {

double haversine_km(const LatLon& a, const LatLon& b) {
  constexpr double kRad = 3.14159265358979323846 / 180.0;
  const double dlat = (b.lat - a.lat) * kRad;
  const double dlon = (b.lon - a.lon) * kRad;
  const double s = std::sin(dlat / 2);
  const double t = std::sin(dlon / 2);
  double h = s * s + std::cos(a.lat * kRad) * std::cos(b.lat * kRad) * t * t;
  h = std::min(1.0, std::max(0.0, h));
  return 2 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

CountryGeometry::CountryGeometry(std::map<CountryCode, std::vector<LatLon>> points) : points_(std::move(points)) {}

CountryGeometry CountryGeometry::load(std::string_view csv) {
  std::map<CountryCode, std::vector<LatLon>> points;
  bool header = true;
  for (const auto line : text::data_lines(csv)) {
    const auto cols = text::split(line, ',');
    if (header) {
      header = false;
      if (cols.size() == 3 && text::iequals(text::trim(cols[0]), "country")) continue;
      throw Error(ErrorCode::MalformedConfig, "country points: missing country,lat,lon header");
    }
    if (cols.size() != 3) throw Error(ErrorCode::MalformedConfig, "country points row: " + std::string(line));
    const auto cc = CountryCode::normalize(cols[0]);
    LatLon p;
    const auto a = text::trim(cols[1]);
    const auto b = text::trim(cols[2]);
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), p.lat);
    const auto rb = std::from_chars(b.data(), b.data() + b.size(), p.lon);
    if (!cc || ra.ec != std::errc{} || rb.ec != std::errc{} || std::abs(p.lat) > 90 || std::abs(p.lon) > 180) {
      throw Error(ErrorCode::MalformedConfig, "country points row: " + std::string(line));
    }
    points[*cc].push_back(p);
  }
  return CountryGeometry(std::move(points));
}

const CountryGeometry& CountryGeometry::builtin() {
  static const CountryGeometry g = load(embedded::kCountryPointsCsv);
  return g;
}

const std::vector<LatLon>* CountryGeometry::find(const CountryCode& cc) const {
  const auto it = points_.find(cc);
  return it == points_.end() ? nullptr : &it->second;
}

std::vector<CountryCode> CountryGeometry::missing_from(const RegionMap& region_map) const {
  std::vector<CountryCode> out;
  for (const auto& [cc, rir] : region_map.entries()) {
    if (!find(cc)) out.push_back(cc);
  }
  return out;
}

double CountryGeometry::min_distance_km(const LatLon& from, const CountryCode& cc) const {
  double best = std::numeric_limits<double>::infinity();
  if (const auto* pts = find(cc)) {
    for (const auto& p : *pts) best = std::min(best, haversine_km(from, p));
  }
  return best;
}

}  // namespace geoaudit::geo
