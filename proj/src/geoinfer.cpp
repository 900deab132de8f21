#include "geoaudit/geoinfer.hpp"

#include <cmath>
#include <optional>

#include "geoaudit/text.hpp"

namespace geoaudit::geoinfer {

namespace {
// Absorbs rounding so a point exactly on the boundary stays feasible.
constexpr double kBoundaryEpsilonKm = 1e-9;
}  // namespace

MinRtt min_rtt(const std::vector<measure::MeasurementResult>& results) {
  std::optional<MinRtt> best;
  for (const auto& r : results) {
    for (double rtt : r.rtts_ms) {
      if (!best || rtt < best->rtt_ms || (rtt == best->rtt_ms && text::natural_less(r.vantage_id, best->vantage_id))) {
        best = MinRtt{r.vantage_id, rtt};
      }
    }
  }
  if (!best) throw Error(ErrorCode::NoResponses, "no replies from any vantage");
  return *best;
}

double rtt_to_radius(double rtt_ms, double factor) {
  if (!(rtt_ms >= 0)) throw Error(ErrorCode::NegativeRtt, "rtt must be non-negative: " + std::to_string(rtt_ms));
  return (rtt_ms / 1000.0 / 2.0) * factor * geo::kLightKmPerS;
}

std::set<CountryCode> feasible_countries(const vantage::VantagePoint& vp, double radius_km, const Config& cfg) {
  std::set<CountryCode> out{vp.country};
  const geo::LatLon from{vp.lat, vp.lon};
  for (const auto& [cc, points] : cfg.geometry->points()) {
    for (const auto& p : points) {
      if (geo::haversine_km(from, p) <= radius_km + kBoundaryEpsilonKm) {
        out.insert(cc);
        break;
      }
    }
  }
  return out;
}

RirImage feasible_rirs(const std::set<CountryCode>& countries, const RegionMap& region_map) {
  RirImage out;
  for (const auto& cc : countries) {
    if (const auto r = region_map.find(cc)) {
      out.rirs.insert(*r);
    } else {
      ++out.unmapped;
    }
  }
  return out;
}

FeasibleRegion infer(const std::vector<measure::MeasurementResult>& results,
                     const std::map<std::string, const vantage::VantagePoint*>& vantages, const Config& cfg) {
  const auto m = min_rtt(results);
  const auto it = vantages.find(m.vantage_id);
  if (it == vantages.end() || it->second == nullptr) {
    throw Error(ErrorCode::MalformedConfig, "result from unknown vantage " + m.vantage_id);
  }
  FeasibleRegion out;
  out.min_vantage_id = m.vantage_id;
  out.min_rtt_ms = m.rtt_ms;
  out.radius_km = rtt_to_radius(m.rtt_ms, cfg.propagation_factor);
  out.countries = feasible_countries(*it->second, out.radius_km, cfg);
  const auto image = feasible_rirs(out.countries, *cfg.region_map);
  out.rirs = image.rirs;
  out.unmapped = image.unmapped;
  return out;
}

}  // namespace geoaudit::geoinfer
