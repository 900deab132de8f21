#include "geoaudit/vantage.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "json.hpp"

#include "geoaudit/text.hpp"

namespace geoaudit::vantage {

std::string_view to_string(Kind k) { return k == Kind::Anchor ? "anchor" : "probe"; }

namespace {

std::optional<VantagePoint> from_json(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  const auto id = j.find("id");
  const auto kind = j.find("kind");
  const auto country = j.find("country");
  const auto lat = j.find("lat");
  const auto lon = j.find("lon");
  if (id == j.end() || kind == j.end() || country == j.end() || lat == j.end() || lon == j.end()) return std::nullopt;
  if (!kind->is_string() || !country->is_string() || !lat->is_number() || !lon->is_number()) return std::nullopt;
  VantagePoint v;
  if (id->is_string()) {
    v.id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    v.id = std::to_string(id->get<long long>());
  } else {
    return std::nullopt;
  }
  const auto k = text::to_lower(kind->get<std::string>());
  if (k == "anchor") {
    v.kind = Kind::Anchor;
  } else if (k == "probe") {
    v.kind = Kind::Probe;
  } else {
    return std::nullopt;
  }
  const auto cc = CountryCode::normalize(country->get<std::string>());
  if (!cc) return std::nullopt;
  v.country = *cc;
  v.lat = lat->get<double>();
  v.lon = lon->get<double>();
  if (!std::isfinite(v.lat) || !std::isfinite(v.lon) || v.lat < -90 || v.lat > 90 || v.lon < -180 || v.lon > 180) {
    return std::nullopt;
  }
  if (const auto asn = j.find("asn"); asn != j.end() && !asn->is_null()) {
    if (!asn->is_number_unsigned() && !asn->is_number_integer()) return std::nullopt;
    const auto a = asn->get<long long>();
    if (a < 0 || a > 0xFFFFFFFFLL) return std::nullopt;
    v.asn = static_cast<std::uint32_t>(a);
  }
  if (const auto c = j.find("connected"); c != j.end()) {
    if (!c->is_boolean()) return std::nullopt;
    v.connected = c->get<bool>();
  }
  return v;
}

bool by_id(const VantagePoint& a, const VantagePoint& b) { return text::natural_less(a.id, b.id); }

}  // namespace

VantageLoad load_vantages(std::string_view jsonl) {
  VantageLoad out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (auto line : text::split(jsonl, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    const auto v = j.is_discarded() ? std::nullopt : from_json(j);
    if (!v) {
      ++out.malformed;
      continue;
    }
    if (!ids.insert(v->id).second) {
      throw Error(ErrorCode::MalformedConfig, "duplicate vantage id " + v->id + " on line " + std::to_string(line_no));
    }
    out.vantages.push_back(*v);
  }
  return out;
}

std::set<std::string> load_bad_ids(std::string_view blob) {
  std::set<std::string> out;
  for (const auto line : text::data_lines(blob)) out.emplace(line);
  return out;
}

std::set<Coord> load_default_coords(std::string_view csv) {
  std::set<Coord> out;
  for (const auto line : text::data_lines(csv)) {
    const auto cols = text::split(line, ',');
    if (cols.size() != 3) throw Error(ErrorCode::MalformedConfig, "default coords row: " + std::string(line));
    double lat = 0;
    double lon = 0;
    const auto a = text::trim(cols[1]);
    const auto b = text::trim(cols[2]);
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), lat);
    const auto rb = std::from_chars(b.data(), b.data() + b.size(), lon);
    if (ra.ec != std::errc{} || rb.ec != std::errc{}) {
      if (out.empty() && text::iequals(text::trim(cols[0]), "country")) continue;
      throw Error(ErrorCode::MalformedConfig, "default coords row: " + std::string(line));
    }
    out.insert({lat, lon});
  }
  return out;
}

std::vector<VantagePoint> filter_vantages(const std::vector<VantagePoint>& all, const std::set<std::string>& bad_ids,
                                          const std::set<Coord>& default_coords, FilterReport* report) {
  FilterReport r;
  std::vector<VantagePoint> out;
  for (const auto& v : all) {
    if (!v.connected) {
      ++r.disconnected;
    } else if (bad_ids.count(v.id) != 0) {
      ++r.bad_id;
    } else if (default_coords.count({v.lat, v.lon}) != 0) {
      ++r.default_coords;
    } else {
      out.push_back(v);
    }
  }
  if (report) *report = r;
  return out;
}

const std::vector<VantagePoint>* VantageSet::country_pool(const CountryCode& cc) const {
  const auto it = per_country.find(cc);
  return it == per_country.end() ? nullptr : &it->second;
}

std::vector<VantagePoint> pick_stable(std::vector<VantagePoint> candidates, std::size_t size) {
  std::sort(candidates.begin(), candidates.end(), by_id);
  std::vector<VantagePoint> chosen;
  std::set<std::uint32_t> asns;
  std::vector<bool> taken(candidates.size(), false);
  while (chosen.size() < size) {
    std::optional<std::size_t> best;
    auto rank = [&](std::size_t i) {
      const auto& v = candidates[i];
      const bool new_asn = v.asn && asns.count(*v.asn) == 0;
      // Lower is better; candidates are already in id order.
      return std::pair<int, int>{v.kind == Kind::Anchor ? 0 : 1, new_asn ? 0 : 1};
    };
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (taken[i]) continue;
      if (!best || rank(i) < rank(*best)) best = i;
    }
    if (!best) break;
    taken[*best] = true;
    if (candidates[*best].asn) asns.insert(*candidates[*best].asn);
    chosen.push_back(candidates[*best]);
  }
  return chosen;
}

VantageSet select_stable_sets(const std::vector<VantagePoint>& filtered, const RegionMap& region_map) {
  VantageSet out;
  std::array<std::vector<VantagePoint>, 5> by_rir;
  std::map<CountryCode, std::vector<VantagePoint>> by_country;
  for (const auto& v : filtered) {
    const auto rir = region_map.find(v.country);
    if (!rir) {
      ++out.unmapped;
      continue;
    }
    by_rir[static_cast<int>(*rir)].push_back(v);
    by_country[v.country].push_back(v);
  }
  for (std::size_t i = 0; i < by_rir.size(); ++i) out.per_rir[i] = pick_stable(std::move(by_rir[i]));
  for (auto& [cc, pool] : by_country) out.per_country.emplace(cc, pick_stable(std::move(pool)));
  return out;
}

namespace {

void take_window(const std::vector<VantagePoint>& pool, std::uint64_t h, std::size_t skip, std::size_t count,
                 std::vector<const VantagePoint*>& out) {
  if (pool.empty()) return;
  const auto start = static_cast<std::size_t>(h % pool.size());
  const auto n = std::min(count, pool.size() > skip ? pool.size() - skip : 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* v = &pool[(start + skip + i) % pool.size()];
    const bool seen = std::any_of(out.begin(), out.end(), [&](const VantagePoint* p) { return p->id == v->id; });
    if (!seen) out.push_back(v);
  }
}

}  // namespace

VantagePlan plan_vantages(const Prefix& prefix, std::optional<CountryCode> org_country, Rir rir_reg,
                          const VantageSet& vset) {
  VantagePlan plan;
  const auto h = text::fnv1a64(format_prefix(prefix));
  for (Rir r : kAllRirs) take_window(vset.rir_pool(r), h, 0, kPerRirVantages, plan.vantages);
  if (org_country) {
    const auto* pool = vset.country_pool(*org_country);
    if (pool == nullptr || pool->empty()) {
      plan.no_country_vantage = true;
    } else {
      take_window(*pool, h, 0, kInCountryVantages, plan.vantages);
    }
  } else {
    plan.country_fallback = true;
    take_window(vset.rir_pool(rir_reg), h, kPerRirVantages, kInCountryVantages, plan.vantages);
  }
  return plan;
}

}  // namespace geoaudit::vantage
