#include "geoaudit/classify.hpp"

#include <algorithm>

#include "geoaudit/parallel.hpp"
#include "geoaudit/text.hpp"
#include "json.hpp"

namespace geoaudit::classify {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Consistency c) {
  switch (c) {
    case Consistency::FC: return "FC";
    case Consistency::OC: return "OC";
    case Consistency::OI: return "OI";
    case Consistency::RI: return "RI";
    case Consistency::FI: return "FI";
  }
  return "?";
}

std::optional<Consistency> try_parse_consistency(std::string_view s) {
  for (auto c : kAllClasses) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view to_string(FilterReason r) {
  switch (r) {
    case FilterReason::Unresponsive: return "Unresponsive";
    case FilterReason::Anycast: return "Anycast";
    case FilterReason::Nir: return "NIR";
    case FilterReason::BgpSupernetOrMixed: return "BgpSupernetOrMixed";
    case FilterReason::Unadvertised: return "Unadvertised";
    case FilterReason::NoOrgCountry: return "NoOrgCountry";
    case FilterReason::Conflicting: return "Conflicting";
  }
  return "?";
}

std::optional<FilterReason> try_parse_filter_reason(std::string_view s) {
  for (auto r : kAllFilterReasons) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

Consistency classify_one(Rir rir_reg, Rir rir_org, RirSet rir_geo, bool org_first) {
  if (rir_geo.empty()) throw Error(ErrorCode::EmptyGeoSet, "feasible RIR set is empty");
  const bool geo_reg = rir_geo.contains(rir_reg);
  const bool geo_org = rir_geo.contains(rir_org);
  if (rir_reg == rir_org) return geo_reg ? Consistency::FC : Consistency::RI;
  if (geo_org && geo_reg) return org_first ? Consistency::OC : Consistency::OI;
  if (geo_org) return Consistency::OC;
  if (geo_reg) return Consistency::OI;
  return Consistency::FI;
}

std::optional<Consistency> reconcile_targets(Consistency a, std::optional<Consistency> b) {
  if (!b || *b == a) return a;
  return std::nullopt;
}

bool ConsistencyRecord::has_flag(std::string_view f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

std::size_t StageCounts::total_classified() const {
  std::size_t n = 0;
  for (auto c : classified) n += c;
  return n;
}

std::size_t StageCounts::total_filtered() const {
  std::size_t n = 0;
  for (auto c : filtered) n += c;
  return n;
}

namespace {

bool is_nir(const Registration& reg, const std::vector<std::string>& markers) {
  for (const auto& m : markers) {
    if (reg.org_id && text::iequals(*reg.org_id, m)) return true;
    for (const auto& f : reg.flags) {
      if (f.size() > 4 && f.compare(0, 4, "mnt:") == 0 && text::iequals(std::string_view(f).substr(4), m)) return true;
    }
  }
  return false;
}

ConsistencyRecord audit_one(const AuditInput& in, const AuditConfig& cfg, const DualTrie<bool>& anycast,
                            std::size_t i) {
  const auto& plan = (*in.plans)[i];
  const auto& reg = (*in.regs)[plan.registration];
  const auto& results = (*in.results)[i];
  ConsistencyRecord rec;
  rec.prefix = plan.prefix;
  rec.rir_reg = reg.rir;
  rec.org_country = reg.org_country;
  rec.status = reg.status;
  if (reg.org_country) {
    rec.rir_org = cfg.geo.region_map->find(*reg.org_country);
    if (!rec.rir_org) rec.flags.emplace_back("unmapped-org-country");
  }
  if (i < in.plan_flags.size()) rec.flags.insert(rec.flags.end(), in.plan_flags[i].begin(), in.plan_flags[i].end());

  // Geolocate every target first so the record carries the detail even
  // when a later filter drops the prefix.
  bool any_response = false;
  for (std::size_t t = 0; t < plan.targets.size(); ++t) {
    TargetDetail d;
    d.target = plan.targets[t];
    const bool replied = t < results.size() && std::any_of(results[t].begin(), results[t].end(),
                                                           [](const auto& r) { return !r.rtts_ms.empty(); });
    if (replied) {
      const auto region = geoinfer::infer(results[t], *in.vantages, cfg.geo);
      d.min_vantage_id = region.min_vantage_id;
      d.min_rtt_ms = region.min_rtt_ms;
      d.radius_km = region.radius_km;
      d.rir_geo = region.rirs;
      if (region.unmapped > 0) rec.flags.emplace_back("unmapped-feasible-country");
      any_response = true;
    }
    rec.targets.push_back(d);
  }

  const auto detail = bgp::align_detail(plan.prefix, *in.rib);
  rec.alignment = detail.alignment;
  if (detail.moas) rec.flags.emplace_back("moas");

  auto drop = [&](FilterReason r) {
    rec.filter_reason = r;
    return rec;
  };
  if (!any_response) return drop(FilterReason::Unresponsive);
  if (const auto m = anycast.longest_covering(plan.prefix, false); m || !anycast.enumerate_contained(plan.prefix).empty()) {
    return drop(FilterReason::Anycast);
  }
  if (is_nir(reg, in.nir_markers)) return drop(FilterReason::Nir);
  if (detail.alignment == bgp::Alignment::Supernet || detail.alignment == bgp::Alignment::MixedAS) {
    return drop(FilterReason::BgpSupernetOrMixed);
  }
  if (detail.alignment == bgp::Alignment::Unadvertised) return drop(FilterReason::Unadvertised);
  if (!rec.rir_org && cfg.exclude_unknown_org) return drop(FilterReason::NoOrgCountry);
  if (!rec.rir_org) rec.flags.emplace_back("registry-only");

  std::vector<Consistency> per_target;
  for (auto& d : rec.targets) {
    if (!d.min_rtt_ms) continue;
    if (rec.rir_org) {
      d.cls = classify_one(rec.rir_reg, *rec.rir_org, d.rir_geo, cfg.org_first);
    } else {
      d.cls = d.rir_geo.contains(rec.rir_reg) ? Consistency::FC : Consistency::RI;
    }
    per_target.push_back(*d.cls);
    rec.rir_geo = RirSet::from_bits(rec.rir_geo.bits() | d.rir_geo.bits());
  }
  const auto cls = reconcile_targets(per_target[0],
                                     per_target.size() > 1 ? std::optional<Consistency>(per_target[1]) : std::nullopt);
  if (!cls) return drop(FilterReason::Conflicting);
  rec.cls = cls;
  return rec;
}

}  // namespace

StageCounts count_stages(const std::vector<ConsistencyRecord>& records) {
  StageCounts c;
  c.candidates = records.size();
  for (const auto& r : records) {
    c.targets_probed += r.targets.size();
    for (const auto& t : r.targets) c.responsive_targets += t.min_rtt_ms ? 1 : 0;
    if (r.filter_reason) ++c.filtered[static_cast<int>(*r.filter_reason)];
    if (r.cls) ++c.classified[static_cast<int>(*r.cls)];
  }
  return c;
}

AuditResult audit_pipeline(const AuditInput& in, const AuditConfig& cfg) {
  if (!in.regs || !in.rib || !in.plans || !in.results || !in.vantages) {
    throw Error(ErrorCode::MalformedConfig, "audit input incomplete");
  }
  if (in.results->size() != in.plans->size()) {
    throw Error(ErrorCode::MalformedConfig, "one result list per plan required");
  }
  DualTrie<bool> anycast;
  for (const auto& p : in.anycast) anycast.insert(p, true);
  anycast.freeze();

  AuditResult out;
  out.records.resize(in.plans->size());
  parallel_for(in.plans->size(), cfg.threads, [&](std::size_t i) { out.records[i] = audit_one(in, cfg, anycast, i); });
  std::sort(out.records.begin(), out.records.end(),
            [](const ConsistencyRecord& a, const ConsistencyRecord& b) { return a.prefix < b.prefix; });
  out.counts = count_stages(out.records);
  return out;
}

namespace {

ordered_json rir_list(RirSet s) {
  auto j = ordered_json::array();
  for (Rir r : s.members()) j.push_back(std::string(to_string(r)));
  return j;
}

template <typename T, typename F>
ordered_json opt(const std::optional<T>& v, F&& f) {
  return v ? ordered_json(f(*v)) : ordered_json(nullptr);
}

RirSet parse_rir_list(const nlohmann::json& j) {
  RirSet s;
  if (!j.is_array()) throw Error(ErrorCode::MalformedConfig, "rir_geo must be an array");
  for (const auto& v : j) s.insert(parse_rir(v.get<std::string>()));
  return s;
}

template <typename T, typename F>
std::optional<T> read_opt(const nlohmann::json& j, const char* key, F&& parse) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  const auto v = parse(it->template get<std::string>());
  if (!v) throw Error(ErrorCode::MalformedConfig, std::string("bad value for ") + key);
  return v;
}

}  // namespace

std::string to_json_line(const ConsistencyRecord& r) {
  auto str = [](auto v) { return std::string(to_string(v)); };
  ordered_json j;
  j["prefix"] = format_prefix(r.prefix);
  j["rir_reg"] = str(r.rir_reg);
  j["rir_org"] = opt(r.rir_org, str);
  j["org_country"] = opt(r.org_country, [](const CountryCode& c) { return c.str(); });
  j["status"] = str(r.status);
  j["alignment"] = opt(r.alignment, str);
  j["rir_geo"] = rir_list(r.rir_geo);
  j["class"] = opt(r.cls, str);
  j["filter_reason"] = opt(r.filter_reason, str);
  j["flags"] = r.flags;
  auto targets = ordered_json::array();
  for (const auto& d : r.targets) {
    ordered_json t;
    t["target"] = format_address(d.target);
    t["min_vantage_id"] = opt(d.min_vantage_id, [](const std::string& s) { return s; });
    t["min_rtt_ms"] = opt(d.min_rtt_ms, [](double v) { return v; });
    t["radius_km"] = opt(d.radius_km, [](double v) { return v; });
    t["rir_geo"] = rir_list(d.rir_geo);
    t["class"] = opt(d.cls, str);
    targets.push_back(std::move(t));
  }
  j["targets"] = std::move(targets);
  return j.dump();
}

std::string write_audit(const std::vector<ConsistencyRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json_line(r);
    out += '\n';
  }
  return out;
}

std::vector<ConsistencyRecord> read_audit(std::string_view jsonl) {
  std::vector<ConsistencyRecord> out;
  std::size_t line_no = 0;
  for (auto line : text::split(jsonl, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ConsistencyRecord r;
      r.prefix = parse_prefix(j.at("prefix").get<std::string>());
      r.rir_reg = parse_rir(j.at("rir_reg").get<std::string>());
      r.rir_org = read_opt<Rir>(j, "rir_org", try_parse_rir);
      r.org_country = read_opt<CountryCode>(j, "org_country", [](const std::string& s) { return CountryCode::normalize(s); });
      if (const auto s = try_parse_status_name(j.at("status").get<std::string>())) {
        r.status = *s;
      } else {
        throw Error(ErrorCode::MalformedConfig, "bad status");
      }
      r.alignment = read_opt<bgp::Alignment>(j, "alignment", bgp::try_parse_alignment);
      r.rir_geo = parse_rir_list(j.at("rir_geo"));
      r.cls = read_opt<Consistency>(j, "class", try_parse_consistency);
      r.filter_reason = read_opt<FilterReason>(j, "filter_reason", try_parse_filter_reason);
      r.flags = j.at("flags").get<std::vector<std::string>>();
      for (const auto& t : j.at("targets")) {
        TargetDetail d;
        d.target = parse_address(t.at("target").get<std::string>());
        if (!t.at("min_vantage_id").is_null()) d.min_vantage_id = t["min_vantage_id"].get<std::string>();
        if (!t.at("min_rtt_ms").is_null()) d.min_rtt_ms = t["min_rtt_ms"].get<double>();
        if (!t.at("radius_km").is_null()) d.radius_km = t["radius_km"].get<double>();
        d.rir_geo = parse_rir_list(t.at("rir_geo"));
        d.cls = read_opt<Consistency>(t, "class", try_parse_consistency);
        r.targets.push_back(std::move(d));
      }
      if (r.cls.has_value() == r.filter_reason.has_value()) {
        throw Error(ErrorCode::MalformedConfig, "exactly one of class and filter_reason must be set");
      }
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::MalformedConfig, "audit line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace geoaudit::classify
