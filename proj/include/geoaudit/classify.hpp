#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoaudit/bgp.hpp"
#include "geoaudit/geoinfer.hpp"
#include "geoaudit/measure.hpp"
#include "geoaudit/registry.hpp"
#include "geoaudit/targets.hpp"

namespace geoaudit::classify {

// Fully consistent, org consistent, org inconsistent, registry inconsistent,
// fully inconsistent.
enum class Consistency : std::uint8_t { FC, OC, OI, RI, FI };

inline constexpr std::array<Consistency, 5> kAllClasses = {Consistency::FC, Consistency::OC, Consistency::OI,
                                                           Consistency::RI, Consistency::FI};

std::string_view to_string(Consistency c);
std::optional<Consistency> try_parse_consistency(std::string_view s);

// In the order the pipeline applies them.
enum class FilterReason : std::uint8_t {
  Unresponsive,
  Anycast,
  Nir,
  BgpSupernetOrMixed,
  Unadvertised,
  NoOrgCountry,
  Conflicting,
};

inline constexpr std::array<FilterReason, 7> kAllFilterReasons = {
    FilterReason::Unresponsive,       FilterReason::Anycast,      FilterReason::Nir,
    FilterReason::BgpSupernetOrMixed, FilterReason::Unadvertised, FilterReason::NoOrgCountry,
    FilterReason::Conflicting};

std::string_view to_string(FilterReason r);
std::optional<FilterReason> try_parse_filter_reason(std::string_view s);

// With org_first (the default), a prefix whose feasible set holds both the
// registering and the org RIR is OC; otherwise OI. Throws EmptyGeoSet.
Consistency classify_one(Rir rir_reg, Rir rir_org, RirSet rir_geo, bool org_first = true);

// nullopt means the two targets disagree.
std::optional<Consistency> reconcile_targets(Consistency a, std::optional<Consistency> b);

struct TargetDetail {
  Address target;
  std::optional<std::string> min_vantage_id;
  std::optional<double> min_rtt_ms;
  std::optional<double> radius_km;
  RirSet rir_geo;
  std::optional<Consistency> cls;
};

struct ConsistencyRecord {
  Prefix prefix;
  Rir rir_reg = Rir::Arin;
  std::optional<Rir> rir_org;
  std::optional<CountryCode> org_country;
  Status status = Status::LegacyOrUnknown;
  std::optional<bgp::Alignment> alignment;
  // Union over responsive targets.
  RirSet rir_geo;
  std::optional<Consistency> cls;
  std::optional<FilterReason> filter_reason;
  std::vector<TargetDetail> targets;
  std::vector<std::string> flags;

  bool has_flag(std::string_view f) const;
};

struct AuditConfig {
  geoinfer::Config geo;
  bool org_first = true;
  // Drop prefixes without a usable org country instead of classifying them
  // against the registering RIR alone.
  bool exclude_unknown_org = false;
  std::size_t threads = 1;
};

struct AuditInput {
  const std::vector<Registration>* regs = nullptr;
  const bgp::Rib* rib = nullptr;
  std::vector<Prefix> anycast;
  // Organization ids or maintainer handles, matched case-insensitively.
  std::vector<std::string> nir_markers;
  const std::vector<targets::TargetPlan>* plans = nullptr;
  // results[i][j] holds the results for plans[i].targets[j].
  const std::vector<std::vector<std::vector<measure::MeasurementResult>>>* results = nullptr;
  const std::map<std::string, const vantage::VantagePoint*>* vantages = nullptr;
  // Optional per-plan flags copied into the record (e.g. from vantage planning).
  std::vector<std::vector<std::string>> plan_flags;
};

struct StageCounts {
  std::size_t candidates = 0;
  std::size_t targets_probed = 0;
  std::size_t responsive_targets = 0;
  std::array<std::size_t, 7> filtered{};
  std::array<std::size_t, 5> classified{};

  std::size_t filtered_by(FilterReason r) const { return filtered[static_cast<int>(r)]; }
  std::size_t classified_as(Consistency c) const { return classified[static_cast<int>(c)]; }
  std::size_t total_classified() const;
  std::size_t total_filtered() const;
};

struct AuditResult {
  // One per plan, sorted by prefix.
  std::vector<ConsistencyRecord> records;
  StageCounts counts;
};

AuditResult audit_pipeline(const AuditInput& in, const AuditConfig& cfg);

StageCounts count_stages(const std::vector<ConsistencyRecord>& records);

std::string to_json_line(const ConsistencyRecord& r);
// Throws MalformedConfig with the line number.
std::vector<ConsistencyRecord> read_audit(std::string_view jsonl);
std::string write_audit(const std::vector<ConsistencyRecord>& records);

}  // namespace geoaudit::classify
