#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "geoaudit/bgp.hpp"
#include "geoaudit/classify.hpp"
#include "geoaudit/measure.hpp"
#include "geoaudit/targets.hpp"
#include "geoaudit/vantage.hpp"

// Glue running target selection, vantage planning, measurement, inference
// and classification as one audit.
namespace geoaudit::campaign {

struct Inputs {
  std::vector<Registration> regs;
  bgp::Rib rib;
  // Both families, already score-filtered.
  std::vector<targets::HitlistEntry> hitlist;
  std::vector<Prefix> aliased;
  std::vector<vantage::VantagePoint> vantages;
  std::set<std::string> bad_vantage_ids;
  std::set<vantage::Coord> default_coords;
  std::vector<Prefix> anycast;
  std::vector<std::string> nir_markers;
};

struct Options {
  double fraction_v4 = 0.2;
  double fraction_v6 = 1.0;
  std::uint64_t seed = 0;
  std::size_t in_flight = 8;
  classify::AuditConfig audit;
};

struct PlanStats {
  std::size_t aliased_targets_removed = 0;
  vantage::FilterReport vantage_filter;
  std::size_t vantages_usable = 0;
  std::size_t candidates_v4 = 0;
  std::size_t candidates_v6 = 0;
  std::size_t sampled_v4 = 0;
  std::size_t sampled_v6 = 0;
  std::size_t targets = 0;
};

struct Plan {
  std::vector<vantage::VantagePoint> usable_vantages;
  vantage::VantageSet vset;
  std::vector<targets::TargetPlan> plans;
  // Parallel to `plans`; pointers refer into `vset`.
  std::vector<vantage::VantagePlan> vantage_plans;
  PlanStats stats;
};

// Plans hold pointers into themselves; keep the returned object in place.
void build_plan(const Inputs& in, const Options& opt, Plan& out);

// plan.jsonl: {"prefix":...,"rir_reg":...,"targets":[...],"vantages":[ids],"flags":[...]}
std::string write_plan(const Plan& plan, const std::vector<Registration>& regs);

struct Outcome {
  classify::AuditResult audit;
  std::vector<measure::MeasurementResult> measurements;
  PlanStats stats;
};

Outcome run(const Inputs& in, const Options& opt, measure::Backend& backend);

}  // namespace geoaudit::campaign
