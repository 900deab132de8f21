#include "geoaudit/campaign.hpp"

#include "geoaudit/text.hpp"
#include "json.hpp"

namespace geoaudit::campaign {

namespace {

constexpr std::uint64_t kV6SeedSalt = 0x9e3779b97f4a7c15ULL;

std::vector<std::string> plan_flags(const vantage::VantagePlan& vp) {
  std::vector<std::string> out;
  if (vp.no_country_vantage) out.emplace_back("no-in-country-vantage");
  if (vp.country_fallback) out.emplace_back("country-fallback");
  return out;
}

}  // namespace

void build_plan(const Inputs& in, const Options& opt, Plan& out) {
  const auto& region_map = *opt.audit.geo.region_map;
  auto filtered = targets::exclude_aliased(in.hitlist, in.aliased);
  out.stats.aliased_targets_removed = filtered.removed;

  out.usable_vantages =
      vantage::filter_vantages(in.vantages, in.bad_vantage_ids, in.default_coords, &out.stats.vantage_filter);
  out.stats.vantages_usable = out.usable_vantages.size();
  out.vset = vantage::select_stable_sets(out.usable_vantages, region_map);

  const auto index = targets::index_registrations(in.regs);
  auto all = targets::build_target_plans(index, filtered.kept);
  std::vector<targets::TargetPlan> v4;
  std::vector<targets::TargetPlan> v6;
  for (auto& p : all) (p.prefix.family() == Family::V4 ? v4 : v6).push_back(std::move(p));
  out.stats.candidates_v4 = v4.size();
  out.stats.candidates_v6 = v6.size();
  v4 = targets::sample_plans(std::move(v4), opt.fraction_v4, opt.seed);
  v6 = targets::sample_plans(std::move(v6), opt.fraction_v6, opt.seed ^ kV6SeedSalt);
  out.stats.sampled_v4 = v4.size();
  out.stats.sampled_v6 = v6.size();
  out.plans = std::move(v4);
  out.plans.insert(out.plans.end(), std::make_move_iterator(v6.begin()), std::make_move_iterator(v6.end()));

  out.vantage_plans.clear();
  out.stats.targets = 0;
  for (const auto& p : out.plans) {
    const auto& reg = in.regs[p.registration];
    auto country = reg.org_country;
    // An org country outside the region map cannot anchor a country pool.
    if (country && !region_map.find(*country)) country.reset();
    out.vantage_plans.push_back(vantage::plan_vantages(p.prefix, country, reg.rir, out.vset));
    out.stats.targets += p.targets.size();
  }
}

std::string write_plan(const Plan& plan, const std::vector<Registration>& regs) {
  std::string out;
  for (std::size_t i = 0; i < plan.plans.size(); ++i) {
    const auto& p = plan.plans[i];
    nlohmann::ordered_json j;
    j["prefix"] = format_prefix(p.prefix);
    j["rir_reg"] = std::string(to_string(regs[p.registration].rir));
    auto targets = nlohmann::ordered_json::array();
    for (const auto& t : p.targets) targets.push_back(format_address(t));
    j["targets"] = std::move(targets);
    auto ids = nlohmann::ordered_json::array();
    for (const auto* v : plan.vantage_plans[i].vantages) ids.push_back(v->id);
    j["vantages"] = std::move(ids);
    j["flags"] = plan_flags(plan.vantage_plans[i]);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Outcome run(const Inputs& in, const Options& opt, measure::Backend& backend) {
  Plan plan;
  build_plan(in, opt, plan);

  std::vector<measure::Task> tasks;
  std::vector<std::pair<std::size_t, std::size_t>> owner;
  for (std::size_t i = 0; i < plan.plans.size(); ++i) {
    for (std::size_t t = 0; t < plan.plans[i].targets.size(); ++t) {
      tasks.push_back({plan.plans[i].targets[t], plan.vantage_plans[i].vantages});
      owner.emplace_back(i, t);
    }
  }
  auto raw = measure::run_plan(tasks, backend, opt.in_flight);

  Outcome out;
  std::vector<std::vector<std::vector<measure::MeasurementResult>>> results(plan.plans.size());
  for (std::size_t i = 0; i < plan.plans.size(); ++i) results[i].resize(plan.plans[i].targets.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    out.measurements.insert(out.measurements.end(), raw[k].begin(), raw[k].end());
    results[owner[k].first][owner[k].second] = std::move(raw[k]);
  }

  std::map<std::string, const vantage::VantagePoint*> vantages;
  for (const auto& v : plan.usable_vantages) vantages.emplace(v.id, &v);

  classify::AuditInput ai;
  ai.regs = &in.regs;
  ai.rib = &in.rib;
  ai.anycast = in.anycast;
  ai.nir_markers = in.nir_markers;
  ai.plans = &plan.plans;
  ai.results = &results;
  ai.vantages = &vantages;
  for (const auto& vp : plan.vantage_plans) ai.plan_flags.push_back(plan_flags(vp));
  out.audit = classify::audit_pipeline(ai, opt.audit);
  out.stats = plan.stats;
  return out;
}

}  // namespace geoaudit::campaign
