#include "geoaudit/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <tuple>

#include "CLI11.hpp"
#include "geoaudit/bgp.hpp"
#include "geoaudit/campaign.hpp"
#include "geoaudit/error.hpp"
#include "geoaudit/geo.hpp"
#include "geoaudit/report.hpp"
#include "geoaudit/text.hpp"
#include "geoaudit/whois.hpp"

namespace geoaudit::cli {

namespace {

constexpr const char* kFooter = R"(Settings are taken from, in order of precedence: command-line flags,
environment variables (shown as ENV next to an option), then the config file
given by --config or GEOAUDIT_CONFIG. The config file holds `key = value`
lines named after long options; keys under a [subcommand] section apply only
to that subcommand, keys before any section apply wherever the option exists.
Repeat a key to give a repeatable option several values.

The live backend reads its API key from GEOAUDIT_ATLAS_KEY.

Exit status: 0 success, 1 usage or configuration error, 2 input error,
3 measurement backend failure.)";

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedConfig:
    case ErrorCode::UnknownDialect:
      return kUsage;
    case ErrorCode::BackendUnavailable:
      return kBackendFailure;
    default:
      return kInputError;
  }
}

Error usage(const std::string& msg) { return Error(ErrorCode::MalformedConfig, msg); }

// section -> key -> values; "" is the top level.
using ConfigFile = std::map<std::string, std::map<std::string, std::vector<std::string>>>;

ConfigFile parse_config(std::string_view blob, const std::string& path) {
  ConfigFile cfg;
  std::string section;
  std::size_t line_no = 0;
  for (auto line : text::split(blob, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw usage(fmt::format("{}:{}: bad section header", path, line_no));
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw usage(fmt::format("{}:{}: expected key = value", path, line_no));
    auto key = std::string(text::trim(line.substr(0, eq)));
    auto value = std::string(text::trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    std::replace(key.begin(), key.end(), '_', '-');
    cfg[section][key].push_back(std::move(value));
  }
  return cfg;
}

// Fills options that neither a flag nor an environment variable set.
void apply_config(const ConfigFile& cfg, CLI::App& sub) {
  for (const auto& [section, entries] : cfg) {
    if (!section.empty() && section != sub.get_name()) continue;
    for (const auto& [key, values] : entries) {
      if (key == "config") continue;
      CLI::Option* opt = sub.get_option_no_throw("--" + key);
      if (opt == nullptr) {
        if (section.empty()) continue;
        throw usage(fmt::format("config key '{}' is not an option of '{}'", key, section));
      }
      if (opt->count() != 0) continue;
      for (const auto& v : values) opt->add_result(v);
      try {
        opt->run_callback();
      } catch (const CLI::Error& e) {
        throw usage(fmt::format("config key '{}': {}", key, e.what()));
      }
    }
  }
}

void require(CLI::App& sub, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (sub.get_option(name)->count() == 0) throw usage(fmt::format("{} {} is required", sub.get_name(), name));
  }
}

// Checks every given path can be opened before any work starts.
void check_readable(const std::vector<std::pair<std::string, std::string>>& inputs) {
  for (const auto& [flag, path] : inputs) {
    if (path.empty()) continue;
    std::ifstream probe(path, std::ios::binary);
    if (!probe || std::filesystem::is_directory(path)) {
      throw Error(ErrorCode::UnreadableStream, fmt::format("cannot read {} (given to {})", path, flag));
    }
  }
}

std::pair<std::string, std::string> split_assignment(const std::string& arg, const char* flag) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw usage(fmt::format("{} expects NAME=PATH, got '{}'", flag, arg));
  }
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

std::string fixed(double v, int digits = 4) { return fmt::format("{:.{}f}", v, digits); }

// Region map and country geometry shared by several subcommands.
struct GeoArgs {
  std::string region_map;
  std::string country_points;

  void add(CLI::App& sub, bool with_points) {
    sub.add_option("--region-map", region_map, "country,rir CSV replacing the built-in region map");
    if (with_points) {
      sub.add_option("--country-points", country_points,
                     "country,lat,lon CSV replacing the built-in representative points");
    }
  }
  std::vector<std::pair<std::string, std::string>> paths() const {
    return {{"--region-map", region_map}, {"--country-points", country_points}};
  }
};

struct LoadedGeo {
  RegionMap region_map_storage;
  geo::CountryGeometry geometry_storage;
  const RegionMap* region_map = &RegionMap::builtin();
  const geo::CountryGeometry* geometry = &geo::CountryGeometry::builtin();
};

void load_geo(const GeoArgs& args, LoadedGeo& out, std::ostream& err) {
  if (!args.region_map.empty()) {
    std::istringstream in(text::read_file(args.region_map));
    out.region_map_storage = RegionMap::load(in);
    out.region_map = &out.region_map_storage;
  }
  if (!args.country_points.empty()) {
    out.geometry_storage = geo::CountryGeometry::load(text::read_file(args.country_points));
    out.geometry = &out.geometry_storage;
  }
  const auto missing = out.geometry->missing_from(*out.region_map);
  if (!missing.empty()) {
    err << "warning: " << missing.size() << " region-map countries have no representative point\n";
  }
}

std::vector<Registration> load_registrations(const std::string& path) {
  return whois::read_registrations(text::read_file(path));
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::vector<std::string> whois;
  std::string dialects;
  std::string dataset_date;
  std::string out = "registrations.jsonl";
};

void print_ingest_report(const whois::IngestReport& r, std::ostream& out) {
  const auto line = [&](std::string_view label, auto value) { out << fmt::format("{:<26}{}\n", label, value); };
  line("network records:", r.records_read);
  line("organization records:", r.org_records_read);
  line("other records:", r.other_records);
  line("registrations emitted:", r.registrations_emitted);
  line("duplicates dropped:", r.duplicates_dropped);
  line("not managed, skipped:", r.not_managed_skipped);
  line("malformed, skipped:", r.malformed_skipped);
  line("ranges split:", fmt::format("{} (+{} blocks)", r.non_cidr_ranges_split, r.split_extra_blocks));
  line("duplicate organizations:", r.duplicate_orgs);
  line("unresolved org refs:", r.unresolved_org_refs);
  line("circular transfers:", r.circular_refs_dropped);
  line("transfer listings:", r.transfers_dropped);
  if (!r.status_variants_seen.empty()) {
    out << "status spellings:\n";
    for (const auto& [raw, status] : r.status_variants_seen) out << "  " << raw << " -> " << to_string(status) << "\n";
  }
}

int cmd_ingest(const IngestArgs& args, std::ostream& out, std::ostream& err) {
  // Several dumps of one registry (e.g. separate org files) are parsed as one.
  std::map<Rir, std::vector<std::string>> by_rir;
  std::vector<std::pair<std::string, std::string>> paths;
  for (const auto& arg : args.whois) {
    const auto [name, path] = split_assignment(arg, "--whois");
    const auto rir = try_parse_rir(name);
    if (!rir) throw usage(fmt::format("--whois: unknown registry '{}'", name));
    by_rir[*rir].push_back(path);
    paths.emplace_back("--whois", path);
  }
  paths.emplace_back("--dialects", args.dialects);
  check_readable(paths);

  whois::DialectTable custom;
  const whois::DialectTable* dialects = &whois::DialectTable::builtin();
  if (!args.dialects.empty()) {
    custom = whois::DialectTable::parse(text::read_file(args.dialects));
    dialects = &custom;
  }
  whois::ParseOptions options;
  if (!args.dataset_date.empty()) {
    options.dataset_date = parse_date(args.dataset_date);
    if (!options.dataset_date) throw usage("--dataset-date: expected YYYY-MM-DD");
  }

  whois::IngestReport total;
  std::vector<Registration> regs;
  for (const auto& [rir, files] : by_rir) {
    std::string blob;
    for (const auto& f : files) {
      blob += text::read_file(f);
      blob += "\n\n";
    }
    auto res = whois::parse_bulk_whois(blob, rir, *dialects, options);
    auto linked = whois::link_organizations(std::move(res.registrations), res.organizations);
    res.report.unresolved_org_refs += linked.unresolved;
    total += res.report;
    regs.insert(regs.end(), std::make_move_iterator(linked.registrations.begin()),
                std::make_move_iterator(linked.registrations.end()));
  }
  auto transfers = whois::drop_circular_transfers(std::move(regs));
  total.circular_refs_dropped += transfers.circular_dropped;
  total.transfers_dropped += transfers.transfers_dropped;
  regs = std::move(transfers.registrations);
  std::sort(regs.begin(), regs.end(), [](const Registration& a, const Registration& b) {
    return std::tie(a.rir, a.prefix) < std::tie(b.rir, b.prefix);
  });

  std::ostringstream jsonl;
  whois::write_registrations(jsonl, regs);
  text::write_file(args.out, jsonl.str());
  if (total.malformed_skipped != 0) err << "warning: " << total.malformed_skipped << " malformed records skipped\n";
  print_ingest_report(total, out);
  out << "wrote " << regs.size() << " registrations to " << args.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------- align

struct AlignArgs {
  std::string registrations;
  std::string rib;
  std::string out;
};

int cmd_align(const AlignArgs& args, std::ostream& out, std::ostream& err) {
  check_readable({{"--registrations", args.registrations}, {"--rib", args.rib}});
  const auto regs = load_registrations(args.registrations);
  const auto rib = bgp::load_rib(text::read_file(args.rib));
  if (rib.malformed != 0) err << "warning: " << rib.malformed << " malformed RIB lines skipped\n";
  const auto table = bgp::alignment_table(regs, rib);

  std::string csv = "rir,prefixes";
  std::string txt = fmt::format("{:<8}{:>10}", "RIR", "prefixes");
  for (auto a : bgp::kAllAlignments) {
    csv += fmt::format(",{}", bgp::to_string(a));
    txt += fmt::format("{:>14}", bgp::to_string(a));
  }
  csv += "\n";
  txt += "\n";
  const auto row = [&](std::string_view name, std::size_t n, const std::array<double, 5>& f) {
    csv += fmt::format("{},{}", name, n);
    txt += fmt::format("{:<8}{:>10}", name, n);
    for (double v : f) {
      csv += "," + fixed(v, 6);
      txt += fmt::format("{:>14}", fixed(v * 100, 2) + "%");
    }
    csv += "\n";
    txt += "\n";
  };
  for (Rir r : kAllRirs) row(to_string(r), table.total(r), table.fractions(r));
  row("all", table.total(), table.fractions_all());
  out << txt;
  if (!args.out.empty()) text::write_file(args.out, csv);
  return kOk;
}

// ---------------------------------------------------------------- plan / audit

struct PlanArgs {
  std::string registrations;
  std::string rib;
  std::string hitlist_v4;
  std::string hitlist_v6;
  std::string aliased;
  std::string vantages;
  std::string bad_vantages;
  std::string default_coords;
  std::string anycast;
  std::string nir;
  int min_score = 99;
  double sample_v4 = 0.2;
  double sample_v6 = 1.0;
  std::uint64_t seed = 0;
  GeoArgs geo;
  std::string out;

  void add(CLI::App& sub) {
    sub.add_option("--registrations", registrations, "registrations.jsonl from ingest");
    sub.add_option("--rib", rib, "BGP table, `prefix origin` per line");
    sub.add_option("--hitlist-v4", hitlist_v4, "IPv4 hitlist, `address,score` per line");
    sub.add_option("--hitlist-v6", hitlist_v6, "IPv6 hitlist, one address per line");
    sub.add_option("--aliased", aliased, "aliased IPv6 prefixes to exclude");
    sub.add_option("--vantages", vantages, "vantage points, one JSON object per line");
    sub.add_option("--bad-vantages", bad_vantages, "vantage ids to drop, one per line");
    sub.add_option("--default-coords", default_coords, "country,lat,lon placeholder locations to drop");
    sub.add_option("--anycast", anycast, "anycast prefixes, one per line");
    sub.add_option("--nir", nir, "organization ids or maintainer handles of national registries");
    sub.add_option("--min-score", min_score, "minimum IPv4 hitlist score")->capture_default_str()->check(
        CLI::Range(0, 100));
    sub.add_option("--sample-v4", sample_v4, "fraction of IPv4 prefixes to probe")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    sub.add_option("--sample-v6", sample_v6, "fraction of IPv6 prefixes to probe")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    sub.add_option("--seed", seed, "seed for sampling and simulation")->capture_default_str()->envname("GEOAUDIT_SEED");
    geo.add(sub, true);
  }

  std::vector<std::pair<std::string, std::string>> paths() const {
    auto out = geo.paths();
    out.insert(out.end(), {{"--registrations", registrations},
                           {"--rib", rib},
                           {"--hitlist-v4", hitlist_v4},
                           {"--hitlist-v6", hitlist_v6},
                           {"--aliased", aliased},
                           {"--vantages", vantages},
                           {"--bad-vantages", bad_vantages},
                           {"--default-coords", default_coords},
                           {"--anycast", anycast},
                           {"--nir", nir}});
    return out;
  }
};

struct AuditArgs {
  PlanArgs plan;
  std::string backend = "simulate";
  std::string results;
  bool replay_lenient = false;
  std::string world;
  double noise_ms = 0;
  double world_factor = geo::kFiberFactor;
  std::string live_url;
  std::string tag = "geoaudit";
  double propagation_factor = geo::kFiberFactor;
  std::size_t threads = 1;
  std::size_t in_flight = 8;
  bool exclude_unknown_org = false;
  bool oi_first = false;
  std::string results_out;
};

void validate(const PlanArgs& a) {
  if (a.sample_v4 < 0 || a.sample_v4 > 1 || a.sample_v6 < 0 || a.sample_v6 > 1) {
    throw usage("sample fractions must lie in [0, 1]");
  }
}

void validate(const AuditArgs& a) {
  validate(a.plan);
  if (!(a.propagation_factor > 0 && a.propagation_factor <= 1)) throw usage("--propagation-factor must lie in (0, 1]");
  if (!(a.world_factor > 0 && a.world_factor <= 1)) throw usage("--world-factor must lie in (0, 1]");
  if (a.noise_ms < 0) throw usage("--noise-ms must not be negative");
  if (a.threads == 0 || a.in_flight == 0) throw usage("--threads and --in-flight must be positive");
}

std::vector<std::string> marker_lines(const std::string& path) {
  std::vector<std::string> out;
  if (path.empty()) return out;
  const auto blob = text::read_file(path);
  for (const auto line : text::data_lines(blob)) out.emplace_back(text::trim(line));
  return out;
}

campaign::Inputs load_inputs(const PlanArgs& a, std::ostream& err) {
  campaign::Inputs in;
  in.regs = load_registrations(a.registrations);
  in.rib = bgp::load_rib(text::read_file(a.rib));
  if (in.rib.malformed != 0) err << "warning: " << in.rib.malformed << " malformed RIB lines skipped\n";
  const auto add_hitlist = [&](const std::string& path, Family family) {
    if (path.empty()) return;
    auto h = targets::load_hitlist(text::read_file(path), family, a.min_score);
    if (h.malformed != 0) err << "warning: " << h.malformed << " malformed hitlist lines in " << path << "\n";
    in.hitlist.insert(in.hitlist.end(), h.entries.begin(), h.entries.end());
  };
  add_hitlist(a.hitlist_v4, Family::V4);
  add_hitlist(a.hitlist_v6, Family::V6);
  if (!a.aliased.empty()) in.aliased = targets::load_prefix_list(text::read_file(a.aliased));
  auto vl = vantage::load_vantages(text::read_file(a.vantages));
  if (vl.malformed != 0) err << "warning: " << vl.malformed << " malformed vantage lines skipped\n";
  in.vantages = std::move(vl.vantages);
  if (!a.bad_vantages.empty()) in.bad_vantage_ids = vantage::load_bad_ids(text::read_file(a.bad_vantages));
  if (!a.default_coords.empty()) in.default_coords = vantage::load_default_coords(text::read_file(a.default_coords));
  if (!a.anycast.empty()) in.anycast = targets::load_prefix_list(text::read_file(a.anycast));
  in.nir_markers = marker_lines(a.nir);
  return in;
}

campaign::Options plan_options(const PlanArgs& a, const LoadedGeo& g) {
  campaign::Options opt;
  opt.fraction_v4 = a.sample_v4;
  opt.fraction_v6 = a.sample_v6;
  opt.seed = a.seed;
  opt.audit.geo.region_map = g.region_map;
  opt.audit.geo.geometry = g.geometry;
  return opt;
}

void print_plan_stats(const campaign::PlanStats& s, std::ostream& out) {
  out << "vantages usable:        " << s.vantages_usable << " (dropped: " << s.vantage_filter.disconnected
      << " disconnected, " << s.vantage_filter.bad_id << " bad id, " << s.vantage_filter.default_coords
      << " default coordinates)\n"
      << "aliased targets removed: " << s.aliased_targets_removed << "\n"
      << "candidate prefixes:     " << s.candidates_v4 << " IPv4, " << s.candidates_v6 << " IPv6\n"
      << "sampled prefixes:       " << s.sampled_v4 << " IPv4, " << s.sampled_v6 << " IPv6\n"
      << "targets:                " << s.targets << "\n";
}

int cmd_plan(const PlanArgs& args, std::ostream& out, std::ostream& err) {
  validate(args);
  check_readable(args.paths());
  LoadedGeo g;
  load_geo(args.geo, g, err);
  const auto in = load_inputs(args, err);
  const auto opt = plan_options(args, g);
  campaign::Plan plan;
  campaign::build_plan(in, opt, plan);
  print_plan_stats(plan.stats, out);
  text::write_file(args.out, campaign::write_plan(plan, in.regs));
  out << "wrote " << plan.plans.size() << " prefix plans to " << args.out << "\n";
  return kOk;
}

// Turns per-task backend failures into empty results so the prefix ends up
// Unresponsive. Fails the run only when every task failed.
class Degrading : public measure::Backend {
 public:
  explicit Degrading(measure::Backend& inner) : inner_(inner) {}

  std::vector<measure::MeasurementResult> run(const measure::Task& task) override {
    try {
      return inner_.run(task);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BackendUnavailable) throw;
      std::lock_guard lock(mu_);
      ++failed_;
      last_ = e.what();
      return {};
    }
  }

  std::size_t failed() const { return failed_; }
  const std::string& last_error() const { return last_; }

 private:
  measure::Backend& inner_;
  std::mutex mu_;
  std::size_t failed_ = 0;
  std::string last_;
};

void print_stage_counts(const classify::StageCounts& c, std::ostream& out) {
  out << "candidates:             " << c.candidates << "\n"
      << "targets probed:         " << c.targets_probed << "\n"
      << "responsive targets:     " << c.responsive_targets << "\n";
  for (std::size_t i = 0; i < c.filtered.size(); ++i) {
    out << fmt::format("filtered {:<22}{}\n", std::string(classify::to_string(static_cast<classify::FilterReason>(i))) + ":",
                       c.filtered[i]);
  }
  for (std::size_t i = 0; i < c.classified.size(); ++i) {
    out << fmt::format("class {:<25}{}\n", std::string(classify::to_string(static_cast<classify::Consistency>(i))) + ":",
                       c.classified[i]);
  }
}

int cmd_audit(const AuditArgs& args, std::ostream& out, std::ostream& err) {
  validate(args);
  auto paths = args.plan.paths();
  if (args.backend == "replay") {
    if (args.results.empty()) throw usage("--backend replay needs --results");
    paths.emplace_back("--results", args.results);
  } else if (args.backend == "simulate") {
    if (args.world.empty()) throw usage("--backend simulate needs --world");
    paths.emplace_back("--world", args.world);
  } else if (args.backend == "live") {
    if (args.live_url.empty()) throw usage("--backend live needs --live-url");
    const char* key = std::getenv(measure::kApiKeyEnv);
    if (key == nullptr || *key == '\0') throw usage(fmt::format("--backend live needs {} set", measure::kApiKeyEnv));
  } else {
    throw usage("--backend must be replay, simulate or live");
  }
  check_readable(paths);

  LoadedGeo g;
  load_geo(args.plan.geo, g, err);
  const auto in = load_inputs(args.plan, err);
  auto opt = plan_options(args.plan, g);
  opt.in_flight = args.in_flight;
  opt.audit.geo.propagation_factor = args.propagation_factor;
  opt.audit.org_first = !args.oi_first;
  opt.audit.exclude_unknown_org = args.exclude_unknown_org;
  opt.audit.threads = args.threads;

  std::unique_ptr<measure::Backend> backend;
  if (args.backend == "replay") {
    backend = std::make_unique<measure::ReplayBackend>(measure::read_results(text::read_file(args.results)),
                                                       args.replay_lenient);
  } else if (args.backend == "simulate") {
    auto world = measure::load_world(text::read_file(args.world));
    world.noise_ms = args.noise_ms;
    world.propagation_factor = args.world_factor;
    world.seed = args.plan.seed;
    backend = std::make_unique<measure::SimulatorBackend>(std::move(world));
  } else {
    measure::LiveConfig cfg;
    cfg.base_url = args.live_url;
    cfg.api_key = std::getenv(measure::kApiKeyEnv);
    cfg.tag = args.tag;
    backend = std::make_unique<measure::LiveBackend>(std::move(cfg));
  }

  Degrading degrading(*backend);
  const auto outcome = campaign::run(in, opt, degrading);
  if (degrading.failed() != 0) {
    err << "warning: " << degrading.failed() << " measurements failed and count as unresponsive; last error: "
        << degrading.last_error() << "\n";
    if (outcome.stats.targets != 0 && degrading.failed() == outcome.stats.targets) {
      throw Error(ErrorCode::BackendUnavailable, "every measurement failed");
    }
  }

  text::write_file(args.plan.out, classify::write_audit(outcome.audit.records));
  if (!args.results_out.empty()) text::write_file(args.results_out, measure::write_results(outcome.measurements));
  print_plan_stats(outcome.stats, out);
  print_stage_counts(outcome.audit.counts, out);
  out << "wrote " << outcome.audit.records.size() << " records to " << args.plan.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------- report / oro

struct ReportArgs {
  std::string audit;
  std::string registrations;
  std::vector<std::string> geodb;
  std::string leased;
  bool strict_geodb = false;
  GeoArgs geo;
  std::string out_dir = "report";
};

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
  auto paths = args.geo.paths();
  paths.insert(paths.end(), {{"--audit", args.audit}, {"--registrations", args.registrations}, {"--leased", args.leased}});
  std::vector<std::pair<std::string, std::string>> providers;
  for (const auto& arg : args.geodb) {
    providers.push_back(split_assignment(arg, "--geodb"));
    paths.emplace_back("--geodb", providers.back().second);
  }
  check_readable(paths);

  LoadedGeo g;
  load_geo(args.geo, g, err);
  report::ReportInputs in;
  in.records = classify::read_audit(text::read_file(args.audit));
  if (!args.registrations.empty()) in.regs = load_registrations(args.registrations);
  for (const auto& [name, path] : providers) {
    auto entries = report::load_geodb(text::read_file(path), name);
    in.geodb.insert(in.geodb.end(), std::make_move_iterator(entries.begin()), std::make_move_iterator(entries.end()));
  }
  if (!args.leased.empty()) in.leased = targets::load_prefix_list(text::read_file(args.leased));
  in.strict_geodb = args.strict_geodb;
  in.region_map = g.region_map;
  std::filesystem::create_directories(args.out_dir);
  out << report::write_report(in, args.out_dir);
  return kOk;
}

struct OroArgs {
  std::string registrations;
  GeoArgs geo;
  std::string out_dir;
};

int cmd_oro(const OroArgs& args, std::ostream& out, std::ostream& err) {
  auto paths = args.geo.paths();
  paths.emplace_back("--registrations", args.registrations);
  check_readable(paths);
  LoadedGeo g;
  load_geo(args.geo, g, err);
  const auto regs = load_registrations(args.registrations);
  const auto v4 = report::oro_stats(regs, *g.region_map, Family::V4);
  const auto v6 = report::oro_stats(regs, *g.region_map, Family::V6);
  out << report::format_oro(v4, v6);
  if (!args.out_dir.empty()) {
    const std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    text::write_file((dir / "oro_v4.csv").string(), report::oro_csv(v4));
    text::write_file((dir / "oro_v6.csv").string(), report::oro_csv(v6));
    text::write_file((dir / "oro_flows.csv").string(), report::oro_flows_csv(v4, v6));
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audit IP prefix registrations for geographic consistency.", "geoaudit"};
  app.footer(kFooter);
  app.require_subcommand(1);
  // Lets --config appear after the subcommand too.
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "config file of key = value defaults")->envname(kConfigEnv);

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Parse bulk WHOIS dumps into registrations.jsonl");
  s_ingest->add_option("--whois", ingest.whois, "RIR=PATH, repeatable; gzip is read transparently");
  s_ingest->add_option("--dialects", ingest.dialects, "attribute dialect table replacing the built-in one");
  s_ingest->add_option("--dataset-date", ingest.dataset_date, "records updated after this date are malformed");
  s_ingest->add_option("--out", ingest.out, "output path")->capture_default_str();

  AlignArgs align;
  auto* s_align = app.add_subcommand("align", "Compare WHOIS prefixes with BGP announcements");
  s_align->add_option("--registrations", align.registrations, "registrations.jsonl from ingest");
  s_align->add_option("--rib", align.rib, "BGP table, `prefix origin` per line");
  s_align->add_option("--out", align.out, "also write the table as CSV");

  PlanArgs plan;
  plan.out = "plan.jsonl";
  auto* s_plan = app.add_subcommand("plan", "Select targets and vantage points without measuring");
  plan.add(*s_plan);
  s_plan->add_option("--out", plan.out, "output path")->capture_default_str();

  AuditArgs audit;
  audit.plan.out = "audit.jsonl";
  auto* s_audit = app.add_subcommand("audit", "Measure, infer locations and classify registrations");
  audit.plan.add(*s_audit);
  s_audit->add_option("--backend", audit.backend, "replay, simulate or live")
      ->capture_default_str()
      ->envname("GEOAUDIT_BACKEND");
  s_audit->add_option("--results", audit.results, "measurement archive for the replay backend");
  s_audit->add_flag("--replay-lenient", audit.replay_lenient,
                    "treat pairs missing from the archive as unanswered instead of failing");
  s_audit->add_option("--world", audit.world, "target locations for the simulate backend");
  s_audit->add_option("--noise-ms", audit.noise_ms, "simulated additive delay bound")->capture_default_str();
  s_audit->add_option("--world-factor", audit.world_factor, "simulated propagation speed as a fraction of c")
      ->default_str("0.6667");
  s_audit->add_option("--live-url", audit.live_url, "measurement API base URL for the live backend")
      ->envname("GEOAUDIT_LIVE_URL");
  s_audit->add_option("--tag", audit.tag, "tag attached to live measurements")->capture_default_str();
  s_audit->add_option("--propagation-factor", audit.propagation_factor,
                      "assumed signal speed as a fraction of c, in (0, 1]")
      ->default_str("0.6667")
      ->envname("GEOAUDIT_PROPAGATION_FACTOR");
  s_audit->add_option("--threads", audit.threads, "classification worker threads")
      ->capture_default_str()
      ->envname("GEOAUDIT_THREADS");
  s_audit->add_option("--in-flight", audit.in_flight, "measurements outstanding at once")
      ->capture_default_str()
      ->envname("GEOAUDIT_IN_FLIGHT");
  s_audit->add_flag("--exclude-unknown-org", audit.exclude_unknown_org,
                    "filter prefixes without an organization country instead of classifying them");
  s_audit->add_flag("--oi-first", audit.oi_first,
                    "label prefixes that fit both OC and OI as OI");
  s_audit->add_option("--out", audit.plan.out, "output path")->capture_default_str();
  s_audit->add_option("--results-out", audit.results_out, "also write the raw measurements");

  ReportArgs rep;
  auto* s_report = app.add_subcommand("report", "Summarize an audit into CSV tables");
  s_report->add_option("--audit", rep.audit, "audit.jsonl");
  s_report->add_option("--registrations", rep.registrations, "registrations.jsonl for the age table");
  s_report->add_option("--geodb", rep.geodb, "PROVIDER=PATH prefix,country CSV, repeatable");
  s_report->add_option("--leased", rep.leased, "leased prefixes, one per line");
  s_report->add_flag("--strict-geodb", rep.strict_geodb,
                     "a provider detects a prefix only if it places it inside the measured region");
  rep.geo.add(*s_report, false);
  s_report->add_option("--out-dir", rep.out_dir, "output directory")->capture_default_str();

  OroArgs oro;
  auto* s_oro = app.add_subcommand("oro", "Count registrations whose organization sits outside the region");
  s_oro->add_option("--registrations", oro.registrations, "registrations.jsonl");
  oro.geo.add(*s_oro, false);
  s_oro->add_option("--out-dir", oro.out_dir, "also write CSV tables here");

  std::vector<char*> argv;
  std::vector<std::string> owned(args.begin(), args.end());
  if (owned.empty()) owned.emplace_back("geoaudit");
  for (auto& a : owned) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) {
      check_readable({{"--config", config_path}});
      apply_config(parse_config(text::read_file(config_path), config_path), *sub);
    }
    if (sub == s_ingest) {
      require(*sub, {"--whois"});
      return cmd_ingest(ingest, out, err);
    }
    if (sub == s_align) {
      require(*sub, {"--registrations", "--rib"});
      return cmd_align(align, out, err);
    }
    if (sub == s_plan) {
      require(*sub, {"--registrations", "--rib", "--vantages"});
      return cmd_plan(plan, out, err);
    }
    if (sub == s_audit) {
      require(*sub, {"--registrations", "--rib", "--vantages"});
      return cmd_audit(audit, out, err);
    }
    if (sub == s_report) {
      require(*sub, {"--audit"});
      return cmd_report(rep, out, err);
    }
    require(*sub, {"--registrations"});
    return cmd_oro(oro, out, err);
  } catch (const Error& e) {
    err << "geoaudit: " << e.what() << "\n";
    return exit_for(e.code());
  } catch (const std::exception& e) {
    err << "geoaudit: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace geoaudit::cli
