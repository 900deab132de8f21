#include "geoaudit/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include "geoaudit/parallel.hpp"
#include "geoaudit/text.hpp"
#include "json.hpp"

namespace geoaudit::measure {

using ordered_json = nlohmann::ordered_json;

std::string to_json_line(const MeasurementResult& r) {
  ordered_json j;
  j["vantage_id"] = r.vantage_id;
  j["target"] = format_address(r.target);
  j["rtts_ms"] = r.rtts_ms;
  j["timestamp"] = r.timestamp;
  return j.dump();
}

std::vector<MeasurementResult> read_results(std::string_view jsonl) {
  std::vector<MeasurementResult> out;
  std::size_t line_no = 0;
  for (auto line : text::split(jsonl, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty()) continue;
    auto fail = [&] {
      return Error(ErrorCode::MalformedConfig, "results line " + std::to_string(line_no) + ": " + std::string(line));
    };
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (!j.is_object() || !j.contains("vantage_id") || !j.contains("target") || !j.contains("rtts_ms")) throw fail();
    MeasurementResult r;
    const auto& id = j["vantage_id"];
    if (id.is_string()) {
      r.vantage_id = id.get<std::string>();
    } else if (id.is_number_integer()) {
      r.vantage_id = std::to_string(id.get<long long>());
    } else {
      throw fail();
    }
    if (!j["target"].is_string()) throw fail();
    const auto target = try_parse_address(j["target"].get<std::string>());
    if (!target || !j["rtts_ms"].is_array() || j["rtts_ms"].size() > kPacketsPerPing) throw fail();
    r.target = *target;
    for (const auto& v : j["rtts_ms"]) {
      if (!v.is_number()) throw fail();
      const double rtt = v.get<double>();
      if (!std::isfinite(rtt) || rtt < 0) throw fail();
      r.rtts_ms.push_back(rtt);
    }
    if (const auto ts = j.find("timestamp"); ts != j.end() && !ts->is_null()) {
      if (!ts->is_number_integer()) throw fail();
      r.timestamp = ts->get<std::int64_t>();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string write_results(std::vector<MeasurementResult> results) {
  std::sort(results.begin(), results.end(), [](const MeasurementResult& a, const MeasurementResult& b) {
    if (a.target != b.target) return a.target < b.target;
    return text::natural_less(a.vantage_id, b.vantage_id);
  });
  std::string out;
  for (const auto& r : results) {
    out += to_json_line(r);
    out += '\n';
  }
  return out;
}

std::vector<std::vector<MeasurementResult>> run_plan(const std::vector<Task>& tasks, Backend& backend,
                                                     std::size_t max_in_flight) {
  std::vector<std::vector<MeasurementResult>> out(tasks.size());
  parallel_for(tasks.size(), max_in_flight, [&](std::size_t i) { out[i] = backend.run(tasks[i]); });
  return out;
}

ReplayBackend::ReplayBackend(std::vector<MeasurementResult> archive, bool missing_as_empty)
    : missing_as_empty_(missing_as_empty) {
  for (auto& r : archive) {
    auto key = std::make_pair(r.target, r.vantage_id);
    archive_.insert_or_assign(std::move(key), std::move(r));
  }
}

std::vector<MeasurementResult> ReplayBackend::run(const Task& task) {
  std::vector<MeasurementResult> out;
  out.reserve(task.vantages.size());
  for (const auto* vp : task.vantages) {
    const auto it = archive_.find({task.target, vp->id});
    if (it != archive_.end()) {
      out.push_back(it->second);
    } else if (missing_as_empty_) {
      out.push_back({vp->id, task.target, {}, 0});
    } else {
      throw Error(ErrorCode::ReplayMiss, "no archived result for " + vp->id + " -> " + format_address(task.target));
    }
  }
  return out;
}

SyntheticWorld load_world(std::string_view csv) {
  SyntheticWorld world;
  std::size_t line_no = 0;
  for (const auto line : text::data_lines(csv)) {
    ++line_no;
    const auto cols = text::split(line, ',');
    if (line_no == 1 && !cols.empty() && !text::trim(cols[0]).empty() && !try_parse_address(text::trim(cols[0]))) {
      continue;  // header
    }
    const auto bad = [&] { return Error(ErrorCode::MalformedConfig, "world row " + std::to_string(line_no)); };
    if (cols.size() < 3 || cols.size() > 4) throw bad();
    const auto addr = try_parse_address(text::trim(cols[0]));
    geo::LatLon at;
    const auto lat = text::trim(cols[1]);
    const auto lon = text::trim(cols[2]);
    const auto ra = std::from_chars(lat.data(), lat.data() + lat.size(), at.lat);
    const auto rb = std::from_chars(lon.data(), lon.data() + lon.size(), at.lon);
    if (!addr || ra.ec != std::errc{} || rb.ec != std::errc{} || ra.ptr != lat.data() + lat.size() ||
        rb.ptr != lon.data() + lon.size() || std::abs(at.lat) > 90 || std::abs(at.lon) > 180) {
      throw bad();
    }
    if (cols.size() == 4) {
      if (text::trim(cols[3]) != "dropout") throw bad();
      world.dropout.insert(*addr);
    }
    world.target_locations[*addr] = at;
  }
  return world;
}

double propagation_rtt_ms(double km, double factor) { return 2.0 * km / (factor * geo::kLightKmPerS) * 1000.0; }

std::vector<double> simulate_rtt(const SyntheticWorld& world, const vantage::VantagePoint& vp, const Address& target) {
  const auto it = world.target_locations.find(target);
  if (it == world.target_locations.end()) {
    throw Error(ErrorCode::UnknownTarget, "target not in synthetic world: " + format_address(target));
  }
  if (world.dropout.count(target) != 0) return {};
  const double km = geo::haversine_km({vp.lat, vp.lon}, it->second);
  const double base = propagation_rtt_ms(km, world.propagation_factor);
  std::vector<double> out(kPacketsPerPing, base);
  if (world.noise_ms > 0) {
    const auto key = vp.id + '|' + format_address(target);
    std::mt19937_64 rng(text::fnv1a64(key, text::fnv1a64(std::to_string(world.seed))));
    std::uniform_real_distribution<double> noise(0.0, world.noise_ms);
    for (auto& s : out) s += noise(rng);
  }
  return out;
}

SimulatorBackend::SimulatorBackend(SyntheticWorld world) : world_(std::move(world)) {
  if (!(world_.propagation_factor > 0 && world_.propagation_factor <= 1)) {
    throw Error(ErrorCode::MalformedConfig, "propagation factor must be in (0, 1]");
  }
  if (!(world_.noise_ms >= 0)) throw Error(ErrorCode::MalformedConfig, "noise must be non-negative");
}

std::vector<MeasurementResult> SimulatorBackend::run(const Task& task) {
  std::vector<MeasurementResult> out;
  out.reserve(task.vantages.size());
  for (const auto* vp : task.vantages) out.push_back({vp->id, task.target, simulate_rtt(world_, *vp, task.target), 0});
  return out;
}

}  // namespace geoaudit::measure
