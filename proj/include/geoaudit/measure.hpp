#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geoaudit/geo.hpp"
#include "geoaudit/registry.hpp"
#include "geoaudit/vantage.hpp"

namespace geoaudit::measure {

inline constexpr std::size_t kPacketsPerPing = 3;

struct MeasurementResult {
  std::string vantage_id;
  Address target;
  // Up to three replies; lost packets are simply absent.
  std::vector<double> rtts_ms;
  // Unix seconds; 0 when unknown.
  std::int64_t timestamp = 0;

  friend bool operator==(const MeasurementResult&, const MeasurementResult&) = default;
};

// {"vantage_id":"6001","target":"192.0.2.1","rtts_ms":[12.1,12.4,12.0],"timestamp":1700000000}
std::string to_json_line(const MeasurementResult& r);
// Throws MalformedConfig with the line number on a bad line.
std::vector<MeasurementResult> read_results(std::string_view jsonl);
// Sorted by (target, vantage id).
std::string write_results(std::vector<MeasurementResult> results);

struct Task {
  Address target;
  std::vector<const vantage::VantagePoint*> vantages;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // One result per vantage in task order. Must be safe to call concurrently.
  virtual std::vector<MeasurementResult> run(const Task& task) = 0;
};

// Runs every task with at most `max_in_flight` tasks outstanding. The result
// for tasks[i] is at index i whatever the completion order. The first
// backend exception is rethrown after in-flight work drains.
std::vector<std::vector<MeasurementResult>> run_plan(const std::vector<Task>& tasks, Backend& backend,
                                                     std::size_t max_in_flight);

class ReplayBackend : public Backend {
 public:
  // With `missing_as_empty`, pairs absent from the archive come back as empty
  // results instead of throwing ReplayMiss.
  explicit ReplayBackend(std::vector<MeasurementResult> archive, bool missing_as_empty = false);
  std::vector<MeasurementResult> run(const Task& task) override;

 private:
  std::map<std::pair<Address, std::string>, MeasurementResult> archive_;
  bool missing_as_empty_;
};

struct SyntheticWorld {
  std::map<Address, geo::LatLon> target_locations;
  // Targets that never answer.
  std::set<Address> dropout;
  double noise_ms = 0;
  double propagation_factor = geo::kFiberFactor;
  std::uint64_t seed = 0;
};

// Three samples of base + U[0, noise_ms] where base is the round-trip time
// over the great circle at propagation_factor * c. Samples depend only on
// (seed, vantage id, target). Empty when the target is in the dropout set.
std::vector<double> simulate_rtt(const SyntheticWorld& world, const vantage::VantagePoint& vp, const Address& target);

// `address,lat,lon[,dropout]` rows, '#' comments, optional header. Throws
// MalformedConfig with the line number.
SyntheticWorld load_world(std::string_view csv);

// Round trip over `km` at factor * c, in milliseconds.
double propagation_rtt_ms(double km, double factor);

class SimulatorBackend : public Backend {
 public:
  // Throws MalformedConfig unless 0 < factor <= 1 and noise >= 0.
  explicit SimulatorBackend(SyntheticWorld world);
  std::vector<MeasurementResult> run(const Task& task) override;
  const SyntheticWorld& world() const { return world_; }

 private:
  SyntheticWorld world_;
};

struct LiveConfig {
  // e.g. https://atlas.ripe.net/api/v2
  std::string base_url;
  std::string api_key;
  std::string tag;
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{2000};
  std::chrono::milliseconds backoff_cap{60000};
  std::chrono::milliseconds poll_interval{10000};
  std::chrono::milliseconds poll_timeout{std::chrono::minutes(10)};
};

inline constexpr const char* kApiKeyEnv = "GEOAUDIT_ATLAS_KEY";

// Delay before retry `attempt` (0-based): base * 2^attempt, capped.
std::chrono::milliseconds backoff_delay(const LiveConfig& cfg, int attempt);

// Creates one-off public ping measurements and polls their results. The wire
// format is described in docs/live-api.md.
class LiveBackend : public Backend {
 public:
  explicit LiveBackend(LiveConfig cfg);
  std::vector<MeasurementResult> run(const Task& task) override;

  // Injectable for tests.
  void set_sleep(std::function<void(std::chrono::milliseconds)> sleep) { sleep_ = std::move(sleep); }

 private:
  LiveConfig cfg_;
  std::function<void(std::chrono::milliseconds)> sleep_;
};

}  // namespace geoaudit::measure
