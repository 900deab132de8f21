#include "httplib.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <thread>

#include "geoaudit/measure.hpp"
#include "json.hpp"

namespace geoaudit::measure {

std::chrono::milliseconds backoff_delay(const LiveConfig& cfg, int attempt) {
  auto d = cfg.backoff_base;
  for (int i = 0; i < attempt && d < cfg.backoff_cap; ++i) d *= 2;
  return std::min(d, cfg.backoff_cap);
}

LiveBackend::LiveBackend(LiveConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.base_url.empty()) throw Error(ErrorCode::MalformedConfig, "live backend needs a base URL");
  if (cfg_.api_key.empty()) {
    throw Error(ErrorCode::MalformedConfig, std::string("live backend needs an API key (set ") + kApiKeyEnv + ")");
  }
  sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

Endpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::MalformedConfig, "bad base URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

std::string id_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return {};
}

class Session {
 public:
  Session(const LiveConfig& cfg, const std::function<void(std::chrono::milliseconds)>& sleep)
      : cfg_(cfg), sleep_(sleep), endpoint_(split_url(cfg.base_url)), client_(endpoint_.origin) {
    client_.set_connection_timeout(10, 0);
    client_.set_read_timeout(30, 0);
    client_.set_default_headers({{"Authorization", "Key " + cfg.api_key}, {"Accept", "application/json"}});
  }

  // Retries transport failures, 429 and 5xx with exponential back-off.
  nlohmann::json request(const std::string& method, const std::string& path, const std::string& body = {}) {
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) sleep_(backoff_delay(cfg_, attempt - 1));
      const auto full = endpoint_.path + path;
      auto res = method == "POST" ? client_.Post(full, body, "application/json") : client_.Get(full);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::BackendUnavailable,
                    method + " " + full + " failed: HTTP " + std::to_string(res->status) + " " + res->body);
      }
      auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded()) throw Error(ErrorCode::BackendUnavailable, method + " " + full + ": response is not JSON");
      return j;
    }
    throw Error(ErrorCode::BackendUnavailable, method + " " + endpoint_.path + path + " gave up after " +
                                                   std::to_string(cfg_.max_retries) + " retries: " + last_error);
  }

 private:
  const LiveConfig& cfg_;
  const std::function<void(std::chrono::milliseconds)>& sleep_;
  Endpoint endpoint_;
  httplib::Client client_;
};

}  // namespace

std::vector<MeasurementResult> LiveBackend::run(const Task& task) {
  if (task.vantages.empty()) return {};
  Session session(cfg_, sleep_);

  std::string probe_ids;
  for (const auto* vp : task.vantages) {
    if (!probe_ids.empty()) probe_ids += ',';
    probe_ids += vp->id;
  }
  nlohmann::ordered_json def;
  def["type"] = "ping";
  def["af"] = task.target.family() == Family::V4 ? 4 : 6;
  def["target"] = format_address(task.target);
  def["packets"] = kPacketsPerPing;
  def["is_public"] = true;
  def["description"] = cfg_.tag;
  def["tags"] = {cfg_.tag};
  nlohmann::ordered_json body;
  body["definitions"] = {def};
  body["probes"] = {{{"type", "probes"}, {"value", probe_ids}, {"requested", task.vantages.size()}}};
  body["is_oneoff"] = true;

  const auto created = session.request("POST", "/measurements/", body.dump());
  if (!created.contains("measurements") || !created["measurements"].is_array() || created["measurements"].empty()) {
    throw Error(ErrorCode::BackendUnavailable, "create response lacks a measurement id");
  }
  const auto msm = id_string(created["measurements"][0]);

  std::map<std::string, MeasurementResult> got;
  std::chrono::milliseconds waited{0};
  while (true) {
    const auto results = session.request("GET", "/measurements/" + msm + "/results/?format=json");
    if (results.is_array()) {
      for (const auto& r : results) {
        const auto prb = r.contains("prb_id") ? id_string(r["prb_id"]) : std::string();
        if (prb.empty()) continue;
        MeasurementResult m{prb, task.target, {}, r.value("timestamp", std::int64_t{0})};
        if (r.contains("result") && r["result"].is_array()) {
          for (const auto& reply : r["result"]) {
            if (!reply.is_object() || !reply.contains("rtt") || !reply["rtt"].is_number()) continue;
            const double rtt = reply["rtt"].get<double>();
            if (std::isfinite(rtt) && rtt >= 0 && m.rtts_ms.size() < kPacketsPerPing) m.rtts_ms.push_back(rtt);
          }
        }
        got.insert_or_assign(prb, std::move(m));
      }
    }
    if (got.size() >= task.vantages.size()) break;
    const auto status = session.request("GET", "/measurements/" + msm + "/");
    const auto name = status.contains("status") && status["status"].is_object()
                          ? status["status"].value("name", std::string())
                          : std::string();
    if (name == "Stopped" || name == "Failed" || name == "No suitable probes") break;
    if (waited >= cfg_.poll_timeout) break;
    sleep_(cfg_.poll_interval);
    waited += cfg_.poll_interval;
  }

  std::vector<MeasurementResult> out;
  out.reserve(task.vantages.size());
  for (const auto* vp : task.vantages) {
    const auto it = got.find(vp->id);
    out.push_back(it != got.end() ? it->second : MeasurementResult{vp->id, task.target, {}, 0});
  }
  return out;
}

}  // namespace geoaudit::measure
