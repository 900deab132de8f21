#include "geoaudit/targets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <string>

#include "geoaudit/text.hpp"

namespace geoaudit::targets {

Hitlist load_hitlist(std::string_view blob, Family family, int min_score) {
  Hitlist out;
  for (const auto line : text::data_lines(blob)) {
    ++out.lines_read;
    const auto cols = text::split(line, ',');
    const auto addr = try_parse_address(text::trim(cols[0]));
    if (!addr || addr->family() != family) {
      ++out.malformed;
      continue;
    }
    HitlistEntry e{*addr, std::nullopt};
    if (family == Family::V4) {
      if (cols.size() != 2) {
        ++out.malformed;
        continue;
      }
      const auto s = text::trim(cols[1]);
      int score = -1;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), score);
      if (ec != std::errc{} || ptr != s.data() + s.size() || score < 0 || score > 100) {
        ++out.malformed;
        continue;
      }
      if (score < min_score) {
        ++out.below_min_score;
        continue;
      }
      e.score = score;
    } else if (cols.size() != 1) {
      ++out.malformed;
      continue;
    }
    out.entries.push_back(e);
  }
  return out;
}

Hitlist load_hitlist(std::istream& in, Family family, int min_score) {
  if (!in) throw Error(ErrorCode::UnreadableStream, "bad hitlist stream");
  const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_hitlist(blob, family, min_score);
}

std::vector<Prefix> load_prefix_list(std::string_view blob) {
  std::vector<Prefix> out;
  for (const auto line : text::data_lines(blob)) {
    const auto p = try_parse_prefix(text::trim(line));
    if (!p) throw Error(ErrorCode::MalformedPrefix, "bad prefix in list: " + std::string(line));
    out.push_back(*p);
  }
  return out;
}

AliasFiltered exclude_aliased(std::vector<HitlistEntry> entries, const std::vector<Prefix>& aliased) {
  AliasFiltered out;
  if (aliased.empty()) {
    out.kept = std::move(entries);
    return out;
  }
  DualTrie<bool> index;
  for (const auto& p : aliased) index.insert(p, true);
  index.freeze();
  for (auto& e : entries) {
    if (index.longest_match(e.addr)) {
      ++out.removed;
    } else {
      out.kept.push_back(e);
    }
  }
  return out;
}

DualTrie<std::size_t> index_registrations(const std::vector<Registration>& regs) {
  DualTrie<std::size_t> index;
  for (std::size_t i = 0; i < regs.size(); ++i) {
    if (!index.find_exact(regs[i].prefix)) index.insert(regs[i].prefix, i);
  }
  index.freeze();
  return index;
}

std::vector<TargetPlan> build_target_plans(const DualTrie<std::size_t>& index,
                                           const std::vector<HitlistEntry>& entries) {
  std::map<Prefix, std::pair<std::size_t, std::set<Address>>> grouped;
  for (const auto& e : entries) {
    const auto m = index.longest_match(e.addr);
    if (!m) continue;
    auto& slot = grouped[m->prefix];
    slot.first = *m->value;
    slot.second.insert(e.addr);
  }
  std::vector<TargetPlan> plans;
  plans.reserve(grouped.size());
  for (auto& [prefix, slot] : grouped) {
    TargetPlan plan{prefix, {}, slot.first};
    for (const auto& a : slot.second) {
      if (plan.targets.size() == kMaxTargetsPerPrefix) break;
      plan.targets.push_back(a);
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<TargetPlan> sample_plans(std::vector<TargetPlan> plans, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::MalformedConfig, "sample fraction must be within [0, 1]");
  }
  auto by_prefix = [](const TargetPlan& a, const TargetPlan& b) { return a.prefix < b.prefix; };
  std::sort(plans.begin(), plans.end(), by_prefix);
  const auto n = plans.size();
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (k >= n) return plans;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(plans[i], plans[pick(rng)]);
  }
  plans.resize(k);
  std::sort(plans.begin(), plans.end(), by_prefix);
  return plans;
}

}  // namespace geoaudit::targets
