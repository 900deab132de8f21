#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "geoaudit/prefix_trie.hpp"
#include "geoaudit/registry.hpp"

namespace geoaudit::targets {

struct HitlistEntry {
  Address addr;
  // Responsiveness score, v4 only.
  std::optional<int> score;
};

struct Hitlist {
  std::vector<HitlistEntry> entries;
  std::size_t lines_read = 0;
  std::size_t malformed = 0;
  std::size_t below_min_score = 0;
};

// v4 lines are `addr,score`; v6 lines are a bare address. Lines of the other
// family count as malformed.
Hitlist load_hitlist(std::string_view text, Family family, int min_score = 99);
Hitlist load_hitlist(std::istream& in, Family family, int min_score = 99);

std::vector<Prefix> load_prefix_list(std::string_view text);

struct AliasFiltered {
  std::vector<HitlistEntry> kept;
  std::size_t removed = 0;
};

AliasFiltered exclude_aliased(std::vector<HitlistEntry> entries, const std::vector<Prefix>& aliased);

struct TargetPlan {
  Prefix prefix;
  // One or two addresses, ascending.
  std::vector<Address> targets;
  // Index into the registration list the index was built from.
  std::size_t registration = 0;
};

// Frozen prefix -> registration index map. Later duplicates of a prefix
// (possible across registries) keep the first index.
DualTrie<std::size_t> index_registrations(const std::vector<Registration>& regs);

inline constexpr std::size_t kMaxTargetsPerPrefix = 2;

// Plans are sorted by prefix.
std::vector<TargetPlan> build_target_plans(const DualTrie<std::size_t>& index, const std::vector<HitlistEntry>& entries);

// Uniform sample of round(fraction * n) plans. Input order does not matter;
// output is sorted by prefix.
std::vector<TargetPlan> sample_plans(std::vector<TargetPlan> plans, double fraction, std::uint64_t seed);

}  // namespace geoaudit::targets
