#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "geoaudit/prefix_trie.hpp"
#include "geoaudit/registry.hpp"

namespace geoaudit::bgp {

using Asn = std::uint32_t;

struct BgpRoute {
  Prefix prefix;
  std::set<Asn> origin_asns;
};

// Table column order: Subnet, Aligned, Supernet, MixedAS, Unadvertised.
enum class Alignment : std::uint8_t { Subnet, Aligned, Supernet, MixedAS, Unadvertised };

inline constexpr std::array<Alignment, 5> kAllAlignments = {Alignment::Subnet, Alignment::Aligned, Alignment::Supernet,
                                                            Alignment::MixedAS, Alignment::Unadvertised};

std::string_view to_string(Alignment a);
std::optional<Alignment> try_parse_alignment(std::string_view s);

struct Rib {
  DualTrie<BgpRoute> routes;
  std::size_t lines_read = 0;
  std::size_t malformed = 0;
  std::size_t default_routes_dropped = 0;
};

// `<prefix> <origin>` per line, '#' comments. The origin may be written as
// 64500, AS64500 or an AS set {64500,64501}. Repeated prefixes merge their
// origins. The returned tries are frozen.
Rib load_rib(std::string_view text);
Rib load_rib(std::istream& in);

struct AlignmentDetail {
  Alignment alignment = Alignment::Unadvertised;
  // Exact match announced by more than one origin.
  bool moas = false;
  std::size_t contained_routes = 0;
};

// Precedence: exact route > covering route > contained routes.
AlignmentDetail align_detail(const Prefix& whois_prefix, const Rib& rib);
inline Alignment align(const Prefix& whois_prefix, const Rib& rib) { return align_detail(whois_prefix, rib).alignment; }

struct AlignmentTable {
  // counts[rir][alignment]
  std::array<std::array<std::size_t, 5>, 5> counts{};

  std::size_t total(Rir rir) const;
  std::size_t total() const;
  // Zero row when the registry has no prefixes.
  std::array<double, 5> fractions(Rir rir) const;
  std::array<double, 5> fractions_all() const;
};

AlignmentTable alignment_table(const std::vector<Registration>& regs, const Rib& rib);

}  // namespace geoaudit::bgp
