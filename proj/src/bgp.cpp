#include "geoaudit/bgp.hpp"

#include <charconv>
#include <istream>
#include <iterator>
#include <map>
#include <optional>

#include "geoaudit/text.hpp"

namespace geoaudit::bgp {

std::string_view to_string(Alignment a) {
  switch (a) {
    case Alignment::Subnet: return "Subnet";
    case Alignment::Aligned: return "Aligned";
    case Alignment::Supernet: return "Supernet";
    case Alignment::MixedAS: return "MixedAS";
    case Alignment::Unadvertised: return "Unadvertised";
  }
  return "?";
}

std::optional<Alignment> try_parse_alignment(std::string_view s) {
  for (Alignment a : kAllAlignments) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

namespace {

std::optional<Asn> parse_asn(std::string_view s) {
  s = text::trim(s);
  if (s.size() > 2 && (s[0] == 'A' || s[0] == 'a') && (s[1] == 'S' || s[1] == 's')) s.remove_prefix(2);
  Asn v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::set<Asn>> parse_origins(std::string_view s) {
  std::set<Asn> out;
  if (!s.empty() && s.front() == '{') {
    if (s.back() != '}') return std::nullopt;
    for (auto part : text::split(s.substr(1, s.size() - 2), ',')) {
      const auto a = parse_asn(part);
      if (!a) return std::nullopt;
      out.insert(*a);
    }
  } else {
    const auto a = parse_asn(s);
    if (!a) return std::nullopt;
    out.insert(*a);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

}  // namespace

Rib load_rib(std::string_view blob) {
  Rib rib;
  std::map<Prefix, std::set<Asn>> merged;
  for (const auto line : text::data_lines(blob)) {
    ++rib.lines_read;
    const auto cols = text::split_ws(line);
    if (cols.size() != 2) {
      ++rib.malformed;
      continue;
    }
    const auto prefix = try_parse_prefix(cols[0]);
    const auto origins = parse_origins(cols[1]);
    if (!prefix || !origins) {
      ++rib.malformed;
      continue;
    }
    if (prefix->length() == 0) {
      ++rib.default_routes_dropped;
      continue;
    }
    merged[*prefix].insert(origins->begin(), origins->end());
  }
  for (auto& [prefix, origins] : merged) rib.routes.insert(prefix, BgpRoute{prefix, std::move(origins)});
  rib.routes.freeze();
  return rib;
}

Rib load_rib(std::istream& in) {
  if (!in) throw Error(ErrorCode::UnreadableStream, "bad RIB stream");
  const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_rib(blob);
}

AlignmentDetail align_detail(const Prefix& whois_prefix, const Rib& rib) {
  AlignmentDetail out;
  if (const auto* exact = rib.routes.find_exact(whois_prefix)) {
    out.alignment = Alignment::Aligned;
    out.moas = exact->origin_asns.size() > 1;
    return out;
  }
  if (rib.routes.longest_covering(whois_prefix, true)) {
    out.alignment = Alignment::Subnet;
    return out;
  }
  const auto inside = rib.routes.enumerate_contained(whois_prefix);
  out.contained_routes = inside.size();
  if (inside.empty()) {
    out.alignment = Alignment::Unadvertised;
    return out;
  }
  std::set<Asn> origins;
  for (const auto& m : inside) origins.insert(m.value->origin_asns.begin(), m.value->origin_asns.end());
  out.alignment = origins.size() > 1 ? Alignment::MixedAS : Alignment::Supernet;
  return out;
}

std::size_t AlignmentTable::total(Rir rir) const {
  std::size_t n = 0;
  for (auto c : counts[static_cast<int>(rir)]) n += c;
  return n;
}

std::size_t AlignmentTable::total() const {
  std::size_t n = 0;
  for (Rir r : kAllRirs) n += total(r);
  return n;
}

std::array<double, 5> AlignmentTable::fractions(Rir rir) const {
  std::array<double, 5> out{};
  const auto n = total(rir);
  if (n == 0) return out;
  const auto& row = counts[static_cast<int>(rir)];
  for (std::size_t i = 0; i < 5; ++i) out[i] = static_cast<double>(row[i]) / static_cast<double>(n);
  return out;
}

std::array<double, 5> AlignmentTable::fractions_all() const {
  std::array<double, 5> out{};
  const auto n = total();
  if (n == 0) return out;
  for (std::size_t i = 0; i < 5; ++i) {
    std::size_t col = 0;
    for (Rir r : kAllRirs) col += counts[static_cast<int>(r)][i];
    out[i] = static_cast<double>(col) / static_cast<double>(n);
  }
  return out;
}

AlignmentTable alignment_table(const std::vector<Registration>& regs, const Rib& rib) {
  AlignmentTable t;
  for (const auto& r : regs) {
    ++t.counts[static_cast<int>(r.rir)][static_cast<int>(align(r.prefix, rib))];
  }
  return t;
}

}  // namespace geoaudit::bgp
