#include "geoaudit/registry.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "embedded_data.hpp"
#include "geoaudit/text.hpp"

namespace geoaudit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedAddress: return "MalformedAddress";
    case ErrorCode::MalformedPrefix: return "MalformedPrefix";
    case ErrorCode::InvertedRange: return "InvertedRange";
    case ErrorCode::MixedFamily: return "MixedFamily";
    case ErrorCode::UnknownCountry: return "UnknownCountry";
    case ErrorCode::UnknownRir: return "UnknownRir";
    case ErrorCode::FamilyMismatch: return "FamilyMismatch";
    case ErrorCode::TrieFrozen: return "TrieFrozen";
    case ErrorCode::UnreadableStream: return "UnreadableStream";
    case ErrorCode::UnknownDialect: return "UnknownDialect";
    case ErrorCode::MalformedConfig: return "MalformedConfig";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::NoResponses: return "NoResponses";
    case ErrorCode::NegativeRtt: return "NegativeRtt";
    case ErrorCode::EmptyGeoSet: return "EmptyGeoSet";
  }
  return "Unknown";
}

std::string_view to_string(Family f) { return f == Family::V4 ? "v4" : "v6"; }

namespace {

u128 width_mask(int width) { return width == 128 ? ~u128{0} : ((u128{1} << width) - 1); }

// Mask of the host bits below a prefix of `length` in an address of `width`.
u128 host_mask(int width, int length) {
  const int host_bits = width - length;
  if (host_bits <= 0) return 0;
  if (host_bits >= 128) return ~u128{0};
  return (u128{1} << host_bits) - 1;
}

}  // namespace

Address::Address(Family family, u128 value) : family_(family), value_(value & width_mask(address_width(family))) {}

std::optional<Address> try_parse_address(std::string_view text) {
  text = text::trim(text);
  if (text.empty() || text.size() > INET6_ADDRSTRLEN) return std::nullopt;
  const std::string s(text);
  if (s.find(':') == std::string::npos) {
    in_addr a4{};
    if (inet_pton(AF_INET, s.c_str(), &a4) != 1) return std::nullopt;
    return Address::v4(ntohl(a4.s_addr));
  }
  in6_addr a6{};
  if (inet_pton(AF_INET6, s.c_str(), &a6) != 1) return std::nullopt;
  u128 v = 0;
  for (unsigned char byte : a6.s6_addr) v = (v << 8) | byte;
  return Address(Family::V6, v);
}

Address parse_address(std::string_view text) {
  if (auto a = try_parse_address(text)) return *a;
  throw Error(ErrorCode::MalformedAddress, std::string(text));
}

std::string format_address(const Address& addr) {
  char buf[INET6_ADDRSTRLEN];
  if (addr.family() == Family::V4) {
    in_addr a4{};
    a4.s_addr = htonl(static_cast<std::uint32_t>(addr.value()));
    inet_ntop(AF_INET, &a4, buf, sizeof(buf));
  } else {
    in6_addr a6{};
    u128 v = addr.value();
    for (int i = 15; i >= 0; --i) {
      a6.s6_addr[i] = static_cast<unsigned char>(v & 0xFF);
      v >>= 8;
    }
    inet_ntop(AF_INET6, &a6, buf, sizeof(buf));
  }
  return buf;
}

Prefix::Prefix(Address network, int length) : network_(network), length_(length) {
  if (length < 0 || length > network.width()) {
    throw Error(ErrorCode::MalformedPrefix, "length " + std::to_string(length) + " out of range");
  }
  if ((network.value() & host_mask(network.width(), length)) != 0) {
    throw Error(ErrorCode::MalformedPrefix, format_address(network) + "/" + std::to_string(length) +
                                                " has host bits set");
  }
}

Prefix Prefix::covering(const Address& addr, int length) {
  if (length < 0 || length > addr.width()) {
    throw Error(ErrorCode::MalformedPrefix, "length " + std::to_string(length) + " out of range");
  }
  return Prefix(Address(addr.family(), addr.value() & ~host_mask(addr.width(), length)), length);
}

Address Prefix::last() const {
  return Address(family(), network_.value() | host_mask(width(), length_));
}

bool Prefix::contains(const Address& addr) const {
  if (addr.family() != family()) return false;
  return (addr.value() & ~host_mask(width(), length_)) == network_.value();
}

bool Prefix::contains(const Prefix& other) const {
  return other.family() == family() && other.length_ >= length_ && contains(other.network_);
}

std::optional<Prefix> try_parse_prefix(std::string_view text) {
  text = text::trim(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  const auto addr = try_parse_address(text.substr(0, slash));
  if (!addr) return std::nullopt;
  const auto len_text = text.substr(slash + 1);
  int length = -1;
  if (len_text.empty() || len_text.size() > 3) return std::nullopt;
  const auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), length);
  if (ec != std::errc{} || ptr != len_text.data() + len_text.size()) return std::nullopt;
  if (length < 0 || length > addr->width()) return std::nullopt;
  if ((addr->value() & host_mask(addr->width(), length)) != 0) return std::nullopt;
  return Prefix(*addr, length);
}

Prefix parse_prefix(std::string_view text) {
  if (auto p = try_parse_prefix(text)) return *p;
  throw Error(ErrorCode::MalformedPrefix, std::string(text));
}

std::string format_prefix(const Prefix& prefix) {
  return format_address(prefix.network()) + "/" + std::to_string(prefix.length());
}

std::vector<Prefix> range_to_cidrs(const Address& start, const Address& end) {
  if (start.family() != end.family()) {
    throw Error(ErrorCode::MixedFamily, format_address(start) + " - " + format_address(end));
  }
  if (end.value() < start.value()) {
    throw Error(ErrorCode::InvertedRange, format_address(start) + " - " + format_address(end));
  }
  const int width = start.width();
  const u128 top = width_mask(width);
  std::vector<Prefix> out;
  u128 cur = start.value();
  while (true) {
    // Largest aligned block starting at `cur` that does not pass `end`.
    int host_bits = 0;
    if (cur == 0) {
      host_bits = width;
    } else {
      const auto lo = static_cast<std::uint64_t>(cur);
      host_bits = lo != 0 ? std::countr_zero(lo) : 64 + std::countr_zero(static_cast<std::uint64_t>(cur >> 64));
      host_bits = std::min(host_bits, width);
    }
    while (host_bits > 0 && (cur | host_mask(width, width - host_bits)) > end.value()) --host_bits;
    out.emplace_back(Address(start.family(), cur), width - host_bits);
    const u128 block_last = cur | host_mask(width, width - host_bits);
    if (block_last >= end.value() || block_last == top) break;
    cur = block_last + 1;
  }
  return out;
}

double address_units(const Prefix& prefix) {
  const int unit_length = prefix.family() == Family::V4 ? 24 : 48;
  return std::ldexp(1.0, unit_length - prefix.length());
}

CountryCode CountryCode::parse(std::string_view text) {
  if (text.size() != 2 || text[0] < 'A' || text[0] > 'Z' || text[1] < 'A' || text[1] > 'Z') {
    throw Error(ErrorCode::MalformedConfig, "bad country code '" + std::string(text) + "'");
  }
  return CountryCode({text[0], text[1]});
}

std::optional<CountryCode> CountryCode::normalize(std::string_view text) {
  const auto up = text::to_upper(text::trim(text));
  if (up.size() != 2 || up[0] < 'A' || up[0] > 'Z' || up[1] < 'A' || up[1] > 'Z') return std::nullopt;
  return CountryCode({up[0], up[1]});
}

std::string_view to_string(Rir rir) {
  switch (rir) {
    case Rir::Arin: return "ARIN";
    case Rir::Ripe: return "RIPE";
    case Rir::Apnic: return "APNIC";
    case Rir::Lacnic: return "LACNIC";
    case Rir::Afrinic: return "AFRINIC";
  }
  return "?";
}

std::optional<Rir> try_parse_rir(std::string_view text) {
  const auto up = text::to_upper(text::trim(text));
  for (Rir r : kAllRirs) {
    if (up == to_string(r)) return r;
  }
  if (up == "RIPE NCC" || up == "RIPENCC" || up == "RIPE-NCC") return Rir::Ripe;
  return std::nullopt;
}

Rir parse_rir(std::string_view text) {
  if (auto r = try_parse_rir(text)) return *r;
  throw Error(ErrorCode::UnknownRir, std::string(text));
}

int RirSet::size() const { return std::popcount(bits_); }

std::vector<Rir> RirSet::members() const {
  std::vector<Rir> out;
  for (Rir r : kAllRirs) {
    if (contains(r)) out.push_back(r);
  }
  return out;
}

RegionMap::RegionMap(std::map<CountryCode, Rir> entries) : entries_(std::move(entries)) {
  for (const auto& [cc, rir] : entries_) ++counts_[static_cast<int>(rir)];
}

RegionMap RegionMap::load(std::istream& in) {
  std::map<CountryCode, Rir> entries;
  std::string line;
  bool header = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (header) {
      header = false;
      if (text::iequals(t, "country,rir")) continue;
      throw Error(ErrorCode::MalformedConfig, "region map: expected header 'country,rir'");
    }
    const auto cols = text::split(t, ',');
    if (cols.size() != 2) {
      throw Error(ErrorCode::MalformedConfig, "region map line " + std::to_string(line_no));
    }
    const auto cc = CountryCode::parse(text::trim(cols[0]));
    const auto rir = try_parse_rir(cols[1]);
    if (!rir) throw Error(ErrorCode::MalformedConfig, "region map line " + std::to_string(line_no) + ": unknown RIR");
    if (!entries.emplace(cc, *rir).second) {
      throw Error(ErrorCode::MalformedConfig, "region map: duplicate country " + cc.str());
    }
  }
  return RegionMap(std::move(entries));
}

RegionMap RegionMap::load_file(const std::string& path) {
  std::istringstream in(text::read_file(path));
  return load(in);
}

const RegionMap& RegionMap::builtin() {
  static const RegionMap map = [] {
    std::istringstream in{std::string(embedded::kRegionMapCsv)};
    return load(in);
  }();
  return map;
}

Rir RegionMap::rir_of(const CountryCode& cc) const {
  if (auto r = find(cc)) return *r;
  throw Error(ErrorCode::UnknownCountry, cc.str());
}

std::optional<Rir> RegionMap::find(const CountryCode& cc) const {
  const auto it = entries_.find(cc);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<CountryCode> RegionMap::countries_of(Rir rir) const {
  std::vector<CountryCode> out;
  for (const auto& [cc, r] : entries_) {
    if (r == rir) out.push_back(cc);
  }
  return out;
}

bool RegionMap::matches_snapshot_counts() const {
  if (size() != kSnapshotCountries) return false;
  return std::all_of(kSnapshotCounts.begin(), kSnapshotCounts.end(),
                     [&](const auto& rc) { return count(rc.first) == rc.second; });
}

std::optional<Date> parse_date(std::string_view text) {
  text = text::trim(text);
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  const auto num = [](std::string_view s, auto& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  };
  if (text.size() >= 10 && text[4] == '-' && text[7] == '-') {
    if (!num(text.substr(0, 4), y) || !num(text.substr(5, 2), m) || !num(text.substr(8, 2), d)) return std::nullopt;
  } else if (text.size() >= 8 && std::all_of(text.begin(), text.begin() + 8, [](char c) { return c >= '0' && c <= '9'; })) {
    if (!num(text.substr(0, 4), y) || !num(text.substr(4, 2), m) || !num(text.substr(6, 2), d)) return std::nullopt;
  } else {
    return std::nullopt;
  }
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Allocated: return "Allocated";
    case Status::Assigned: return "Assigned";
    case Status::LegacyOrUnknown: return "LegacyOrUnknown";
  }
  return "LegacyOrUnknown";
}

std::optional<Status> try_parse_status_name(std::string_view text) {
  for (Status s : kAllStatuses) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

bool Registration::has_flag(std::string_view f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

void Registration::add_flag(std::string f) {
  if (!has_flag(f)) flags.push_back(std::move(f));
}

}  // namespace geoaudit
