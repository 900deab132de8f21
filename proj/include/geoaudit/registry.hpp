#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geoaudit/error.hpp"

namespace geoaudit {

__extension__ typedef unsigned __int128 u128;

enum class Family : std::uint8_t { V4, V6 };

constexpr int address_width(Family f) { return f == Family::V4 ? 32 : 128; }
std::string_view to_string(Family f);

// An IPv4 or IPv6 address held as an unsigned integer of the family's width
// (IPv4 occupies the low 32 bits).
class Address {
 public:
  Address() = default;
  Address(Family family, u128 value);

  static Address v4(std::uint32_t value) { return Address(Family::V4, value); }

  Family family() const { return family_; }
  u128 value() const { return value_; }
  int width() const { return address_width(family_); }

  // Bit `i` counted from the most significant end, 0 <= i < width().
  bool bit(int i) const { return ((value_ >> (width() - 1 - i)) & 1U) != 0; }

  friend bool operator==(const Address&, const Address&) = default;
  friend std::strong_ordering operator<=>(const Address& a, const Address& b) {
    if (auto c = a.family_ <=> b.family_; c != 0) return c;
    if (a.value_ == b.value_) return std::strong_ordering::equal;
    return a.value_ < b.value_ ? std::strong_ordering::less : std::strong_ordering::greater;
  }

 private:
  Family family_ = Family::V4;
  u128 value_ = 0;
};

Address parse_address(std::string_view text);
std::optional<Address> try_parse_address(std::string_view text);
std::string format_address(const Address& addr);

// A canonical CIDR block: all bits below the mask are zero.
class Prefix {
 public:
  Prefix() = default;

  // Throws MalformedPrefix if `network` has host bits set or `length` is out
  // of range for the family.
  Prefix(Address network, int length);

  // The block of the given length that contains `addr`.
  static Prefix covering(const Address& addr, int length);
  static Prefix host(const Address& addr) { return Prefix(addr, addr.width()); }

  Family family() const { return network_.family(); }
  const Address& network() const { return network_; }
  int length() const { return length_; }
  int width() const { return network_.width(); }

  Address first() const { return network_; }
  Address last() const;
  bool bit(int i) const { return network_.bit(i); }

  bool contains(const Address& addr) const;
  bool contains(const Prefix& other) const;
  bool overlaps(const Prefix& other) const { return contains(other) || other.contains(*this); }

  // Address order; for equal networks the shorter (less specific) prefix first.
  friend bool operator==(const Prefix&, const Prefix&) = default;
  friend std::strong_ordering operator<=>(const Prefix& a, const Prefix& b) {
    if (auto c = a.network_ <=> b.network_; c != 0) return c;
    return a.length_ <=> b.length_;
  }

 private:
  Address network_;
  int length_ = 0;
};

Prefix parse_prefix(std::string_view text);
std::optional<Prefix> try_parse_prefix(std::string_view text);
std::string format_prefix(const Prefix& prefix);

// Minimal list of canonical blocks whose union is exactly [start, end].
std::vector<Prefix> range_to_cidrs(const Address& start, const Address& end);

// /24-equivalents for IPv4, /48-equivalents for IPv6.
double address_units(const Prefix& prefix);

class CountryCode {
 public:
  // "ZZ", the user-assigned unknown code. Never present in a region map.
  CountryCode() = default;

  // Exactly two ASCII uppercase letters, else MalformedConfig.
  static CountryCode parse(std::string_view text);
  // Accepts any case and surrounding whitespace; rejects everything else.
  static std::optional<CountryCode> normalize(std::string_view text);

  std::string str() const { return std::string(code_.data(), 2); }

  friend bool operator==(const CountryCode&, const CountryCode&) = default;
  friend auto operator<=>(const CountryCode&, const CountryCode&) = default;

 private:
  explicit CountryCode(std::array<char, 2> code) : code_(code) {}
  std::array<char, 2> code_{'Z', 'Z'};
};

enum class Rir : std::uint8_t { Arin, Ripe, Apnic, Lacnic, Afrinic };

inline constexpr std::array<Rir, 5> kAllRirs = {Rir::Arin, Rir::Ripe, Rir::Apnic, Rir::Lacnic,
                                                Rir::Afrinic};

std::string_view to_string(Rir rir);
std::optional<Rir> try_parse_rir(std::string_view text);
Rir parse_rir(std::string_view text);

// Small value set over the five registries.
class RirSet {
 public:
  constexpr RirSet() = default;
  static constexpr RirSet all() { return RirSet(0x1F); }
  static constexpr RirSet from_bits(std::uint8_t bits) { return RirSet(bits & 0x1F); }

  constexpr void insert(Rir r) { bits_ |= bit(r); }
  constexpr bool contains(Rir r) const { return (bits_ & bit(r)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  int size() const;
  bool is_subset_of(RirSet other) const { return (bits_ & ~other.bits_) == 0; }
  std::vector<Rir> members() const;

  friend bool operator==(RirSet, RirSet) = default;

 private:
  constexpr explicit RirSet(std::uint8_t bits) : bits_(bits) {}
  static constexpr std::uint8_t bit(Rir r) { return static_cast<std::uint8_t>(1U << static_cast<int>(r)); }
  std::uint8_t bits_ = 0;
};

// Country -> responsible registry.
class RegionMap {
 public:
  static constexpr std::size_t kSnapshotCountries = 244;
  static constexpr std::array<std::pair<Rir, std::size_t>, 5> kSnapshotCounts = {
      {{Rir::Arin, 29}, {Rir::Ripe, 73}, {Rir::Apnic, 54}, {Rir::Lacnic, 31}, {Rir::Afrinic, 57}}};

  RegionMap() = default;
  explicit RegionMap(std::map<CountryCode, Rir> entries);

  // `country,rir` CSV with header.
  static RegionMap load(std::istream& in);
  static RegionMap load_file(const std::string& path);
  // The shipped snapshot compiled into the library.
  static const RegionMap& builtin();

  Rir rir_of(const CountryCode& cc) const;
  std::optional<Rir> find(const CountryCode& cc) const;
  std::size_t size() const { return entries_.size(); }
  std::size_t count(Rir rir) const { return counts_[static_cast<int>(rir)]; }
  const std::map<CountryCode, Rir>& entries() const { return entries_; }
  std::vector<CountryCode> countries_of(Rir rir) const;

  bool matches_snapshot_counts() const;

 private:
  std::map<CountryCode, Rir> entries_;
  std::array<std::size_t, 5> counts_{};
};

inline Rir rir_of_country(const CountryCode& cc, const RegionMap& map) { return map.rir_of(cc); }

using Date = std::chrono::year_month_day;

// Accepts YYYY-MM-DD, YYYYMMDD, and ISO timestamps (date part used).
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& d);

enum class Status : std::uint8_t { Allocated, Assigned, LegacyOrUnknown };

inline constexpr std::array<Status, 3> kAllStatuses = {Status::Allocated, Status::Assigned,
                                                       Status::LegacyOrUnknown};

std::string_view to_string(Status s);
std::optional<Status> try_parse_status_name(std::string_view text);

struct Registration {
  Prefix prefix;
  Rir rir = Rir::Arin;
  std::optional<CountryCode> org_country;
  std::optional<std::string> org_id;
  Status status = Status::LegacyOrUnknown;
  std::optional<Date> last_updated;
  std::optional<std::pair<Address, Address>> source_range;
  // Registry the record says the block now belongs to, if it was transferred.
  std::optional<Rir> transferred_to;
  std::vector<std::string> flags;

  bool has_flag(std::string_view f) const;
  void add_flag(std::string f);
};

}  // namespace geoaudit
