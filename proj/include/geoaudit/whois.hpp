#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoaudit/registry.hpp"

namespace geoaudit::whois {

// Attribute names for one registry's bulk dump format.
struct Dialect {
  std::vector<std::string> net_start;
  std::vector<std::string> org_start;
  std::vector<std::string> range;
  std::vector<std::string> status;
  std::vector<std::string> org_ref;
  std::vector<std::string> inline_country;
  std::vector<std::string> updated;
  std::vector<std::string> maintainer;
  std::vector<std::string> transfer;
  std::vector<std::string> not_managed;
  std::vector<std::string> org_id;
  std::vector<std::string> org_country;
  std::vector<std::string> org_name;
  bool abbreviated_v4 = false;
};

class DialectTable {
 public:
  // Parses the sectioned `key = a, b` format documented in data/dialects.conf.
  static DialectTable parse(std::string_view text);
  static const DialectTable& builtin();

  // Throws UnknownDialect when the registry has no section.
  const Dialect& get(Rir rir) const;
  bool has(Rir rir) const { return dialects_[static_cast<int>(rir)].has_value(); }

 private:
  std::array<std::optional<Dialect>, 5> dialects_;
};

enum class RecordKind { Net, Organization, Other };

struct RawRecord {
  RecordKind kind = RecordKind::Other;
  // Keys kept verbatim, in file order; repeated keys keep every value.
  std::vector<std::pair<std::string, std::string>> attributes;
  Rir source_rir = Rir::Arin;
  std::size_t first_line = 0;
  std::size_t last_line = 0;

  // First value of the first listed key present (case-insensitive).
  std::optional<std::string_view> first(const std::vector<std::string>& keys) const;
};

// Splits a dump into blank-line-delimited records. Lines starting with '#' or
// '%' are comments; lines starting with whitespace or '+' continue the
// previous value.
std::vector<RawRecord> split_records(std::string_view text, Rir rir, const Dialect& dialect);

struct Organization {
  std::string org_id;
  std::optional<CountryCode> country;
  std::optional<std::string> name;
};

struct IngestReport {
  std::size_t records_read = 0;  // network records
  std::size_t org_records_read = 0;
  std::size_t other_records = 0;
  std::size_t registrations_emitted = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t not_managed_skipped = 0;
  std::size_t malformed_skipped = 0;
  std::size_t non_cidr_ranges_split = 0;
  // Blocks beyond the first produced by splitting ranges.
  std::size_t split_extra_blocks = 0;
  std::size_t duplicate_orgs = 0;
  std::size_t circular_refs_dropped = 0;
  std::size_t transfers_dropped = 0;
  std::size_t unresolved_org_refs = 0;
  std::map<std::string, Status> status_variants_seen;

  // records_read + split_extra_blocks ==
  //   registrations_emitted + duplicates_dropped + not_managed_skipped + malformed_skipped
  bool balanced() const;
  IngestReport& operator+=(const IngestReport& other);
};

struct ParseOptions {
  // Records updated after this date are malformed. Unset disables the check.
  std::optional<Date> dataset_date;
};

struct IngestResult {
  std::vector<Registration> registrations;
  std::vector<Organization> organizations;
  IngestReport report;
};

IngestResult parse_bulk_whois(std::string_view text, Rir rir, const DialectTable& dialects = DialectTable::builtin(),
                              const ParseOptions& options = {});
// Stream overload; throws UnreadableStream if the stream is bad.
IngestResult parse_bulk_whois(std::istream& in, Rir rir, const DialectTable& dialects = DialectTable::builtin(),
                              const ParseOptions& options = {});

Status normalize_status(std::string_view raw);

struct LinkResult {
  std::vector<Registration> registrations;
  std::size_t unresolved = 0;
};

// Resolves org_id to the organization's country. An inline country on the
// network record is used only when the organization lookup yields none.
LinkResult link_organizations(std::vector<Registration> regs, const std::vector<Organization>& orgs);

struct TransferResult {
  std::vector<Registration> registrations;
  std::size_t circular_dropped = 0;   // prefixes removed from both registries
  std::size_t transfers_dropped = 0;  // one-sided "belongs to X" listings removed
};

// Removes prefixes that two registries each list as belonging to the other,
// and listings that merely point at another registry.
TransferResult drop_circular_transfers(std::vector<Registration> regs);

// Collapses exact duplicate prefixes within one registry, keeping the newest
// record (ties: larger org_id). Output is sorted by (rir, prefix).
std::vector<Registration> collapse_duplicates(std::vector<Registration> regs, std::size_t& dropped);

// registrations.jsonl: prefix, rir, org_country, org_id, status, last_updated, flags.
std::string to_jsonl(const Registration& reg);
void write_registrations(std::ostream& out, const std::vector<Registration>& regs);
std::vector<Registration> read_registrations(std::string_view jsonl);

}  // namespace geoaudit::whois
