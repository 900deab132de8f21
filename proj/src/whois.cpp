#include "geoaudit/whois.hpp"

#include <algorithm>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "embedded_data.hpp"
#include "geoaudit/text.hpp"
#include "json.hpp"

namespace geoaudit::whois {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> parse_list(std::string_view value) {
  std::vector<std::string> out;
  for (auto item : text::split(value, ',')) {
    item = text::trim(item);
    if (!item.empty()) out.emplace_back(item);
  }
  return out;
}

bool key_in(std::string_view key, const std::vector<std::string>& keys) {
  return std::any_of(keys.begin(), keys.end(), [&](const std::string& k) { return text::iequals(k, key); });
}

// "200.7.84/23" -> "200.7.84.0/23"
std::string expand_abbreviated_v4(std::string_view cidr) {
  const auto slash = cidr.find('/');
  if (slash == std::string_view::npos) return std::string(cidr);
  std::string addr(cidr.substr(0, slash));
  if (addr.find(':') != std::string::npos) return std::string(cidr);
  auto dots = std::count(addr.begin(), addr.end(), '.');
  while (dots < 3) {
    addr += ".0";
    ++dots;
  }
  return addr + std::string(cidr.substr(slash));
}

struct ParsedRange {
  std::vector<Prefix> blocks;
  std::optional<std::pair<Address, Address>> source_range;
};

std::optional<ParsedRange> parse_range(std::string_view value, const Dialect& dialect) {
  value = text::trim(value);
  if (const auto dash = value.find('-'); dash != std::string_view::npos) {
    const auto lo = try_parse_address(value.substr(0, dash));
    const auto hi = try_parse_address(value.substr(dash + 1));
    if (!lo || !hi || lo->family() != hi->family() || hi->value() < lo->value()) return std::nullopt;
    return ParsedRange{range_to_cidrs(*lo, *hi), std::make_pair(*lo, *hi)};
  }
  const std::string cidr = dialect.abbreviated_v4 ? expand_abbreviated_v4(value) : std::string(value);
  if (auto p = try_parse_prefix(cidr)) return ParsedRange{{*p}, std::nullopt};
  return std::nullopt;
}

bool mentions_not_managed(const RawRecord& rec, const Dialect& dialect) {
  for (const auto& [key, value] : rec.attributes) {
    for (const auto& marker : dialect.not_managed) {
      if (text::icontains(value, marker) || text::icontains(key, marker)) return true;
    }
  }
  return false;
}

std::string join_values(const RawRecord& rec, const std::vector<std::string>& keys) {
  std::string out;
  for (const auto& [key, value] : rec.attributes) {
    if (!key_in(key, keys)) continue;
    if (!out.empty()) out += ' ';
    out += value;
  }
  return out;
}

// Newest first, then larger org_id.
bool preferred(const Registration& a, const Registration& b) {
  if (a.last_updated != b.last_updated) {
    if (!a.last_updated) return false;
    if (!b.last_updated) return true;
    return *a.last_updated > *b.last_updated;
  }
  return a.org_id.value_or("") > b.org_id.value_or("");
}

}  // namespace

DialectTable DialectTable::parse(std::string_view text) {
  DialectTable table;
  std::optional<Rir> current;
  std::size_t line_no = 0;
  for (auto line : text::split(text, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto where = "dialects line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::MalformedConfig, where + ": unterminated section");
      current = try_parse_rir(line.substr(1, line.size() - 2));
      if (!current) throw Error(ErrorCode::MalformedConfig, where + ": unknown registry");
      table.dialects_[static_cast<int>(*current)].emplace();
      continue;
    }
    if (!current) throw Error(ErrorCode::MalformedConfig, where + ": entry outside a section");
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::MalformedConfig, where + ": expected key = value");
    const auto key = text::to_lower(text::trim(line.substr(0, eq)));
    const auto value = text::trim(line.substr(eq + 1));
    Dialect& d = *table.dialects_[static_cast<int>(*current)];
    static const std::vector<std::pair<std::string_view, std::vector<std::string> Dialect::*>> kLists = {
        {"net_start", &Dialect::net_start},   {"org_start", &Dialect::org_start},
        {"range", &Dialect::range},           {"status", &Dialect::status},
        {"org_ref", &Dialect::org_ref},       {"inline_country", &Dialect::inline_country},
        {"updated", &Dialect::updated},       {"maintainer", &Dialect::maintainer},
        {"transfer", &Dialect::transfer},     {"not_managed", &Dialect::not_managed},
        {"org_id", &Dialect::org_id},         {"org_country", &Dialect::org_country},
        {"org_name", &Dialect::org_name}};
    if (key == "abbreviated_v4") {
      d.abbreviated_v4 = text::iequals(value, "true");
      continue;
    }
    const auto it = std::find_if(kLists.begin(), kLists.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == kLists.end()) throw Error(ErrorCode::MalformedConfig, where + ": unknown key '" + key + "'");
    d.*(it->second) = parse_list(value);
  }
  for (const auto& d : table.dialects_) {
    if (d && (d->net_start.empty() || d->range.empty())) {
      throw Error(ErrorCode::MalformedConfig, "dialect section lacks net_start or range");
    }
  }
  return table;
}

const DialectTable& DialectTable::builtin() {
  static const DialectTable table = parse(embedded::kDialectsConf);
  return table;
}

const Dialect& DialectTable::get(Rir rir) const {
  const auto& d = dialects_[static_cast<int>(rir)];
  if (!d) throw Error(ErrorCode::UnknownDialect, std::string(to_string(rir)));
  return *d;
}

std::optional<std::string_view> RawRecord::first(const std::vector<std::string>& keys) const {
  for (const auto& k : keys) {
    for (const auto& [key, value] : attributes) {
      if (text::iequals(key, k)) return std::string_view(value);
    }
  }
  return std::nullopt;
}

std::vector<RawRecord> split_records(std::string_view blob, Rir rir, const Dialect& dialect) {
  std::vector<RawRecord> out;
  RawRecord cur;
  cur.source_rir = rir;
  const auto flush = [&] {
    if (cur.attributes.empty()) return;
    const auto& head = cur.attributes.front().first;
    if (key_in(head, dialect.net_start)) {
      cur.kind = RecordKind::Net;
    } else if (key_in(head, dialect.org_start)) {
      cur.kind = RecordKind::Organization;
    } else {
      cur.kind = RecordKind::Other;
    }
    out.push_back(std::move(cur));
    cur = RawRecord{};
    cur.source_rir = rir;
  };
  std::size_t line_no = 0;
  for (auto line : text::split(blob, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#' || line.front() == '%') continue;
    if ((line.front() == ' ' || line.front() == '\t' || line.front() == '+') && !cur.attributes.empty()) {
      auto cont = text::trim(line.front() == '+' ? line.substr(1) : line);
      auto& value = cur.attributes.back().second;
      if (!cont.empty()) {
        if (!value.empty()) value += ' ';
        value.append(cont);
      }
      cur.last_line = line_no;
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) continue;  // noise inside a record
    if (cur.attributes.empty()) cur.first_line = line_no;
    cur.last_line = line_no;
    cur.attributes.emplace_back(std::string(text::trim(line.substr(0, colon))),
                                std::string(text::trim(line.substr(colon + 1))));
  }
  flush();
  return out;
}

Status normalize_status(std::string_view raw) {
  const auto lowered = text::to_lower(raw);
  if (lowered.find("alloc") != std::string::npos) return Status::Allocated;
  if (lowered.find("assign") != std::string::npos) return Status::Assigned;
  return Status::LegacyOrUnknown;
}

bool IngestReport::balanced() const {
  return records_read + split_extra_blocks ==
         registrations_emitted + duplicates_dropped + not_managed_skipped + malformed_skipped;
}

IngestReport& IngestReport::operator+=(const IngestReport& o) {
  records_read += o.records_read;
  org_records_read += o.org_records_read;
  other_records += o.other_records;
  registrations_emitted += o.registrations_emitted;
  duplicates_dropped += o.duplicates_dropped;
  not_managed_skipped += o.not_managed_skipped;
  malformed_skipped += o.malformed_skipped;
  non_cidr_ranges_split += o.non_cidr_ranges_split;
  split_extra_blocks += o.split_extra_blocks;
  duplicate_orgs += o.duplicate_orgs;
  circular_refs_dropped += o.circular_refs_dropped;
  transfers_dropped += o.transfers_dropped;
  unresolved_org_refs += o.unresolved_org_refs;
  status_variants_seen.insert(o.status_variants_seen.begin(), o.status_variants_seen.end());
  return *this;
}

std::vector<Registration> collapse_duplicates(std::vector<Registration> regs, std::size_t& dropped) {
  std::stable_sort(regs.begin(), regs.end(), [](const Registration& a, const Registration& b) {
    if (a.rir != b.rir) return a.rir < b.rir;
    if (a.prefix != b.prefix) return a.prefix < b.prefix;
    return preferred(a, b);
  });
  std::vector<Registration> out;
  out.reserve(regs.size());
  for (auto& r : regs) {
    if (!out.empty() && out.back().rir == r.rir && out.back().prefix == r.prefix) {
      ++dropped;
      continue;
    }
    out.push_back(std::move(r));
  }
  return out;
}

IngestResult parse_bulk_whois(std::string_view raw, Rir rir, const DialectTable& dialects,
                              const ParseOptions& options) {
  const Dialect& dialect = dialects.get(rir);
  const std::string clean = text::sanitize_utf8(raw);
  IngestResult result;
  IngestReport& report = result.report;
  std::vector<Registration> regs;
  std::unordered_map<std::string, std::size_t> org_index;

  for (const auto& rec : split_records(clean, rir, dialect)) {
    if (rec.kind == RecordKind::Organization) {
      ++report.org_records_read;
      const auto id = rec.first(dialect.org_id);
      if (!id || id->empty()) continue;
      Organization org;
      org.org_id = std::string(*id);
      if (const auto c = rec.first(dialect.org_country)) org.country = CountryCode::normalize(*c);
      if (const auto n = rec.first(dialect.org_name)) org.name = std::string(*n);
      if (org_index.count(org.org_id) != 0) {
        ++report.duplicate_orgs;
        continue;
      }
      org_index.emplace(org.org_id, result.organizations.size());
      result.organizations.push_back(std::move(org));
      continue;
    }
    if (rec.kind == RecordKind::Other) {
      ++report.other_records;
      continue;
    }

    ++report.records_read;
    if (mentions_not_managed(rec, dialect)) {
      ++report.not_managed_skipped;
      continue;
    }
    const auto range_text = rec.first(dialect.range);
    const auto range = range_text ? parse_range(*range_text, dialect) : std::nullopt;
    if (!range) {
      ++report.malformed_skipped;
      continue;
    }
    std::optional<Date> updated;
    for (const auto& key : dialect.updated) {
      if (const auto v = rec.first({key})) {
        updated = parse_date(*v);
        if (updated) break;
      }
    }
    if (updated && options.dataset_date && *updated > *options.dataset_date) {
      ++report.malformed_skipped;
      continue;
    }

    Registration base;
    base.rir = rir;
    base.last_updated = updated;
    base.source_range = range->source_range;
    const auto status_raw = join_values(rec, dialect.status);
    base.status = normalize_status(status_raw);
    if (const auto trimmed = std::string(text::trim(status_raw)); !trimmed.empty()) {
      report.status_variants_seen.emplace(trimmed, base.status);
    }
    if (const auto org = rec.first(dialect.org_ref); org && !org->empty()) base.org_id = std::string(*org);
    if (const auto c = rec.first(dialect.inline_country)) {
      base.org_country = CountryCode::normalize(*c);
      if (base.org_country) base.add_flag("inline-country");
    }
    if (const auto t = rec.first(dialect.transfer)) base.transferred_to = try_parse_rir(*t);
    for (const auto& [key, value] : rec.attributes) {
      if (key_in(key, dialect.maintainer) && !value.empty()) base.add_flag("mnt:" + value);
    }
    if (!updated) base.add_flag("no-last-updated");

    if (range->blocks.size() > 1) {
      ++report.non_cidr_ranges_split;
      report.split_extra_blocks += range->blocks.size() - 1;
    }
    for (const auto& block : range->blocks) {
      Registration r = base;
      r.prefix = block;
      regs.push_back(std::move(r));
    }
  }

  result.registrations = collapse_duplicates(std::move(regs), report.duplicates_dropped);
  report.registrations_emitted = result.registrations.size();
  return result;
}

IngestResult parse_bulk_whois(std::istream& in, Rir rir, const DialectTable& dialects, const ParseOptions& options) {
  if (!in) throw Error(ErrorCode::UnreadableStream, "bad input stream");
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::UnreadableStream, "read failed");
  return parse_bulk_whois(blob, rir, dialects, options);
}

LinkResult link_organizations(std::vector<Registration> regs, const std::vector<Organization>& orgs) {
  std::unordered_map<std::string, const Organization*> by_id;
  for (const auto& o : orgs) by_id.emplace(o.org_id, &o);
  LinkResult out;
  for (auto& r : regs) {
    if (r.org_id) {
      const auto it = by_id.find(*r.org_id);
      if (it == by_id.end()) {
        ++out.unresolved;
        r.add_flag("org-unresolved");
      } else if (it->second->country) {
        r.org_country = it->second->country;
        r.flags.erase(std::remove(r.flags.begin(), r.flags.end(), "inline-country"), r.flags.end());
      }
    }
    if (!r.org_country) r.add_flag("no-org-country");
  }
  out.registrations = std::move(regs);
  return out;
}

TransferResult drop_circular_transfers(std::vector<Registration> regs) {
  std::map<Prefix, std::vector<std::size_t>> by_prefix;
  for (std::size_t i = 0; i < regs.size(); ++i) by_prefix[regs[i].prefix].push_back(i);

  TransferResult out;
  std::vector<bool> drop(regs.size(), false);
  for (const auto& [prefix, idx] : by_prefix) {
    bool circular = false;
    for (auto i : idx) {
      const auto& a = regs[i];
      if (!a.transferred_to || *a.transferred_to == a.rir) continue;
      for (auto j : idx) {
        const auto& b = regs[j];
        if (b.rir == *a.transferred_to && b.transferred_to == a.rir) circular = true;
      }
    }
    if (circular) {
      ++out.circular_dropped;
      for (auto i : idx) {
        if (regs[i].transferred_to) drop[i] = true;
      }
      continue;
    }
    for (auto i : idx) {
      if (regs[i].transferred_to && *regs[i].transferred_to != regs[i].rir) {
        drop[i] = true;
        ++out.transfers_dropped;
      }
    }
  }
  for (std::size_t i = 0; i < regs.size(); ++i) {
    if (drop[i]) continue;
    regs[i].transferred_to.reset();
    out.registrations.push_back(std::move(regs[i]));
  }
  return out;
}

std::string to_jsonl(const Registration& reg) {
  ordered_json j;
  j["prefix"] = format_prefix(reg.prefix);
  j["rir"] = std::string(to_string(reg.rir));
  j["org_country"] = reg.org_country ? ordered_json(reg.org_country->str()) : ordered_json(nullptr);
  j["org_id"] = reg.org_id ? ordered_json(*reg.org_id) : ordered_json(nullptr);
  j["status"] = std::string(to_string(reg.status));
  j["last_updated"] = reg.last_updated ? ordered_json(format_date(*reg.last_updated)) : ordered_json(nullptr);
  j["flags"] = reg.flags;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_registrations(std::ostream& out, const std::vector<Registration>& regs) {
  for (const auto& r : regs) out << to_jsonl(r) << '\n';
}

std::vector<Registration> read_registrations(std::string_view jsonl) {
  std::vector<Registration> out;
  std::size_t line_no = 0;
  for (auto line : text::split(jsonl, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty()) continue;
    const auto where = "registrations line " + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      Registration r;
      r.prefix = parse_prefix(j.at("prefix").get<std::string>());
      r.rir = parse_rir(j.at("rir").get<std::string>());
      if (j.contains("org_country") && !j["org_country"].is_null()) {
        r.org_country = CountryCode::normalize(j["org_country"].get<std::string>());
      }
      if (j.contains("org_id") && !j["org_id"].is_null()) r.org_id = j["org_id"].get<std::string>();
      const auto status = try_parse_status_name(j.at("status").get<std::string>());
      r.status = status.value_or(normalize_status(j["status"].get<std::string>()));
      if (j.contains("last_updated") && !j["last_updated"].is_null()) {
        r.last_updated = parse_date(j["last_updated"].get<std::string>());
      }
      if (j.contains("flags")) r.flags = j["flags"].get<std::vector<std::string>>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedConfig, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedConfig, where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace geoaudit::whois
