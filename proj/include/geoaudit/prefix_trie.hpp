#pragma once

#include <bit>
#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "geoaudit/error.hpp"
#include "geoaudit/registry.hpp"

namespace geoaudit {

namespace detail {

// Number of leading bits `a` and `b` share, capped at `limit`.
inline int common_bits(const Address& a, const Address& b, int limit) {
  const u128 diff = a.value() ^ b.value();
  if (diff == 0) return limit;
  const auto hi = static_cast<std::uint64_t>(diff >> 64);
  const int clz = hi != 0 ? std::countl_zero(hi) : 64 + std::countl_zero(static_cast<std::uint64_t>(diff));
  const int lead = clz - (128 - a.width());
  return lead < limit ? lead : limit;
}

}  // namespace detail

// Path-compressed binary radix trie keyed by prefixes of one address family.
//
// Nodes exist only for stored prefixes and for branch points between them,
// so a lookup visits at most (key length + 1) nodes regardless of how many
// prefixes are stored. After freeze() the trie rejects mutation and may be
// read from any number of threads.
template <typename V>
class PrefixTrie {
 public:
  template <typename T>
  struct Entry {
    Prefix prefix;
    T* value;
  };
  using Match = Entry<const V>;

  explicit PrefixTrie(Family family) : family_(family) {}

  PrefixTrie(PrefixTrie&&) noexcept = default;
  PrefixTrie& operator=(PrefixTrie&&) noexcept = default;

  Family family() const { return family_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  // Stores `value` at exactly `prefix`; returns the value it displaced.
  std::optional<V> insert(const Prefix& prefix, V value) {
    check_writable(prefix);
    std::unique_ptr<Node>* slot = &root_;
    while (true) {
      Node* n = slot->get();
      if (n == nullptr) {
        *slot = std::make_unique<Node>(prefix, std::move(value));
        ++size_;
        return std::nullopt;
      }
      const int limit = std::min(n->key.length(), prefix.length());
      const int common = detail::common_bits(n->key.network(), prefix.network(), limit);
      if (common == n->key.length() && common == prefix.length()) {
        std::optional<V> previous = std::move(n->value);
        if (!previous) ++size_;
        n->value = std::move(value);
        return previous;
      }
      if (common == n->key.length()) {
        slot = &n->child[prefix.bit(n->key.length())];
        continue;
      }
      if (common == prefix.length()) {
        auto fresh = std::make_unique<Node>(prefix, std::move(value));
        fresh->child[n->key.bit(prefix.length())] = std::move(*slot);
        *slot = std::move(fresh);
        ++size_;
        return std::nullopt;
      }
      auto glue = std::make_unique<Node>(Prefix::covering(prefix.network(), common));
      const bool existing_side = n->key.bit(common);
      glue->child[existing_side] = std::move(*slot);
      glue->child[!existing_side] = std::make_unique<Node>(prefix, std::move(value));
      *slot = std::move(glue);
      ++size_;
      return std::nullopt;
    }
  }

  bool erase(const Prefix& prefix) {
    check_writable(prefix);
    const bool removed = erase_at(root_, prefix);
    if (removed) --size_;
    return removed;
  }

  const V* find_exact(const Prefix& prefix) const {
    if (prefix.family() != family_) return nullptr;
    const Node* n = root_.get();
    while (n != nullptr && n->key.contains(prefix)) {
      if (n->key.length() == prefix.length()) return n->value ? &*n->value : nullptr;
      n = n->child[prefix.bit(n->key.length())].get();
    }
    return nullptr;
  }

  // Most specific stored prefix containing `addr`. `visited`, when given,
  // accumulates the number of nodes touched.
  std::optional<Match> longest_match(const Address& addr, std::size_t* visited = nullptr) const {
    if (addr.family() != family_) return std::nullopt;
    const Node* best = nullptr;
    const Node* n = root_.get();
    while (n != nullptr) {
      if (visited != nullptr) ++*visited;
      if (!n->key.contains(addr)) break;
      if (n->value) best = n;
      if (n->key.length() == addr.width()) break;
      n = n->child[addr.bit(n->key.length())].get();
    }
    if (best == nullptr) return std::nullopt;
    return Match{best->key, &*best->value};
  }

  // Most specific stored prefix that contains `prefix`; with `strict`, the
  // prefix itself is not eligible.
  std::optional<Match> longest_covering(const Prefix& prefix, bool strict) const {
    if (prefix.family() != family_) return std::nullopt;
    const Node* best = nullptr;
    const Node* n = root_.get();
    while (n != nullptr && n->key.contains(prefix)) {
      const bool eligible = strict ? n->key.length() < prefix.length() : true;
      if (n->value && eligible) best = n;
      if (n->key.length() >= prefix.length()) break;
      n = n->child[prefix.bit(n->key.length())].get();
    }
    if (best == nullptr) return std::nullopt;
    return Match{best->key, &*best->value};
  }

  // Every stored prefix equal to or more specific than `prefix`, in address
  // order (a prefix precedes the prefixes it contains).
  std::vector<Match> enumerate_contained(const Prefix& prefix) const {
    std::vector<Match> out;
    if (prefix.family() != family_) return out;
    const Node* n = root_.get();
    while (n != nullptr) {
      if (prefix.contains(n->key)) {
        collect(n, out);
        break;
      }
      if (!n->key.contains(prefix)) break;
      n = n->child[prefix.bit(n->key.length())].get();
    }
    return out;
  }

  // Visits every stored prefix in address order.
  template <typename F>
  void for_each(F&& fn) const {
    walk(root_.get(), fn);
  }

  // Nearest stored descendants of the node holding exactly `prefix`: the
  // stored prefixes strictly inside it with no stored prefix in between.
  std::vector<Match> children_of(const Prefix& prefix) const {
    std::vector<Match> out;
    const Node* n = root_.get();
    while (n != nullptr && n->key.contains(prefix) && n->key.length() < prefix.length()) {
      n = n->child[prefix.bit(n->key.length())].get();
    }
    if (n == nullptr || !prefix.contains(n->key)) return out;
    if (n->key == prefix) {
      for (const auto& c : n->child) nearest_values(c.get(), out);
    } else {
      nearest_values(n, out);
    }
    return out;
  }

 private:
  struct Node {
    explicit Node(Prefix k) : key(k) {}
    Node(Prefix k, V v) : key(k), value(std::move(v)) {}
    Prefix key;
    std::optional<V> value;
    std::unique_ptr<Node> child[2];
  };

  void check_writable(const Prefix& prefix) const {
    if (frozen_) throw Error(ErrorCode::TrieFrozen, "insert/erase after freeze");
    if (prefix.family() != family_) {
      throw Error(ErrorCode::FamilyMismatch, format_prefix(prefix) + " in " + std::string(to_string(family_)) + " trie");
    }
  }

  static bool erase_at(std::unique_ptr<Node>& slot, const Prefix& prefix) {
    Node* n = slot.get();
    if (n == nullptr || !n->key.contains(prefix)) return false;
    bool removed = false;
    if (n->key.length() == prefix.length()) {
      removed = n->value.has_value();
      n->value.reset();
    } else {
      removed = erase_at(n->child[prefix.bit(n->key.length())], prefix);
    }
    if (removed) compact(slot);
    return removed;
  }

  // Drops valueless nodes that no longer separate two subtrees.
  static void compact(std::unique_ptr<Node>& slot) {
    Node* n = slot.get();
    if (n->value) return;
    if (n->child[0] && n->child[1]) return;
    std::unique_ptr<Node> survivor = std::move(n->child[0] ? n->child[0] : n->child[1]);
    slot = std::move(survivor);
  }

  static void collect(const Node* n, std::vector<Match>& out) {
    if (n == nullptr) return;
    if (n->value) out.push_back(Match{n->key, &*n->value});
    collect(n->child[0].get(), out);
    collect(n->child[1].get(), out);
  }

  static void nearest_values(const Node* n, std::vector<Match>& out) {
    if (n == nullptr) return;
    if (n->value) {
      out.push_back(Match{n->key, &*n->value});
      return;
    }
    nearest_values(n->child[0].get(), out);
    nearest_values(n->child[1].get(), out);
  }

  template <typename F>
  static void walk(const Node* n, F& fn) {
    if (n == nullptr) return;
    if (n->value) fn(n->key, *n->value);
    walk(n->child[0].get(), fn);
    walk(n->child[1].get(), fn);
  }

  Family family_;
  std::unique_ptr<Node> root_;
  std::size_t size_ = 0;
  bool frozen_ = false;
};

// One trie per address family behind a single interface.
template <typename V>
class DualTrie {
 public:
  DualTrie() : v4_(Family::V4), v6_(Family::V6) {}

  PrefixTrie<V>& of(Family f) { return f == Family::V4 ? v4_ : v6_; }
  const PrefixTrie<V>& of(Family f) const { return f == Family::V4 ? v4_ : v6_; }

  std::optional<V> insert(const Prefix& p, V v) { return of(p.family()).insert(p, std::move(v)); }
  auto longest_match(const Address& a) const { return of(a.family()).longest_match(a); }
  auto longest_covering(const Prefix& p, bool strict) const { return of(p.family()).longest_covering(p, strict); }
  auto enumerate_contained(const Prefix& p) const { return of(p.family()).enumerate_contained(p); }
  const V* find_exact(const Prefix& p) const { return of(p.family()).find_exact(p); }
  std::size_t size() const { return v4_.size() + v6_.size(); }
  void freeze() {
    v4_.freeze();
    v6_.freeze();
  }
  template <typename F>
  void for_each(F&& fn) const {
    v4_.for_each(fn);
    v6_.for_each(fn);
  }

 private:
  PrefixTrie<V> v4_;
  PrefixTrie<V> v6_;
};

}  // namespace geoaudit
