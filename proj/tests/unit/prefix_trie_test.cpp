#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "geoaudit/prefix_trie.hpp"

using namespace geoaudit;

namespace {

Prefix P(const char* s) { return parse_prefix(s); }
Address A(const char* s) { return parse_address(s); }

struct Stored {
  Prefix prefix;
  int value;
};

std::optional<Stored> linear_longest(const std::vector<Stored>& all, const Address& a) {
  std::optional<Stored> best;
  for (const auto& s : all) {
    if (s.prefix.contains(a) && (!best || s.prefix.length() > best->prefix.length())) best = s;
  }
  return best;
}

}  // namespace

TEST(PrefixTrieTest, InsertAndExactLookup) {
  PrefixTrie<int> t(Family::V4);
  EXPECT_FALSE(t.insert(P("10.0.0.0/8"), 1).has_value());
  ASSERT_NE(t.find_exact(P("10.0.0.0/8")), nullptr);
  EXPECT_EQ(*t.find_exact(P("10.0.0.0/8")), 1);
  EXPECT_EQ(t.find_exact(P("10.0.0.0/9")), nullptr);
}

TEST(PrefixTrieTest, ReinsertReturnsDisplacedValue) {
  PrefixTrie<int> t(Family::V4);
  t.insert(P("10.0.0.0/8"), 1);
  const auto prev = t.insert(P("10.0.0.0/8"), 2);
  ASSERT_TRUE(prev.has_value());
  EXPECT_EQ(*prev, 1);
  EXPECT_EQ(*t.find_exact(P("10.0.0.0/8")), 2);
  EXPECT_EQ(t.size(), 1U);
}

TEST(PrefixTrieTest, DefaultRouteMatchesEverything) {
  PrefixTrie<int> t(Family::V4);
  t.insert(P("0.0.0.0/0"), 7);
  for (const char* a : {"0.0.0.0", "8.8.8.8", "255.255.255.255"}) {
    const auto m = t.longest_match(A(a));
    ASSERT_TRUE(m.has_value()) << a;
    EXPECT_EQ(*m->value, 7);
  }
}

TEST(PrefixTrieTest, LongestMatchPrefersSpecific) {
  PrefixTrie<int> t(Family::V4);
  t.insert(P("10.0.0.0/8"), 8);
  t.insert(P("10.1.0.0/16"), 16);
  const auto m = t.longest_match(A("10.1.2.3"));
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->prefix, P("10.1.0.0/16"));
  EXPECT_EQ(*t.longest_match(A("10.2.0.1"))->value, 8);
}

TEST(PrefixTrieTest, LongestMatchMiss) {
  PrefixTrie<int> t(Family::V4);
  t.insert(P("10.0.0.0/8"), 8);
  EXPECT_FALSE(t.longest_match(A("11.0.0.1")).has_value());
}

TEST(PrefixTrieTest, FamilyMismatch) {
  PrefixTrie<int> t(Family::V4);
  try {
    t.insert(P("2001:db8::/32"), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FamilyMismatch);
  }
  EXPECT_FALSE(t.longest_match(A("2001:db8::1")).has_value());
}

TEST(PrefixTrieTest, FrozenRejectsWrites) {
  PrefixTrie<int> t(Family::V4);
  t.insert(P("10.0.0.0/8"), 1);
  t.freeze();
  EXPECT_THROW(t.insert(P("11.0.0.0/8"), 2), Error);
  EXPECT_THROW(t.erase(P("10.0.0.0/8")), Error);
  EXPECT_TRUE(t.longest_match(A("10.0.0.1")).has_value());
}

TEST(PrefixTrieTest, EnumerateContainedSonyExample) {
  PrefixTrie<int> t(Family::V4);
  // Ten /23 and /24 routes inside 100.42.96.0/20, plus unrelated neighbours.
  const std::vector<const char*> inside = {
      "100.42.96.0/23",  "100.42.98.0/24",  "100.42.99.0/24",  "100.42.100.0/23", "100.42.102.0/24",
      "100.42.103.0/24", "100.42.104.0/23", "100.42.106.0/23", "100.42.108.0/24", "100.42.111.0/24"};
  for (std::size_t i = 0; i < inside.size(); ++i) t.insert(P(inside[i]), static_cast<int>(i));
  t.insert(P("100.42.112.0/24"), 100);
  t.insert(P("100.42.0.0/16"), 101);
  const auto found = t.enumerate_contained(P("100.42.96.0/20"));
  ASSERT_EQ(found.size(), 10U);
  for (std::size_t i = 0; i < inside.size(); ++i) EXPECT_EQ(found[i].prefix, P(inside[i]));
}

TEST(PrefixTrieTest, EnumerateContainedEmpty) {
  PrefixTrie<int> t(Family::V4);
  t.insert(P("10.0.0.0/8"), 1);
  EXPECT_TRUE(t.enumerate_contained(P("11.0.0.0/8")).empty());
  // A covering route is not "contained".
  EXPECT_TRUE(t.enumerate_contained(P("10.1.0.0/16")).empty());
}

TEST(PrefixTrieTest, LongestCovering) {
  PrefixTrie<int> t(Family::V4);
  t.insert(P("10.0.0.0/8"), 8);
  t.insert(P("10.1.0.0/16"), 16);
  EXPECT_EQ(t.longest_covering(P("10.1.0.0/16"), false)->prefix, P("10.1.0.0/16"));
  EXPECT_EQ(t.longest_covering(P("10.1.0.0/16"), true)->prefix, P("10.0.0.0/8"));
  EXPECT_EQ(t.longest_covering(P("10.1.2.0/24"), true)->prefix, P("10.1.0.0/16"));
  EXPECT_FALSE(t.longest_covering(P("10.0.0.0/8"), true).has_value());
}

TEST(PrefixTrieTest, ChildrenOf) {
  PrefixTrie<int> t(Family::V4);
  t.insert(P("10.0.0.0/8"), 0);
  t.insert(P("10.1.0.0/16"), 1);
  t.insert(P("10.1.1.0/24"), 2);
  t.insert(P("10.200.0.0/16"), 3);
  const auto kids = t.children_of(P("10.0.0.0/8"));
  ASSERT_EQ(kids.size(), 2U);
  EXPECT_EQ(kids[0].prefix, P("10.1.0.0/16"));
  EXPECT_EQ(kids[1].prefix, P("10.200.0.0/16"));
}

TEST(PrefixTrieTest, EraseRestoresAnswers) {
  std::mt19937_64 rng(11);
  PrefixTrie<int> t(Family::V4);
  std::vector<Stored> base;
  for (int i = 0; i < 300; ++i) {
    const auto p = Prefix::covering(Address::v4(static_cast<std::uint32_t>(rng())), 8 + static_cast<int>(rng() % 17));
    if (t.insert(p, i)) continue;
    base.push_back({p, i});
  }
  std::vector<Address> probes;
  for (int i = 0; i < 2000; ++i) probes.push_back(Address::v4(static_cast<std::uint32_t>(rng())));
  for (const auto& s : base) probes.push_back(s.prefix.first());
  std::vector<std::optional<Prefix>> before;
  for (const auto& a : probes) {
    const auto m = t.longest_match(a);
    before.push_back(m ? std::optional<Prefix>(m->prefix) : std::nullopt);
  }
  std::vector<Prefix> extra;
  for (int i = 0; i < 200; ++i) {
    const auto p = Prefix::covering(Address::v4(static_cast<std::uint32_t>(rng())), 4 + static_cast<int>(rng() % 29));
    if (t.find_exact(p) == nullptr) {
      t.insert(p, -1);
      extra.push_back(p);
    }
  }
  for (const auto& p : extra) EXPECT_TRUE(t.erase(p));
  EXPECT_FALSE(t.erase(P("1.2.3.4/32")));
  EXPECT_EQ(t.size(), base.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto m = t.longest_match(probes[i]);
    const auto now = m ? std::optional<Prefix>(m->prefix) : std::nullopt;
    EXPECT_EQ(now, before[i]);
  }
}

TEST(PrefixTrieTest, RandomAgainstLinearScan) {
  std::mt19937_64 rng(5);
  for (Family fam : {Family::V4, Family::V6}) {
    PrefixTrie<int> t(fam);
    std::vector<Stored> all;
    const int width = address_width(fam);
    // Cluster prefixes under a few roots so nesting is common.
    std::vector<u128> roots;
    for (int i = 0; i < 4; ++i) roots.push_back((static_cast<u128>(rng()) << 64) | rng());
    for (int i = 0; i < 1000; ++i) {
      u128 raw = (static_cast<u128>(rng()) << 64) | rng();
      const u128 root = roots[rng() % roots.size()];
      const u128 top_mask = ~u128{0} << (fam == Family::V4 ? 40 : 8);
      raw = (root & top_mask) | (raw & ~top_mask);
      const auto p = Prefix::covering(Address(fam, raw), static_cast<int>(rng() % (width + 1)));
      if (t.find_exact(p) != nullptr) continue;
      t.insert(p, i);
      all.push_back({p, i});
    }
    t.freeze();
    for (int q = 0; q < 2000; ++q) {
      const Address a = q % 2 == 0 ? all[rng() % all.size()].prefix.last()
                                   : Address(fam, (static_cast<u128>(rng()) << 64) | rng());
      const auto got = t.longest_match(a);
      const auto want = linear_longest(all, a);
      ASSERT_EQ(got.has_value(), want.has_value());
      if (got) {
        EXPECT_EQ(got->prefix, want->prefix);
        EXPECT_EQ(*got->value, want->value);
      }
    }
    for (int q = 0; q < 200; ++q) {
      const auto& seed = all[rng() % all.size()].prefix;
      const auto query = Prefix::covering(seed.network(), std::max(0, seed.length() - static_cast<int>(rng() % 8)));
      std::vector<Prefix> want;
      for (const auto& s : all) {
        if (query.contains(s.prefix)) want.push_back(s.prefix);
      }
      std::sort(want.begin(), want.end());
      std::vector<Prefix> got;
      for (const auto& m : t.enumerate_contained(query)) got.push_back(m.prefix);
      EXPECT_EQ(got, want);
    }
  }
}

TEST(PrefixTrieTest, LookupCostBoundedByKeyLength) {
  PrefixTrie<int> small(Family::V4);
  PrefixTrie<int> large(Family::V4);
  std::mt19937 rng(9);
  small.insert(P("10.0.0.0/8"), 0);
  for (int i = 0; i < 50000; ++i) {
    large.insert(Prefix::covering(Address::v4(rng()), 8 + static_cast<int>(rng() % 25)), i);
  }
  for (int i = 0; i < 1000; ++i) {
    const auto a = Address::v4(rng());
    std::size_t visited = 0;
    large.longest_match(a, &visited);
    EXPECT_LE(visited, 33U);
  }
  std::size_t visited_small = 0;
  small.longest_match(A("10.1.1.1"), &visited_small);
  EXPECT_LE(visited_small, 33U);
}

TEST(DualTrieTest, RoutesByFamily) {
  DualTrie<int> t;
  t.insert(P("10.0.0.0/8"), 4);
  t.insert(P("2001:db8::/32"), 6);
  EXPECT_EQ(*t.longest_match(A("10.9.9.9"))->value, 4);
  EXPECT_EQ(*t.longest_match(A("2001:db8::5"))->value, 6);
  EXPECT_EQ(t.size(), 2U);
}
