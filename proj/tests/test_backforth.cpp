#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "scottlab/backforth.hpp"

using namespace scottlab;

namespace {

Signature graph_sig() { return Signature{{{"E", 2}}, {}}; }

FiniteStructure chain(std::size_t n) {
  FiniteStructure s(graph_sig(), n);
  for (std::size_t i = 0; i + 1 < n; ++i) s.add_rel("E", {i, i + 1});
  return s;
}

FiniteStructure sym2() {
  FiniteStructure s(graph_sig(), 2);
  s.add_rel("E", {0, 1});
  s.add_rel("E", {1, 0});
  return s;
}

// Every directed graph on n labeled vertices (loops allowed).
std::vector<FiniteStructure> all_digraphs(std::size_t n) {
  std::vector<std::pair<Elem, Elem>> slots;
  for (Elem i = 0; i < n; ++i)
    for (Elem j = 0; j < n; ++j) slots.push_back({i, j});
  std::vector<FiniteStructure> out;
  for (std::uint64_t mask = 0; mask < (1ull << slots.size()); ++mask) {
    FiniteStructure s(graph_sig(), n);
    for (std::size_t b = 0; b < slots.size(); ++b)
      if (mask >> b & 1) s.add_rel("E", {slots[b].first, slots[b].second});
    out.push_back(std::move(s));
  }
  return out;
}

RankValue fin(std::uint64_t n) { return RankValue::fin(Ordinal::nat(n)); }

}  // namespace

TEST_CASE("level-0 and level-1 separations on the 2-chain") {
  auto two = chain(2);
  CHECK(bf_equiv(two, {0}, two, {0}, fin(5)));
  CHECK(bf_equiv(two, {0}, two, {1}, fin(0)));
  CHECK(!bf_equiv(two, {0}, two, {1}, fin(1)));  // 1 has no outgoing edge
  CHECK(!bf_equiv(two, {1}, two, {0}, fin(1)));  // symmetric direction
  CHECK(bf_equiv(two, {0, 1}, two, {0, 1}, RankValue::inf()));
  CHECK_THROWS_AS(bf_equiv(two, {0}, two, {0, 1}, fin(1)), InputError);
}

TEST_CASE("cross-structure games") {
  auto two = chain(2);
  FiniteStructure ord2(graph_sig(), 2);
  ord2.add_rel("E", {0, 1});
  for (std::uint64_t a = 0; a <= 4; ++a) {
    CHECK(bf_equiv(two, {0, 1}, ord2, {0, 1}, fin(a)));
    CHECK(bf_equiv(two, {0}, ord2, {0}, fin(a)));
  }
  CHECK(bf_equiv(two, {0}, ord2, {0}, RankValue::inf()));
  CHECK(!bf_equiv(two, {0, 1}, ord2, {1, 0}, fin(0)));

  auto sym = sym2();
  CHECK(bf_equiv(two, {0}, sym, {0}, fin(0)));
  CHECK(!bf_equiv(two, {0}, sym, {0}, fin(1)));  // sym extension has a back edge
  CHECK(!bf_equiv(two, {0}, sym, {0}, RankValue::inf()));

  FiniteStructure other(Signature{{{"R", 2}}, {}}, 2);
  CHECK_THROWS_AS(bf_equiv(two, {0}, other, {0}, fin(1)), InputError);
}

TEST_CASE("limit equivalence is the automorphism orbit relation") {
  auto two = chain(2);
  CHECK(!bf_limit_equiv(two, {0}, {1}));
  CHECK(bf_limit_equiv(two, {0}, {0}));
  CHECK(bf_limit_equiv(sym2(), {0}, {1}));
  CHECK(bf_limit_equiv(sym2(), {0, 1}, {1, 0}));
  CHECK(!bf_limit_equiv(sym2(), {0, 1}, {0, 0}));
  CHECK(bf_limit_equiv(two, {}, {}));
}

TEST_CASE("partition traces and tuple ranks") {
  auto two = chain(2);
  auto trace = bf_stable_partition(two, 1);
  REQUIRE(trace.tuples.size() == 2);
  CHECK(trace.stable_level == 1);
  CHECK(trace.class_ids[0] == std::vector<std::size_t>{0, 0});
  CHECK(trace.class_ids[1] == std::vector<std::size_t>{0, 1});

  CHECK(scott_rank_tuple(two, {0}) == fin(1));
  CHECK(scott_rank_tuple(two, {1}) == fin(1));
  CHECK(scott_rank_tuple(two, {0, 1}) == fin(0));
  CHECK(scott_rank_structure(two) == fin(2));

  FiniteStructure single(graph_sig(), 1);
  CHECK(scott_rank_tuple(single, {0}) == fin(0));
  CHECK(scott_rank_structure(single) == fin(1));

  CHECK(scott_rank_tuple(sym2(), {0}) == fin(0));
  CHECK(scott_rank_structure(sym2()) == fin(1));

  CHECK_THROWS_AS(scott_rank_tuple(two, {7}), InputError);
  CHECK_THROWS_AS(trace.tuple_index({5}), InputError);
}

TEST_CASE("stable partitions equal automorphism orbits on all 3-vertex digraphs") {
  for (std::size_t n = 1; n <= 3; ++n) {
    for (const auto& s : all_digraphs(n)) {
      for (std::size_t len = 1; len <= 2; ++len) {
        auto trace = bf_stable_partition(s, len);
        auto orbits = automorphism_orbits(s, len);
        // Same partition: two tuples share a stable class iff they share an orbit.
        std::map<Tuple, std::size_t> orbit_of;
        for (std::size_t b = 0; b < orbits.size(); ++b)
          for (const auto& t : orbits[b]) orbit_of[t] = b;
        const auto& last = trace.class_ids.back();
        for (std::size_t i = 0; i < trace.tuples.size(); ++i)
          for (std::size_t j = i; j < trace.tuples.size(); ++j) {
            bool same_class = last[i] == last[j];
            bool same_orbit =
                orbit_of[trace.tuples[i]] == orbit_of[trace.tuples[j]];
            REQUIRE(same_class == same_orbit);
          }
      }
    }
  }
}

TEST_CASE("engine agrees with partition refinement level by level") {
  for (const auto& s : all_digraphs(2)) {
    for (std::size_t len = 1; len <= 2; ++len) {
      auto trace = bf_stable_partition(s, len);
      for (std::uint64_t a = 0; a <= 3; ++a) {
        std::size_t level = std::min<std::size_t>(a, trace.stable_level);
        for (const auto& t1 : trace.tuples)
          for (const auto& t2 : trace.tuples) {
            bool via_engine = bf_equiv(s, t1, s, t2, fin(a));
            bool via_trace = trace.class_ids[level][trace.tuple_index(t1)] ==
                             trace.class_ids[level][trace.tuple_index(t2)];
            REQUIRE(via_engine == via_trace);
          }
      }
    }
  }
  // Spot checks on 3-vertex graphs (full sweep is the acceptance suite's job).
  auto graphs = all_digraphs(3);
  for (std::size_t gi : {5ul, 73ul, 255ul, 400ul, 511ul}) {
    const auto& s = graphs[gi];
    auto trace = bf_stable_partition(s, 1);
    for (std::uint64_t a = 0; a <= 3; ++a) {
      std::size_t level = std::min<std::size_t>(a, trace.stable_level);
      for (const auto& t1 : trace.tuples)
        for (const auto& t2 : trace.tuples) {
          bool via_engine = bf_equiv(s, t1, s, t2, fin(a));
          bool via_trace = trace.class_ids[level][trace.tuple_index(t1)] ==
                           trace.class_ids[level][trace.tuple_index(t2)];
          REQUIRE(via_engine == via_trace);
        }
    }
  }
}

TEST_CASE("monotonicity, symmetry, transitivity on a corpus") {
  for (const auto& s : all_digraphs(2)) {
    auto trace = bf_stable_partition(s, 1);
    // Refinement only splits: same class at a+1 implies same class at a.
    for (std::size_t a = 0; a + 1 < trace.class_ids.size(); ++a)
      for (std::size_t i = 0; i < trace.tuples.size(); ++i)
        for (std::size_t j = 0; j < trace.tuples.size(); ++j)
          if (trace.class_ids[a + 1][i] == trace.class_ids[a + 1][j])
            CHECK(trace.class_ids[a][i] == trace.class_ids[a][j]);
  }
  // Engine-level spot checks (class-id equality is an equivalence by
  // construction; the engine must induce the same relations).
  auto three = chain(3);
  for (std::uint64_t a = 0; a <= 4; ++a) {
    for (Elem x = 0; x < 3; ++x)
      for (Elem y = 0; y < 3; ++y) {
        CHECK(bf_equiv(three, {x}, three, {y}, fin(a)) ==
              bf_equiv(three, {y}, three, {x}, fin(a)));
        if (bf_equiv(three, {x}, three, {y}, fin(a)))
          for (Elem z = 0; z < 3; ++z)
            if (bf_equiv(three, {y}, three, {z}, fin(a)))
              CHECK(bf_equiv(three, {x}, three, {z}, fin(a)));
      }
  }
}

TEST_CASE("single and tuple modes stabilize to the same partition") {
  BFConfig single_cfg;
  single_cfg.single = true;
  for (std::size_t n = 1; n <= 3; ++n)
    for (const auto& s : all_digraphs(n)) {
      auto a = bf_stable_partition(s, 1);
      auto b = bf_stable_partition(s, 1, single_cfg);
      CHECK(a.class_ids.back() == b.class_ids.back());
    }
}

TEST_CASE("graded values can differ between modes") {
  // On a 4-chain, endpoints separate from middles at level 1 in both modes,
  // but longer tuples let tuple mode settle whole configurations sooner.
  auto four = chain(4);
  BFConfig single_cfg;
  single_cfg.single = true;
  auto t = bf_stable_partition(four, 1);
  auto s = bf_stable_partition(four, 1, single_cfg);
  CHECK(t.class_ids.back() == s.class_ids.back());
  CHECK(t.stable_level <= s.stable_level);
}

namespace {

// Infinite chain of naturals with successor edges, exposing bounded hooks.
class LazyChain final : public Structure {
 public:
  LazyChain() : Structure(graph_sig()) {}
  bool finite() const override { return false; }
  bool holds(const PredRef& p, const Tuple& t) const override {
    return !p.family && p.sym == 0 && t.size() == 2 && t[0] + 1 == t[1];
  }
  std::vector<Atom> atoms_on(const Tuple& t) const override {
    std::vector<Atom> out;
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = 0; j < t.size(); ++j)
        if (t[i] + 1 == t[j]) out.push_back({PredRef::rel(0), {i, j}});
    return out;
  }
  std::vector<Tuple> challenge_tuples(const Tuple& base, std::size_t len,
                                      const GameCtx& ctx) const override {
    if (len != 1) return {};
    // Neighbors of the base plus a far-away fresh point.
    std::set<Elem> cand;
    for (Elem e : base) {
      cand.insert(e + 1);
      if (e) cand.insert(e - 1);
    }
    Elem far = 100;
    for (Elem e : base) far = std::max(far, e + 50);
    cand.insert(far);
    std::vector<Tuple> out;
    for (Elem e : cand) {
      if (std::find(base.begin(), base.end(), e) != base.end()) continue;
      out.push_back({e});
      if (out.size() >= ctx.width) break;
    }
    return out;
  }
  std::vector<Tuple> response_tuples(const Tuple& base, std::size_t len,
                                     const GameCtx& ctx, const Structure&,
                                     const Tuple& other_base,
                                     const Tuple& other_ext) const override {
    auto out = challenge_tuples(base, len, ctx);
    // Mirror the challenge's displacement from its base when possible.
    if (len == 1 && other_ext.size() == 1 && !other_base.empty() &&
        !base.empty()) {
      std::int64_t delta = static_cast<std::int64_t>(other_ext[0]) -
                           static_cast<std::int64_t>(other_base.back());
      std::int64_t mirrored = static_cast<std::int64_t>(base.back()) + delta;
      if (mirrored >= 0) out.insert(out.begin(), {static_cast<Elem>(mirrored)});
    }
    return out;
  }
};

}  // namespace

TEST_CASE("bounded games on an infinite structure") {
  LazyChain nat;
  BFConfig cfg;
  cfg.max_len = 1;
  CHECK(bf_equiv(nat, {5}, nat, {9}, fin(1), cfg));
  CHECK(!bf_equiv(nat, {0}, nat, {9}, fin(1), cfg));  // 0 has no predecessor
  CHECK(bf_equiv(nat, {5, 6}, nat, {9, 10}, fin(2), cfg));
  CHECK(!bf_equiv(nat, {5, 6}, nat, {9, 11}, fin(0), cfg));

  CHECK_THROWS_AS(bf_equiv(nat, {0}, nat, {1}, RankValue::inf(), cfg), InputError);
  BFConfig shallow = cfg;
  shallow.depth_bound = fin(2);
  CHECK_THROWS_AS(bf_equiv(nat, {0}, nat, {1}, fin(3), shallow), ResourceError);
  BFConfig tiny = cfg;
  tiny.node_guard = 3;
  CHECK_THROWS_AS(bf_equiv(nat, {5}, nat, {9}, fin(2), tiny), ResourceError);
}

TEST_CASE("fact-free structures collapse at level zero") {
  FiniteStructure free3(graph_sig(), 3);
  auto trace = bf_stable_partition(free3, 2);
  CHECK(trace.stable_level == 0);
  CHECK(scott_rank_structure(free3) == fin(1));
}
