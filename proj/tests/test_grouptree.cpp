#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "scottlab/backforth.hpp"
#include "scottlab/grouptree.hpp"
#include "scottlab/ordinals.hpp"
#include "scottlab/trees.hpp"

using namespace scottlab;

namespace {

// Deterministic splitmix-style generator, matching the library's Rng seeds.
struct TestRng {
  std::uint64_t s;
  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

// All group elements of one level as explicit member sets.
std::vector<GroupElement> level_elems(const Tree& t, std::size_t n) {
  auto ids = t.level_nodes(n);
  std::vector<GroupElement> out;
  for (std::uint64_t mask = 0; mask < (1ull << ids.size()); ++mask) {
    GroupElement g{n, {}};
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (mask >> i & 1) g.members.push_back(ids[i]);
    out.push_back(std::move(g));
  }
  return out;
}

// Oracle: lifts of x found by filtering the full next level through pred_g.
std::vector<GroupElement> oracle_preimages(const Tree& t, const GroupElement& x) {
  std::vector<GroupElement> out;
  for (const auto& y : level_elems(t, x.level + 1))
    if (pred_g(t, y) == x) out.push_back(y);
  std::sort(out.begin(), out.end());
  return out;
}

// Oracle: foundation rank of every group element in the lift graph over the
// truncation, computed level by level from the top.
std::map<GroupElement, std::uint64_t> oracle_group_tree_ranks(const Tree& t) {
  std::size_t depth = t.depth();
  std::map<GroupElement, std::uint64_t> rank;
  for (std::size_t n = depth + 1; n-- > 0;) {
    for (const auto& x : level_elems(t, n)) {
      std::uint64_t r = 0;
      if (n < depth)
        for (const auto& y : oracle_preimages(t, x)) r = std::max(r, rank.at(y) + 1);
      rank[x] = r;
    }
  }
  return rank;
}

// Random unlabeled tree with bounded depth, per-node width, and total size.
Tree random_tree(TestRng& rng, std::size_t depth, std::size_t width,
                 std::size_t max_nodes) {
  Tree t;
  std::vector<std::size_t> open{0};
  while (!open.empty() && t.size() < max_nodes) {
    std::size_t cur = open[rng.below(open.size())];
    open.erase(std::find(open.begin(), open.end(), cur));
    if (t.node(cur).level >= depth) continue;
    std::size_t kids = rng.below(width + 1);
    for (std::size_t i = 0; i < kids && t.size() < max_nodes; ++i)
      open.push_back(t.add_child(cur));
  }
  return t;
}

GroupElement ge(std::size_t level, std::vector<std::size_t> members) {
  std::sort(members.begin(), members.end());
  return GroupElement{level, std::move(members)};
}

const RankValue kOmega = RankValue::fin(Ordinal::omega_pow(1));

// Shared fixture: root with children s=1 (children u=3, v=4) and q=2
// (child w=5); level sizes 1, 2, 3.
Tree two_branch() {
  Tree t;
  std::size_t s = t.add_child(0);
  std::size_t q = t.add_child(0);
  t.add_child(s);
  t.add_child(s);
  t.add_child(q);
  return t;
}

// Profile tree for the rank-transfer games: one copy of each rank per level,
// an infinite-rank spine, and a limit-rank node whose towers die early.
Tree lemma_tree() {
  RankProfile p;
  RankValue inf = RankValue::inf();
  p.levels = {{inf},
              {RankValue::fin(0), RankValue::fin(1), RankValue::fin(2), kOmega, inf},
              {RankValue::fin(0), RankValue::fin(1), RankValue::fin(2), inf},
              {RankValue::fin(0), RankValue::fin(1), inf},
              {RankValue::fin(0), inf},
              {RankValue::fin(0), inf}};
  return gen_rank_homog(p, 1, 5);
}

}  // namespace

TEST_CASE("group elements combine by symmetric difference level by level") {
  Tree t = two_branch();
  CHECK(sym_diff(ge(2, {3}), ge(2, {4})) == ge(2, {3, 4}));
  CHECK(sym_diff(ge(2, {3, 4}), ge(2, {4, 5})) == ge(2, {3, 5}));
  CHECK(sym_diff(ge(2, {3, 4}), ge(2, {3, 4})) == group_id(2));
  CHECK(sym_diff(group_id(2), ge(2, {5})) == ge(2, {5}));
  CHECK_THROWS_AS(sym_diff(ge(1, {1}), ge(2, {3})), InputError);

  // Group laws, exhaustively over every level of the fixture.
  for (std::size_t n = 0; n <= t.depth(); ++n) {
    auto all = level_elems(t, n);
    for (const auto& a : all) {
      CHECK(sym_diff(a, group_id(n)) == a);
      CHECK(sym_diff(a, a) == group_id(n));
      for (const auto& b : all) {
        CHECK(sym_diff(a, b) == sym_diff(b, a));
        for (const auto& c : all)
          CHECK(sym_diff(sym_diff(a, b), c) == sym_diff(a, sym_diff(b, c)));
      }
    }
  }
}

TEST_CASE("projection keeps parents with an odd child count and is a homomorphism") {
  Tree t = two_branch();
  CHECK(pred_g(t, ge(2, {3})) == ge(1, {1}));
  CHECK(pred_g(t, ge(2, {3, 4})) == group_id(1));
  CHECK(pred_g(t, ge(2, {3, 5})) == ge(1, {1, 2}));
  CHECK(pred_g(t, ge(2, {3, 4, 5})) == ge(1, {2}));
  CHECK(pred_g(t, group_id(2)) == group_id(1));
  CHECK(pred_g(t, ge(1, {1, 2})) == group_id(0));
  CHECK(pred_iter(t, ge(2, {3}), 2) == ge(0, {0}));
  CHECK_THROWS_AS(pred_g(t, group_id(0)), InputError);

  for (std::size_t n = 1; n <= t.depth(); ++n)
    for (const auto& a : level_elems(t, n))
      for (const auto& b : level_elems(t, n))
        CHECK(pred_g(t, sym_diff(a, b)) == sym_diff(pred_g(t, a), pred_g(t, b)));
}

TEST_CASE("the family operation projects to the lower level and is symmetric") {
  Tree t = two_branch();
  // Same level: plain symmetric difference.
  CHECK(f_apply(t, ge(2, {3}), ge(2, {4})) == ge(2, {3, 4}));
  // Identity arguments: the other side, projected down to the meet level.
  for (std::size_t n = 0; n <= t.depth(); ++n)
    for (const auto& a : level_elems(t, n)) {
      CHECK(f_apply(t, a, group_id(n)) == a);
      for (std::size_t m = 0; m <= n; ++m)
        CHECK(f_apply(t, group_id(m), a) == pred_iter(t, a, n - m));
    }
  // Symmetry across levels, exhaustively.
  for (std::size_t n = 0; n <= t.depth(); ++n)
    for (std::size_t m = 0; m <= t.depth(); ++m)
      for (const auto& a : level_elems(t, n))
        for (const auto& b : level_elems(t, m))
          CHECK(f_apply(t, a, b) == f_apply(t, b, a));
  // Mixed-level example: f over {u} and {w} meets at level of their parents.
  CHECK(f_apply(t, ge(1, {1}), ge(2, {5})) == ge(1, {1, 2}));
}

TEST_CASE("group element text round-trips and rejects malformed input") {
  CHECK(to_string(ge(2, {3, 5})) == "2:3,5");
  CHECK(to_string(group_id(4)) == "4:");
  CHECK(parse_gelem("2:5,3") == ge(2, {3, 5}));
  CHECK(parse_gelem("0:") == group_id(0));
  CHECK_THROWS_AS(parse_gelem("noline"), InputError);
  CHECK_THROWS_AS(parse_gelem("2:3,3"), InputError);
  CHECK_THROWS_AS(parse_gelem("x:1"), InputError);
}

TEST_CASE("lift enumeration matches the brute-force oracle") {
  TestRng rng{2026};
  // Hand case: lifting {s} chooses an odd subset under s ({u} or {v}) and
  // the empty even subset under q.
  Tree t = two_branch();
  auto pre = group_preimages(t, ge(1, {1}));
  CHECK(pre == std::vector<GroupElement>{ge(2, {3}), ge(2, {4})});
  CHECK(group_preimages(t, ge(0, {0})) ==
        std::vector<GroupElement>{ge(1, {1}), ge(1, {2})});
  // A member with no children kills every lift.
  CHECK(group_preimages(t, ge(2, {3})).empty());
  CHECK(group_preimages(t, ge(2, {3, 4})).empty());

  for (int trial = 0; trial < 25; ++trial) {
    Tree r = random_tree(rng, 3, 3, 12);
    for (std::size_t n = 0; n < 3; ++n)
      for (const auto& x : level_elems(r, n)) {
        auto fast = group_preimages(r, x);
        auto slow = oracle_preimages(r, x);
        CHECK(fast == slow);
      }
  }
}

TEST_CASE("group rank is the least member rank with Infinite identity") {
  Tree t;  // root -> a(1) -> b(3); root -> c(2); c truncated with label w
  std::size_t a = t.add_child(0);
  std::size_t c = t.add_child(0);
  t.add_child(a);
  t.set_label(c, kOmega);
  t.set_truncated(c, true);
  CHECK(group_rank(t, group_id(1)) == RankValue::inf());
  CHECK(group_rank(t, ge(1, {a})) == RankValue::fin(1));
  CHECK(group_rank(t, ge(1, {c})) == kOmega);
  CHECK(group_rank(t, ge(1, {a, c})) == RankValue::fin(1));
}

TEST_CASE("rank transfer: lift-graph rank equals the least member rank") {
  TestRng rng{77};
  std::size_t tested = 0;
  for (int trial = 0; trial < 30; ++trial) {
    Tree t = random_tree(rng, 4, 4, 14);
    auto ranks = oracle_group_tree_ranks(t);
    for (const auto& [x, r] : ranks) {
      if (x.is_id()) continue;  // identities climb with the truncation instead
      RankValue expect = RankValue::inf();
      for (std::size_t m : x.members) {
        RankValue mr = tree_rank_visible(t, m);
        if (rank_cmp(mr, expect) < 0) expect = mr;
      }
      REQUIRE(!expect.infinite);
      CHECK(RankValue::fin(Ordinal::nat(r)) == expect);
      ++tested;
    }
  }
  CHECK(tested > 1200);
}

TEST_CASE("the family structure encodes, decodes, and answers facts lazily") {
  Tree t = two_branch();
  GroupTreeStructure A = build_A(t, 3);  // one trivial level past the tree
  for (std::size_t n = 0; n <= 3; ++n)
    for (Elem e : A.level_universe(n)) CHECK(A.encode(A.decode(e)) == e);
  CHECK(A.level_universe(3).size() == 1);
  CHECK_THROWS_AS(A.decode((9ull << 48)), InputError);
  CHECK_THROWS_AS(A.encode(ge(1, {3})), InputError);  // node of another level

  std::size_t fam = A.sig().fam_index("f");
  auto F = [&](const GroupElement& idx, const GroupElement& b, const GroupElement& c) {
    return A.holds(PredRef::fam(fam, to_string(idx)), {A.encode(b), A.encode(c)});
  };
  for (const auto& idx : level_elems(t, 1))
    for (const auto& b : level_elems(t, 2))
      for (const auto& c : level_elems(t, 1))
        CHECK(F(idx, b, c) == (f_apply(t, idx, b) == c));
  CHECK_THROWS_AS(F(ge(1, {9}), group_id(1), group_id(1)), InputError);

  // Atoms pin the reduced pairwise differences: a lift pair carries the
  // identity index both ways it can be read.
  Tuple pair{A.encode(ge(1, {1})), A.encode(ge(2, {3}))};
  auto atoms = A.atoms_on(pair);
  bool lift_atom = false;
  for (const auto& at : atoms)
    if (at.pred.index == "1:" && at.args == std::vector<std::size_t>{1, 0})
      lift_atom = true;
  CHECK(lift_atom);
  // Same-level pair: the difference element names the relating index.
  Tuple sib{A.encode(ge(2, {3})), A.encode(ge(2, {4}))};
  bool diff_atom = false;
  for (const auto& at : A.atoms_on(sib))
    if (at.pred.index == "2:3,4") diff_atom = true;
  CHECK(diff_atom);
}

TEST_CASE("guards refuse wide levels, big universes, and oversized lifts") {
  Tree wide;
  for (int i = 0; i < 31; ++i) wide.add_child(0);
  CHECK_THROWS_AS(build_A(wide, 1), ResourceError);

  Tree fan;
  for (int i = 0; i < 22; ++i) fan.add_child(0);
  CHECK_THROWS_AS(group_preimages(fan, ge(0, {0})), ResourceError);
  Tree mid;
  for (int i = 0; i < 12; ++i) mid.add_child(0);
  CHECK_THROWS_AS(group_preimages(mid, ge(0, {0}), 64), ResourceError);

  Tree t = two_branch();
  CHECK_THROWS_AS(build_A(t, 2, 8, 8), ResourceError);
  GroupTreeStructure A = build_A(t, 2);
  CHECK_THROWS_AS(A.materialize(4), ResourceError);
  CHECK_THROWS_AS(lemma36_check(A, 0), InputError);
  CHECK_THROWS_AS(lemma36_check(A, 3), InputError);
}

TEST_CASE("rigidity: automorphisms are exactly the coherent translation chains") {
  // Two leaves: 2 identity-image choices at level 0, 2 coherent lifts each.
  Tree pairT;
  pairT.add_child(0);
  pairT.add_child(0);
  RigidityReport two = check_rigidity(build_A(pairT, 1));
  CHECK(two.automorphisms == 4);
  CHECK(two.coherent_chains == 4);
  CHECK(two.ids_determine);
  CHECK(two.translation_law);
  CHECK(two.ok());

  // Three leaves: even subsets lift the identity, odd ones lift the root.
  Tree triple;
  triple.add_child(0);
  triple.add_child(0);
  triple.add_child(0);
  RigidityReport three = check_rigidity(build_A(triple, 1));
  CHECK(three.automorphisms == 8);
  CHECK(three.ok());

  // A bare chain is rigid up to the root swap: one lift per level each way.
  Tree chain;
  chain.add_child(chain.add_child(0));
  RigidityReport ch = check_rigidity(build_A(chain, 2));
  CHECK(ch.automorphisms == 2);
  CHECK(ch.ok());

  // Forked depth 2: the kernel above the identity keeps chains plentiful.
  RigidityReport fork = check_rigidity(build_A(two_branch(), 2));
  CHECK(fork.automorphisms == fork.coherent_chains);
  CHECK(fork.automorphisms > 2);
  CHECK(fork.ok());
}

TEST_CASE("bounded games equate an element with the identity per its rank") {
  GroupTreeStructure A = build_A(lemma_tree(), 5);
  for (std::uint64_t beta = 1; beta <= 2; ++beta) {
    CAPTURE(beta);
    Lemma36Report rep = lemma36_check(A, beta);
    CAPTURE(rep.mismatches);
    CHECK(rep.checked >= 8);
    CHECK(rep.budget_errors == 0);
    CHECK(rep.agreements == rep.checked);
    CHECK(rep.ok());
  }
}

TEST_CASE("separation depth grows with rank on a descending-sequence cone") {
  Tree cone = descending_tree(3, 3, 5, HarrisonPoint::well(Ordinal::omega_pow(1)));
  CHECK(tree_rank(cone, cone.root()) == kOmega);
  GroupTreeStructure A = build_A(cone, 6);

  BFConfig cfg;
  cfg.max_len = 4;
  cfg.width = 8;
  cfg.memoize = false;
  auto sep_depth = [&](const GroupElement& a, std::uint64_t cap) -> std::uint64_t {
    for (std::uint64_t b = 1; b <= cap; ++b)
      if (!bf_equiv(A, {A.encode(a)}, A, {A.encode(group_id(a.level))},
                    RankValue::fin(Ordinal::nat(b)), cfg))
        return b;
    return cap + 1;  // not separated within the cap
  };

  // One singleton per rank 0, 1, 2 from the well-ordered spine, then the
  // limit-rank root itself.
  auto level1 = cone.level_nodes(1);
  REQUIRE(level1.size() == 3);
  std::map<std::uint64_t, std::size_t> by_rank;
  for (std::size_t n = 1; n <= cone.depth(); ++n)
    for (std::size_t m : cone.level_nodes(n)) {
      RankValue r = tree_rank(cone, m);
      REQUIRE(!r.infinite);
      if (r.ord.is_finite() && r.ord.terms.size() <= 1) {
        std::uint64_t v = r.ord.terms.empty() ? 0 : r.ord.terms[0].coeff;
        by_rank.emplace(v, m);
      }
    }
  REQUIRE(by_rank.count(0));
  REQUIRE(by_rank.count(1));
  REQUIRE(by_rank.count(2));

  std::vector<std::uint64_t> seps;
  for (std::uint64_t v : {0ull, 1ull, 2ull}) {
    std::size_t node = by_rank[v];
    seps.push_back(sep_depth(ge(cone.node(node).level, {node}), 2));
  }
  seps.push_back(sep_depth(ge(0, {0}), 2));  // the rank-w root
  CHECK(seps == std::vector<std::uint64_t>{1, 1, 1, 2});
  // The identity never separates from itself.
  CHECK(sep_depth(group_id(1), 2) == 3);
}
