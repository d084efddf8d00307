#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "scottlab/backforth.hpp"
#include "scottlab/core.hpp"
#include "scottlab/fraisse.hpp"
#include "scottlab/ordinals.hpp"

using namespace scottlab;

namespace {

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

KStructure mk(std::vector<std::size_t> classes,
              std::vector<std::tuple<std::size_t, std::size_t, std::uint64_t>>
                  colors) {
  KStructure s;
  s.n = classes.size();
  s.eclass = std::move(classes);
  for (auto [x, y, c] : colors) s.set_color(x, y, c);
  return s;
}

// Smallest color closing no monochromatic triangle, scanning from `start`.
std::uint64_t safe_color(const KStructure& m, std::size_t x, std::size_t y,
                         std::uint64_t start) {
  for (std::uint64_t c = start;; ++c) {
    bool ok = true;
    for (std::size_t t = 0; t < m.n && ok; ++t) {
      if (t == x || t == y) continue;
      auto xt = m.color.find({std::min(x, t), std::max(x, t)});
      auto yt = m.color.find({std::min(y, t), std::max(y, t)});
      if (xt != m.color.end() && yt != m.color.end() && xt->second == c &&
          yt->second == c)
        ok = false;
    }
    if (ok) return c;
  }
}

// Random class member: random class ids, colors greedy from random offsets.
KStructure random_member(TestRng& rng, std::size_t n, std::size_t classes) {
  KStructure s;
  s.n = n;
  for (std::size_t i = 0; i < n; ++i)
    s.eclass.push_back(rng.below(classes));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      s.set_color(x, y, safe_color(s, x, y, rng.below(3)));
  return s;
}

// Extend by `extra` points with random classes and greedy colors; the first
// |m| elements keep everything, so the identity is an embedding.
KStructure extend_random(const KStructure& m, TestRng& rng, std::size_t extra,
                         std::size_t classes) {
  KStructure s = m;
  for (std::size_t k = 0; k < extra; ++k) {
    std::size_t z = s.n++;
    s.eclass.push_back(rng.below(classes));
    for (std::size_t y = 0; y < z; ++y)
      s.set_color(z, y, safe_color(s, z, y, rng.below(5)));
  }
  return s;
}

KStructure induced(const KStructure& m, const std::vector<std::size_t>& keep) {
  KStructure s;
  s.n = keep.size();
  for (std::size_t x : keep) s.eclass.push_back(m.eclass[x]);
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = i + 1; j < keep.size(); ++j)
      s.set_color(i, j, m.color_of(keep[i], keep[j]));
  return s;
}

std::vector<std::size_t> identity_emb(std::size_t n) {
  std::vector<std::size_t> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = i;
  return e;
}

// Relational view without the order, for automorphism oracles.
FiniteStructure relational(const KStructure& m) {
  Signature sig{{{"E", 2}}, {{"C", 2, "color index"}}};
  FiniteStructure s(sig, m.n);
  for (std::size_t x = 0; x < m.n; ++x)
    for (std::size_t y = 0; y < m.n; ++y) {
      if (x == y) continue;
      if (m.eclass[x] == m.eclass[y]) s.add_rel("E", {x, y});
    }
  for (const auto& [k, c] : m.color)
    s.add_fam("C", std::to_string(c), {k.first, k.second}),
        s.add_fam("C", std::to_string(c), {k.second, k.first});
  return s;
}

// Class permutation induced by an element map, or empty when inconsistent.
std::vector<std::size_t> induced_class_perm(const KStructure& m,
                                            const std::vector<Elem>& img) {
  std::vector<std::size_t> cids = m.class_ids();
  std::map<std::size_t, std::size_t> pos;
  for (std::size_t i = 0; i < cids.size(); ++i) pos.emplace(cids[i], i);
  std::vector<std::size_t> perm(cids.size(), cids.size());
  for (std::size_t x = 0; x < m.n; ++x) {
    std::size_t from = pos.at(m.eclass[x]);
    std::size_t to = pos.at(m.eclass[img[x]]);
    if (perm[from] == cids.size())
      perm[from] = to;
    else if (perm[from] != to)
      return {};
  }
  return perm;
}

Elem first_of_class(const KStructure& m, std::size_t cid) {
  for (std::size_t x = 0; x < m.n; ++x)
    if (m.eclass[x] == cid) return x;
  REQUIRE(false);
  return 0;
}

}  // namespace

TEST_CASE("membership and structure basics") {
  KStructure empty;
  CHECK(in_K(empty));

  // Triangle on one color fails; recoloring one edge repairs it.
  KStructure tri = mk({0, 0, 0}, {{0, 1, 3}, {1, 2, 3}, {0, 2, 3}});
  CHECK_FALSE(in_K(tri));
  tri.set_color(0, 2, 2);
  CHECK(in_K(tri));

  // Path x-y-z on color 1 with (x,z) on color 2.
  KStructure path = mk({0, 1, 2}, {{0, 1, 1}, {1, 2, 1}, {0, 2, 2}});
  CHECK(in_K(path));

  KStructure missing = mk({0, 1, 2}, {{0, 1, 1}, {1, 2, 1}});
  CHECK_FALSE(in_K(missing));

  CHECK(path.color_of(2, 1) == 1);
  CHECK_THROWS_AS(path.color_of(1, 1), InputError);
  CHECK_THROWS_AS(path.color_of(0, 7), InputError);
  CHECK(path.fresh_color() == 3);
  CHECK(empty.fresh_color() == 0);
  CHECK(path.class_ids() == std::vector<std::size_t>{0, 1, 2});
  KStructure two = mk({1, 0, 1}, {{0, 1, 0}, {1, 2, 1}, {0, 2, 2}});
  CHECK(two.class_ids() == std::vector<std::size_t>{1, 0});
  CHECK(two.class_members(1) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("text form round trip") {
  TestRng rng{11};
  for (int it = 0; it < 20; ++it) {
    KStructure m = random_member(rng, 1 + rng.below(6), 1 + rng.below(3));
    KStructure back = parse_kstructure(to_string(m));
    CHECK(back.n == m.n);
    CHECK(back.color == m.color);
    // Class ids survive verbatim.
    CHECK(back.eclass == m.eclass);
  }
  CHECK_THROWS_AS(parse_kstructure("class x: 0"), InputError);
  CHECK_THROWS_AS(parse_kstructure("class 0: 0 0"), InputError);
  CHECK_THROWS_AS(parse_kstructure("color 1: 0 0"), InputError);
  CHECK_THROWS_AS(parse_kstructure("class 0: 0 1\ncolor 1: 0 1\ncolor 2: 0 1"),
                  InputError);
  CHECK_THROWS_AS(parse_kstructure("class 0: 0\ncolor 1: 0 3"), InputError);
  CHECK_THROWS_AS(parse_kstructure("junk"), InputError);
}

TEST_CASE("embedding checks") {
  KStructure a = mk({0, 1}, {{0, 1, 2}});
  KStructure b = mk({0, 0, 1}, {{0, 1, 1}, {0, 2, 2}, {1, 2, 3}});
  CHECK(is_embedding(a, b, {0, 2}));
  CHECK_FALSE(is_embedding(a, b, {0, 1}));  // class pattern broken
  CHECK_FALSE(is_embedding(a, b, {1, 2}));  // color 3 != 2
  CHECK_FALSE(is_embedding(a, b, {0, 0}));  // not injective
  CHECK_FALSE(is_embedding(a, b, {0}));
  CHECK(is_embedding(KStructure{}, b, {}));
}

TEST_CASE("amalgamation glues over the common part") {
  TestRng rng{5};
  KStructure a = random_member(rng, 3, 2);

  // A = B: nothing to add, D is C relabeled.
  KStructure c0 = extend_random(a, rng, 2, 3);
  Amalgam d0 = amalgamate(a, a, c0, identity_emb(3), identity_emb(3));
  CHECK(d0.d.n == c0.n);
  CHECK(in_K(d0.d));
  CHECK(is_embedding(c0, d0.d, d0.emb_c));
  CHECK(is_embedding(a, d0.d, identity_emb(3)));

  // Empty A: disjoint union with fresh cross colors.
  KStructure b1 = random_member(rng, 3, 2);
  KStructure c1 = random_member(rng, 2, 2);
  Amalgam d1 = amalgamate(KStructure{}, b1, c1, {}, {});
  CHECK(d1.d.n == b1.n + c1.n);
  CHECK(in_K(d1.d));
  CHECK(is_embedding(b1, d1.d, d1.emb_b));
  CHECK(is_embedding(c1, d1.d, d1.emb_c));
  std::set<std::uint64_t> cross;
  std::uint64_t top = std::max(b1.fresh_color(), c1.fresh_color());
  for (std::size_t x = 0; x < b1.n; ++x)
    for (std::size_t y = 0; y < c1.n; ++y) {
      std::uint64_t cc = d1.d.color_of(d1.emb_b[x], d1.emb_c[y]);
      CHECK(cc >= top);
      cross.insert(cc);
    }
  CHECK(cross.size() == b1.n * c1.n);  // one fresh color per cross pair

  // One new point on each side: size |A| + 2.
  KStructure b2 = extend_random(a, rng, 1, 3);
  KStructure c2 = extend_random(a, rng, 1, 3);
  Amalgam d2 = amalgamate(a, b2, c2, identity_emb(3), identity_emb(3));
  CHECK(d2.d.n == a.n + 2);
  CHECK(in_K(d2.d));
  CHECK(is_embedding(b2, d2.d, d2.emb_b));
  CHECK(is_embedding(c2, d2.d, d2.emb_c));
  for (std::size_t i = 0; i < a.n; ++i)
    CHECK(d2.emb_b[i] == d2.emb_c[i]);  // commutes over A

  // Non-embedding input rejected.
  CHECK_THROWS_AS(amalgamate(a, b2, c2, {0, 1, 1}, identity_emb(3)),
                  InputError);
  KStructure bad = mk({0, 0, 0}, {{0, 1, 9}, {1, 2, 9}, {0, 2, 9}});
  CHECK_THROWS_AS(amalgamate(a, bad, c2, identity_emb(3), identity_emb(3)),
                  InputError);
}

TEST_CASE("amalgamation properties over random instances") {
  TestRng rng{77};
  std::size_t joined = 0;
  for (int it = 0; it < 500; ++it) {
    std::size_t an = rng.below(4);
    KStructure a = random_member(rng, an, 1 + rng.below(2));
    KStructure b = extend_random(a, rng, 1 + rng.below(3), 3);
    KStructure c = extend_random(a, rng, 1 + rng.below(3), 3);
    Amalgam d = amalgamate(a, b, c, identity_emb(an), identity_emb(an));
    REQUIRE(in_K(d.d));
    REQUIRE(is_embedding(b, d.d, d.emb_b));
    REQUIRE(is_embedding(c, d.d, d.emb_c));
    for (std::size_t i = 0; i < an; ++i)
      REQUIRE(d.emb_b[i] == d.emb_c[i]);
    // Cross classes joined only through A.
    for (std::size_t x = an; x < b.n; ++x)
      for (std::size_t y = an; y < c.n; ++y) {
        bool forced = false;
        for (std::size_t i = 0; i < an && !forced; ++i)
          forced = b.eclass[x] == b.eclass[i] && c.eclass[y] == c.eclass[i];
        bool related = d.d.eclass[d.emb_b[x]] == d.d.eclass[d.emb_c[y]];
        REQUIRE(related == forced);
        joined += related;
      }
  }
  CHECK(joined > 50);  // the forced case genuinely occurs
}

TEST_CASE("hereditary property on induced substructures") {
  TestRng rng{31};
  for (int it = 0; it < 60; ++it) {
    KStructure m = random_member(rng, 2 + rng.below(6), 1 + rng.below(3));
    std::vector<std::size_t> keep;
    for (std::size_t x = 0; x < m.n; ++x)
      if (rng.below(2)) keep.push_back(x);
    KStructure sub = induced(m, keep);
    CHECK(in_K(sub));
    CHECK(is_embedding(sub, m, keep));
  }
}

TEST_CASE("extension audit finds the first gap") {
  // A single point realizes no same-class partner.
  KStructure one = mk({0}, {});
  auto gap = extension_audit(one, 2);
  REQUIRE(gap.has_value());
  CHECK(gap->find("over {0}") != std::string::npos);

  // Empty structure: the very first extension is missing.
  CHECK(extension_audit(KStructure{}, 1).has_value());

  CHECK_THROWS_AS(extension_audit(one, 0), InputError);
}

TEST_CASE("bounded limit approximation closes and is deterministic") {
  ApproxResult r1 = limit_approx(40, 2, 9);
  CHECK(r1.closed);
  CHECK(r1.saturated);
  CHECK(in_K(r1.m));
  CHECK_FALSE(extension_audit(r1.m, 2).has_value());

  ApproxResult r2 = limit_approx(40, 2, 9);
  CHECK(r1.m == r2.m);

  // Too small to close: flagged with the first unrealized extension.
  ApproxResult tiny = limit_approx(2, 2, 9);
  CHECK_FALSE(tiny.closed);
  CHECK_FALSE(tiny.unrealized.empty());
  CHECK(in_K(tiny.m));

  CHECK_THROWS_AS(limit_approx(0, 2, 1), InputError);
  CHECK_THROWS_AS(limit_approx(5, 0, 1), InputError);
}

TEST_CASE("limit approximation closes at bound three") {
  ApproxResult r = limit_approx(220, 3, 4);
  CHECK(in_K(r.m));
  CHECK(r.closed);
  CHECK(r.saturated);
  CHECK_FALSE(extension_audit(r.m, 3).has_value());
  CHECK(r.m.class_ids().size() >= 3);
}

TEST_CASE("order expansion labels classes injectively") {
  KStructure single = mk({0, 0}, {{0, 1, 0}});
  OrderedKStructure n1 = expand_order(single, 3);
  CHECK(n1.classlabel.size() == 1);

  ApproxResult r = limit_approx(40, 2, 9);
  OrderedKStructure n = expand_order(r.m, 3);
  std::vector<HarrisonPoint> labels;
  for (const auto& [cid, pt] : n.classlabel) {
    (void)cid;
    labels.push_back(pt);
  }
  REQUIRE(labels.size() >= 2);
  bool well = false, dense = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i].eta ? dense : well) = true;
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      CHECK(h_cmp(labels[i], labels[j]) != 0);
  }
  CHECK(well);
  CHECK(dense);
  CHECK(h_less(n.label_of(first_of_class(n.base, n.base.class_ids()[0])),
               n.label_of(first_of_class(n.base, n.base.class_ids()[1]))));

  KStructure broken = mk({0, 1}, {});
  CHECK_THROWS_AS(expand_order(broken, 3), InputError);
}

TEST_CASE("order criterion matches the engine on labeled pairs") {
  // Base closed at bound two, relabeled by hand so the order side is exactly
  // the two-point well orders 0 and 1.
  ApproxResult r = limit_approx(60, 2, 9);
  REQUIRE(r.closed);
  std::vector<std::size_t> cids = r.m.class_ids();
  REQUIRE(cids.size() >= 2);

  OrderedKStructure n;
  n.base = r.m;
  n.k_exp = 3;
  for (std::size_t i = 0; i < cids.size(); ++i)
    n.classlabel.emplace(cids[i], HarrisonPoint::well(Ordinal::nat(i)));

  Elem x = first_of_class(n.base, cids[0]);
  Elem y = first_of_class(n.base, cids[1]);

  // Same tuple: every side true at every alpha.
  for (int alpha : {0, 1, 2}) {
    Claim2Report same = claim2_check(n, {x}, {x}, alpha);
    CHECK(same.engine);
    CHECK(same.criterion());
    CHECK(same.agree());
  }

  // Labels 0 and 1: the one-round game already separates them — the point
  // below label 1 has no counterpart below label 0 — and in the structure the
  // spoiler plays any element of the lower class.
  Claim2Report rep = claim2_check(n, {x}, {y}, 1);
  CHECK_FALSE(rep.engine);
  CHECK_FALSE(rep.order_side);
  CHECK(rep.atoms_side);
  CHECK(rep.agree());

  CHECK_THROWS_AS(claim2_check(n, {x}, {y}, 4), InputError);
  CHECK_THROWS_AS(claim2_check(n, {x}, {x, y}, 1), InputError);
  CHECK_THROWS_AS(claim2_check(n, {n.base.n}, {x}, 1), InputError);

  // Budget exhaustion surfaces as a resource error.
  BFConfig starved;
  starved.node_guard = 1;
  CHECK_THROWS_AS(claim2_check(n, {x}, {y}, 2, starved), ResourceError);
}

TEST_CASE("order criterion biconditional on a closed approximation") {
  ApproxResult r = limit_approx(220, 3, 4);
  REQUIRE(r.closed);
  OrderedKStructure n = expand_order(r.m, 3);

  std::vector<std::size_t> cids = r.m.class_ids();
  std::vector<Elem> picks;
  for (std::size_t cid : cids) picks.push_back(first_of_class(r.m, cid));
  picks.resize(std::min<std::size_t>(picks.size(), 4));

  std::size_t checked = 0, agreed = 0, both_true = 0;
  for (Elem x : picks)
    for (Elem y : picks)
      for (int alpha : {0, 1, 2}) {
        Claim2Report rep = claim2_check(n, {x}, {y}, alpha);
        ++checked;
        agreed += rep.agree();
        both_true += rep.engine && rep.criterion();
      }
  // Length-two tuples over the first two classes.
  TestRng rng{3};
  for (int it = 0; it < 12; ++it) {
    Tuple xs{picks[rng.below(picks.size())], picks[rng.below(picks.size())]};
    Tuple ys{picks[rng.below(picks.size())], picks[rng.below(picks.size())]};
    if (xs[0] == xs[1] || ys[0] == ys[1]) continue;
    for (int alpha : {0, 1, 2}) {
      Claim2Report rep = claim2_check(n, xs, ys, alpha);
      ++checked;
      agreed += rep.agree();
    }
  }
  CHECK(checked >= 40);
  CHECK(agreed == checked);
  CHECK(both_true > 0);
}

TEST_CASE("equivalent dense labels with equal atoms agree as true") {
  ApproxResult r = limit_approx(220, 3, 4);
  REQUIRE(r.closed);
  std::vector<std::size_t> cids = r.m.class_ids();
  REQUIRE(cids.size() >= 2);

  // Two classes on order-equivalent dense-part labels, the rest well-ordered
  // far above so they do not interfere.
  OrderedKStructure n;
  n.base = r.m;
  n.k_exp = 3;
  n.classlabel.emplace(cids[0], HarrisonPoint::etap(Rat(0, 1), {}));
  n.classlabel.emplace(cids[1], HarrisonPoint::etap(Rat(1, 1), {}));
  for (std::size_t i = 2; i < cids.size(); ++i)
    n.classlabel.emplace(cids[i],
                         HarrisonPoint::well(Ordinal::omega_pow(2, i)));

  Elem x = first_of_class(n.base, cids[0]);
  Elem y = first_of_class(n.base, cids[1]);
  for (int alpha : {1, 2}) {
    Claim2Report rep = claim2_check(n, {x}, {y}, alpha);
    CHECK(rep.order_side);
    CHECK(rep.atoms_side);
    CHECK(rep.engine);
    CHECK(rep.agree());
  }
}

TEST_CASE("separation from a dense label grows with the well label") {
  ApproxResult r = limit_approx(220, 3, 4);
  REQUIRE(r.closed);
  std::vector<std::size_t> cids = r.m.class_ids();
  REQUIRE(cids.size() >= 4);

  OrderedKStructure n;
  n.base = r.m;
  n.k_exp = 3;
  for (std::size_t i = 0; i + 1 < cids.size(); ++i)
    n.classlabel.emplace(cids[i], HarrisonPoint::well(Ordinal::nat(i)));
  n.classlabel.emplace(cids[cids.size() - 1], HarrisonPoint::etap(Rat(0, 1), {}));

  Elem x = first_of_class(n.base, cids.back());
  auto sep = [&](std::size_t gamma) {
    Elem y = first_of_class(n.base, cids[gamma]);
    for (int alpha = 1; alpha <= 3; ++alpha)
      if (!claim2_check(n, {x}, {y}, alpha).engine) return alpha;
    return 4;
  };
  // The spoiler descends gamma steps below the well label and one more below
  // the dense one; the well side runs out after gamma answers.
  CHECK(sep(0) == 1);
  CHECK(sep(1) == 2);
  CHECK(sep(2) == 3);

  // Orbits already differ: no label-preserving automorphism moves one class
  // onto another, since the class order is rigid.
  FiniteStructure fin = to_finite(n);
  Elem y = first_of_class(n.base, cids[2]);
  CHECK_FALSE(bf_limit_equiv(fin, {x}, {y}));
  CHECK(claim2_check(n, {x}, {y}, 1).engine);
}

TEST_CASE("every singleton triple carries a distinguishing color") {
  TestRng rng{13};
  for (int it = 0; it < 25; ++it) {
    KStructure m = random_member(rng, 3 + rng.below(5), 1 + rng.below(3));
    TripleReport rep = indiscernible_triple_report(m);
    CHECK(rep.triples == m.n * (m.n - 1) * (m.n - 2));
    CHECK(rep.all_witnessed);
    CHECK(rep.witnesses.size() == rep.triples);
    for (const auto& w : rep.witnesses) {
      CHECK(m.color_of(w.x, w.y) == w.color);
      CHECK(m.color_of(w.absent.first, w.absent.second) != w.color);
    }
  }

  // Distinct colors on a three-point structure: the pairs sit in different
  // automorphism orbits.
  KStructure s3 = mk({0, 1, 2}, {{0, 1, 1}, {1, 2, 2}, {0, 2, 3}});
  TripleReport rep = indiscernible_triple_report(s3);
  CHECK(rep.orbit_checked);
  CHECK(rep.orbit_separated);

  CHECK_THROWS_AS(distinguishing_witness(s3, 0, 0, 2), InputError);
  CHECK_THROWS_AS(distinguishing_witness(s3, 0, 2, 2), InputError);
  KStructure small = mk({0, 0}, {{0, 1, 0}});
  CHECK_THROWS_AS(indiscernible_triple_report(small), InputError);
}

TEST_CASE("triple reports cover bounded approximations exhaustively") {
  for (std::uint64_t seed : {1, 2, 3}) {
    ApproxResult r = limit_approx(12, 2, seed);
    if (r.m.n < 3) continue;
    TripleReport rep = indiscernible_triple_report(r.m);
    CHECK(rep.all_witnessed);
    OrderedKStructure n = expand_order(r.m, 3);
    TripleReport orep = indiscernible_triple_report(n);
    CHECK(orep.all_witnessed);
    CHECK(orep.triples == rep.triples);
  }
}

TEST_CASE("identity permutation yields the identity witness") {
  ApproxResult r = limit_approx(40, 2, 9);
  std::size_t k = r.m.class_ids().size();
  REQUIRE(k >= 2);
  ImaginariesReport rep = imaginaries_witness(r.m, identity_emb(k));
  CHECK(rep.total);
  CHECK(rep.verified);
  CHECK(rep.mapping == identity_emb(r.m.n));
}

TEST_CASE("class swap realized on a mirror-symmetric member") {
  KStructure m = swap_symmetric_member(3, 7);
  REQUIRE(in_K(m));
  std::vector<std::size_t> cids = m.class_ids();
  REQUIRE(cids.size() >= 2);

  std::vector<std::size_t> swap(cids.size());
  for (std::size_t i = 0; i < swap.size(); ++i) swap[i] = i;
  swap[0] = 1;
  swap[1] = 0;
  ImaginariesReport rep = imaginaries_witness(m, swap);
  CHECK(rep.total);
  CHECK(rep.verified);
  REQUIRE(rep.mapping.size() == m.n);
  std::vector<Elem> img(rep.mapping.begin(), rep.mapping.end());
  CHECK(induced_class_perm(m, img) == swap);

  // The witness really is an automorphism of the relational view.
  FiniteStructure fin = relational(m);
  auto autos = automorphisms(fin);
  CHECK(std::find(autos.begin(), autos.end(), img) != autos.end());
}

TEST_CASE("permutation witness input validation") {
  ApproxResult r = limit_approx(40, 2, 9);
  std::size_t k = r.m.class_ids().size();
  REQUIRE(k >= 2);
  std::vector<std::size_t> bad(k, 0);
  CHECK_THROWS_AS(imaginaries_witness(r.m, bad), InputError);
  CHECK_THROWS_AS(imaginaries_witness(r.m, identity_emb(k + 1)), InputError);
  KStructure one = mk({0, 0}, {{0, 1, 0}});
  CHECK_THROWS_AS(imaginaries_witness(one, {0}), InputError);
}

TEST_CASE("asymmetric classes leave the swap stuck") {
  // Classes of different sizes admit no swap; the report flags the failure.
  KStructure m = mk({0, 0, 1}, {{0, 1, 0}, {0, 2, 1}, {1, 2, 2}});
  REQUIRE(in_K(m));
  ImaginariesReport rep = imaginaries_witness(m, {1, 0});
  CHECK_FALSE(rep.total);
  CHECK_FALSE(rep.stuck.empty());
}

TEST_CASE("no finite member admits a class three-cycle") {
  // A point x in a cycled class has orbit length 3j under any inducing
  // automorphism, and the j-step power translates the triangle
  // {x, g^j x, g^2j x} onto itself edge by edge, forcing one color on it.
  // Exhaustive check: no automorphism of a small member induces a 3-cycle.
  TestRng rng(177);
  for (int rep = 0; rep < 12; ++rep) {
    KStructure m = random_member(rng, 6 + rep % 3, 3);
    if (m.class_ids().size() < 3) continue;
    FiniteStructure fin = relational(m);
    for (const auto& img : automorphisms(fin)) {
      std::vector<std::size_t> perm = induced_class_perm(m, img);
      REQUIRE_FALSE(perm.empty());
      // Count cycle lengths of the induced class permutation.
      std::vector<bool> seen(perm.size(), false);
      for (std::size_t i = 0; i < perm.size(); ++i) {
        if (seen[i]) continue;
        std::size_t len = 0, j = i;
        while (!seen[j]) {
          seen[j] = true;
          j = perm[j];
          ++len;
        }
        CHECK(len % 3 != 0);
      }
    }
  }

  // The back-and-forth search reports the stuck element accordingly.
  ApproxResult r = limit_approx(220, 3, 4);
  std::vector<std::size_t> cids = r.m.class_ids();
  REQUIRE(cids.size() >= 3);
  std::vector<std::size_t> cyc(cids.size());
  for (std::size_t i = 0; i < cyc.size(); ++i) cyc[i] = i;
  cyc[0] = 1;
  cyc[1] = 2;
  cyc[2] = 0;
  ImaginariesReport rep = imaginaries_witness(r.m, cyc);
  CHECK_FALSE(rep.total);
  CHECK_FALSE(rep.stuck.empty());
}
