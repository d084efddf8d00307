#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scottlab/backforth.hpp"
#include "scottlab/core.hpp"
#include "scottlab/ordinals.hpp"

namespace scottlab {

// --- the class K: edge-colored equivalence structures ------------------------
//
// Finite structures with an equivalence relation (stored as dense class ids)
// and exactly one color per unordered pair of distinct elements, including
// pairs inside one class. Membership additionally forbids monochromatic
// triangles: no color c and x, y, z pairwise joined by c.

struct KStructure {
  std::size_t n = 0;
  std::vector<std::size_t> eclass;  // size n; class ids need not be dense
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t>
      color;  // keys (i, j) with i < j

  bool operator==(const KStructure&) const = default;

  // Color of the unordered pair; identical or out-of-range positions are
  // rejected, as is an uncolored pair.
  std::uint64_t color_of(std::size_t x, std::size_t y) const;
  void set_color(std::size_t x, std::size_t y, std::uint64_t c);

  // Distinct class ids in first-occurrence order.
  std::vector<std::size_t> class_ids() const;
  // Members of one class, ascending.
  std::vector<std::size_t> class_members(std::size_t cid) const;
  // Least color value unused anywhere in the structure.
  std::uint64_t fresh_color() const;
};

// All three membership invariants, decided by direct scan (triangles cubic):
// class vector covers the universe, every pair colored exactly once, no
// monochromatic triangle.
bool in_K(const KStructure& s);

// Text form: `class i: a b c` lines (ascending class id) followed by
// `color k: a b` lines (ascending pair). parse rejects malformed input,
// uncovered elements, and duplicate pairs.
std::string to_string(const KStructure& s);
KStructure parse_kstructure(const std::string& text);

// emb[i] = image of i; an embedding is injective, preserves the class
// pattern both ways, and preserves colors literally.
bool is_embedding(const KStructure& a, const KStructure& b,
                  const std::vector<std::size_t>& emb);

// --- amalgamation -------------------------------------------------------------
//
// D glues B and C over the common part A. Universe: B followed by C - A.
// Classes: joined only when forced through A (union-find over both class
// sets). Cross pairs (B - A) x (C - A) each get their own fresh color
// (fresh_color(D so far) + pair index), which cannot close a monochromatic
// triangle. With A empty this is the joint embedding.

struct Amalgam {
  KStructure d;
  std::vector<std::size_t> emb_b;  // B -> D
  std::vector<std::size_t> emb_c;  // C -> D
};

Amalgam amalgamate(const KStructure& a, const KStructure& b,
                   const KStructure& c, const std::vector<std::size_t>& emb_ab,
                   const std::vector<std::size_t>& emb_ac);

// --- bounded limit approximation ----------------------------------------------
//
// One-point extension shapes over a tuple A inside M: a class choice (one of
// A's classes or a class meeting none of them) plus, per A position, either a
// literal color drawn from A's own pairs or a fresh group; fresh groups are
// realized by colors equal inside a group, distinct across groups, and absent
// from A's pairs. Extensions by several points reduce to chained one-point
// shapes, so closure is audited one point at a time.

// First unrealized extension over any tuple of size < ext_bound, described
// textually; nullopt when m realizes every shape (m then has the extension
// property up to ext_bound).
std::optional<std::string> extension_audit(const KStructure& m,
                                           std::size_t ext_bound);

struct ApproxResult {
  KStructure m;
  bool closed = false;     // extension audit clean at the requested bound
  bool saturated = false;  // color saturation sweeps completed as well
  std::string unrealized;  // first missing extension when not closed
};

// Round-robin realization of missing extension shapes (plus witnesses making
// every used color reach every element from every class) until both sweeps
// are stable or size_bound is hit. Deterministic in seed.
ApproxResult limit_approx(std::size_t size_bound, std::size_t ext_bound,
                          std::uint64_t seed);

// --- the ordered expansion ------------------------------------------------------

// Classes labeled injectively by points of H(K); the labels induce the linear
// order on classes.
struct OrderedKStructure {
  KStructure base;
  std::map<std::size_t, HarrisonPoint> classlabel;  // class id -> label
  int k_exp = 3;

  const HarrisonPoint& label_of(std::size_t elem) const;
};

// Labels from the fixed H(K_exp) enumeration in class first-occurrence order;
// with at least two classes both the well part and the dense part appear.
OrderedKStructure expand_order(const KStructure& m, int k_exp);

// Relational view for the game engine: symmetric E and per-color facts plus
// the class order as a binary relation x <= y between elements.
FiniteStructure to_finite(const OrderedKStructure& n);

// --- tuple equivalence against the order criterion ------------------------------
//
// The engine verdict on the expansion is compared with the conjunction of the
// label-order game and atomic equality. Both games extend by single elements
// per round, so the two sides grade rounds identically.

struct Claim2Report {
  bool engine = false;      // bf_equiv on the expansion
  bool order_side = false;  // graded game on the chain of class labels
  bool atoms_side = false;  // equal atomic types
  bool criterion() const { return order_side && atoms_side; }
  bool agree() const { return engine == criterion(); }
};

// alpha <= 3; both tuples inside n. Budget overruns surface as ResourceError.
Claim2Report claim2_check(const OrderedKStructure& n, const Tuple& xs,
                          const Tuple& ys, int alpha, const BFConfig& cfg = {});

// Same check against a caller-held relational view (saves rebuilding it per
// pair); `fin` must be to_finite(n).
Claim2Report claim2_check(const OrderedKStructure& n, const FiniteStructure& fin,
                          const Tuple& xs, const Tuple& ys, int alpha,
                          const BFConfig& cfg = {});

// --- non-indiscernibility of singleton triples -----------------------------------

// The color on (x, y) cannot also join both (y, z) and (x, z): that triangle
// would be monochromatic. The witness names the color and the pair missing it.
struct TripleWitness {
  std::size_t x = 0, y = 0, z = 0;
  std::uint64_t color = 0;                     // color of (x, y)
  std::pair<std::size_t, std::size_t> absent;  // pair not carrying it
};

TripleWitness distinguishing_witness(const KStructure& s, std::size_t x,
                                     std::size_t y, std::size_t z);

struct TripleReport {
  std::size_t triples = 0;
  std::vector<TripleWitness> witnesses;  // one per ordered triple
  bool all_witnessed = false;
  // Orbit cross-check on small structures: some triple has (x,y) and (y,z)
  // in different automorphism orbits.
  bool orbit_checked = false;
  bool orbit_separated = false;
};

TripleReport indiscernible_triple_report(const KStructure& s);
TripleReport indiscernible_triple_report(const OrderedKStructure& s);

// --- class permutations and automorphisms ----------------------------------------
//
// Backtracking back-and-forth search for a total automorphism inducing a
// given permutation of the classes. A finite member cannot realize any class
// permutation with an orbit of length divisible by three: a point x in such a
// class has g-orbit length 3j, and g^j translates the three edges of the
// triangle {x, g^j x, g^2j x} onto each other, forcing it monochromatic. The
// report flags the stuck pair in that case.

struct ImaginariesReport {
  std::vector<std::size_t> perm;        // class index -> class index
  bool total = false;                   // automorphism found on all of m
  bool verified = false;                // image checked against every relation
  std::vector<std::size_t> mapping;     // element image when total
  std::string stuck;                    // first irrecoverable element otherwise
};

// perm permutes positions of m.class_ids(); m needs at least two classes.
ImaginariesReport imaginaries_witness(const KStructure& m,
                                      const std::vector<std::size_t>& perm);

// Swap-symmetric member: two classes of cls_size elements, colors invariant
// under the mirror (i, s) -> (i, 1 - s); palettes of mirror-even and
// mirror-odd pairs kept disjoint, so no triangle is monochromatic. The class
// transposition is realized by the mirror itself.
KStructure swap_symmetric_member(std::size_t cls_size, std::uint64_t seed);

}  // namespace scottlab
