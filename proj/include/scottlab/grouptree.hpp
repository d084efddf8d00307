#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scottlab/backforth.hpp"
#include "scottlab/core.hpp"
#include "scottlab/ordinals.hpp"
#include "scottlab/trees.hpp"

namespace scottlab {

// Element of the level-n group over a tree: a finite set of level-n nodes,
// combined by symmetric difference.  `members` holds arena node ids, sorted;
// the identity of each level is the empty set.
struct GroupElement {
  std::size_t level = 0;
  std::vector<std::size_t> members;

  bool is_id() const { return members.empty(); }
  auto operator<=>(const GroupElement&) const = default;
};

GroupElement group_id(std::size_t level);

// Symmetric difference within one level.  Level mismatch is an InputError.
GroupElement sym_diff(const GroupElement& a, const GroupElement& b);

// Projection one level down: a node survives iff an odd number of its
// children belong to `a`.  A group homomorphism; level 0 is an InputError.
GroupElement pred_g(const Tree& t, const GroupElement& a);
GroupElement pred_iter(const Tree& t, GroupElement a, std::size_t steps);

// The family operation: project both arguments to the lower of the two
// levels, then take the symmetric difference there.  Symmetric in a and b.
GroupElement f_apply(const Tree& t, const GroupElement& a, const GroupElement& b);

// Rank of a group element: the least trusted tree rank among its members.
// The identity (empty set) gets Infinite by convention - the minimum over
// nothing is the top value, and only non-identities carry rank evidence.
RankValue group_rank(const Tree& t, const GroupElement& a);

// "<level>:<id>,<id>,..." with sorted arena ids; identity is "<level>:".
std::string to_string(const GroupElement& a);
GroupElement parse_gelem(const std::string& text);

// All one-step lifts of x: group elements one level up that project onto x.
// Empty when some member has no children.  `cap` bounds the enumeration
// (ResourceError beyond it).
std::vector<GroupElement> group_preimages(const Tree& t, const GroupElement& x,
                                          std::size_t cap = 4096);

// The family structure of a tree: universe = all group elements of level
// <= depth over the truncation, one binary function per index element,
// encoded as the family f with f[a](b, c) iff applying a to b yields c.
// Function values are computed on demand and never tabulated.  Levels past
// the tree's own depth carry the trivial one-element group, so identity
// chains keep climbing as far as `depth` allows.
//
// The structure stands in for the untruncated object, so finite() is false
// and the game hooks curate moves: challenges are lift chains (identity
// chains and rank-extreme lifts of the base), responses translate the
// opponent's picks by a coherent difference chain through the anchor pair.
class GroupTreeStructure final : public Structure {
 public:
  GroupTreeStructure(Tree t, std::size_t depth, std::size_t width = 8,
                     std::uint64_t guard_elems = 1'000'000);

  const Tree& tree() const { return t_; }
  std::size_t depth() const { return depth_; }

  Elem encode(const GroupElement& g) const;
  GroupElement decode(Elem e) const;
  std::vector<Elem> level_universe(std::size_t n) const;

  // Tabulates the truncation as plain facts for automorphism enumeration.
  // Guarded: more than `max_elems` universe elements is a ResourceError.
  FiniteStructure materialize(std::size_t max_elems = 512) const;

  bool finite() const override { return false; }
  bool holds(const PredRef& p, const Tuple& args) const override;
  std::vector<Atom> atoms_on(const Tuple& t) const override;
  std::vector<Tuple> challenge_tuples(const Tuple& base, std::size_t len,
                                      const GameCtx& ctx) const override;
  std::vector<Tuple> response_tuples(const Tuple& base, std::size_t len,
                                     const GameCtx& ctx, const Structure& other,
                                     const Tuple& other_base,
                                     const Tuple& other_ext) const override;

 private:
  std::vector<GroupElement> lift_chain_steps(const GroupElement& x) const;
  void chain_variants(std::vector<GroupElement>& chain, std::size_t len,
                      std::vector<std::vector<GroupElement>>& out,
                      std::size_t cap) const;

  Tree t_;
  std::size_t depth_;
  std::size_t width_;
  std::vector<std::vector<std::size_t>> level_ids_;   // arena ids per level
  std::vector<std::map<std::size_t, std::size_t>> bit_;  // arena id -> bit
  std::vector<RankValue> rank_;                       // trusted ranks by node
};

GroupTreeStructure build_A(Tree t, std::size_t depth, std::size_t width = 8,
                           std::uint64_t guard_elems = 1'000'000);

// Rigidity of the truncation: enumerates the automorphisms of the
// materialized structure and checks that each one is the translation
// x -> x ^ u_level for a coherent identity-image chain (u_n), that two
// automorphisms agreeing on every identity are equal, and that images obey
// g(b) = f[b ^ a](g(a)) for same-level pairs.
struct RigidityReport {
  std::size_t automorphisms = 0;
  std::size_t coherent_chains = 0;
  bool ids_determine = false;
  bool translation_law = false;
  bool ok() const {
    return ids_determine && translation_law && automorphisms == coherent_chains;
  }
};
RigidityReport check_rigidity(const GroupTreeStructure& A,
                              std::size_t max_elems = 512);

// Rank transfer between a vs identity games and member ranks: a bounded
// back-and-forth at level beta should equate a with its level's identity
// exactly when rank(a) >= w*beta.  Samples every singleton whose rank
// headroom fits inside the truncation, plus the identities themselves.
struct Lemma36Report {
  std::size_t checked = 0;
  std::size_t agreements = 0;
  std::size_t budget_errors = 0;
  std::vector<std::string> mismatches;
  bool ok() const { return checked > 0 && agreements == checked; }
};
Lemma36Report lemma36_check(const GroupTreeStructure& A, std::uint64_t beta,
                            const BFConfig& cfg = {});

}  // namespace scottlab
