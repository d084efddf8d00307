#pragma once

#include "scottlab/core.hpp"
#include "scottlab/ordinals.hpp"

namespace scottlab {

// Configuration for the graded equivalence engine.
//
// Extension mode: single-element rounds, or tuple rounds capped at max_len
// entries (0 = pick automatically: structure size when finite, 2 otherwise).
// For infinite structures the game is a bounded search: at most `width`
// candidates per round, levels no deeper than depth_bound; when such a budget
// binds, the engine raises ResourceError rather than answering.
struct BFConfig {
  bool single = false;
  std::size_t max_len = 0;
  RankValue depth_bound = RankValue::fin(Ordinal::omega_pow(6));
  std::size_t width = 16;
  bool memoize = true;
  std::uint64_t node_guard = 50'000'000;
  // Answer single-element rounds at levels 1 and 2 on finite structures with
  // at-most-binary signatures by comparing interned extension-type censuses
  // instead of playing the game; same verdicts, far fewer nodes.
  bool fast_rounds = true;
};

// Decides whether (s1, t1) and (s2, t2) agree to level alpha: equal atomic
// types at level 0, and at level beta+1 every extension round on either side
// is answered on the other at level beta. Exact for finite structures (any
// alpha, including the limit of all levels); bounded search for infinite ones.
bool bf_equiv(const Structure& s1, const Tuple& t1, const Structure& s2,
              const Tuple& t2, const RankValue& alpha, const BFConfig& cfg = {});

// Same-structure limit equivalence: true iff some automorphism maps t1 to t2.
bool bf_limit_equiv(const FiniteStructure& s, const Tuple& t1, const Tuple& t2);

// The level-by-level partition of all length-len tuples of a finite structure,
// refined until it stabilizes. class_ids[a][i] is the block of tuples[i] at
// level a; block ids are first-occurrence ranks, so traces are deterministic.
struct PartitionTrace {
  std::vector<Tuple> tuples;                        // lexicographic order
  std::vector<std::vector<std::size_t>> class_ids;  // levels 0..stable_level
  std::size_t stable_level = 0;  // first level whose partition is final

  std::size_t tuple_index(const Tuple& t) const;
  // Least level whose block around t already equals the stable block.
  RankValue settle_level(const Tuple& t) const;
};

PartitionTrace bf_stable_partition(const FiniteStructure& s, std::size_t len,
                                   const BFConfig& cfg = {});

// Least alpha such that any tuple equivalent to t at level alpha is
// equivalent to it at every level.
RankValue scott_rank_tuple(const FiniteStructure& s, const Tuple& t,
                           const BFConfig& cfg = {});

// Successor of the largest tuple rank, over tuples of length <= |universe|.
RankValue scott_rank_structure(const FiniteStructure& s, const BFConfig& cfg = {});

}  // namespace scottlab
