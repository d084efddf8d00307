#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scottlab/common.hpp"
#include "scottlab/ordinals.hpp"

namespace scottlab {

// --- signatures ---------------------------------------------------------------

struct RelSym {
  std::string name;
  std::size_t arity = 1;
  bool operator==(const RelSym&) const = default;
};

// An indexed family of relations (C_i)_i. Indices are opaque strings compared
// literally; `domain` is a human-readable description of the index set.
struct FamilySym {
  std::string name;
  std::size_t arity = 1;
  std::string domain;
  bool operator==(const FamilySym&) const = default;
};

struct Signature {
  std::vector<RelSym> relations;
  std::vector<FamilySym> families;

  std::size_t rel_index(const std::string& name) const;
  std::size_t fam_index(const std::string& name) const;
  bool operator==(const Signature&) const = default;
};

// Reference to one predicate: a plain relation, or one member of a family.
struct PredRef {
  std::size_t sym = 0;  // index into relations or families
  bool family = false;
  std::string index;  // family member label; empty for plain relations

  static PredRef rel(std::size_t sym) { return {sym, false, {}}; }
  static PredRef fam(std::size_t sym, std::string index) {
    return {sym, true, std::move(index)};
  }
  auto operator<=>(const PredRef&) const = default;
};

// --- structures -----------------------------------------------------------------

using Elem = std::uint64_t;
using Tuple = std::vector<Elem>;

// One atom over a tuple, with arguments given by tuple positions.
struct Atom {
  PredRef pred;
  std::vector<std::size_t> args;
  auto operator<=>(const Atom&) const = default;
};

// Equality pattern plus the sorted positional atoms that hold: two tuples get
// equal values iff they satisfy the same atomic formulas.
struct AtomicType {
  std::vector<std::size_t> eq;  // eq[i] = least j with t[j] == t[i]
  std::vector<Atom> atoms;
  auto operator<=>(const AtomicType&) const = default;
};

// Knobs a structure may consult when proposing game moves.
struct GameCtx {
  RankValue beta = RankValue::fin(0);  // level the extended tuples face next
  std::size_t max_len = 1;             // entries added per round
  std::size_t width = 16;              // candidate budget for infinite structures
};

class Structure {
 public:
  virtual ~Structure() = default;
  const Signature& sig() const { return sig_; }

  virtual bool finite() const = 0;
  virtual std::size_t size() const;              // finite only
  virtual std::vector<Elem> elements() const;    // finite only
  virtual bool holds(const PredRef& p, const Tuple& args) const = 0;
  // All positional atoms true on t (finite by the structure's contract).
  virtual std::vector<Atom> atoms_on(const Tuple& t) const = 0;

  // Game hooks. Extensions are tuples of fresh pairwise-distinct elements to
  // append to `base`. Finite structures get exhaustive defaults; infinite ones
  // must override with their own candidate selection.
  virtual std::vector<Tuple> challenge_tuples(const Tuple& base, std::size_t len,
                                              const GameCtx& ctx) const;
  virtual std::vector<Tuple> response_tuples(const Tuple& base, std::size_t len,
                                             const GameCtx& ctx, const Structure& other,
                                             const Tuple& other_base,
                                             const Tuple& other_ext) const;

 protected:
  explicit Structure(Signature s) : sig_(std::move(s)) {}

 private:
  Signature sig_;
};

// Interned atom codes for structures whose predicates are at most binary.
// unary[e] and pair[u * n + v] (u != v, both orders) index the key tables;
// two elements or ordered pairs satisfy the same atoms iff their ids match.
// Ids are local to one structure; keys carry family indices as ids into
// `index_names`, so keys from different structures can be reconciled.
struct BinaryCodes {
  bool valid = false;  // every predicate has arity <= 2
  std::size_t n = 0;
  std::vector<std::int32_t> unary;
  std::vector<std::int32_t> pair;
  std::vector<std::vector<std::int64_t>> unary_keys;  // id -> sorted atom codes
  std::vector<std::vector<std::int64_t>> pair_keys;
  std::vector<std::string> index_names;
};

class FiniteStructure final : public Structure {
 public:
  FiniteStructure(Signature s, std::size_t n);

  void add_fact(const PredRef& p, const Tuple& args);
  void add_rel(const std::string& name, const Tuple& args);
  void add_fam(const std::string& name, const std::string& index, const Tuple& args);

  bool finite() const override { return true; }
  std::size_t size() const override { return n_; }
  std::vector<Elem> elements() const override;
  bool holds(const PredRef& p, const Tuple& args) const override;
  std::vector<Atom> atoms_on(const Tuple& t) const override;

  const std::set<std::pair<PredRef, Tuple>>& facts() const { return facts_; }
  // Every plain relation plus every family member appearing in some fact.
  std::vector<PredRef> preds() const;

  // Atom codes for at-most-binary signatures, built on first use and kept
  // until the fact set changes.
  const BinaryCodes& binary_codes() const;

  // Text form: `signature:` header, `universe: n`, one fact per line.
  static FiniteStructure parse(const std::string& text);
  std::string dump() const;

 private:
  std::size_t n_;
  std::set<std::pair<PredRef, Tuple>> facts_;
  // Lazy caches; any mutation drops them.
  mutable std::shared_ptr<const BinaryCodes> codes_;
  mutable std::shared_ptr<const std::vector<std::vector<const std::pair<PredRef, Tuple>*>>>
      elem_facts_;
};

// --- atomic comparison --------------------------------------------------------------

AtomicType atomic_type(const Structure& s, const Tuple& t);
bool is_partial_iso(const Structure& s1, const Tuple& t1, const Structure& s2,
                    const Tuple& t2);

// --- automorphisms -------------------------------------------------------------------

// All automorphisms as permutation images (image[i] = image of element i),
// found by backtracking extension search. Deterministic order.
std::vector<std::vector<Elem>> automorphisms(const FiniteStructure& s,
                                             std::uint64_t node_guard = 5'000'000);

// Partition of all length-len tuples into automorphism orbits; blocks and
// their members are in lexicographic order.
std::vector<std::vector<Tuple>> automorphism_orbits(const FiniteStructure& s,
                                                    std::size_t len,
                                                    std::uint64_t node_guard = 5'000'000);

}  // namespace scottlab
