#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scottlab/core.hpp"
#include "scottlab/ordinals.hpp"

namespace scottlab {

// Rooted tree stored as an arena.  Node 0 is the root (level 0); a parent is
// always created before its children, so indices ascend level by level along
// any path.  Generators label nodes with foundation ranks; `truncated` marks
// nodes whose child list was cut by a depth or width budget, making the label
// the only rank evidence below that point.
struct TreeNode {
  std::size_t parent = 0;  // == own index at the root
  std::size_t level = 0;
  std::vector<std::size_t> children;
  std::optional<RankValue> label;
  bool truncated = false;
};

class Tree {
 public:
  Tree() : nodes_(1) {}

  std::size_t root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(std::size_t i) const;
  std::size_t add_child(std::size_t parent);
  void set_label(std::size_t i, const RankValue& r);
  void set_truncated(std::size_t i, bool flag);

  std::size_t depth() const;
  std::vector<std::size_t> level_nodes(std::size_t n) const;

  // Path string built from sibling positions: root is "/", its third child
  // is "/2", that node's first child "/2/0".
  std::string path_of(std::size_t i) const;
  std::size_t at_path(const std::string& path) const;

  // One node per line: `<path> rank=<ord|inf>` with an optional trailing
  // `truncated` token.  Unlabeled nodes dump as `rank=?`.
  std::string dump() const;
  static Tree parse(const std::string& text);

 private:
  std::vector<TreeNode> nodes_;
};

// Foundation rank: leaves are 0, an inner node is the sup of child ranks plus
// one, and any infinite-rank child forces Infinite.  Truncated nodes return
// their label (the generator's certificate); a truncated node without a label
// is a ResourceError.  A labeled non-truncated node whose computed rank
// disagrees with its label is an InputError (corrupt certificate).
RankValue tree_rank(const Tree& t, std::size_t node);

// Same recursion but ignoring labels and truncation flags entirely: the rank
// of the visible finite tree.  Used as the oracle that truncation labels are
// cross-checked against.
RankValue tree_rank_visible(const Tree& t, std::size_t node);

// Desk analog of rank homogeneity, with "infinitely many" weakened to "at
// least w": every non-truncated node x at level n must have, for each rank
// b < rank(x) occurring at level n+1, at least w children of rank b; an
// infinite-rank x needs at least w infinite-rank children plus w of every
// ordinal rank occurring at level n+1.  Truncated nodes are exempt (their
// child lists are incomplete evidence).
bool is_rank_homogeneous(const Tree& t, std::size_t w);

// Ranks required to occur per level; levels[0] names the root's rank and must
// hold exactly one entry.  A rank listed more than once raises its per-parent
// copy count above the generator's w.
struct RankProfile {
  std::vector<std::vector<RankValue>> levels;
};

// Profile for an approximant with top rank w*(gamma+1): below the root every
// level offers the ranks w*b and w*b+1 for b <= gamma, decayed level by level
// to what a finite truncation can actually place.
RankProfile profile_approx(std::uint64_t gamma, std::size_t depth);

// Ill-founded counterpart: Infinite at every level on top of the same ordinal
// spectrum as profile_approx(gamma, .), with no decay (infinite-rank parents
// regenerate every rank below them).
RankProfile profile_star(std::uint64_t gamma, std::size_t depth);

// The w-fan profile {level0: 1, level1: 0 x w}.
RankProfile profile_fan(std::size_t w);

// Deterministically realize a profile as a w-rank-homogeneous truncation of
// the ideal lazy tree, generating down to min(depth, last profile level).
// Unachievable profiles raise InputError naming the violated constraint.
Tree gen_rank_homog(const RankProfile& profile, std::size_t w, std::size_t depth);

// Truncation of the tree of finite strictly decreasing sequences in the
// K-exponent Harrison-type order: each node holds a point, children hold
// smaller points.  Well-ordered points give well-founded subtrees (rank = the
// ordinal), dense points give ill-founded ones (label Infinite).  Not
// rank-homogeneous.  With `top` set, the root holds that point and the tree
// is its descent cone; otherwise the root is the empty sequence over the
// whole order.
Tree descending_tree(std::uint64_t k, std::size_t width, std::size_t depth,
                     std::optional<HarrisonPoint> top = {});

// Approximate equivalence of tuples in rank-labeled trees at level alpha:
// (1) per level, the two trees realize the same rank values below w*alpha;
// (2) the predecessor closures of the tuples are isomorphic as trees by a map
//     sending one tuple to the other;
// (3) corresponding closure nodes have equal ranks, or both at least w*alpha.
bool approx_equiv(const Tree& t1, const std::vector<std::size_t>& a1,
                  const Tree& t2, const std::vector<std::size_t>& a2,
                  const Ordinal& alpha);

// Game adapter: presents a labeled truncation as a stand-in for its ideal
// lazy tree (finite() is false; the arena is a curated window, not a finite
// structure).  The hooks pick challenge nodes covering distinct (level, rank)
// classes and answer by walking rank-matched children, falling back to
// "both at least w*beta" picks above the comparison boundary.
class TreeStructure final : public Structure {
 public:
  explicit TreeStructure(Tree t);

  const Tree& tree() const { return t_; }

  bool finite() const override { return false; }
  bool holds(const PredRef& p, const Tuple& t) const override;
  std::vector<Atom> atoms_on(const Tuple& t) const override;
  std::vector<Tuple> challenge_tuples(const Tuple& base, std::size_t len,
                                      const GameCtx& ctx) const override;
  std::vector<Tuple> response_tuples(const Tuple& base, std::size_t len,
                                     const GameCtx& ctx, const Structure& other,
                                     const Tuple& other_base,
                                     const Tuple& other_ext) const override;

  static Signature tree_sig();

 private:
  std::vector<std::size_t> walk_candidates(std::size_t anchor,
                                           const std::vector<RankValue>& ranks,
                                           const RankValue& beta,
                                           const std::vector<Elem>& used) const;

  Tree t_;
  std::vector<RankValue> rank_;  // tree_rank per node, precomputed
  // Challenge pool: per (level, rank) class, the first few node indices.
  std::vector<std::vector<Elem>> groups_;
};

}  // namespace scottlab
