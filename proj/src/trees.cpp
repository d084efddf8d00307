#include "scottlab/trees.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace scottlab {

namespace {

std::string bad_index_msg(std::size_t i) {
  return "tree: node index " + std::to_string(i) + " out of range";
}

}  // namespace

const TreeNode& Tree::node(std::size_t i) const {
  if (i >= nodes_.size()) throw InputError(bad_index_msg(i));
  return nodes_[i];
}

std::size_t Tree::add_child(std::size_t parent) {
  if (parent >= nodes_.size()) throw InputError(bad_index_msg(parent));
  std::size_t id = nodes_.size();
  nodes_.push_back({parent, nodes_[parent].level + 1, {}, {}, false});
  nodes_[parent].children.push_back(id);
  return id;
}

void Tree::set_label(std::size_t i, const RankValue& r) {
  if (i >= nodes_.size()) throw InputError(bad_index_msg(i));
  nodes_[i].label = r;
}

void Tree::set_truncated(std::size_t i, bool flag) {
  if (i >= nodes_.size()) throw InputError(bad_index_msg(i));
  nodes_[i].truncated = flag;
}

std::size_t Tree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.level);
  return d;
}

std::vector<std::size_t> Tree::level_nodes(std::size_t n) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].level == n) out.push_back(i);
  return out;
}

std::string Tree::path_of(std::size_t i) const {
  if (i >= nodes_.size()) throw InputError(bad_index_msg(i));
  if (i == 0) return "/";
  std::vector<std::size_t> slots;
  for (std::size_t cur = i; cur != 0; cur = nodes_[cur].parent) {
    const auto& sibs = nodes_[nodes_[cur].parent].children;
    auto it = std::find(sibs.begin(), sibs.end(), cur);
    slots.push_back(static_cast<std::size_t>(it - sibs.begin()));
  }
  std::string out;
  for (auto it = slots.rbegin(); it != slots.rend(); ++it)
    out += "/" + std::to_string(*it);
  return out;
}

std::size_t Tree::at_path(const std::string& path) const {
  if (path.empty() || path[0] != '/')
    throw InputError("tree path must start with '/': " + path);
  std::size_t cur = 0, pos = 1;
  while (pos < path.size()) {
    std::size_t next = path.find('/', pos);
    if (next == std::string::npos) next = path.size();
    std::size_t slot = std::stoull(path.substr(pos, next - pos));
    const auto& kids = nodes_[cur].children;
    if (slot >= kids.size()) throw InputError("no node at path " + path);
    cur = kids[slot];
    pos = next + 1;
  }
  return cur;
}

std::string Tree::dump() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out << path_of(i) << " rank="
        << (nodes_[i].label ? to_string(*nodes_[i].label) : std::string("?"));
    if (nodes_[i].truncated) out << " truncated";
    out << "\n";
  }
  return out.str();
}

Tree Tree::parse(const std::string& text) {
  Tree t;
  std::istringstream in(text);
  std::string line;
  bool saw_root = false;
  std::map<std::string, std::size_t> by_path{{"/", 0}};
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string path, rank_field, extra;
    if (!(ls >> path)) continue;
    if (path[0] == '#') continue;
    if (!(ls >> rank_field) || rank_field.rfind("rank=", 0) != 0)
      throw InputError("tree parse: expected 'rank=' on line: " + line);
    std::string rank_text = rank_field.substr(5);
    bool truncated = false;
    if (ls >> extra) {
      if (extra != "truncated")
        throw InputError("tree parse: unknown token '" + extra + "'");
      truncated = true;
    }
    std::size_t id;
    if (path == "/") {
      id = 0;
      saw_root = true;
    } else {
      std::size_t cut = path.rfind('/');
      std::string parent_path = cut == 0 ? "/" : path.substr(0, cut);
      auto it = by_path.find(parent_path);
      if (it == by_path.end())
        throw InputError("tree parse: parent missing for " + path);
      std::size_t slot = std::stoull(path.substr(cut + 1));
      if (slot != t.nodes_[it->second].children.size())
        throw InputError("tree parse: children out of order at " + path);
      id = t.add_child(it->second);
      by_path[path] = id;
    }
    if (rank_text != "?") t.set_label(id, parse_rank(rank_text));
    t.set_truncated(id, truncated);
  }
  if (!saw_root) throw InputError("tree parse: no root line");
  return t;
}

namespace {

// Ranks in reverse index order (children always have larger indices).
// Trusted mode returns labels at truncations and cross-checks elsewhere.
std::vector<RankValue> rank_vector(const Tree& t, bool trusted) {
  std::vector<RankValue> rank(t.size(), RankValue::fin(0));
  for (std::size_t idx = t.size(); idx-- > 0;) {
    const auto& n = t.node(idx);
    if (trusted && n.truncated) {
      if (!n.label)
        throw ResourceError("tree rank: truncated node " + t.path_of(idx) +
                            " carries no rank certificate");
      rank[idx] = *n.label;
      continue;
    }
    RankValue r = RankValue::fin(0);
    for (std::size_t c : n.children) {
      RankValue step = rank[c].infinite
                           ? RankValue::inf()
                           : RankValue::fin(ord_succ(rank[c].ord));
      if (rank_cmp(step, r) > 0) r = step;
    }
    if (trusted && n.label && !(*n.label == r))
      throw InputError("tree rank: label " + to_string(*n.label) + " at " +
                       t.path_of(idx) + " disagrees with computed " +
                       to_string(r));
    rank[idx] = r;
  }
  return rank;
}

}  // namespace

RankValue tree_rank(const Tree& t, std::size_t node) {
  if (node >= t.size()) throw InputError(bad_index_msg(node));
  return rank_vector(t, true)[node];
}

RankValue tree_rank_visible(const Tree& t, std::size_t node) {
  if (node >= t.size()) throw InputError(bad_index_msg(node));
  return rank_vector(t, false)[node];
}

bool is_rank_homogeneous(const Tree& t, std::size_t w) {
  auto rank = rank_vector(t, true);
  std::size_t d = t.depth();
  // Rank values occurring per level.
  std::vector<std::set<RankValue>> occ(d + 2);
  for (std::size_t i = 0; i < t.size(); ++i) occ[t.node(i).level].insert(rank[i]);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& n = t.node(i);
    if (n.truncated) continue;  // incomplete child list, exempt
    std::map<RankValue, std::size_t> count;
    for (std::size_t c : n.children) ++count[rank[c]];
    if (rank[i].infinite) {
      if (count[RankValue::inf()] < w) return false;
      for (const auto& b : occ[n.level + 1])
        if (!b.infinite && count[b] < w) return false;
    } else {
      for (const auto& b : occ[n.level + 1])
        if (!b.infinite && rank_cmp(b, rank[i]) < 0 && count[b] < w)
          return false;
    }
  }
  return true;
}

namespace {

Ordinal omega_beta_plus(std::uint64_t beta, std::uint64_t k) {
  return ord_add(omega_times(Ordinal::nat(beta)), Ordinal::nat(k));
}

// The shared ordinal spectrum {w*b + k : b <= gamma, k <= 1}.
std::vector<RankValue> approx_spectrum(std::uint64_t gamma) {
  std::vector<RankValue> out;
  for (std::uint64_t b = 0; b <= gamma; ++b)
    for (std::uint64_t k = 0; k <= 1; ++k)
      out.push_back(RankValue::fin(omega_beta_plus(b, k)));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

RankProfile profile_approx(std::uint64_t gamma, std::size_t depth) {
  RankProfile p;
  RankValue top = RankValue::fin(omega_times(Ordinal::nat(gamma + 1)));
  p.levels.push_back({top});
  auto spectrum = approx_spectrum(gamma);
  std::vector<RankValue> cur = {top};
  for (std::size_t n = 1; n <= depth; ++n) {
    std::vector<RankValue> next;
    for (const auto& r : spectrum)
      for (const auto& parent : cur)
        if (rank_cmp(r, parent) < 0) {
          next.push_back(r);
          break;
        }
    if (next.empty()) break;
    p.levels.push_back(next);
    cur = next;
  }
  return p;
}

RankProfile profile_star(std::uint64_t gamma, std::size_t depth) {
  RankProfile p;
  p.levels.push_back({RankValue::inf()});
  auto spectrum = approx_spectrum(gamma);
  spectrum.push_back(RankValue::inf());
  for (std::size_t n = 1; n <= depth; ++n) p.levels.push_back(spectrum);
  return p;
}

RankProfile profile_fan(std::size_t w) {
  RankProfile p;
  p.levels.push_back({RankValue::fin(1)});
  p.levels.push_back(std::vector<RankValue>(w, RankValue::fin(0)));
  return p;
}

Tree gen_rank_homog(const RankProfile& profile, std::size_t w,
                    std::size_t depth) {
  if (profile.levels.empty() || profile.levels[0].empty())
    throw InputError("profile: level 0 must name the root's rank");
  if (std::set<RankValue>(profile.levels[0].begin(), profile.levels[0].end())
          .size() != 1)
    throw InputError("profile: level 0 must name exactly one rank");
  std::size_t last = std::min(depth, profile.levels.size() - 1);

  // Distinct ranks and copy counts per level.
  std::vector<std::map<RankValue, std::size_t>> level_ranks(last + 1);
  for (std::size_t n = 0; n <= last; ++n) {
    if (profile.levels[n].empty())
      throw InputError("profile: level " + std::to_string(n) + " is empty");
    for (const auto& r : profile.levels[n]) ++level_ranks[n][r];
    for (auto& [r, c] : level_ranks[n]) c = std::max(c, w);
  }

  // Achievability: every rank needs child ranks covering its definition and a
  // parent able to produce it.
  std::set<RankValue> placed{level_ranks[0].begin()->first};
  for (std::size_t n = 0; n <= last; ++n) {
    bool frontier = n == last;
    for (const auto& r : placed) {
      if (frontier || r == RankValue::fin(0)) continue;
      const auto& below = level_ranks[n + 1];
      if (r.infinite) {
        if (!below.count(RankValue::inf()))
          throw InputError("profile: infinite rank at level " +
                           std::to_string(n) +
                           " needs an infinite rank at level " +
                           std::to_string(n + 1));
      } else if (r.ord.is_successor()) {
        RankValue s = RankValue::fin(ord_pred(r.ord));
        if (!below.count(s))
          throw InputError("profile: rank " + to_string(r) + " at level " +
                           std::to_string(n) + " needs rank " + to_string(s) +
                           " at level " + std::to_string(n + 1));
      } else {  // limit
        bool ok = false;
        for (const auto& [b, c] : below)
          if (!b.infinite && rank_cmp(b, r) < 0) ok = true;
        if (!ok)
          throw InputError("profile: limit rank " + to_string(r) +
                           " at level " + std::to_string(n) +
                           " needs a smaller rank at level " +
                           std::to_string(n + 1));
      }
    }
    if (frontier) break;
    std::set<RankValue> next;
    for (const auto& [b, c] : level_ranks[n + 1]) {
      bool ok = false;
      for (const auto& r : placed) {
        if (r.infinite)
          ok = true;
        else if (!b.infinite && rank_cmp(b, r) < 0)
          ok = true;
        if (ok) break;
      }
      if (!ok)
        throw InputError("profile: rank " + to_string(b) + " at level " +
                         std::to_string(n + 1) + " has no admissible parent");
      next.insert(b);
    }
    placed = std::move(next);
  }

  Tree t;
  t.set_label(0, level_ranks[0].begin()->first);
  std::vector<std::size_t> frontier{0};
  for (std::size_t n = 0; n < last; ++n) {
    std::vector<std::size_t> next;
    for (std::size_t id : frontier) {
      RankValue r = *t.node(id).label;
      if (r == RankValue::fin(0)) continue;
      for (const auto& [b, copies] : level_ranks[n + 1]) {
        bool eligible = r.infinite ? true : (!b.infinite && rank_cmp(b, r) < 0);
        if (!eligible) continue;
        for (std::size_t c = 0; c < copies; ++c) {
          std::size_t kid = t.add_child(id);
          t.set_label(kid, b);
          next.push_back(kid);
          if (t.size() > 2'000'000)
            throw ResourceError("generated tree exceeds the node budget");
        }
      }
    }
    frontier = std::move(next);
  }

  // A node is truncated exactly when its visible children cannot witness its
  // label (budget cut the rest).
  auto visible = rank_vector(t, false);
  for (std::size_t i = 0; i < t.size(); ++i)
    t.set_truncated(i, !(visible[i] == *t.node(i).label));
  return t;
}

namespace {

// Predecessor points of p in the Harrison-type order, largest-biased, at most
// `width` of them.
std::vector<HarrisonPoint> h_predecessors(const HarrisonPoint& p,
                                          const HarrisonEnum& en,
                                          std::size_t width) {
  std::vector<HarrisonPoint> out;
  auto push = [&](const HarrisonPoint& q) {
    if (out.size() < width &&
        std::find(out.begin(), out.end(), q) == out.end() && h_less(q, p))
      out.push_back(q);
  };
  if (!p.eta) {
    Ordinal cur = p.ord;
    while (out.size() < width && !cur.is_zero()) {
      if (cur.is_successor()) {
        cur = ord_pred(cur);
        push(HarrisonPoint::well(cur));
      } else {
        for (const auto& o : cofinal_below(cur, width))
          push(HarrisonPoint::well(o));
        break;
      }
    }
    return out;
  }
  // Dense point: one smaller dense point first (the ill-foundedness witness),
  // then same-copy smaller offsets, then a few small wells.  Large wells are
  // kept out of dense cones: their descent trees branch exponentially and the
  // root already exposes them.
  for (std::size_t j = 0; j < 64 && out.size() < 2; ++j) {
    Rat r = en.rational(j);
    if (rat_cmp(r, p.q) < 0) push(HarrisonPoint::etap(r, p.ord));
  }
  if (p.ord.is_successor()) push(HarrisonPoint::etap(p.q, ord_pred(p.ord)));
  for (std::size_t j = 0; out.size() < width && j < 4; ++j)
    push(HarrisonPoint::well(en.well(j)));
  return out;
}

}  // namespace

Tree descending_tree(std::uint64_t k, std::size_t width, std::size_t depth,
                     std::optional<HarrisonPoint> top) {
  HarrisonEnum en(static_cast<int>(k));
  Tree t;
  auto label_of = [](const HarrisonPoint& p) {
    return p.eta ? RankValue::inf() : RankValue::fin(p.ord);
  };
  std::vector<std::pair<std::size_t, HarrisonPoint>> frontier;
  if (top) {
    if (!h_valid(*top, static_cast<int>(k)))
      throw InputError("descending_tree: top point exceeds the order");
    t.set_label(0, label_of(*top));
    frontier.push_back({0, *top});
  } else {
    t.set_label(0, RankValue::inf());
    for (std::size_t i = 0; i < width; ++i) {
      HarrisonPoint p = en.point(i);
      std::size_t id = t.add_child(0);
      t.set_label(id, label_of(p));
      frontier.push_back({id, p});
    }
  }
  for (std::size_t lvl = 1; lvl < depth; ++lvl) {
    std::vector<std::pair<std::size_t, HarrisonPoint>> next;
    for (const auto& [id, p] : frontier)
      for (const auto& q : h_predecessors(p, en, width)) {
        std::size_t kid = t.add_child(id);
        t.set_label(kid, label_of(q));
        next.push_back({kid, q});
        if (t.size() > 500'000)
          throw ResourceError("descending tree exceeds the node budget");
      }
    frontier = std::move(next);
  }
  auto visible = rank_vector(t, false);
  for (std::size_t i = 0; i < t.size(); ++i)
    t.set_truncated(i, !(visible[i] == *t.node(i).label));
  return t;
}

namespace {

std::vector<std::size_t> root_path(const Tree& t, std::size_t node) {
  std::vector<std::size_t> out;
  for (std::size_t cur = node;; cur = t.node(cur).parent) {
    out.push_back(cur);
    if (cur == 0) break;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

bool approx_equiv(const Tree& t1, const std::vector<std::size_t>& a1,
                  const Tree& t2, const std::vector<std::size_t>& a2,
                  const Ordinal& alpha) {
  if (a1.size() != a2.size())
    throw InputError("approx_equiv: tuple lengths differ");
  RankValue boundary = RankValue::fin(omega_times(alpha));
  auto rank1 = rank_vector(t1, true);
  auto rank2 = rank_vector(t2, true);

  // (1) same rank values below the boundary, level by level.
  std::size_t d = std::max(t1.depth(), t2.depth());
  for (std::size_t n = 0; n <= d; ++n) {
    std::set<RankValue> s1, s2;
    for (std::size_t i : t1.level_nodes(n))
      if (rank_cmp(rank1[i], boundary) < 0) s1.insert(rank1[i]);
    for (std::size_t i : t2.level_nodes(n))
      if (rank_cmp(rank2[i], boundary) < 0) s2.insert(rank2[i]);
    if (s1 != s2) return false;
  }

  // (2) predecessor closures isomorphic with a1 -> a2.
  std::map<std::size_t, std::size_t> fwd, bwd;
  for (std::size_t i = 0; i < a1.size(); ++i) {
    auto p1 = root_path(t1, a1[i]);
    auto p2 = root_path(t2, a2[i]);
    if (p1.size() != p2.size()) return false;
    for (std::size_t j = 0; j < p1.size(); ++j) {
      auto f = fwd.find(p1[j]);
      if (f != fwd.end() && f->second != p2[j]) return false;
      auto b = bwd.find(p2[j]);
      if (b != bwd.end() && b->second != p1[j]) return false;
      fwd[p1[j]] = p2[j];
      bwd[p2[j]] = p1[j];
    }
  }

  // (3) corresponding ranks equal or both at or above the boundary.
  for (const auto& [x, y] : fwd) {
    if (rank1[x] == rank2[y]) continue;
    if (rank_cmp(rank1[x], boundary) >= 0 && rank_cmp(rank2[y], boundary) >= 0)
      continue;
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Signature TreeStructure::tree_sig() { return Signature{{{"S", 2}}, {}}; }

TreeStructure::TreeStructure(Tree t)
    : Structure(tree_sig()), t_(std::move(t)), rank_(rank_vector(t_, true)) {
  std::map<std::pair<std::size_t, RankValue>, std::vector<Elem>> groups;
  for (std::size_t i = 0; i < t_.size(); ++i) {
    auto& g = groups[{t_.node(i).level, rank_[i]}];
    if (g.size() < 4) g.push_back(static_cast<Elem>(i));
  }
  for (auto& [key, g] : groups) groups_.push_back(std::move(g));
}

bool TreeStructure::holds(const PredRef& p, const Tuple& t) const {
  if (p.family || p.sym != 0 || t.size() != 2) return false;
  if (t[0] >= t_.size() || t[1] >= t_.size()) return false;
  return t[1] != 0 && t_.node(t[1]).parent == t[0];
}

std::vector<Atom> TreeStructure::atoms_on(const Tuple& t) const {
  std::vector<Atom> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j)
      if (holds(PredRef::rel(0), {t[i], t[j]}))
        out.push_back({PredRef::rel(0), {i, j}});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Tuple> TreeStructure::challenge_tuples(const Tuple& base,
                                                   std::size_t len,
                                                   const GameCtx& ctx) const {
  // Closure of the base under predecessors, root included.
  std::set<Elem> closure{0};
  for (Elem e : base)
    if (e < t_.size())
      for (std::size_t cur = e;; cur = t_.node(cur).parent) {
        closure.insert(static_cast<Elem>(cur));
        if (cur == 0) break;
      }
  std::vector<Elem> singles;
  auto add = [&](Elem e) {
    if (std::find(base.begin(), base.end(), e) != base.end()) return;
    if (std::find(singles.begin(), singles.end(), e) == singles.end())
      singles.push_back(e);
  };
  // Children of closure nodes, two per distinct rank.
  for (Elem c : closure) {
    std::map<RankValue, std::size_t> seen;
    for (std::size_t kid : t_.node(c).children)
      if (seen[rank_[kid]]++ < 2) add(static_cast<Elem>(kid));
  }
  // One representative per (level, rank) class.
  for (const auto& g : groups_) add(g[0]);

  std::vector<Tuple> out;
  if (len == 1) {
    for (Elem e : singles) {
      out.push_back({e});
      if (out.size() >= ctx.width) break;
    }
  } else if (len == 2) {
    for (std::size_t i = 0; i < singles.size() && out.size() < ctx.width; ++i)
      for (std::size_t j = i + 1;
           j < singles.size() && out.size() < ctx.width; ++j)
        out.push_back({singles[i], singles[j]});
  }
  return out;
}

// Candidate end points of rank-matched walks from `anchor` following `ranks`.
std::vector<std::size_t> TreeStructure::walk_candidates(
    std::size_t anchor, const std::vector<RankValue>& ranks,
    const RankValue& beta, const std::vector<Elem>& used) const {
  RankValue boundary =
      beta.infinite ? RankValue::inf()
                    : RankValue::fin(omega_times(beta.ord));
  std::vector<std::size_t> cur{anchor};
  for (const auto& want : ranks) {
    std::vector<std::size_t> next;
    bool low = rank_cmp(want, boundary) < 0;
    for (std::size_t at : cur) {
      std::vector<std::size_t> exact, high;
      for (std::size_t kid : t_.node(at).children) {
        if (std::find(used.begin(), used.end(), static_cast<Elem>(kid)) !=
            used.end())
          continue;
        if (std::find(next.begin(), next.end(), kid) != next.end()) continue;
        if (low) {
          if (rank_[kid] == want) exact.push_back(kid);
        } else if (rank_cmp(rank_[kid], boundary) >= 0) {
          // Infinite picks stay safe forever; otherwise prefer large ranks.
          if (rank_[kid].infinite)
            exact.push_back(kid);
          else
            high.push_back(kid);
        }
      }
      std::sort(high.begin(), high.end(), [&](std::size_t a, std::size_t b) {
        return rank_cmp(rank_[a], rank_[b]) > 0;
      });
      for (std::size_t kid : exact) {
        if (next.size() >= 4) break;
        next.push_back(kid);
      }
      for (std::size_t kid : high) {
        if (next.size() >= 4) break;
        next.push_back(kid);
      }
    }
    cur = std::move(next);
    if (cur.empty()) break;
  }
  return cur;
}

std::vector<Tuple> TreeStructure::response_tuples(
    const Tuple& base, std::size_t len, const GameCtx& ctx,
    const Structure& other, const Tuple& other_base,
    const Tuple& other_ext) const {
  const auto* peer = dynamic_cast<const TreeStructure*>(&other);
  if (!peer || other_ext.size() != len || other_base.size() != base.size())
    return challenge_tuples(base, len, ctx);

  // Correspondence from peer nodes to ours; roots always match.
  std::map<Elem, Elem> mapped{{0, 0}};
  for (std::size_t i = 0; i < base.size(); ++i) mapped[other_base[i]] = base[i];

  // Answer the extension one element at a time, branching over candidates.
  std::vector<Tuple> out;
  std::vector<std::pair<std::map<Elem, Elem>, Tuple>> partial{{mapped, {}}};
  for (std::size_t i = 0; i < other_ext.size(); ++i) {
    Elem c = other_ext[i];
    if (c >= peer->t_.size()) return {};
    std::vector<std::pair<std::map<Elem, Elem>, Tuple>> grown;
    for (const auto& [m, picked] : partial) {
      // Deepest mapped ancestor of c and the rank path below it.
      std::vector<Elem> chain;  // c's strict ancestors down to c itself
      for (std::size_t cur = c;; cur = peer->t_.node(cur).parent) {
        chain.push_back(static_cast<Elem>(cur));
        if (cur == 0) break;
      }
      std::reverse(chain.begin(), chain.end());
      std::size_t start = 0;
      for (std::size_t j = 0; j < chain.size(); ++j)
        if (m.count(chain[j])) start = j;
      if (m.count(c)) return {};  // challenge reused a mapped node
      std::vector<RankValue> ranks;
      for (std::size_t j = start + 1; j < chain.size(); ++j)
        ranks.push_back(peer->rank_[chain[j]]);
      std::vector<Elem> used(base.begin(), base.end());
      for (Elem e : picked) used.push_back(e);
      auto ends =
          walk_candidates(m.at(chain[start]), ranks, ctx.beta, used);
      for (std::size_t d : ends) {
        auto m2 = m;
        m2[c] = static_cast<Elem>(d);
        auto picked2 = picked;
        picked2.push_back(static_cast<Elem>(d));
        grown.push_back({std::move(m2), std::move(picked2)});
        if (grown.size() >= 2 * ctx.width) break;
      }
    }
    partial = std::move(grown);
    if (partial.empty()) return {};
  }
  for (const auto& [m, picked] : partial) {
    out.push_back(picked);
    if (out.size() >= ctx.width) break;
  }
  return out;
}

}  // namespace scottlab
