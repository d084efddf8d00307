#include "scottlab/grouptree.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <sstream>

namespace scottlab {

namespace {

// Least trusted member rank, resolved against a precomputed rank table.
RankValue rank_of(const std::vector<RankValue>& table, const GroupElement& a) {
  RankValue best = RankValue::inf();
  for (std::size_t m : a.members)
    if (rank_cmp(table[m], best) < 0) best = table[m];
  return best;
}

std::uint64_t finite_value(const Ordinal& o) {
  std::uint64_t v = 0;
  for (const auto& t : o.terms)
    if (t.exp == 0) v = t.coeff;
  return v;
}

}  // namespace

GroupElement group_id(std::size_t level) { return GroupElement{level, {}}; }

GroupElement sym_diff(const GroupElement& a, const GroupElement& b) {
  if (a.level != b.level)
    throw InputError("sym_diff: elements live at different levels");
  GroupElement out{a.level, {}};
  std::set_symmetric_difference(a.members.begin(), a.members.end(),
                                b.members.begin(), b.members.end(),
                                std::back_inserter(out.members));
  return out;
}

GroupElement pred_g(const Tree& t, const GroupElement& a) {
  if (a.level == 0) throw InputError("pred_g: level 0 has no projection");
  std::map<std::size_t, std::size_t> count;
  for (std::size_t m : a.members) ++count[t.node(m).parent];
  GroupElement out{a.level - 1, {}};
  for (const auto& [par, c] : count)
    if (c % 2) out.members.push_back(par);
  return out;
}

GroupElement pred_iter(const Tree& t, GroupElement a, std::size_t steps) {
  for (std::size_t i = 0; i < steps; ++i) a = pred_g(t, a);
  return a;
}

GroupElement f_apply(const Tree& t, const GroupElement& a, const GroupElement& b) {
  std::size_t k = std::min(a.level, b.level);
  return sym_diff(pred_iter(t, a, a.level - k), pred_iter(t, b, b.level - k));
}

RankValue group_rank(const Tree& t, const GroupElement& a) {
  RankValue best = RankValue::inf();
  for (std::size_t m : a.members) {
    RankValue r = tree_rank(t, m);
    if (rank_cmp(r, best) < 0) best = r;
  }
  return best;
}

std::string to_string(const GroupElement& a) {
  std::ostringstream os;
  os << a.level << ":";
  for (std::size_t i = 0; i < a.members.size(); ++i)
    os << (i ? "," : "") << a.members[i];
  return os.str();
}

GroupElement parse_gelem(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw InputError("parse_gelem: missing ':' in '" + text + "'");
  GroupElement out;
  try {
    out.level = std::stoull(text.substr(0, colon));
    std::string rest = text.substr(colon + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      auto comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      out.members.push_back(std::stoull(rest.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  } catch (const std::exception&) {
    throw InputError("parse_gelem: malformed element '" + text + "'");
  }
  std::sort(out.members.begin(), out.members.end());
  auto last = std::unique(out.members.begin(), out.members.end());
  if (last != out.members.end())
    throw InputError("parse_gelem: repeated member in '" + text + "'");
  return out;
}

std::vector<GroupElement> group_preimages(const Tree& t, const GroupElement& x,
                                          std::size_t cap) {
  std::set<std::size_t> members(x.members.begin(), x.members.end());
  // A member with no children can never collect an odd child count.
  for (std::size_t m : x.members)
    if (t.node(m).children.empty()) return {};
  // Per fertile parent: the child subsets of the required parity.
  std::vector<std::vector<std::vector<std::size_t>>> choices;
  std::uint64_t total = 1;
  for (std::size_t par : t.level_nodes(x.level)) {
    const auto& kids = t.node(par).children;
    if (kids.empty()) continue;
    if (kids.size() > 20)
      throw ResourceError("group_preimages: node too wide to enumerate lifts");
    std::size_t parity = members.count(par) ? 1 : 0;
    std::vector<std::vector<std::size_t>> opts;
    for (std::uint64_t mask = 0; mask < (1ull << kids.size()); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask) % 2) != parity) continue;
      std::vector<std::size_t> pick;
      for (std::size_t i = 0; i < kids.size(); ++i)
        if (mask >> i & 1) pick.push_back(kids[i]);
      opts.push_back(std::move(pick));
    }
    total *= opts.size();
    if (total > cap)
      throw ResourceError("group_preimages: lift enumeration exceeds the cap");
    choices.push_back(std::move(opts));
  }
  std::vector<GroupElement> out;
  std::vector<std::size_t> acc;
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == choices.size()) {
      GroupElement g{x.level + 1, acc};
      std::sort(g.members.begin(), g.members.end());
      out.push_back(std::move(g));
      return;
    }
    for (const auto& pick : choices[i]) {
      acc.insert(acc.end(), pick.begin(), pick.end());
      self(self, i + 1);
      acc.resize(acc.size() - pick.size());
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  return out;
}

// --- the family structure ------------------------------------------------------

GroupTreeStructure::GroupTreeStructure(Tree t, std::size_t depth, std::size_t width,
                                       std::uint64_t guard_elems)
    : Structure(Signature{{}, {{"f", 2, "group elements '<level>:<members>'"}}}),
      t_(std::move(t)),
      depth_(depth),
      width_(width) {
  std::uint64_t total = 0;
  for (std::size_t n = 0; n <= depth_; ++n) {
    level_ids_.push_back(t_.level_nodes(n));
    if (level_ids_.back().size() > 30)
      throw ResourceError("group structure: tree level too wide");
    total += 1ull << level_ids_.back().size();
    if (total > guard_elems)
      throw ResourceError("group structure: truncation exceeds the element guard");
    bit_.emplace_back();
    for (std::size_t i = 0; i < level_ids_.back().size(); ++i)
      bit_.back()[level_ids_.back()[i]] = i;
  }
  rank_.reserve(t_.size());
  for (std::size_t i = 0; i < t_.size(); ++i) rank_.push_back(tree_rank(t_, i));
}

Elem GroupTreeStructure::encode(const GroupElement& g) const {
  if (g.level > depth_)
    throw InputError("group encode: level outside the structure");
  std::uint64_t mask = 0;
  for (std::size_t m : g.members) {
    auto it = bit_[g.level].find(m);
    if (it == bit_[g.level].end())
      throw InputError("group encode: member is not a node of that level");
    mask |= 1ull << it->second;
  }
  return (static_cast<Elem>(g.level) << 48) | mask;
}

GroupElement GroupTreeStructure::decode(Elem e) const {
  std::size_t level = e >> 48;
  std::uint64_t mask = e & ((1ull << 48) - 1);
  if (level > depth_ || mask >> level_ids_[level].size())
    throw InputError("group decode: value outside the universe");
  GroupElement g{level, {}};
  for (std::size_t i = 0; i < level_ids_[level].size(); ++i)
    if (mask >> i & 1) g.members.push_back(level_ids_[level][i]);
  return g;
}

std::vector<Elem> GroupTreeStructure::level_universe(std::size_t n) const {
  if (n > depth_) throw InputError("level_universe: level outside the structure");
  std::vector<Elem> out;
  for (std::uint64_t mask = 0; mask < (1ull << level_ids_[n].size()); ++mask)
    out.push_back((static_cast<Elem>(n) << 48) | mask);
  return out;
}

bool GroupTreeStructure::holds(const PredRef& p, const Tuple& args) const {
  if (!p.family || p.sym != 0 || args.size() != 2) return false;
  GroupElement idx = parse_gelem(p.index);
  encode(idx);  // validates the index against the truncation
  GroupElement c = f_apply(t_, idx, decode(args[0]));
  return encode(c) == args[1];
}

// The only index relating positions i -> j with level(j) <= level(i) is the
// difference between entry j and entry i projected down; indices above both
// levels form lift towers over that same difference, so inside one structure
// they carry no extra atomic information and stay out of the type.
std::vector<Atom> GroupTreeStructure::atoms_on(const Tuple& t) const {
  std::vector<GroupElement> xs;
  xs.reserve(t.size());
  for (Elem e : t) xs.push_back(decode(e));
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (xs[j].level > xs[i].level) continue;
      GroupElement idx =
          sym_diff(xs[j], pred_iter(t_, xs[i], xs[i].level - xs[j].level));
      atoms.push_back({PredRef::fam(0, to_string(idx)), {i, j}});
    }
  std::sort(atoms.begin(), atoms.end());
  return atoms;
}

// Rank-extreme one-step lifts of x: highest-rank first, then the lowest if it
// differs.  High ranks keep towers alive for later rounds; low ranks probe.
std::vector<GroupElement> GroupTreeStructure::lift_chain_steps(
    const GroupElement& x) const {
  if (x.level >= depth_) return {};
  std::vector<GroupElement> pre = group_preimages(t_, x);
  if (pre.empty()) return {};
  std::stable_sort(pre.begin(), pre.end(),
                   [&](const GroupElement& a, const GroupElement& b) {
                     return rank_cmp(rank_of(rank_, a), rank_of(rank_, b)) > 0;
                   });
  std::vector<GroupElement> out{pre.front()};
  if (pre.size() > 1 && rank_cmp(rank_of(rank_, pre.back()), rank_of(rank_, pre.front())) != 0)
    out.push_back(pre.back());
  return out;
}

void GroupTreeStructure::chain_variants(std::vector<GroupElement>& chain,
                                        std::size_t len,
                                        std::vector<std::vector<GroupElement>>& out,
                                        std::size_t cap) const {
  if (out.size() >= cap) return;
  if (chain.size() == len) {
    out.push_back(chain);
    return;
  }
  for (const auto& next : lift_chain_steps(chain.back())) {
    chain.push_back(next);
    chain_variants(chain, len, out, cap);
    chain.pop_back();
  }
}

std::vector<Tuple> GroupTreeStructure::challenge_tuples(const Tuple& base,
                                                        std::size_t len,
                                                        const GameCtx& ctx) const {
  std::vector<GroupElement> bs;
  for (Elem e : base) bs.push_back(decode(e));
  std::set<Elem> taken(base.begin(), base.end());
  std::vector<Tuple> out;
  std::set<Tuple> seen;
  auto push = [&](const std::vector<GroupElement>& ext) {
    if (ext.size() != len || out.size() >= ctx.width) return;
    Tuple u;
    std::set<Elem> dup;
    for (const auto& g : ext) {
      Elem e = encode(g);
      if (taken.count(e) || !dup.insert(e).second) return;
      u.push_back(e);
    }
    if (seen.insert(u).second) out.push_back(std::move(u));
  };

  // Identity chains climbing from each base level: the probe that measures
  // how far lift towers on the other side can follow.
  std::set<std::size_t> levels;
  for (const auto& b : bs) levels.insert(b.level);
  if (bs.empty()) levels.insert(0);
  for (std::size_t l : levels) {
    if (l + len > depth_) continue;
    std::vector<GroupElement> chain;
    for (std::size_t i = 1; i <= len; ++i) chain.push_back(group_id(l + i));
    push(chain);
  }
  // Lift chains above each base entry, branching through rank extremes.
  for (const auto& b : bs) {
    std::vector<std::vector<GroupElement>> chains;
    std::vector<GroupElement> start{b};
    for (const auto& first : lift_chain_steps(b)) {
      std::vector<GroupElement> chain{first};
      chain_variants(chain, len, chains, 4);
    }
    for (const auto& c : chains) push(c);
    if (out.size() >= ctx.width) break;
  }
  // Projection chains downward.
  for (const auto& b : bs) {
    if (b.level < len) continue;
    std::vector<GroupElement> chain;
    GroupElement cur = b;
    for (std::size_t i = 0; i < len; ++i) {
      cur = pred_g(t_, cur);
      chain.push_back(cur);
    }
    push(chain);
  }
  return out;
}

std::vector<Tuple> GroupTreeStructure::response_tuples(
    const Tuple& base, std::size_t len, const GameCtx& ctx, const Structure& other,
    const Tuple& other_base, const Tuple& other_ext) const {
  const auto* peer = dynamic_cast<const GroupTreeStructure*>(&other);
  if (!peer || other_base.size() != base.size()) return {};
  // Difference constraints per level; any conflict means the bases are not
  // translation-related, and translations are the only automorphisms.
  std::map<std::size_t, GroupElement> want;
  for (std::size_t j = 0; j < base.size(); ++j) {
    GroupElement ou = peer->decode(other_base[j]);
    GroupElement u = decode(base[j]);
    if (ou.level != u.level) return {};
    GroupElement d = sym_diff(ou, u);
    auto [it, fresh] = want.insert({u.level, d});
    if (!fresh && !(it->second == d)) return {};
  }
  if (want.empty()) want.insert({0, group_id(0)});
  // Seed at the highest constrained level; projections downward must agree
  // with every lower constraint.
  std::map<std::size_t, GroupElement> delta;
  auto seed = std::prev(want.end());
  delta[seed->first] = seed->second;
  {
    GroupElement cur = seed->second;
    for (std::size_t m = seed->first; m > 0; --m) {
      cur = pred_g(t_, cur);
      delta[m - 1] = cur;
    }
    for (const auto& [m, d] : want)
      if (!(delta[m] == d)) return {};
  }

  std::vector<GroupElement> cs;
  std::size_t top = seed->first;
  for (Elem e : other_ext) {
    cs.push_back(peer->decode(e));
    top = std::max(top, cs.back().level);
  }
  std::set<Elem> taken(base.begin(), base.end());
  std::vector<Tuple> out;
  std::set<Tuple> seen;
  auto emit = [&](const std::map<std::size_t, GroupElement>& chain) {
    Tuple u;
    std::set<Elem> dup;
    for (const auto& c : cs) {
      Elem e = encode(sym_diff(c, chain.at(c.level)));
      if (taken.count(e) || !dup.insert(e).second) return;
      u.push_back(e);
    }
    if (u.size() == len && seen.insert(u).second) out.push_back(std::move(u));
  };
  // Extend the difference chain upward through rank-aware lifts, branching a
  // little; each complete chain translates the whole challenge.
  auto climb = [&](auto&& self, std::map<std::size_t, GroupElement>& chain,
                   std::size_t at) -> void {
    if (out.size() >= ctx.width) return;
    if (at == top) {
      emit(chain);
      return;
    }
    for (const auto& next : lift_chain_steps(chain.at(at))) {
      chain[at + 1] = next;
      self(self, chain, at + 1);
      chain.erase(at + 1);
    }
  };
  climb(climb, delta, seed->first);
  return out;
}

FiniteStructure GroupTreeStructure::materialize(std::size_t max_elems) const {
  std::vector<GroupElement> els;
  for (std::size_t n = 0; n <= depth_; ++n) {
    for (Elem e : level_universe(n)) els.push_back(decode(e));
    if (els.size() > max_elems)
      throw ResourceError("materialize: universe exceeds the cap");
  }
  std::map<GroupElement, std::size_t> pos;
  for (std::size_t i = 0; i < els.size(); ++i) pos[els[i]] = i;
  FiniteStructure fs(sig(), els.size());
  for (const auto& a : els) {
    std::string label = to_string(a);
    for (const auto& b : els) {
      GroupElement c = f_apply(t_, a, b);
      fs.add_fam("f", label, {pos[b], pos.at(c)});
    }
  }
  return fs;
}

GroupTreeStructure build_A(Tree t, std::size_t depth, std::size_t width,
                           std::uint64_t guard_elems) {
  return GroupTreeStructure(std::move(t), depth, width, guard_elems);
}

// --- rigidity -------------------------------------------------------------------

RigidityReport check_rigidity(const GroupTreeStructure& A, std::size_t max_elems) {
  FiniteStructure fs = A.materialize(max_elems);
  std::vector<GroupElement> els;
  std::vector<std::size_t> id_pos;
  for (std::size_t n = 0; n <= A.depth(); ++n) {
    id_pos.push_back(els.size());
    for (Elem e : A.level_universe(n)) els.push_back(A.decode(e));
  }
  const Tree& t = A.tree();

  RigidityReport rep;
  auto autos = automorphisms(fs);
  rep.automorphisms = autos.size();

  // Coherent identity-image chains: one element per level, each projecting
  // onto the one below.
  auto count_chains = [&](auto&& self, const GroupElement& u) -> std::size_t {
    if (u.level == A.depth()) return 1;
    std::size_t c = 0;
    for (const auto& up : group_preimages(t, u)) c += self(self, up);
    return c;
  };
  for (Elem e : A.level_universe(0)) rep.coherent_chains += count_chains(count_chains, A.decode(e));

  rep.ids_determine = true;
  rep.translation_law = true;
  std::set<std::vector<Elem>> id_images;
  for (const auto& g : autos) {
    std::vector<Elem> ids;
    for (std::size_t n = 0; n <= A.depth(); ++n) ids.push_back(g[id_pos[n]]);
    if (!id_images.insert(ids).second) rep.ids_determine = false;
    // The image chain must cohere, and the whole map must be the translation
    // it induces.
    bool translation = true;
    for (std::size_t n = 0; n + 1 <= A.depth() && translation; ++n)
      translation = pred_g(t, els[g[id_pos[n + 1]]]) == els[g[id_pos[n]]];
    for (std::size_t i = 0; i < els.size() && translation; ++i)
      translation = els[g[i]] == sym_diff(els[i], els[g[id_pos[els[i].level]]]);
    if (!translation) rep.translation_law = false;
  }
  // Images obey g(b) = f[b ^ a](g(a)) across every same-level pair.
  for (const auto& g : autos)
    for (std::size_t i = 0; i < els.size() && rep.translation_law; ++i)
      for (std::size_t j = 0; j < els.size(); ++j) {
        if (els[i].level != els[j].level) continue;
        if (!(els[g[j]] == f_apply(t, sym_diff(els[j], els[i]), els[g[i]]))) {
          rep.translation_law = false;
          break;
        }
      }
  return rep;
}

// --- rank transfer into games ---------------------------------------------------

Lemma36Report lemma36_check(const GroupTreeStructure& A, std::uint64_t beta,
                            const BFConfig& cfg_in) {
  if (beta == 0 || beta > 2)
    throw InputError("lemma36_check: the level must be 1 or 2");
  BFConfig cfg = cfg_in;
  cfg.memoize = false;  // tuples never repeat across lift chains
  if (cfg.max_len == 0) cfg.max_len = 3;

  const Tree& t = A.tree();
  std::size_t depth = A.depth();
  RankValue threshold = RankValue::fin(omega_times(Ordinal::nat(beta)));
  RankValue alpha = RankValue::fin(Ordinal::nat(beta));

  // Longest lift tower above x inside the truncation.
  std::map<GroupElement, std::size_t> memo;
  auto lift_len = [&](auto&& self, const GroupElement& x) -> std::size_t {
    if (x.level >= depth) return 0;
    auto it = memo.find(x);
    if (it != memo.end()) return it->second;
    std::size_t best = 0;
    for (const auto& up : group_preimages(t, x))
      best = std::max(best, 1 + self(self, up));
    memo[x] = best;
    return best;
  };

  std::vector<GroupElement> samples;
  for (std::size_t n = 0; n <= std::min<std::size_t>(depth, 2); ++n)
    samples.push_back(group_id(n));
  for (std::size_t n = 1; n <= depth; ++n) {
    std::set<RankValue> ranks_seen;
    std::vector<std::size_t> nodes = t.level_nodes(n);
    for (std::size_t m : nodes) {
      if (ranks_seen.size() >= 6) break;
      if (!ranks_seen.insert(tree_rank(t, m)).second) continue;
      samples.push_back(GroupElement{n, {m}});
    }
    if (nodes.size() >= 2)
      samples.push_back(GroupElement{n, {nodes[0], nodes[1]}});
  }

  Lemma36Report rep;
  for (const auto& a : samples) {
    if (rep.checked + rep.budget_errors >= 48) break;
    std::size_t n = a.level;
    RankValue r = group_rank(t, a);
    bool expected = rank_cmp(r, threshold) >= 0;
    std::size_t ll = lift_len(lift_len, a);
    std::size_t room = depth - n;
    if (expected) {
      // The responder must be able to out-climb every probe the game can pose.
      if (ll < std::min<std::size_t>(beta * cfg.max_len, room)) continue;
    } else if (!r.infinite && r.ord.is_finite()) {
      std::uint64_t v = finite_value(r.ord);
      if (cfg.max_len < v + 1 || room < v + 1) continue;
    } else {
      // Ordinal-infinite rank below the threshold (beta = 2): the probe must
      // out-climb the best lift, one level up.
      if (room < 1 || ll > std::min<std::size_t>(cfg.max_len, room - 1)) continue;
    }
    bool got;
    try {
      got = bf_equiv(A, {A.encode(a)}, A, {A.encode(group_id(n))}, alpha, cfg);
    } catch (const ResourceError&) {
      ++rep.budget_errors;
      continue;
    }
    ++rep.checked;
    if (got == expected) {
      ++rep.agreements;
    } else {
      rep.mismatches.push_back(to_string(a) + " rank " + to_string(r) +
                               (expected ? " expected equivalent" : " expected separated"));
    }
  }
  return rep;
}

}  // namespace scottlab
