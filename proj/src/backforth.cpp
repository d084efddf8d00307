#include "scottlab/backforth.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace scottlab {

namespace {

bool sig_compatible(const Signature& a, const Signature& b) {
  if (a.relations != b.relations) return false;
  if (a.families.size() != b.families.size()) return false;
  for (std::size_t i = 0; i < a.families.size(); ++i)
    if (a.families[i].name != b.families[i].name ||
        a.families[i].arity != b.families[i].arity)
      return false;
  return true;
}

std::size_t auto_max_len(const Structure& s1, const Structure& s2) {
  if (s1.finite() && s2.finite()) return std::max(s1.size(), s2.size());
  return 2;
}

// --- the graded game ---------------------------------------------------------

struct BFEngine {
  const Structure& a;
  const Structure& b;
  BFConfig cfg;
  std::size_t lens;
  std::uint64_t nodes = 0;
  std::map<std::tuple<Tuple, Tuple, std::string>, bool> memo;

  // Census path state: per-side atom-code ids translated into one shared id
  // space, plus interners for level-1 and level-2 extension labels.
  struct SideCodes {
    const BinaryCodes* bc = nullptr;
    std::vector<std::int32_t> un_tr, pr_tr;
  };
  SideCodes ca, cb;
  int census_state = 0;  // 0 untried, 1 ready, -1 unavailable
  std::map<std::vector<std::int64_t>, std::int32_t> shared_keys;
  std::map<std::string, std::int64_t> shared_index;
  std::map<std::vector<std::int32_t>, std::int32_t> intern1, intern2;
  std::vector<std::int32_t> scratch;

  BFEngine(const Structure& a_, const Structure& b_, const BFConfig& c)
      : a(a_), b(b_), cfg(c) {
    lens = cfg.single ? 1 : (cfg.max_len ? cfg.max_len : auto_max_len(a_, b_));
  }

  void tick() {
    if (++nodes > cfg.node_guard)
      throw ResourceError("equivalence game node guard tripped");
  }

  bool equiv(const Tuple& t1, const Tuple& t2, const RankValue& alpha) {
    tick();
    if (atomic_type(a, t1) != atomic_type(b, t2)) return false;
    if (!alpha.infinite && alpha.ord.is_zero()) return true;
    std::string akey = to_string(alpha);
    if (cfg.memoize)
      if (auto it = memo.find({t1, t2, akey}); it != memo.end()) return it->second;
    bool result;
    if (!alpha.infinite && alpha.ord.is_limit()) {
      result = true;
      for (const auto& beta :
           cofinal_below(alpha.ord, std::min<std::size_t>(cfg.width, 8)))
        if (!equiv(t1, t2, RankValue::fin(beta))) { result = false; break; }
    } else if (!alpha.infinite &&
               (alpha.ord == Ordinal::nat(1) || alpha.ord == Ordinal::nat(2)) &&
               census_ready()) {
      // Atomic types already agree, so levels 1 and 2 reduce to comparing
      // extension-label censuses.
      unsigned level = alpha.ord == Ordinal::nat(1) ? 1 : 2;
      result = level == 1 ? census1(ca, t1) == census1(cb, t2)
                          : census2(ca, t1) == census2(cb, t2);
    } else {
      // Successor level (infinite alpha never reaches the recursion; it is
      // resolved by stable partitions before an engine is built).
      RankValue beta = RankValue::fin(ord_pred(alpha.ord));
      result = equiv(t1, t2, beta) && forth(t1, t2, beta, true) &&
               forth(t1, t2, beta, false);
    }
    if (cfg.memoize) memo[{t1, t2, akey}] = result;
    return result;
  }

  // The census path answers single-element rounds by set comparison: at level
  // beta+1 a fresh challenge z is answerable iff the other side has a fresh w
  // whose extension label matches, so the round succeeds both ways iff the
  // label sets coincide. Labels are exact stand-ins for atomic types of the
  // extended tuples (level 1), resp. their level-1 classes (level 2), which
  // needs every predicate to be at most binary.
  bool census_ready() {
    if (census_state) return census_state > 0;
    census_state = -1;
    if (!cfg.fast_rounds || !cfg.single) return false;
    const auto* fa = dynamic_cast<const FiniteStructure*>(&a);
    const auto* fb = dynamic_cast<const FiniteStructure*>(&b);
    if (!fa || !fb) return false;
    const BinaryCodes& ba = fa->binary_codes();
    const BinaryCodes& bb = fb->binary_codes();
    if (!ba.valid || !bb.valid) return false;
    remap(ba, ca);
    remap(bb, cb);
    census_state = 1;
    return true;
  }

  // Rewrite one side's code keys into the shared id space. Family indices are
  // renumbered per structure, so keys are normalized through the index names
  // before interning.
  void remap(const BinaryCodes& src, SideCodes& dst) {
    dst.bc = &src;
    auto shared_of = [&](const std::vector<std::int64_t>& key) {
      std::vector<std::int64_t> k = key;
      for (auto& code : k) {
        std::int64_t pw = code >> 1;
        if (!(pw & (std::int64_t{1} << 62))) continue;
        const std::string& name = src.index_names[pw & 0xffffffff];
        auto [it, fresh] =
            shared_index.emplace(name, std::int64_t(shared_index.size()));
        pw = (pw & ~std::int64_t{0xffffffff}) | it->second;
        code = (pw << 1) | (code & 1);
      }
      std::sort(k.begin(), k.end());
      auto [it, fresh] =
          shared_keys.emplace(std::move(k), std::int32_t(shared_keys.size()));
      return it->second;
    };
    dst.un_tr.reserve(src.unary_keys.size());
    for (const auto& key : src.unary_keys) dst.un_tr.push_back(shared_of(key));
    dst.pr_tr.reserve(src.pair_keys.size());
    for (const auto& key : src.pair_keys) dst.pr_tr.push_back(shared_of(key));
  }

  std::int32_t intern(std::map<std::vector<std::int32_t>, std::int32_t>& m) {
    auto it = m.find(scratch);
    if (it == m.end()) it = m.emplace(scratch, std::int32_t(m.size())).first;
    return it->second;
  }

  // Label of the single-element extension (base, z): z's unary id plus its
  // ordered-pair ids against each base position.
  std::int32_t k1(const SideCodes& s, const Tuple& base, Elem z) {
    scratch.clear();
    scratch.push_back(s.un_tr[s.bc->unary[z]]);
    for (Elem e : base) scratch.push_back(s.pr_tr[s.bc->pair[e * s.bc->n + z]]);
    return intern(intern1);
  }

  std::vector<std::int32_t> census1(const SideCodes& s, const Tuple& base) {
    std::vector<std::int32_t> out;
    for (Elem z = 0; z < s.bc->n; ++z) {
      if (std::find(base.begin(), base.end(), z) != base.end()) continue;
      tick();
      out.push_back(k1(s, base, z));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Level-2 label of (base, z): its level-1 label plus the set of level-1
  // labels over the extended base.
  std::vector<std::int32_t> census2(const SideCodes& s, const Tuple& base) {
    std::vector<std::int32_t> out;
    for (Elem z = 0; z < s.bc->n; ++z) {
      if (std::find(base.begin(), base.end(), z) != base.end()) continue;
      tick();
      Tuple b2 = base;
      b2.push_back(z);
      std::vector<std::int32_t> inner;
      inner.reserve(s.bc->n);
      for (Elem t = 0; t < s.bc->n; ++t) {
        if (std::find(b2.begin(), b2.end(), t) != b2.end()) continue;
        inner.push_back(k1(s, b2, t));
      }
      std::sort(inner.begin(), inner.end());
      inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
      std::int32_t head = k1(s, base, z);
      scratch.clear();
      scratch.push_back(head);
      scratch.insert(scratch.end(), inner.begin(), inner.end());
      out.push_back(intern(intern2));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // One direction of a round: every challenge on `from` has an answer on `to`.
  bool forth(const Tuple& t1, const Tuple& t2, const RankValue& beta, bool a_side) {
    const Structure& from = a_side ? a : b;
    const Structure& to = a_side ? b : a;
    const Tuple& tf = a_side ? t1 : t2;
    const Tuple& tt = a_side ? t2 : t1;
    GameCtx ctx{beta, lens, cfg.width};
    for (std::size_t len = 1; len <= lens; ++len) {
      for (const auto& c : from.challenge_tuples(tf, len, ctx)) {
        Tuple ext1 = tf;
        ext1.insert(ext1.end(), c.begin(), c.end());
        bool answered = false;
        for (const auto& d : to.response_tuples(tt, len, ctx, from, tf, c)) {
          if (d.size() != c.size()) continue;
          Tuple ext2 = tt;
          ext2.insert(ext2.end(), d.begin(), d.end());
          bool ok = a_side ? equiv(ext1, ext2, beta) : equiv(ext2, ext1, beta);
          if (ok) { answered = true; break; }
        }
        if (!answered) return false;
      }
    }
    return true;
  }
};

// --- stable partitions (finite structures) ------------------------------------------

// All length-len tuples in lexicographic order.
std::vector<Tuple> all_tuples(std::size_t n, std::size_t len) {
  std::vector<Tuple> out{Tuple{}};
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<Tuple> next;
    next.reserve(out.size() * n);
    for (const auto& t : out)
      for (Elem e = 0; e < n; ++e) {
        Tuple u = t;
        u.push_back(e);
        next.push_back(std::move(u));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<std::size_t> normalize_ids(const std::vector<std::size_t>& raw) {
  std::vector<std::size_t> out(raw.size());
  std::map<std::size_t, std::size_t> seen;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, fresh] = seen.insert({raw[i], seen.size()});
    out[i] = it->second;
  }
  return out;
}

// Joint refinement over one or two structures: items are (side, tuple).
// Returns per-item class ids per level, stopping once stable.
struct JointTrace {
  std::vector<std::vector<std::size_t>> levels;
  std::size_t stable = 0;
};

JointTrace joint_refine(const std::vector<const Structure*>& sides,
                        const std::vector<std::pair<std::size_t, Tuple>>& items,
                        const BFConfig& cfg) {
  std::size_t lens = cfg.single ? 1 : cfg.max_len;
  if (!lens) {
    std::size_t m = 0;
    for (const auto* s : sides) m = std::max(m, s->size());
    lens = std::max<std::size_t>(m, 1);
  }
  // Fresh distinct extensions per item, grouped by length.
  std::vector<std::vector<std::vector<std::size_t>>> ext;  // [item][len-1] -> item ids
  std::map<std::pair<std::size_t, Tuple>, std::size_t> index;
  std::vector<std::pair<std::size_t, Tuple>> pool = items;
  for (std::size_t i = 0; i < pool.size(); ++i) index[pool[i]] = i;
  auto intern = [&](std::size_t side, const Tuple& t) {
    auto [it, fresh] = index.insert({{side, t}, pool.size()});
    if (fresh) pool.push_back({side, t});
    return it->second;
  };
  GameCtx ctx{RankValue::fin(0), lens, cfg.width};
  for (std::size_t i = 0; i < pool.size(); ++i) {
    ext.push_back({});
    auto& rows = ext.back();
    // pool may grow while rows are added; copy the key first.
    auto [side, t] = pool[i];
    for (std::size_t len = 1; len <= lens; ++len) {
      std::vector<std::size_t> row;
      for (const auto& c : sides[side]->challenge_tuples(t, len, ctx)) {
        Tuple u = t;
        u.insert(u.end(), c.begin(), c.end());
        row.push_back(intern(side, u));
      }
      rows.push_back(std::move(row));
    }
  }

  // Level 0: atomic types, compared across sides.
  std::vector<std::size_t> cur(pool.size());
  {
    std::map<AtomicType, std::size_t> classes;
    std::vector<std::size_t> raw(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      AtomicType at = atomic_type(*sides[pool[i].first], pool[i].second);
      auto [it, fresh] = classes.insert({std::move(at), classes.size()});
      raw[i] = it->second;
    }
    cur = normalize_ids(raw);
  }

  JointTrace trace;
  trace.levels.push_back(cur);
  for (;;) {
    // Signature: own class plus the set of extension classes per length.
    std::map<std::pair<std::size_t, std::vector<std::set<std::size_t>>>, std::size_t>
        classes;
    std::vector<std::size_t> raw(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      std::vector<std::set<std::size_t>> sig_sets;
      for (const auto& row : ext[i]) {
        std::set<std::size_t> ids;
        for (std::size_t j : row) ids.insert(cur[j]);
        sig_sets.push_back(std::move(ids));
      }
      auto [it, fresh] =
          classes.insert({{cur[i], std::move(sig_sets)}, classes.size()});
      raw[i] = it->second;
    }
    std::vector<std::size_t> next = normalize_ids(raw);
    if (next == cur) break;
    cur = std::move(next);
    trace.levels.push_back(cur);
  }
  // Trim rows to the original items; refinement only splits blocks, so the
  // first level that already equals the final partition is the stable one.
  for (auto& level : trace.levels) {
    std::vector<std::size_t> trimmed(level.begin(), level.begin() + items.size());
    level = normalize_ids(trimmed);
  }
  std::size_t stable = 0;
  while (trace.levels[stable] != trace.levels.back()) ++stable;
  trace.levels.resize(stable + 1);
  trace.stable = stable;
  return trace;
}

bool joint_stable_equiv(const Structure& s1, const Tuple& t1, const Structure& s2,
                        const Tuple& t2, const BFConfig& cfg) {
  std::vector<const Structure*> sides{&s1, &s2};
  std::vector<std::pair<std::size_t, Tuple>> items{{0, t1}, {1, t2}};
  JointTrace trace = joint_refine(sides, items, cfg);
  return trace.levels.back()[0] == trace.levels.back()[1];
}

}  // namespace

bool bf_equiv(const Structure& s1, const Tuple& t1, const Structure& s2,
              const Tuple& t2, const RankValue& alpha, const BFConfig& cfg) {
  if (t1.size() != t2.size()) throw InputError("bf_equiv: tuple lengths differ");
  if (!sig_compatible(s1.sig(), s2.sig()))
    throw InputError("bf_equiv: signatures are incompatible");
  bool finite = s1.finite() && s2.finite();
  bool transfinite = alpha.infinite || !alpha.ord.is_finite();
  if (finite && transfinite) {
    // Finite structures stabilize at a finite level, so any level >= w (and
    // the limit of all levels) is the stable partition.
    return joint_stable_equiv(s1, t1, s2, t2, cfg);
  }
  if (alpha.infinite)
    throw InputError("bf_equiv: unbounded level needs finite structures");
  if (!finite && rank_cmp(alpha, cfg.depth_bound) > 0)
    throw ResourceError("bf_equiv: level exceeds the depth bound");
  BFEngine engine(s1, s2, cfg);
  return engine.equiv(t1, t2, alpha);
}

bool bf_limit_equiv(const FiniteStructure& s, const Tuple& t1, const Tuple& t2) {
  if (t1.size() != t2.size()) return false;
  for (const auto& g : automorphisms(s)) {
    bool match = true;
    for (std::size_t i = 0; i < t1.size() && match; ++i)
      match = g[t1[i]] == t2[i];
    if (match) return true;
  }
  return false;
}

// --- partition traces -------------------------------------------------------------

std::size_t PartitionTrace::tuple_index(const Tuple& t) const {
  auto it = std::lower_bound(tuples.begin(), tuples.end(), t);
  if (it == tuples.end() || *it != t)
    throw InputError("tuple not in the partition trace");
  return static_cast<std::size_t>(it - tuples.begin());
}

RankValue PartitionTrace::settle_level(const Tuple& t) const {
  std::size_t idx = tuple_index(t);
  const auto& last = class_ids.back();
  for (std::size_t a = 0; a < class_ids.size(); ++a) {
    bool same = true;
    for (std::size_t j = 0; j < tuples.size() && same; ++j) {
      bool now = class_ids[a][j] == class_ids[a][idx];
      bool limit = last[j] == last[idx];
      same = now == limit;
    }
    if (same) return RankValue::fin(Ordinal::nat(a));
  }
  return RankValue::fin(Ordinal::nat(class_ids.size() - 1));
}

PartitionTrace bf_stable_partition(const FiniteStructure& s, std::size_t len,
                                   const BFConfig& cfg) {
  PartitionTrace out;
  out.tuples = all_tuples(s.size(), len);
  std::vector<const Structure*> sides{&s};
  std::vector<std::pair<std::size_t, Tuple>> items;
  items.reserve(out.tuples.size());
  for (const auto& t : out.tuples) items.push_back({0, t});
  JointTrace trace = joint_refine(sides, items, cfg);
  out.class_ids = std::move(trace.levels);
  out.stable_level = trace.stable;
  return out;
}

RankValue scott_rank_tuple(const FiniteStructure& s, const Tuple& t,
                           const BFConfig& cfg) {
  for (Elem e : t)
    if (e >= s.size()) throw InputError("tuple outside the universe");
  PartitionTrace trace = bf_stable_partition(s, t.size(), cfg);
  return trace.settle_level(t);
}

RankValue scott_rank_structure(const FiniteStructure& s, const BFConfig& cfg) {
  Ordinal best;
  for (std::size_t len = 1; len <= s.size(); ++len) {
    PartitionTrace trace = bf_stable_partition(s, len, cfg);
    for (const auto& t : trace.tuples) {
      RankValue r = trace.settle_level(t);
      if (ord_cmp(best, r.ord) < 0) best = r.ord;
    }
  }
  return RankValue::fin(ord_succ(best));
}

}  // namespace scottlab
