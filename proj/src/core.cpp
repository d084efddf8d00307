#include "scottlab/core.hpp"

#include <algorithm>
#include <sstream>

namespace scottlab {

// --- Signature -----------------------------------------------------------------

std::size_t Signature::rel_index(const std::string& name) const {
  for (std::size_t i = 0; i < relations.size(); ++i)
    if (relations[i].name == name) return i;
  throw InputError("unknown relation: " + name);
}

std::size_t Signature::fam_index(const std::string& name) const {
  for (std::size_t i = 0; i < families.size(); ++i)
    if (families[i].name == name) return i;
  throw InputError("unknown family: " + name);
}

// --- Structure defaults -----------------------------------------------------------

std::size_t Structure::size() const {
  throw InputError("size() on an infinite structure");
}

std::vector<Elem> Structure::elements() const {
  throw InputError("elements() on an infinite structure");
}

namespace {

// Fresh pairwise-distinct extensions of `base` drawn from `pool`.
void distinct_extensions(const std::vector<Elem>& pool, const Tuple& base,
                         std::size_t len, Tuple& cur, std::vector<Tuple>& out) {
  if (cur.size() == len) {
    out.push_back(cur);
    return;
  }
  for (Elem e : pool) {
    if (std::find(base.begin(), base.end(), e) != base.end()) continue;
    if (std::find(cur.begin(), cur.end(), e) != cur.end()) continue;
    cur.push_back(e);
    distinct_extensions(pool, base, len, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Tuple> Structure::challenge_tuples(const Tuple& base, std::size_t len,
                                               const GameCtx&) const {
  if (!finite())
    throw InputError("infinite structure without a challenge hook");
  std::vector<Tuple> out;
  Tuple cur;
  distinct_extensions(elements(), base, len, cur, out);
  return out;
}

std::vector<Tuple> Structure::response_tuples(const Tuple& base, std::size_t len,
                                              const GameCtx& ctx, const Structure&,
                                              const Tuple&, const Tuple&) const {
  return challenge_tuples(base, len, ctx);
}

// --- FiniteStructure -----------------------------------------------------------------

FiniteStructure::FiniteStructure(Signature s, std::size_t n)
    : Structure(std::move(s)), n_(n) {}

void FiniteStructure::add_fact(const PredRef& p, const Tuple& args) {
  if ((p.family && p.sym >= sig().families.size()) ||
      (!p.family && p.sym >= sig().relations.size()))
    throw InputError("fact references an unknown symbol");
  std::size_t arity =
      p.family ? sig().families[p.sym].arity : sig().relations[p.sym].arity;
  if (args.size() != arity) throw InputError("fact arity mismatch");
  for (Elem e : args)
    if (e >= n_) throw InputError("fact argument outside the universe");
  facts_.insert({p, args});
  codes_.reset();
  elem_facts_.reset();
}

void FiniteStructure::add_rel(const std::string& name, const Tuple& args) {
  add_fact(PredRef::rel(sig().rel_index(name)), args);
}

void FiniteStructure::add_fam(const std::string& name, const std::string& index,
                              const Tuple& args) {
  add_fact(PredRef::fam(sig().fam_index(name), index), args);
}

std::vector<Elem> FiniteStructure::elements() const {
  std::vector<Elem> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = i;
  return out;
}

bool FiniteStructure::holds(const PredRef& p, const Tuple& args) const {
  return facts_.count({p, args}) > 0;
}

std::vector<PredRef> FiniteStructure::preds() const {
  std::set<PredRef> out;
  for (std::size_t i = 0; i < sig().relations.size(); ++i)
    out.insert(PredRef::rel(i));
  for (const auto& [p, args] : facts_)
    if (p.family) out.insert(p);
  return {out.begin(), out.end()};
}

std::vector<Atom> FiniteStructure::atoms_on(const Tuple& t) const {
  // A fact whose arguments all lie in t is reachable from any element it
  // mentions, so the per-element index (slot n_ collects nullary facts)
  // yields every candidate without scanning the whole fact set.
  if (!elem_facts_) {
    auto idx = std::make_shared<
        std::vector<std::vector<const std::pair<PredRef, Tuple>*>>>(n_ + 1);
    for (const auto& f : facts_) {
      if (f.second.empty()) {
        (*idx)[n_].push_back(&f);
        continue;
      }
      Elem last = n_;
      for (Elem e : f.second)
        if (e != last) (*idx)[e].push_back(&f), last = e;
    }
    elem_facts_ = std::move(idx);
  }
  std::vector<const std::pair<PredRef, Tuple>*> cand((*elem_facts_)[n_]);
  Tuple seen;
  for (Elem e : t) {
    if (std::find(seen.begin(), seen.end(), e) != seen.end()) continue;
    seen.push_back(e);
    const auto& lst = (*elem_facts_)[e];
    cand.insert(cand.end(), lst.begin(), lst.end());
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  // A fact contributes one atom per way of writing its arguments as tuple
  // positions. Family members never seen in facts cannot hold, so this is
  // complete.
  std::vector<Atom> out;
  for (const auto* fp : cand) {
    const auto& [p, args] = *fp;
    std::vector<std::vector<std::size_t>> pos(args.size());
    bool ok = true;
    for (std::size_t i = 0; i < args.size() && ok; ++i) {
      for (std::size_t j = 0; j < t.size(); ++j)
        if (t[j] == args[i]) pos[i].push_back(j);
      ok = !pos[i].empty();
    }
    if (!ok) continue;
    std::vector<std::size_t> pick(args.size(), 0);
    for (;;) {
      std::vector<std::size_t> a(args.size());
      for (std::size_t i = 0; i < args.size(); ++i) a[i] = pos[i][pick[i]];
      out.push_back({p, std::move(a)});
      std::size_t i = 0;
      while (i < pick.size() && ++pick[i] == pos[i].size()) pick[i++] = 0;
      if (i == pick.size()) break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const BinaryCodes& FiniteStructure::binary_codes() const {
  if (codes_) return *codes_;
  auto c = std::make_shared<BinaryCodes>();
  c->n = n_;
  c->valid = true;
  for (const auto& r : sig().relations) c->valid &= r.arity <= 2;
  for (const auto& f : sig().families) c->valid &= f.arity <= 2;
  if (!c->valid) {
    codes_ = std::move(c);
    return *codes_;
  }

  std::map<std::string, std::int64_t> index_id;
  auto index_of = [&](const std::string& s) {
    auto [it, fresh] = index_id.emplace(s, std::int64_t(c->index_names.size()));
    if (fresh) c->index_names.push_back(s);
    return it->second;
  };
  // Atom code: pred (families tagged and carrying their index id) shifted
  // once, low bit = reversed orientation for binary facts.
  auto pred_code = [&](const PredRef& p) {
    if (!p.family) return std::int64_t(p.sym) << 1;
    return ((std::int64_t{1} << 62) | (std::int64_t(p.sym) << 32) | index_of(p.index))
           << 1;
  };

  std::vector<std::vector<std::int64_t>> un(n_);
  std::vector<std::pair<std::uint64_t, std::int64_t>> ent;
  for (const auto& [p, args] : facts_) {
    std::int64_t code = pred_code(p);
    if (args.size() == 1 || (args.size() == 2 && args[0] == args[1])) {
      un[args[0]].push_back(code | std::int64_t(args.size() == 2));
    } else if (args.size() == 2) {
      ent.emplace_back(std::uint64_t(args[0]) * n_ + args[1], code);
      ent.emplace_back(std::uint64_t(args[1]) * n_ + args[0], code | 1);
    }
  }

  std::map<std::vector<std::int64_t>, std::int32_t> seen;
  auto intern = [&](std::vector<std::int64_t> key,
                    std::vector<std::vector<std::int64_t>>& keys) {
    std::sort(key.begin(), key.end());
    auto [it, fresh] = seen.emplace(std::move(key), std::int32_t(seen.size()));
    if (fresh) keys.push_back(it->first);
    return it->second;
  };
  c->unary.resize(n_);
  for (std::size_t e = 0; e < n_; ++e)
    c->unary[e] = intern(std::move(un[e]), c->unary_keys);

  seen.clear();
  std::int32_t blank = intern({}, c->pair_keys);
  c->pair.assign(n_ * n_, blank);
  for (std::size_t e = 0; e < n_; ++e) c->pair[e * n_ + e] = -1;
  std::sort(ent.begin(), ent.end());
  for (std::size_t i = 0; i < ent.size();) {
    std::size_t j = i;
    std::vector<std::int64_t> key;
    while (j < ent.size() && ent[j].first == ent[i].first) key.push_back(ent[j++].second);
    c->pair[ent[i].first] = intern(std::move(key), c->pair_keys);
    i = j;
  }
  codes_ = std::move(c);
  return *codes_;
}

// --- text form -------------------------------------------------------------------------

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::string FiniteStructure::dump() const {
  std::string out = "signature:";
  for (const auto& r : sig().relations)
    out += " " + r.name + "/" + std::to_string(r.arity);
  for (const auto& f : sig().families)
    out += " " + f.name + "[]/" + std::to_string(f.arity);
  out += "\nuniverse: " + std::to_string(n_) + "\n";
  for (const auto& [p, args] : facts_) {
    out += p.family ? sig().families[p.sym].name + "[" + p.index + "]"
                    : sig().relations[p.sym].name;
    for (Elem e : args) out += " " + std::to_string(e);
    out += "\n";
  }
  return out;
}

FiniteStructure FiniteStructure::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Signature sig;
  bool have_sig = false;
  std::optional<std::size_t> universe;
  std::vector<std::tuple<std::string, std::string, bool, Tuple>> pending;
  Elem max_id = 0;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "signature:") {
      have_sig = true;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        const std::string& t = toks[i];
        std::size_t slash = t.rfind('/');
        if (slash == std::string::npos)
          throw InputError("signature entry needs an arity: " + t);
        std::size_t arity = std::stoull(t.substr(slash + 1));
        std::string name = t.substr(0, slash);
        if (name.size() > 2 && name.ends_with("[]"))
          sig.families.push_back({name.substr(0, name.size() - 2), arity, ""});
        else
          sig.relations.push_back({name, arity});
      }
      continue;
    }
    if (toks[0] == "universe:") {
      if (toks.size() != 2) throw InputError("universe line needs one count");
      universe = std::stoull(toks[1]);
      continue;
    }
    // Fact line.
    std::string name = toks[0], index;
    bool family = false;
    if (auto lb = name.find('['); lb != std::string::npos) {
      if (name.back() != ']') throw InputError("bad family fact: " + toks[0]);
      family = true;
      index = name.substr(lb + 1, name.size() - lb - 2);
      name = name.substr(0, lb);
    }
    Tuple args;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      args.push_back(std::stoull(toks[i]));
      max_id = std::max(max_id, args.back());
    }
    pending.emplace_back(name, index, family, std::move(args));
  }
  if (!have_sig) throw InputError("missing signature: header");
  FiniteStructure s(sig, universe.value_or(pending.empty() ? 0 : max_id + 1));
  for (auto& [name, index, family, args] : pending) {
    if (family)
      s.add_fam(name, index, args);
    else
      s.add_rel(name, args);
  }
  return s;
}

// --- atomic comparison --------------------------------------------------------------

AtomicType atomic_type(const Structure& s, const Tuple& t) {
  AtomicType out;
  out.eq.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::size_t j = 0;
    while (t[j] != t[i]) ++j;
    out.eq[i] = j;
  }
  out.atoms = s.atoms_on(t);
  std::sort(out.atoms.begin(), out.atoms.end());
  out.atoms.erase(std::unique(out.atoms.begin(), out.atoms.end()), out.atoms.end());
  return out;
}

bool is_partial_iso(const Structure& s1, const Tuple& t1, const Structure& s2,
                    const Tuple& t2) {
  if (t1.size() != t2.size()) throw InputError("is_partial_iso: length mismatch");
  return atomic_type(s1, t1) == atomic_type(s2, t2);
}

// --- automorphisms -------------------------------------------------------------------

namespace {

struct AutoSearch {
  const FiniteStructure& s;
  std::uint64_t guard;
  std::uint64_t nodes = 0;
  std::size_t n;
  std::vector<Elem> image;
  std::vector<bool> used;
  std::vector<std::vector<Elem>> found;

  AutoSearch(const FiniteStructure& s_, std::uint64_t g)
      : s(s_), guard(g), n(s_.size()), image(n), used(n, false) {}

  // The fresh assignment k -> image[k] must preserve and reflect every fact
  // whose arguments lie within {0..k}.
  bool consistent(std::size_t k) const {
    for (const auto& [p, args] : s.facts()) {
      bool touches = false, inside = true;
      bool touches_img = false, inside_img = true;
      for (Elem e : args) {
        if (e == k) touches = true;
        if (e > k) inside = false;
        if (e == image[k]) touches_img = true;
        if (!used[e] && e != image[k]) inside_img = false;
      }
      if (inside && touches) {
        Tuple mapped(args.size());
        for (std::size_t i = 0; i < args.size(); ++i) mapped[i] = image[args[i]];
        if (!s.holds(p, mapped)) return false;
      }
      if (inside_img && touches_img) {
        // Pull the fact back through the partial inverse.
        Tuple pre(args.size());
        for (std::size_t i = 0; i < args.size(); ++i) {
          std::size_t j = 0;
          while (j <= k && image[j] != args[i]) ++j;
          pre[i] = j;
        }
        if (!s.holds(p, pre)) return false;
      }
    }
    return true;
  }

  void run(std::size_t k) {
    if (++nodes > guard) throw ResourceError("automorphism search guard tripped");
    if (k == n) {
      found.push_back(image);
      return;
    }
    for (Elem m = 0; m < n; ++m) {
      if (used[m]) continue;
      image[k] = m;
      used[m] = true;
      if (consistent(k)) run(k + 1);
      used[m] = false;
    }
  }
};

}  // namespace

std::vector<std::vector<Elem>> automorphisms(const FiniteStructure& s,
                                             std::uint64_t node_guard) {
  AutoSearch search(s, node_guard);
  if (s.size() == 0) return {{}};
  search.run(0);
  return search.found;
}

std::vector<std::vector<Tuple>> automorphism_orbits(const FiniteStructure& s,
                                                    std::size_t len,
                                                    std::uint64_t node_guard) {
  if (len > s.size() + 2) throw InputError("orbit length exceeds universe + 2");
  if (len == 0) return {{Tuple{}}};
  if (s.size() == 0) return {};
  auto autos = automorphisms(s, node_guard);
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < len; ++i) {
    count *= s.size();
    if (count * autos.size() > node_guard)
      throw ResourceError("orbit enumeration guard tripped");
  }
  std::map<Tuple, Tuple> rep;  // tuple -> least tuple in its orbit
  Tuple t(len, 0);
  auto next = [&]() {
    std::size_t i = 0;
    while (i < len && ++t[i] == s.size()) t[i++] = 0;
    return i < len;
  };
  do {
    Tuple best = t;
    for (const auto& a : autos) {
      Tuple img(len);
      for (std::size_t i = 0; i < len; ++i) img[i] = a[t[i]];
      if (img < best) best = img;
    }
    rep[t] = best;
  } while (next());
  std::map<Tuple, std::vector<Tuple>> blocks;
  for (const auto& [t2, r] : rep) blocks[r].push_back(t2);
  std::vector<std::vector<Tuple>> out;
  out.reserve(blocks.size());
  for (auto& [r, members] : blocks) out.push_back(std::move(members));
  return out;
}

}  // namespace scottlab
