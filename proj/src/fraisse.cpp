#include "scottlab/fraisse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "scottlab/common.hpp"

namespace scottlab {

namespace {

using PairKey = std::pair<std::size_t, std::size_t>;

PairKey pkey(std::size_t x, std::size_t y) {
  return x < y ? PairKey{x, y} : PairKey{y, x};
}

std::uint64_t splitmix(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

}  // namespace

// --- KStructure ---------------------------------------------------------------

std::uint64_t KStructure::color_of(std::size_t x, std::size_t y) const {
  if (x == y || x >= n || y >= n) throw InputError("color_of: bad pair");
  auto it = color.find(pkey(x, y));
  if (it == color.end()) throw InputError("color_of: pair not colored");
  return it->second;
}

void KStructure::set_color(std::size_t x, std::size_t y, std::uint64_t c) {
  if (x == y || x >= n || y >= n) throw InputError("set_color: bad pair");
  color[pkey(x, y)] = c;
}

std::vector<std::size_t> KStructure::class_ids() const {
  std::vector<std::size_t> ids;
  for (std::size_t cid : eclass)
    if (std::find(ids.begin(), ids.end(), cid) == ids.end()) ids.push_back(cid);
  return ids;
}

std::vector<std::size_t> KStructure::class_members(std::size_t cid) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < eclass.size(); ++i)
    if (eclass[i] == cid) out.push_back(i);
  return out;
}

std::uint64_t KStructure::fresh_color() const {
  std::uint64_t top = 0;
  bool any = false;
  for (const auto& [k, c] : color) {
    (void)k;
    if (!any || c > top) top = c, any = true;
  }
  return any ? top + 1 : 0;
}

bool in_K(const KStructure& s) {
  if (s.eclass.size() != s.n) return false;
  std::size_t pairs = s.n >= 2 ? s.n * (s.n - 1) / 2 : 0;
  if (s.color.size() != pairs) return false;
  for (const auto& [k, c] : s.color) {
    (void)c;
    if (k.first >= k.second || k.second >= s.n) return false;
  }
  // Monochromatic-triangle scan on a flat copy; map lookups would dominate.
  std::vector<std::uint64_t> col(s.n * s.n, 0);
  for (const auto& [k, c] : s.color)
    col[k.first * s.n + k.second] = col[k.second * s.n + k.first] = c;
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t j = i + 1; j < s.n; ++j) {
      std::uint64_t cij = col[i * s.n + j];
      const std::uint64_t* ri = col.data() + i * s.n;
      const std::uint64_t* rj = col.data() + j * s.n;
      for (std::size_t k = j + 1; k < s.n; ++k)
        if (cij == rj[k] && cij == ri[k]) return false;
    }
  return true;
}

std::string to_string(const KStructure& s) {
  std::ostringstream out;
  for (std::size_t cid : s.class_ids()) {
    out << "class " << cid << ":";
    for (std::size_t x : s.class_members(cid)) out << " " << x;
    out << "\n";
  }
  for (const auto& [k, c] : s.color)
    out << "color " << c << ": " << k.first << " " << k.second << "\n";
  return out.str();
}

KStructure parse_kstructure(const std::string& text) {
  KStructure s;
  std::map<std::size_t, std::size_t> cls_of;  // element -> class id
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head == "class") {
      std::size_t cid = 0;
      char colon = 0;
      if (!(ls >> cid >> colon) || colon != ':')
        throw InputError("parse_kstructure: malformed class line");
      std::size_t x = 0;
      while (ls >> x) {
        if (cls_of.count(x))
          throw InputError("parse_kstructure: element listed twice");
        cls_of[x] = cid;
      }
    } else if (head == "color") {
      std::uint64_t c = 0;
      char colon = 0;
      std::size_t x = 0, y = 0;
      if (!(ls >> c >> colon >> x >> y) || colon != ':' || x == y)
        throw InputError("parse_kstructure: malformed color line");
      if (s.color.count(pkey(x, y)))
        throw InputError("parse_kstructure: pair colored twice");
      s.color[pkey(x, y)] = c;
    } else {
      throw InputError("parse_kstructure: unknown line " + head);
    }
  }
  s.n = cls_of.size();
  s.eclass.resize(s.n);
  for (const auto& [x, cid] : cls_of) {
    if (x >= s.n) throw InputError("parse_kstructure: universe not 0..n-1");
    s.eclass[x] = cid;
  }
  for (const auto& [k, c] : s.color) {
    (void)c;
    if (k.second >= s.n)
      throw InputError("parse_kstructure: color over unknown element");
  }
  return s;
}

bool is_embedding(const KStructure& a, const KStructure& b,
                  const std::vector<std::size_t>& emb) {
  if (emb.size() != a.n) return false;
  for (std::size_t x : emb)
    if (x >= b.n) return false;
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = i + 1; j < a.n; ++j) {
      if (emb[i] == emb[j]) return false;
      if ((a.eclass[i] == a.eclass[j]) != (b.eclass[emb[i]] == b.eclass[emb[j]]))
        return false;
      if (a.color_of(i, j) != b.color_of(emb[i], emb[j])) return false;
    }
  return true;
}

// --- amalgamation -------------------------------------------------------------

Amalgam amalgamate(const KStructure& a, const KStructure& b,
                   const KStructure& c, const std::vector<std::size_t>& emb_ab,
                   const std::vector<std::size_t>& emb_ac) {
  if (!in_K(a) || !in_K(b) || !in_K(c))
    throw InputError("amalgamate: parts must lie in the class");
  if (!is_embedding(a, b, emb_ab) || !is_embedding(a, c, emb_ac))
    throw InputError("amalgamate: maps are not embeddings");

  Amalgam out;
  // C elements identified through A keep their B image; others are appended.
  std::vector<std::size_t> a_of_c(c.n, kNoSlot);
  for (std::size_t i = 0; i < a.n; ++i) a_of_c[emb_ac[i]] = i;
  out.emb_b.resize(b.n);
  for (std::size_t x = 0; x < b.n; ++x) out.emb_b[x] = x;
  out.emb_c.resize(c.n);
  std::size_t next = b.n;
  for (std::size_t y = 0; y < c.n; ++y)
    out.emb_c[y] = a_of_c[y] != kNoSlot ? emb_ab[a_of_c[y]] : next++;
  out.d.n = next;

  // Classes join only when forced through A: union-find over both class sets.
  std::vector<std::size_t> uf(b.n + c.n);
  for (std::size_t i = 0; i < uf.size(); ++i) uf[i] = i;
  auto root = [&](std::size_t x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  auto join = [&](std::size_t x, std::size_t y) { uf[root(x)] = root(y); };
  for (std::size_t x = 0; x < b.n; ++x)
    for (std::size_t y = x + 1; y < b.n; ++y)
      if (b.eclass[x] == b.eclass[y]) join(x, y);
  for (std::size_t x = 0; x < c.n; ++x)
    for (std::size_t y = x + 1; y < c.n; ++y)
      if (c.eclass[x] == c.eclass[y]) join(b.n + x, b.n + y);
  for (std::size_t i = 0; i < a.n; ++i) join(emb_ab[i], b.n + emb_ac[i]);

  out.d.eclass.assign(out.d.n, 0);
  std::map<std::size_t, std::size_t> cls_of_root;
  auto class_for = [&](std::size_t slot) {
    std::size_t r = root(slot);
    auto it = cls_of_root.find(r);
    if (it == cls_of_root.end())
      it = cls_of_root.emplace(r, cls_of_root.size()).first;
    return it->second;
  };
  for (std::size_t x = 0; x < b.n; ++x) out.d.eclass[x] = class_for(x);
  for (std::size_t y = 0; y < c.n; ++y)
    if (a_of_c[y] == kNoSlot) out.d.eclass[out.emb_c[y]] = class_for(b.n + y);

  for (std::size_t x = 0; x < b.n; ++x)
    for (std::size_t y = x + 1; y < b.n; ++y)
      out.d.set_color(x, y, b.color_of(x, y));
  for (std::size_t x = 0; x < c.n; ++x)
    for (std::size_t y = x + 1; y < c.n; ++y)
      out.d.set_color(out.emb_c[x], out.emb_c[y], c.color_of(x, y));

  // One fresh color per cross pair; a fresh color sits on a single edge, so
  // it cannot close a triangle.
  std::uint64_t base = out.d.fresh_color();
  std::uint64_t idx = 0;
  for (std::size_t x = 0; x < b.n; ++x) {
    if (std::find(emb_ab.begin(), emb_ab.end(), x) != emb_ab.end()) continue;
    for (std::size_t y = 0; y < c.n; ++y) {
      if (a_of_c[y] != kNoSlot) continue;
      out.d.set_color(x, out.emb_c[y], base + idx++);
    }
  }
  return out;
}

// --- extension shapes ----------------------------------------------------------

namespace {

// One-point extension over the tuple A: a class slot (index into A, or none
// for a class disjoint from A's) and one color slot per A position — either a
// literal color from A's own pairs or a fresh group id.
struct ColorSlot {
  bool fresh = false;
  std::uint64_t value = 0;  // literal color, or group id when fresh
  bool operator==(const ColorSlot&) const = default;
};

struct Shape {
  std::size_t class_slot = kNoSlot;
  std::vector<ColorSlot> colors;
};

std::vector<std::uint64_t> palette_of(const KStructure& m,
                                      const std::vector<std::size_t>& a) {
  std::set<std::uint64_t> p;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      p.insert(m.color_of(a[i], a[j]));
  return {p.begin(), p.end()};
}

// Class slots: one per distinct class of A (first position), plus "none".
std::vector<std::size_t> class_slots(const KStructure& m,
                                     const std::vector<std::size_t>& a) {
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < a.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j)
      if (m.eclass[a[j]] == m.eclass[a[i]]) seen = true;
    if (!seen) slots.push_back(i);
  }
  slots.push_back(kNoSlot);
  return slots;
}

// All shapes over A whose extended structure stays triangle-free. Fresh
// groups are normalized to first-occurrence order; a monochromatic triangle
// can only arise from two equal literal slots matching the pair's own color.
std::vector<Shape> shapes_over(const KStructure& m,
                               const std::vector<std::size_t>& a) {
  std::vector<std::uint64_t> pal = palette_of(m, a);
  std::vector<Shape> out;
  std::vector<ColorSlot> cur(a.size());
  auto rec = [&](auto&& self, std::size_t pos, std::uint64_t groups) -> void {
    if (pos == a.size()) {
      for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
          if (!cur[i].fresh && !cur[j].fresh && cur[i].value == cur[j].value &&
              cur[i].value == m.color_of(a[i], a[j]))
            return;
      for (std::size_t slot : class_slots(m, a))
        out.push_back({slot, cur});
      return;
    }
    for (std::uint64_t c : pal) {
      cur[pos] = {false, c};
      self(self, pos + 1, groups);
    }
    for (std::uint64_t g = 0; g <= groups; ++g) {
      cur[pos] = {true, g};
      self(self, pos + 1, std::max(groups, g + 1));
    }
  };
  rec(rec, 0, 0);
  return out;
}

bool matches_shape(const KStructure& m, const std::vector<std::size_t>& a,
                   const Shape& sh, std::size_t z,
                   const std::vector<std::uint64_t>& pal) {
  if (std::find(a.begin(), a.end(), z) != a.end()) return false;
  if (sh.class_slot == kNoSlot) {
    for (std::size_t x : a)
      if (m.eclass[x] == m.eclass[z]) return false;
  } else if (m.eclass[z] != m.eclass[a[sh.class_slot]]) {
    return false;
  }
  std::map<std::uint64_t, std::uint64_t> group_val;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::uint64_t c = m.color_of(z, a[i]);
    if (!sh.colors[i].fresh) {
      if (c != sh.colors[i].value) return false;
      continue;
    }
    // Fresh values avoid A's palette, agree inside a group, differ across.
    if (std::binary_search(pal.begin(), pal.end(), c)) return false;
    auto [it, added] = group_val.emplace(sh.colors[i].value, c);
    if (!added && it->second != c) return false;
  }
  std::set<std::uint64_t> vals;
  for (const auto& [g, v] : group_val) {
    (void)g;
    if (!vals.insert(v).second) return false;
  }
  return true;
}

std::size_t realize_shape(const KStructure& m, const std::vector<std::size_t>& a,
                          const Shape& sh) {
  std::vector<std::uint64_t> pal = palette_of(m, a);
  for (std::size_t z = 0; z < m.n; ++z)
    if (matches_shape(m, a, sh, z, pal)) return z;
  return kNoSlot;
}

std::string describe_shape(const std::vector<std::size_t>& a, const Shape& sh) {
  std::ostringstream out;
  out << "over {";
  for (std::size_t i = 0; i < a.size(); ++i) out << (i ? " " : "") << a[i];
  out << "} class ";
  if (sh.class_slot == kNoSlot)
    out << "new";
  else
    out << "of " << a[sh.class_slot];
  out << " colors";
  for (const auto& cs : sh.colors)
    out << " " << (cs.fresh ? "F" : "") << cs.value;
  return out.str();
}

// Ascending subsets of {0..n-1} with at most max_size entries, sorted by size.
void for_each_subset(std::size_t n, std::size_t max_size,
                     const std::function<bool(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t from, std::size_t want) -> bool {
    if (cur.size() == want) return f(cur);
    for (std::size_t x = from; x < n; ++x) {
      cur.push_back(x);
      if (!self(self, x + 1, want)) return false;
      cur.pop_back();
    }
    return true;
  };
  for (std::size_t want = 0; want <= max_size; ++want)
    if (!rec(rec, 0, want)) return;
}

// Least color for the edge (z, y) closing no monochromatic triangle against
// the edges already present.
bool color_safe(const KStructure& m, std::size_t z, std::size_t y,
                std::uint64_t c) {
  for (std::size_t t = 0; t < m.n; ++t) {
    if (t == z || t == y) continue;
    auto zt = m.color.find(pkey(z, t));
    auto yt = m.color.find(pkey(y, t));
    if (zt != m.color.end() && yt != m.color.end() && zt->second == c &&
        yt->second == c)
      return false;
  }
  return true;
}

std::uint64_t least_safe_color(const KStructure& m, std::size_t z, std::size_t y,
                               std::uint64_t start) {
  for (std::uint64_t c = start;; ++c)
    if (color_safe(m, z, y, c)) return c;
}

std::size_t fresh_class_id(const KStructure& m) {
  std::size_t top = 0;
  for (std::size_t cid : m.eclass) top = std::max(top, cid + 1);
  return top;
}

// --- flat closure engine ---------------------------------------------------------

// Closure demands are monotone: a witness, once present, stays a witness.
// The builder therefore works on a flat color matrix with per-pair bitmasks
// of realized shapes and scan watermarks, so the whole run costs a single
// amortized pass over (pair, witness) space however many sweeps it takes.
// Colors and classes are minted densely from zero, making a color its own
// palette index; presence bitsets answer color-saturation demands in O(1)
// and per-color adjacency lists keep triangle checks on the short side.
constexpr std::uint64_t kNoColor = ~std::uint64_t{0};

struct FlatView {
  std::size_t cap = 0;
  std::size_t n = 0;
  std::vector<std::size_t> cls;
  std::vector<std::uint64_t> col;  // cap-stride matrix, kNoColor off-edge

  std::uint64_t at(std::size_t i, std::size_t j) const {
    return col[i * cap + j];
  }
};

FlatView flat_of(const KStructure& m) {
  FlatView f;
  f.cap = f.n = m.n;
  f.cls = m.eclass;
  f.col.assign(m.n * m.n, kNoColor);
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = i + 1; j < m.n; ++j)
      f.col[i * f.cap + j] = f.col[j * f.cap + i] = m.color_of(i, j);
  return f;
}

struct FlatBuild : FlatView {
  static constexpr std::size_t kClassCap = 4;  // minted only while k < 3

  std::size_t k = 0;
  std::uint64_t colors = 0;
  std::vector<std::size_t> class_size;
  std::vector<std::vector<bool>> present;  // [v][color * kClassCap + class]
  std::vector<std::vector<std::vector<std::size_t>>> adj;  // [v][color]

  explicit FlatBuild(std::size_t bound) {
    cap = bound;
    col.assign(bound * bound, kNoColor);
  }

  std::size_t mint_class() {
    class_size.push_back(0);
    return k++;
  }

  std::uint64_t mint_color() {
    for (auto& p : present) p.resize((colors + 1) * kClassCap, false);
    for (auto& a : adj) a.emplace_back();
    return colors++;
  }

  std::size_t add_vertex(std::size_t cid) {
    cls.push_back(cid);
    class_size[cid]++;
    present.emplace_back(colors * kClassCap, false);
    adj.emplace_back(colors);
    return n++;
  }

  void set(std::size_t i, std::size_t j, std::uint64_t c) {
    col[i * cap + j] = col[j * cap + i] = c;
    present[i][c * kClassCap + cls[j]] = true;
    present[j][c * kClassCap + cls[i]] = true;
    adj[i][c].push_back(j);
    adj[j][c].push_back(i);
  }

  bool safe(std::size_t i, std::size_t j, std::uint64_t c) const {
    const auto& ai = adj[i][c];
    const auto& aj = adj[j][c];
    const auto& walk = ai.size() <= aj.size() ? ai : aj;
    std::size_t other = ai.size() <= aj.size() ? j : i;
    for (std::size_t w : walk)
      if (w != i && w != j && at(other, w) == c) return false;
    return true;
  }

  // Hashed palette walk; mints only when every color closes a triangle.
  std::uint64_t spread(std::size_t i, std::size_t j) {
    if (colors) {
      std::uint64_t h = (static_cast<std::uint64_t>(std::min(i, j)) << 32) |
                        static_cast<std::uint64_t>(std::max(i, j));
      h = splitmix(h);
      for (std::uint64_t t = 0; t < colors; ++t) {
        std::uint64_t c = (h + t) % colors;
        if (safe(i, j, c)) return c;
      }
    }
    return mint_color();
  }

  // Forced edges go in first; callers keep forced values off the supporting
  // pair's own color, so no triangle can close among them. The rest spreads.
  std::size_t add_point(
      std::initializer_list<std::pair<std::size_t, std::uint64_t>> forced,
      std::size_t cid) {
    std::size_t z = add_vertex(cid);
    for (const auto& [t, c] : forced) set(z, t, c);
    for (std::size_t t = 0; t < z; ++t)
      if (at(z, t) == kNoColor) set(z, t, spread(z, t));
    return z;
  }
};

std::uint64_t pick_color(FlatBuild& f, std::uint64_t h, std::uint64_t avoid,
                         std::uint64_t avoid2 = kNoColor) {
  for (std::uint64_t t = 0; t < f.colors; ++t) {
    std::uint64_t c = (h + t) % f.colors;
    if (c != avoid && c != avoid2) return c;
  }
  return f.mint_color();
}

// One-point shapes over a colored pair collapse to four color families
// (literal+fresh either way, one shared fresh group, two distinct groups)
// by three class slots. Bit = kind * 3 + slot, slot 1 void on equal classes.
enum PairKind { kLitFresh = 0, kFreshLit = 1, kFreshSame = 2, kFreshSplit = 3 };

constexpr std::uint16_t kPairFull = 0x0fff;
constexpr std::uint16_t kPairSameClassVoid = 0x0492;  // slot-1 bits

Shape pair_shape(int kind, int sigma, std::uint64_t c) {
  Shape sh;
  sh.class_slot = sigma == 2 ? kNoSlot : static_cast<std::size_t>(sigma);
  switch (kind) {
    case kLitFresh: sh.colors = {{false, c}, {true, 0}}; break;
    case kFreshLit: sh.colors = {{true, 0}, {false, c}}; break;
    case kFreshSame: sh.colors = {{true, 0}, {true, 0}}; break;
    default: sh.colors = {{true, 0}, {true, 1}}; break;
  }
  return sh;
}

// Scan witnesses for the pair (x, y) starting at `from`, folding each into
// the realized-shape mask. Stops early once every family is witnessed; the
// return value is where a later scan may resume.
std::size_t pair_scan(const FlatView& f, std::size_t x, std::size_t y,
                      std::size_t from, std::uint16_t& have) {
  std::uint64_t c = f.at(x, y);
  std::size_t z = from;
  for (; z < f.n && have != kPairFull; ++z) {
    if (z == x || z == y) continue;
    std::uint64_t cx = f.at(z, x);
    std::uint64_t cy = f.at(z, y);
    int sig = f.cls[z] == f.cls[x] ? 0 : f.cls[z] == f.cls[y] ? 1 : 2;
    int kind = cx == c   ? (cy == c ? -1 : kLitFresh)
               : cy == c ? kFreshLit
                         : (cx == cy ? kFreshSame : kFreshSplit);
    if (kind >= 0) have |= static_cast<std::uint16_t>(1u << (kind * 3 + sig));
  }
  return z;
}

}  // namespace

std::optional<std::string> extension_audit(const KStructure& m,
                                           std::size_t ext_bound) {
  if (ext_bound < 1) throw InputError("extension_audit: bound must be >= 1");
  if (m.n == 0) return describe_shape({}, Shape{kNoSlot, {}});

  if (ext_bound >= 2) {
    // Singleton tier: every point needs a same-class partner and a witness
    // outside its class.
    std::map<std::size_t, std::size_t> size_of;
    for (std::size_t cid : m.eclass) size_of[cid]++;
    for (std::size_t x = 0; x < m.n; ++x) {
      if (size_of[m.eclass[x]] < 2)
        return describe_shape({x}, Shape{0, {{true, 0}}});
      if (size_of.size() < 2)
        return describe_shape({x}, Shape{kNoSlot, {{true, 0}}});
    }
  }

  if (ext_bound >= 3) {
    // Pair tier, exhaustive: one witness scan per pair covers all four shape
    // families at once.
    FlatView f = flat_of(m);
    for (std::size_t x = 0; x < m.n; ++x)
      for (std::size_t y = x + 1; y < m.n; ++y) {
        std::uint16_t have =
            f.cls[x] == f.cls[y] ? kPairSameClassVoid : std::uint16_t{0};
        pair_scan(f, x, y, 0, have);
        for (int bit = 0; bit < 12; ++bit)
          if (!(have & (1u << bit)))
            return describe_shape({x, y},
                                  pair_shape(bit / 3, bit % 3, f.at(x, y)));
      }
  }

  // Deeper tiers are sampled: seeded subset draws checked against the full
  // shape enumeration.
  std::uint64_t rng = 0x9e3779b97f4a7c15ull ^ m.n;
  rng = splitmix(rng);
  for (std::size_t s = 3; s + 1 <= ext_bound; ++s) {
    if (m.n <= s) break;
    for (int draw = 0; draw < 160; ++draw) {
      std::set<std::size_t> pick;
      while (pick.size() < s) {
        rng = splitmix(rng);
        pick.insert(rng % m.n);
      }
      std::vector<std::size_t> a(pick.begin(), pick.end());
      for (const Shape& sh : shapes_over(m, a))
        if (realize_shape(m, a, sh) == kNoSlot) return describe_shape(a, sh);
    }
  }
  return std::nullopt;
}

namespace {

// Every class keeps at least two members and a second class exists, so the
// singleton tier of the extension property holds.
bool base_pass(FlatBuild& f, std::size_t bound, bool& starved) {
  bool grown = false;
  for (std::size_t cid = 0; cid < f.k; ++cid)
    while (f.class_size[cid] < 2) {
      if (f.n >= bound) {
        starved = true;
        return grown;
      }
      f.add_point({}, cid);
      grown = true;
    }
  if (f.k < 2) {
    if (f.n >= bound) {
      starved = true;
      return grown;
    }
    f.add_point({}, f.mint_class());
    grown = true;
  }
  return grown;
}

// Pair tier: resume each pair's witness scan at its watermark, then realize
// whatever shape families are still missing by appending forced points.
// Points appended mid-pass extend the live loops, so one pass also covers
// pairs created by its own additions.
bool pair_pass(FlatBuild& f, std::vector<std::uint16_t>& mask,
               std::vector<std::uint32_t>& wm, std::size_t bound,
               bool& starved) {
  bool grown = false;
  for (std::size_t x = 0; x < f.n; ++x)
    for (std::size_t y = x + 1; y < f.n; ++y) {
      std::size_t p = x * f.cap + y;
      std::uint16_t have = mask[p];
      if (f.cls[x] == f.cls[y]) have |= kPairSameClassVoid;
      if (have == kPairFull) continue;
      wm[p] = static_cast<std::uint32_t>(pair_scan(f, x, y, wm[p], have));
      std::uint64_t c = f.at(x, y);
      for (int bit = 0; bit < 12 && have != kPairFull; ++bit) {
        if (have & (1u << bit)) continue;
        if (f.n >= bound) {
          mask[p] = have;
          starved = true;
          return grown;
        }
        int kind = bit / 3;
        int sig = bit % 3;
        std::size_t cid = sig == 0 ? f.cls[x] : f.cls[y];
        if (sig == 2) {
          cid = FlatBuild::kClassCap;
          for (std::size_t i = 0; i < f.k; ++i)
            if (i != f.cls[x] && i != f.cls[y]) {
              cid = i;
              break;
            }
          if (cid == FlatBuild::kClassCap) cid = f.mint_class();
        }
        std::uint64_t h = (static_cast<std::uint64_t>(x) << 32) ^
                          (y * 0x9e3779b9ull) ^ static_cast<std::uint64_t>(bit);
        h = splitmix(h);
        std::uint64_t v = pick_color(f, h, c);
        switch (kind) {
          case kLitFresh: f.add_point({{x, c}, {y, v}}, cid); break;
          case kFreshLit: f.add_point({{x, v}, {y, c}}, cid); break;
          case kFreshSame: f.add_point({{x, v}, {y, v}}, cid); break;
          default:
            f.add_point({{x, v}, {y, pick_color(f, h + 1, c, v)}}, cid);
        }
        have |= static_cast<std::uint16_t>(1u << bit);
        grown = true;
      }
      mask[p] = have;
    }
  return grown;
}

// Saturation tier: every used color reaches every element from every class,
// so single-element game challenges can be answered color for color with the
// class pattern intact. Processing order rotated by seed.
bool saturate_pass(FlatBuild& f, std::uint64_t rot, std::size_t bound,
                   bool& starved) {
  bool grown = false;
  std::size_t n0 = f.n;
  std::size_t off = n0 ? rot % n0 : 0;
  for (std::size_t i = 0; i < n0; ++i) {
    std::size_t y = (i + off) % n0;
    for (std::uint64_t c = 0; c < f.colors; ++c)
      for (std::size_t cid = 0; cid < f.k; ++cid) {
        if (f.present[y][c * FlatBuild::kClassCap + cid]) continue;
        if (f.n >= bound) {
          starved = true;
          return grown;
        }
        // The witness never closes a triangle through (z, y): z has no
        // other edges yet; its remaining edges dodge explicitly.
        f.add_point({{y, c}}, cid);
        grown = true;
      }
  }
  return grown;
}

}  // namespace

ApproxResult limit_approx(std::size_t size_bound, std::size_t ext_bound,
                          std::uint64_t seed) {
  if (size_bound < 1 || ext_bound < 1)
    throw InputError("limit_approx: bounds must be >= 1");
  FlatBuild f(size_bound);
  std::vector<std::uint16_t> mask;
  std::vector<std::uint32_t> wm;
  if (ext_bound >= 3) {
    mask.assign(size_bound * size_bound, 0);
    wm.assign(size_bound * size_bound, 0);
  }
  std::uint64_t rng = seed;
  bool starved = false;
  // Pair closure needs the palette scaled to the target size upfront: a color
  // minted late reopens a full saturation sweep (every element, every class),
  // and that feedback never drains. Sized at sqrt of the bound plus margin,
  // the hashed spread always finds a safe color and never mints again.
  if (ext_bound >= 3) {
    auto p0 = static_cast<std::uint64_t>(
        std::ceil(std::sqrt(static_cast<double>(size_bound)))) + 4;
    while (f.colors < p0) f.mint_color();
  }
  f.add_point({}, f.mint_class());
  while (!starved) {
    bool grown = false;
    if (ext_bound >= 2) grown |= base_pass(f, size_bound, starved);
    if (!starved && ext_bound >= 3)
      grown |= pair_pass(f, mask, wm, size_bound, starved);
    if (!starved) grown |= saturate_pass(f, splitmix(rng), size_bound, starved);
    if (!grown) break;
  }

  ApproxResult res;
  res.m.n = f.n;
  res.m.eclass = f.cls;
  for (std::size_t i = 0; i < f.n; ++i)
    for (std::size_t j = i + 1; j < f.n; ++j) res.m.set_color(i, j, f.at(i, j));
  res.saturated = !starved;
  auto gap = extension_audit(res.m, ext_bound);
  res.closed = !gap.has_value();
  res.unrealized = gap.value_or("");
  if (!res.saturated && res.unrealized.empty())
    res.unrealized = "saturation incomplete at the size bound";
  return res;
}

// --- ordered expansion ----------------------------------------------------------

const HarrisonPoint& OrderedKStructure::label_of(std::size_t elem) const {
  if (elem >= base.n) throw InputError("label_of: element out of range");
  return classlabel.at(base.eclass[elem]);
}

OrderedKStructure expand_order(const KStructure& m, int k_exp) {
  if (!in_K(m)) throw InputError("expand_order: structure not in the class");
  OrderedKStructure out;
  out.base = m;
  out.k_exp = k_exp;
  HarrisonEnum en(k_exp);
  std::vector<std::size_t> ids = m.class_ids();
  for (std::size_t i = 0; i < ids.size(); ++i)
    out.classlabel.emplace(ids[i], en.point(i));
  return out;
}

FiniteStructure to_finite(const OrderedKStructure& n) {
  Signature sig{{{"E", 2}, {"leq", 2}}, {{"C", 2, "color index"}}};
  FiniteStructure s(sig, n.base.n);
  for (std::size_t x = 0; x < n.base.n; ++x)
    for (std::size_t y = 0; y < n.base.n; ++y) {
      if (x == y) continue;
      if (n.base.eclass[x] == n.base.eclass[y]) s.add_rel("E", {x, y});
      if (h_cmp(n.label_of(x), n.label_of(y)) <= 0) s.add_rel("leq", {x, y});
      // Colors sit on unordered pairs, so the relational view holds them in
      // both orientations; one-sided facts would turn the element numbering
      // into structure.
      s.add_fam("C", std::to_string(n.base.color_of(x, y)), {x, y});
    }
  return s;
}

// --- the order criterion ----------------------------------------------------------

namespace {

// Positions of the tuple labels inside the chain of all class labels, sorted
// by the H(k_exp) order. Labels are injective over classes, so the position
// determines the class and vice versa.
std::vector<long> chain_positions(const OrderedKStructure& n, const Tuple& t) {
  std::vector<HarrisonPoint> chain;
  chain.reserve(n.classlabel.size());
  for (const auto& kv : n.classlabel) chain.push_back(kv.second);
  std::sort(chain.begin(), chain.end(),
            [](const HarrisonPoint& a, const HarrisonPoint& b) { return h_cmp(a, b) < 0; });
  std::vector<long> pos;
  pos.reserve(t.size());
  for (Elem e : t) {
    const HarrisonPoint& lab = n.label_of(e);
    std::size_t at = 0;
    while (at + 1 < chain.size() && h_cmp(chain[at], lab) != 0) ++at;
    pos.push_back(static_cast<long>(at));
  }
  return pos;
}

// Graded single-point game on a chain of `size` positions. Tuples are
// alpha-round equivalent exactly when their order/equality patterns agree and
// every pair of corresponding segments (gaps between neighbouring occupied
// positions plus the two ends) has equal sizes or both at least 2^alpha - 1:
// a shorter segment loses to halving, anything past that bound survives it.
bool chain_tuple_equiv(const std::vector<long>& u, const std::vector<long>& v,
                       long size, int alpha) {
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      int a = u[i] < u[j] ? -1 : (u[i] == u[j] ? 0 : 1);
      int b = v[i] < v[j] ? -1 : (v[i] == v[j] ? 0 : 1);
      if (a != b) return false;
    }
  if (alpha <= 0) return true;
  std::vector<long> su(u), sv(v);
  std::sort(su.begin(), su.end());
  su.erase(std::unique(su.begin(), su.end()), su.end());
  std::sort(sv.begin(), sv.end());
  sv.erase(std::unique(sv.begin(), sv.end()), sv.end());
  const long need = (1L << alpha) - 1;
  auto segment_ok = [need](long a, long b) { return a == b || (a >= need && b >= need); };
  long prev_u = -1, prev_v = -1;
  for (std::size_t i = 0; i < su.size(); ++i) {
    if (!segment_ok(su[i] - prev_u - 1, sv[i] - prev_v - 1)) return false;
    prev_u = su[i];
    prev_v = sv[i];
  }
  return segment_ok(size - 1 - prev_u, size - 1 - prev_v);
}

}  // namespace

Claim2Report claim2_check(const OrderedKStructure& n, const Tuple& xs,
                          const Tuple& ys, int alpha, const BFConfig& cfg) {
  return claim2_check(n, to_finite(n), xs, ys, alpha, cfg);
}

Claim2Report claim2_check(const OrderedKStructure& n, const FiniteStructure& fin,
                          const Tuple& xs, const Tuple& ys, int alpha,
                          const BFConfig& cfg) {
  if (alpha < 0 || alpha > 3) throw InputError("claim2_check: alpha must be <= 3");
  if (xs.size() != ys.size()) throw InputError("claim2_check: length mismatch");
  for (Elem e : xs)
    if (e >= n.base.n) throw InputError("claim2_check: tuple out of range");
  for (Elem e : ys)
    if (e >= n.base.n) throw InputError("claim2_check: tuple out of range");

  RankValue rank = RankValue::fin(Ordinal::nat(static_cast<unsigned>(alpha)));

  // Single-element rounds on both sides keep the two games graded alike.
  BFConfig engine_cfg = cfg;
  engine_cfg.single = true;
  Claim2Report rep;
  rep.engine = bf_equiv(fin, xs, fin, ys, rank, engine_cfg);

  rep.order_side = chain_tuple_equiv(chain_positions(n, xs), chain_positions(n, ys),
                                     static_cast<long>(n.classlabel.size()), alpha);

  rep.atoms_side = atomic_type(fin, xs) == atomic_type(fin, ys);
  return rep;
}

// --- singleton triples -------------------------------------------------------------

TripleWitness distinguishing_witness(const KStructure& s, std::size_t x,
                                     std::size_t y, std::size_t z) {
  if (x == y || y == z || x == z)
    throw InputError("distinguishing_witness: triple has repeats");
  TripleWitness w;
  w.x = x, w.y = y, w.z = z;
  w.color = s.color_of(x, y);
  if (s.color_of(y, z) != w.color)
    w.absent = {y, z};
  else if (s.color_of(x, z) != w.color)
    w.absent = {x, z};
  else
    throw InputError("distinguishing_witness: monochromatic triangle");
  return w;
}

namespace {

FiniteStructure classes_and_colors(const KStructure& m) {
  Signature sig{{{"E", 2}}, {{"C", 2, "color index"}}};
  FiniteStructure s(sig, m.n);
  for (std::size_t x = 0; x < m.n; ++x)
    for (std::size_t y = 0; y < m.n; ++y) {
      if (x == y) continue;
      if (m.eclass[x] == m.eclass[y]) s.add_rel("E", {x, y});
      if (x < y) s.add_fam("C", std::to_string(m.color_of(x, y)), {x, y});
    }
  return s;
}

TripleReport triple_report(const KStructure& s, const FiniteStructure& fin) {
  if (s.n < 3) throw InputError("indiscernible_triple_report: need 3 elements");
  TripleReport rep;
  rep.all_witnessed = true;
  for (std::size_t x = 0; x < s.n; ++x)
    for (std::size_t y = 0; y < s.n; ++y)
      for (std::size_t z = 0; z < s.n; ++z) {
        if (x == y || y == z || x == z) continue;
        ++rep.triples;
        try {
          rep.witnesses.push_back(distinguishing_witness(s, x, y, z));
        } catch (const InputError&) {
          rep.all_witnessed = false;
        }
      }
  if (s.n <= 8) {
    rep.orbit_checked = true;
    auto orbits = automorphism_orbits(fin, 2);
    auto block_of = [&](std::size_t u, std::size_t v) {
      Tuple t{u, v};
      for (std::size_t b = 0; b < orbits.size(); ++b)
        if (std::find(orbits[b].begin(), orbits[b].end(), t) != orbits[b].end())
          return b;
      return orbits.size();
    };
    for (const auto& w : rep.witnesses)
      if (block_of(w.x, w.y) != block_of(w.y, w.z)) {
        rep.orbit_separated = true;
        break;
      }
  }
  return rep;
}

}  // namespace

TripleReport indiscernible_triple_report(const KStructure& s) {
  return triple_report(s, classes_and_colors(s));
}

TripleReport indiscernible_triple_report(const OrderedKStructure& s) {
  return triple_report(s.base, to_finite(s));
}

// --- class permutations ---------------------------------------------------------------

ImaginariesReport imaginaries_witness(const KStructure& m,
                                      const std::vector<std::size_t>& perm) {
  if (!in_K(m)) throw InputError("imaginaries_witness: structure not in the class");
  std::vector<std::size_t> cids = m.class_ids();
  if (cids.size() < 2) throw InputError("imaginaries_witness: need 2 classes");
  if (perm.size() != cids.size())
    throw InputError("imaginaries_witness: permutation size mismatch");
  {
    std::vector<bool> hit(perm.size(), false);
    for (std::size_t p : perm) {
      if (p >= perm.size() || hit[p])
        throw InputError("imaginaries_witness: not a permutation");
      hit[p] = true;
    }
  }

  ImaginariesReport rep;
  rep.perm = perm;
  std::map<std::size_t, std::size_t> cpos;
  for (std::size_t i = 0; i < cids.size(); ++i) cpos.emplace(cids[i], i);
  auto target_class = [&](std::size_t x) {
    return cids[perm[cpos.at(m.eclass[x])]];
  };

  // Forth-only backtracking: the universe is finite and shared, so a total
  // injection is already a bijection. Colors sit in a flat matrix — the
  // compatibility check is the hot loop — and a node budget turns a search
  // with no total extension into a report instead of an exponential walk.
  std::vector<std::uint64_t> col(m.n * m.n, 0);
  for (const auto& [key, c] : m.color)
    col[key.first * m.n + key.second] = col[key.second * m.n + key.first] = c;
  std::vector<std::size_t> img(m.n, kNoSlot);
  std::vector<bool> taken(m.n, false);
  std::size_t deepest = 0;
  std::size_t nodes = 0;
  constexpr std::size_t kNodeBudget = 4'000'000;
  bool aborted = false;
  auto rec = [&](auto&& self, std::size_t x) -> bool {
    if (x == m.n) return true;
    deepest = std::max(deepest, x);
    for (std::size_t d = 0; d < m.n; ++d) {
      if (taken[d] || m.eclass[d] != target_class(x)) continue;
      if (++nodes > kNodeBudget) {
        aborted = true;
        return false;
      }
      const std::uint64_t* rx = col.data() + x * m.n;
      const std::uint64_t* rd = col.data() + d * m.n;
      bool ok = true;
      for (std::size_t y = 0; y < x && ok; ++y)
        if (rx[y] != rd[img[y]]) ok = false;
      if (!ok) continue;
      img[x] = d;
      taken[d] = true;
      if (self(self, x + 1)) return true;
      if (aborted) return false;
      taken[d] = false;
      img[x] = kNoSlot;
    }
    return false;
  };
  if (!rec(rec, 0)) {
    std::ostringstream msg;
    if (aborted)
      msg << "no total extension within the search budget; deepest element "
          << "reached " << deepest;
    else
      msg << "no image for element " << deepest
          << " under any assignment of 0.." << (deepest ? deepest - 1 : 0);
    rep.stuck = msg.str();
    return rep;
  }

  rep.total = true;
  rep.mapping.assign(img.begin(), img.end());
  rep.verified = true;
  std::vector<bool> seen(m.n, false);
  for (std::size_t x = 0; x < m.n; ++x) {
    if (seen[img[x]]) rep.verified = false;
    seen[img[x]] = true;
    if (m.eclass[img[x]] != target_class(x)) rep.verified = false;
    const std::uint64_t* rx = col.data() + x * m.n;
    const std::uint64_t* ri = col.data() + img[x] * m.n;
    for (std::size_t y = x + 1; y < m.n; ++y)
      if (rx[y] != ri[img[y]]) rep.verified = false;
  }
  return rep;
}

KStructure swap_symmetric_member(std::size_t cls_size, std::uint64_t seed) {
  if (cls_size < 1) throw InputError("swap_symmetric_member: empty class");
  KStructure m;
  m.n = 2 * cls_size;
  m.eclass.assign(m.n, 0);
  for (std::size_t i = cls_size; i < m.n; ++i) m.eclass[i] = 1;
  // Mirror partner of each element, kept in step as points are appended.
  std::vector<std::size_t> mir(m.n);
  for (std::size_t i = 0; i < m.n; ++i)
    mir[i] = i < cls_size ? i + cls_size : i - cls_size;
  std::uint64_t rng = seed;
  std::uint64_t off = splitmix(rng) % 3;

  // Colors constant on mirror orbits {(x,y), (mx,my)}: the mirror has no
  // fixed points, so the two edges of an orbit never share a vertex and one
  // orbit cannot cover a triangle. The fixpoint below finds a color safe for
  // both edges of the orbit at once.
  auto joint_safe = [&](std::size_t x, std::size_t y, std::uint64_t start) {
    std::uint64_t c = least_safe_color(m, x, y, start);
    while (true) {
      std::uint64_t c2 = least_safe_color(m, mir[x], mir[y], c);
      if (c2 == c) return c;
      c = least_safe_color(m, x, y, c2);
    }
  };
  auto set_orbit = [&](std::size_t x, std::size_t y, std::uint64_t c) {
    m.set_color(x, y, c);
    if (pkey(x, y) != pkey(mir[x], mir[y])) m.set_color(mir[x], mir[y], c);
  };
  for (std::size_t x = 0; x < m.n; ++x)
    for (std::size_t y = x + 1; y < m.n; ++y)
      if (!m.color.count(pkey(x, y))) set_orbit(x, y, joint_safe(x, y, off));

  // Pattern closure in mirror pairs, so the swap stays an automorphism: a
  // point z realizing a shape over a is matched by mz realizing the mirrored
  // shape over mir(a). Slot colors are forced; every other new edge gets a
  // jointly safe color for its whole orbit before any triangle can close.
  std::size_t guard = m.n + 64;
  for (bool grown = true; grown && m.n < guard;) {
    grown = false;
    for_each_subset(m.n, 1, [&](const std::vector<std::size_t>& a) {
      for (const Shape& sh : shapes_over(m, a)) {
        if (realize_shape(m, a, sh) != kNoSlot) continue;
        if (m.n + 2 > guard) return false;
        std::size_t z = m.n, mz = m.n + 1;
        std::size_t cid = sh.class_slot == kNoSlot
                              ? fresh_class_id(m)
                              : m.eclass[a[sh.class_slot]];
        m.eclass.push_back(cid);
        m.eclass.push_back(cid == 0 ? 1 : cid == 1 ? 0 : cid);
        m.n += 2;
        mir.push_back(mz);
        mir.push_back(z);
        std::uint64_t base = m.fresh_color();
        for (std::size_t i = 0; i < a.size(); ++i) {
          std::uint64_t c = sh.colors[i].fresh ? base + sh.colors[i].value
                                               : sh.colors[i].value;
          m.set_color(z, a[i], c);
          m.set_color(mz, mir[a[i]], c);
        }
        for (std::size_t y : {z, mz})
          for (std::size_t x = 0; x < y; ++x)
            if (!m.color.count(pkey(x, y)))
              set_orbit(x, y, joint_safe(x, y, 0));
        grown = true;
      }
      return true;
    });
  }
  return m;
}

}  // namespace scottlab
