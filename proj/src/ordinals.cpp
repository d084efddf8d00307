#include "scottlab/ordinals.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace scottlab {

// --- Rat ---------------------------------------------------------------------

Rat::Rat(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0) throw InputError("rational with zero denominator");
  if (den < 0) { num = -num; den = -den; }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) { num /= g; den /= g; }
}

int rat_cmp(const Rat& a, const Rat& b) {
  // Denominators are small powers of two here; cross-multiplication is safe.
  __int128 l = static_cast<__int128>(a.num) * b.den;
  __int128 r = static_cast<__int128>(b.num) * a.den;
  return l < r ? -1 : l > r ? 1 : 0;
}
bool operator==(const Rat& a, const Rat& b) { return rat_cmp(a, b) == 0; }
bool operator<(const Rat& a, const Rat& b) { return rat_cmp(a, b) < 0; }

Rat rat_mid(const Rat& a, const Rat& b) {
  return Rat(a.num * b.den + b.num * a.den, 2 * a.den * b.den);
}

std::string to_string(const Rat& q) {
  return std::to_string(q.num) + "/" + std::to_string(q.den);
}

// --- Ordinal arithmetic --------------------------------------------------------

Ordinal Ordinal::nat(std::uint64_t n) {
  Ordinal o;
  if (n) o.terms.push_back({0, n});
  return o;
}

Ordinal Ordinal::omega_pow(std::uint32_t e, std::uint64_t c) {
  Ordinal o;
  if (c) o.terms.push_back({e, c});
  return o;
}

int ord_cmp(const Ordinal& a, const Ordinal& b) {
  std::size_t n = std::min(a.terms.size(), b.terms.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = a.terms[i];
    const auto& y = b.terms[i];
    if (x.exp != y.exp) return x.exp < y.exp ? -1 : 1;
    if (x.coeff != y.coeff) return x.coeff < y.coeff ? -1 : 1;
  }
  if (a.terms.size() != b.terms.size())
    return a.terms.size() < b.terms.size() ? -1 : 1;
  return 0;
}
bool operator<(const Ordinal& a, const Ordinal& b) { return ord_cmp(a, b) < 0; }
bool operator<=(const Ordinal& a, const Ordinal& b) { return ord_cmp(a, b) <= 0; }

Ordinal ord_add(const Ordinal& a, const Ordinal& b) {
  if (b.is_zero()) return a;
  Ordinal out;
  std::uint32_t lead = b.terms.front().exp;
  for (const auto& t : a.terms) {
    if (t.exp > lead) out.terms.push_back(t);
  }
  out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
  // Merge when a kept a term of the leading exponent... it cannot: kept terms
  // have exp > lead. But a's term with exp == lead contributes its coeff.
  for (const auto& t : a.terms) {
    if (t.exp == lead) {
      // out's first term at `lead` is b's leading term; fold the coeff in.
      for (auto& u : out.terms) {
        if (u.exp == lead) { u.coeff += t.coeff; break; }
      }
      break;
    }
  }
  return out;
}

Ordinal ord_sub(const Ordinal& a, const Ordinal& b) {
  if (ord_cmp(b, a) > 0) throw InputError("ord_sub: subtrahend exceeds minuend");
  std::size_t i = 0;
  while (i < a.terms.size() && i < b.terms.size() && a.terms[i] == b.terms[i]) ++i;
  if (i == b.terms.size()) {
    Ordinal out;
    out.terms.assign(a.terms.begin() + i, a.terms.end());
    return out;
  }
  const auto& x = a.terms[i];
  const auto& y = b.terms[i];
  Ordinal out;
  if (x.exp > y.exp) {
    out.terms.assign(a.terms.begin() + i, a.terms.end());
  } else {
    // exps equal, x.coeff > y.coeff: complete the power, keep a's suffix.
    out.terms.push_back({x.exp, x.coeff - y.coeff});
    out.terms.insert(out.terms.end(), a.terms.begin() + i + 1, a.terms.end());
  }
  return out;
}

Ordinal ord_succ(const Ordinal& a) { return ord_add(a, Ordinal::nat(1)); }

Ordinal ord_pred(const Ordinal& a) {
  if (!a.is_successor()) throw InputError("ord_pred: not a successor");
  Ordinal out = a;
  if (out.terms.back().coeff > 1)
    out.terms.back().coeff -= 1;
  else
    out.terms.pop_back();
  return out;
}

Ordinal omega_times(const Ordinal& b) {
  Ordinal out;
  out.terms.reserve(b.terms.size());
  for (const auto& t : b.terms) out.terms.push_back({t.exp + 1, t.coeff});
  return out;
}

std::vector<Ordinal> cofinal_below(const Ordinal& a, std::size_t n) {
  if (!a.is_limit()) throw InputError("cofinal_below: not a limit ordinal");
  Ordinal prefix;
  prefix.terms.assign(a.terms.begin(), a.terms.end() - 1);
  auto last = a.terms.back();
  if (last.coeff > 1) prefix.terms.push_back({last.exp, last.coeff - 1});
  std::vector<Ordinal> out;
  out.reserve(n);
  for (std::size_t i = 1; i <= n; ++i)
    out.push_back(ord_add(prefix, Ordinal::omega_pow(last.exp - 1, i)));
  return out;
}

std::string to_string(const Ordinal& a) {
  if (a.is_zero()) return "0";
  std::string s;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    if (i) s += " + ";
    const auto& t = a.terms[i];
    if (t.exp == 0) {
      s += std::to_string(t.coeff);
    } else if (t.exp == 1) {
      s += "w*" + std::to_string(t.coeff);
    } else {
      s += "w^" + std::to_string(t.exp) + "*" + std::to_string(t.coeff);
    }
  }
  return s;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_nat(const std::string& s) {
  if (s.empty()) throw InputError("expected a number, got empty token");
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw InputError("bad number: '" + s + "'");
  return std::stoull(s);
}

Ordinal parse_term(const std::string& tok) {
  if (tok.empty()) throw InputError("empty ordinal term");
  if (tok[0] != 'w') return Ordinal::nat(parse_nat(tok));
  std::uint32_t exp = 1;
  std::uint64_t coeff = 1;
  std::size_t pos = 1;
  if (pos < tok.size() && tok[pos] == '^') {
    std::size_t star = tok.find('*', pos);
    std::string e = tok.substr(pos + 1, star == std::string::npos
                                            ? std::string::npos
                                            : star - pos - 1);
    exp = static_cast<std::uint32_t>(parse_nat(trim(e)));
    pos = star == std::string::npos ? tok.size() : star;
  }
  if (pos < tok.size()) {
    if (tok[pos] != '*') throw InputError("bad ordinal term: '" + tok + "'");
    coeff = parse_nat(trim(tok.substr(pos + 1)));
  }
  return Ordinal::omega_pow(exp, coeff);
}

}  // namespace

Ordinal parse_ordinal(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) throw InputError("empty ordinal");
  Ordinal acc;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t plus = s.find('+', start);
    std::string tok = trim(s.substr(start, plus == std::string::npos
                                               ? std::string::npos
                                               : plus - start));
    acc = ord_add(acc, parse_term(tok));
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return acc;
}

// --- RankValue ----------------------------------------------------------------

int rank_cmp(const RankValue& a, const RankValue& b) {
  if (a.infinite || b.infinite)
    return a.infinite == b.infinite ? 0 : (a.infinite ? 1 : -1);
  return ord_cmp(a.ord, b.ord);
}
bool operator<(const RankValue& a, const RankValue& b) { return rank_cmp(a, b) < 0; }

std::string to_string(const RankValue& r) {
  return r.infinite ? "inf" : to_string(r.ord);
}

RankValue parse_rank(const std::string& text) {
  std::string s = trim(text);
  if (s == "inf") return RankValue::inf();
  return RankValue::fin(parse_ordinal(s));
}

// --- HarrisonPoint --------------------------------------------------------------

int h_cmp(const HarrisonPoint& u, const HarrisonPoint& v) {
  if (u.eta != v.eta) return u.eta ? 1 : -1;
  if (u.eta) {
    int c = rat_cmp(u.q, v.q);
    if (c) return c;
  }
  return ord_cmp(u.ord, v.ord);
}
bool h_less(const HarrisonPoint& u, const HarrisonPoint& v) { return h_cmp(u, v) < 0; }

HarrisonPoint h_successor(const HarrisonPoint& u) {
  HarrisonPoint out = u;
  out.ord = ord_succ(out.ord);
  return out;
}

bool h_has_pred(const HarrisonPoint& u) { return u.ord.is_successor(); }

HarrisonPoint h_pred(const HarrisonPoint& u) {
  if (!h_has_pred(u)) throw InputError("h_pred: point has no immediate predecessor");
  HarrisonPoint out = u;
  out.ord = ord_pred(out.ord);
  return out;
}

PredDescriptor h_pred_type(const HarrisonPoint& u) {
  if (u.eta) return {true, u.q, {}};
  return {false, {}, u.ord};
}

bool h_valid(const HarrisonPoint& u, int K) {
  return u.ord.is_zero() ||
         u.ord.terms.front().exp < static_cast<std::uint32_t>(K);
}

std::string to_string(const HarrisonPoint& u) {
  if (!u.eta) return "W(" + to_string(u.ord) + ")";
  return "Q(" + to_string(u.q) + ", " + to_string(u.ord) + ")";
}

HarrisonPoint parse_hpoint(const std::string& text) {
  std::string s = trim(text);
  if (s.size() < 3 || s.back() != ')' || (s[0] != 'W' && s[0] != 'Q') || s[1] != '(')
    throw InputError("bad point: '" + text + "'");
  std::string body = s.substr(2, s.size() - 3);
  if (s[0] == 'W') return HarrisonPoint::well(parse_ordinal(body));
  std::size_t comma = body.find(',');
  if (comma == std::string::npos) throw InputError("bad point: '" + text + "'");
  std::string qs = trim(body.substr(0, comma));
  std::size_t slash = qs.find('/');
  std::int64_t num, den = 1;
  if (slash == std::string::npos) {
    num = std::stoll(qs);
  } else {
    num = std::stoll(qs.substr(0, slash));
    den = std::stoll(qs.substr(slash + 1));
  }
  return HarrisonPoint::etap(Rat(num, den), parse_ordinal(body.substr(comma + 1)));
}

// --- HarrisonEnum ----------------------------------------------------------------

HarrisonEnum::HarrisonEnum(int K) : k_(K) {
  if (K < 1) throw InputError("H(K) needs K >= 1");
}

namespace {

// All CNF ordinals with exponents < K and weight sum(exp + coeff) == w,
// exponents strictly decreasing.
void gen_bucket(int K, std::uint64_t w, std::uint32_t max_exp, Ordinal cur,
                std::vector<Ordinal>& out) {
  if (w == 0) { out.push_back(cur); return; }
  for (std::uint32_t e = std::min<std::uint32_t>(max_exp, K - 1);; --e) {
    if (e + 1 <= w) {
      for (std::uint64_t c = 1; e + c <= w; ++c) {
        Ordinal next = cur;
        next.terms.push_back({e, c});
        if (e == 0) {
          if (e + c == w) out.push_back(next);
        } else {
          gen_bucket(K, w - e - c, e - 1, next, out);
        }
      }
    }
    if (e == 0) break;
  }
}

}  // namespace

void HarrisonEnum::grow_wells(std::size_t n) const {
  if (wells_.size() > n) return;
  // Rebuild from scratch when growing; buckets are cheap at this scale.
  wells_.clear();
  std::uint64_t w = 0;
  while (wells_.size() <= n) {
    std::vector<Ordinal> bucket;
    gen_bucket(k_, w, k_ - 1, {}, bucket);
    std::sort(bucket.begin(), bucket.end(), [](const Ordinal& a, const Ordinal& b) {
      if (a.terms.size() != b.terms.size()) return a.terms.size() < b.terms.size();
      for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (a.terms[i].exp != b.terms[i].exp) return a.terms[i].exp < b.terms[i].exp;
        if (a.terms[i].coeff != b.terms[i].coeff)
          return a.terms[i].coeff < b.terms[i].coeff;
      }
      return false;
    });
    wells_.insert(wells_.end(), bucket.begin(), bucket.end());
    ++w;
  }
}

void HarrisonEnum::grow_rats(std::size_t n) const {
  if (rats_.size() > n) return;
  rats_.clear();
  std::int64_t s = 0;
  while (rats_.size() <= n) {
    for (std::int64_t k = 0; k <= s; ++k) {
      std::int64_t den = 1LL << k;
      std::int64_t absp = s - k;
      if (k == 0) {
        if (absp == 0) {
          rats_.push_back(Rat(0, 1));
        } else {
          rats_.push_back(Rat(absp, 1));
          rats_.push_back(Rat(-absp, 1));
        }
      } else {
        if (absp >= 1 && absp % 2 == 1) {
          rats_.push_back(Rat(absp, den));
          rats_.push_back(Rat(-absp, den));
        }
      }
    }
    ++s;
  }
}

Ordinal HarrisonEnum::well(std::size_t i) const {
  grow_wells(i);
  return wells_[i];
}

Rat HarrisonEnum::rational(std::size_t i) const {
  grow_rats(i);
  return rats_[i];
}

HarrisonPoint HarrisonEnum::eta(std::size_t i) const {
  // Diagonal over (rational index a, ordinal index b), a + b = s.
  std::size_t s = 0, seen = 0;
  for (;; ++s) {
    if (seen + s + 1 > i) break;
    seen += s + 1;
  }
  std::size_t a = i - seen;
  std::size_t b = s - a;
  return HarrisonPoint::etap(rational(a), well(b));
}

HarrisonPoint HarrisonEnum::point(std::size_t i) const {
  if (i % 2 == 0) return HarrisonPoint::well(well(i / 2));
  return eta(i / 2);
}

// --- RnFamily ----------------------------------------------------------------------

RnFamily::RnFamily(int K)
    : enum_(K),
      u0_(enum_.eta(0)),
      u1_(HarrisonPoint::well(enum_.well(0))) {}

bool RnFamily::contains(const HarrisonPoint& u, std::size_t n) const {
  if (n == 0) return h_cmp(u, u0_) >= 0 || u == u1_;
  grow_fresh(n - 1);
  if (u == fresh_[n - 1]) return true;
  if (!h_has_pred(u)) return false;
  return contains(h_pred(u), n - 1);
}

const HarrisonPoint& RnFamily::fresh(std::size_t n) const {
  grow_fresh(n);
  return fresh_[n];
}

void RnFamily::grow_fresh(std::size_t n) const {
  while (fresh_.size() <= n) {
    std::size_t m = fresh_.size();  // computing w_m
    for (std::size_t i = 0;; ++i) {
      HarrisonPoint cand = enum_.point(i);
      bool used = false;
      for (std::size_t j = 0; j <= m && !used; ++j) used = contains(cand, j);
      if (!used) { fresh_.push_back(cand); break; }
    }
  }
}

std::vector<HarrisonPoint> RnFamily::well_slice(std::size_t n) const {
  std::vector<HarrisonPoint> cur{u1_};
  for (std::size_t m = 0; m < n; ++m) {
    std::vector<HarrisonPoint> next;
    next.reserve(cur.size() + 1);
    for (const auto& u : cur) next.push_back(h_successor(u));
    const HarrisonPoint& w = fresh(m);
    if (!w.eta) next.push_back(w);
    std::sort(next.begin(), next.end(),
              [](const HarrisonPoint& a, const HarrisonPoint& b) { return h_less(a, b); });
    next.erase(std::unique(next.begin(), next.end()), next.end());
    cur = std::move(next);
  }
  return cur;
}

std::vector<HarrisonPoint> RnFamily::sample(std::size_t n, std::size_t count) const {
  std::vector<HarrisonPoint> out;
  for (std::size_t i = 0; out.size() < count && i < 4096; ++i) {
    HarrisonPoint cand = enum_.point(i);
    if (contains(cand, n)) out.push_back(cand);
  }
  return out;
}

std::vector<HarrisonPoint> build_path_pi(const RnFamily& rn, std::size_t len) {
  std::vector<HarrisonPoint> pi;
  if (len == 0) return pi;
  pi.push_back(rn.u1());
  for (std::size_t n = 1; n < len; ++n) {
    const HarrisonPoint& cur = pi.back();
    std::vector<HarrisonPoint> slice = rn.well_slice(n);
    // First enumerated WellPart above the current position.
    HarrisonPoint uk = cur;
    for (std::size_t i = 0;; ++i) {
      HarrisonPoint cand = HarrisonPoint::well(rn.points().well(i));
      if (h_less(cur, cand)) { uk = cand; break; }
    }
    const HarrisonPoint* best = nullptr;
    const HarrisonPoint* fallback = nullptr;
    for (const auto& v : slice) {
      if (!h_less(cur, v)) continue;
      if (!fallback) fallback = &v;  // slice is sorted: first above is least
      if (h_cmp(v, uk) >= 0) { best = &v; break; }
    }
    if (!fallback) throw ResourceError("path step found no candidate in R_n");
    pi.push_back(best ? *best : *fallback);
  }
  return pi;
}

// --- interval classification -----------------------------------------------------

std::string to_string(const IntervalType& it) {
  return (it.eta_head ? "H+" : "G(") + to_string(it.tail) + (it.eta_head ? "" : ")");
}

IntervalType h_interval(const std::optional<HarrisonPoint>& lo,
                        const std::optional<HarrisonPoint>& hi, int /*K*/) {
  if (lo && hi && h_cmp(*lo, *hi) >= 0) return {false, {}};  // empty
  if (!hi) return {true, {}};  // (lo, inf) and the whole order look alike
  if (!lo) {
    if (!hi->eta) return {false, hi->ord};
    return {true, hi->ord};
  }
  if (!lo->eta && !hi->eta) return {false, ord_sub(hi->ord, ord_succ(lo->ord))};
  if (lo->eta && hi->eta && lo->q == hi->q)
    return {false, ord_sub(hi->ord, ord_succ(lo->ord))};
  // Remaining: an ill-founded stretch ending at hi's offset.
  return {true, hi->ord};
}

// --- the interval game --------------------------------------------------------------

namespace {

struct LinGame {
  const LinConfig& cfg;
  int K;
  std::uint64_t nodes = 0;
  std::map<std::string, bool> memo;

  LinGame(const LinConfig& c, int k) : cfg(c), K(k) {}

  void tick() {
    if (++nodes > cfg.node_guard)
      throw ResourceError("lin game node guard tripped");
  }

  static std::string key(const IntervalType& x, const IntervalType& y,
                         const RankValue& a) {
    std::string kx = to_string(x), ky = to_string(y);
    if (ky < kx) std::swap(kx, ky);
    return kx + "|" + ky + "|" + to_string(a);
  }

  // Dedupe keeping first occurrence, so hinted offsets stay in front.
  static std::vector<Ordinal> dedupe(std::vector<Ordinal> cand) {
    std::vector<Ordinal> out;
    for (auto& o : cand) {
      bool seen = false;
      for (const auto& p : out)
        if (ord_cmp(p, o) == 0) { seen = true; break; }
      if (!seen) out.push_back(std::move(o));
    }
    return out;
  }

  // Candidate split offsets strictly below t; hinted offsets first.
  std::vector<Ordinal> offsets_below(const Ordinal& t,
                                     const std::vector<Ordinal>& extra) const {
    std::vector<Ordinal> cand = extra;
    for (std::uint64_t i = 0; i < 4; ++i) cand.push_back(Ordinal::nat(i));
    Ordinal prefix;
    for (std::size_t i = 0; i < t.terms.size(); ++i) {
      cand.push_back(prefix);
      for (std::uint64_t c = 1; c <= std::min<std::uint64_t>(t.terms[i].coeff, 2); ++c)
        cand.push_back(ord_add(prefix, Ordinal::omega_pow(t.terms[i].exp, c)));
      prefix = ord_add(prefix, Ordinal::omega_pow(t.terms[i].exp, t.terms[i].coeff));
    }
    if (t.is_successor()) {
      Ordinal p = ord_pred(t);
      cand.push_back(p);
      if (p.is_successor()) cand.push_back(ord_pred(p));
    }
    for (std::uint32_t e = 1; e < static_cast<std::uint32_t>(K); ++e) {
      cand.push_back(Ordinal::omega_pow(e, 1));
      cand.push_back(Ordinal::omega_pow(e, 2));
    }
    std::vector<Ordinal> out;
    for (auto& o : dedupe(std::move(cand))) {
      if (ord_cmp(o, t) < 0) out.push_back(std::move(o));
      if (out.size() >= cfg.width) break;
    }
    return out;
  }

  std::vector<Ordinal> free_offsets(const std::vector<Ordinal>& extra) const {
    std::vector<Ordinal> cand = extra;
    for (std::uint64_t i = 0; i < 3; ++i) cand.push_back(Ordinal::nat(i));
    for (std::uint32_t e = 1; e < static_cast<std::uint32_t>(K); ++e) {
      cand.push_back(Ordinal::omega_pow(e, 1));
      cand.push_back(Ordinal::omega_pow(e, 2));
      cand.push_back(ord_succ(Ordinal::omega_pow(e, 1)));
    }
    std::vector<Ordinal> out = dedupe(std::move(cand));
    if (out.size() > cfg.width) out.resize(cfg.width);
    return out;
  }

  // One-point splits of X: (left, rest).
  std::vector<std::pair<IntervalType, IntervalType>> first_splits(
      const IntervalType& x, const std::vector<Ordinal>& extra) const {
    std::vector<std::pair<IntervalType, IntervalType>> out;
    if (!x.eta_head) {
      if (x.tail.is_zero()) return out;
      for (const auto& o : offsets_below(x.tail, extra))
        out.push_back({{false, o}, {false, ord_sub(x.tail, ord_succ(o))}});
      return out;
    }
    for (const auto& g : free_offsets(extra)) out.push_back({{false, g}, x});
    for (const auto& y : free_offsets(extra)) out.push_back({{true, y}, x});
    for (const auto& j : offsets_below(x.tail, extra))
      out.push_back({{true, j}, {false, ord_sub(x.tail, ord_succ(j))}});
    return out;
  }

  void gen_splits(const IntervalType& x, std::size_t m,
                  const std::vector<Ordinal>& extra,
                  std::vector<IntervalType>& prefix,
                  std::vector<std::vector<IntervalType>>& out,
                  std::size_t cap) const {
    if (out.size() >= cap) return;
    for (const auto& [left, rest] : first_splits(x, extra)) {
      if (out.size() >= cap) return;
      prefix.push_back(left);
      if (m == 1) {
        auto parts = prefix;
        parts.push_back(rest);
        out.push_back(std::move(parts));
      } else {
        gen_splits(rest, m - 1, extra, prefix, out, cap);
      }
      prefix.pop_back();
    }
  }

  std::vector<std::vector<IntervalType>> splits(const IntervalType& x, std::size_t m,
                                                const std::vector<Ordinal>& extra) const {
    std::vector<std::vector<IntervalType>> out;
    std::vector<IntervalType> prefix;
    std::size_t cap = cfg.width * (1u << std::min<std::size_t>(m, 3));
    gen_splits(x, m, extra, prefix, out, cap);
    return out;
  }

  static std::vector<Ordinal> hints_of(const std::vector<IntervalType>& parts) {
    std::vector<Ordinal> h;
    for (const auto& p : parts) h.push_back(p.tail);
    return h;
  }

  // Responses that copy the challenge's split shape part by part, where the
  // target interval can realize it. These are checked before the generic
  // enumeration so shape-identical answers are never starved by the cap.
  static void mirror_rec(const IntervalType& y, const std::vector<IntervalType>& ch,
                         std::size_t idx, std::vector<IntervalType>& prefix,
                         std::vector<std::vector<IntervalType>>& out) {
    if (idx + 1 == ch.size()) {
      auto parts = prefix;
      parts.push_back(y);
      out.push_back(std::move(parts));
      return;
    }
    const IntervalType& p = ch[idx];
    std::vector<std::pair<IntervalType, IntervalType>> steps;
    if (!p.eta_head) {
      if (!y.eta_head) {
        if (ord_cmp(p.tail, y.tail) < 0)
          steps.push_back({p, {false, ord_sub(y.tail, ord_succ(p.tail))}});
      } else {
        steps.push_back({p, y});
      }
    } else if (y.eta_head) {
      steps.push_back({p, y});
      if (ord_cmp(p.tail, y.tail) < 0)
        steps.push_back({p, {false, ord_sub(y.tail, ord_succ(p.tail))}});
    }
    for (const auto& [left, rest] : steps) {
      prefix.push_back(left);
      mirror_rec(rest, ch, idx + 1, prefix, out);
      prefix.pop_back();
    }
  }

  static std::vector<std::vector<IntervalType>> mirror_splits(
      const IntervalType& y, const std::vector<IntervalType>& ch) {
    std::vector<std::vector<IntervalType>> out;
    std::vector<IntervalType> prefix;
    mirror_rec(y, ch, 0, prefix, out);
    return out;
  }

  bool eq(const IntervalType& x, const IntervalType& y, const RankValue& alpha) {
    tick();
    if (x == y) return true;  // identical descriptors are isomorphic
    if (alpha.infinite) return false;
    if (alpha.ord.is_zero()) return true;
    std::string k = key(x, y, alpha);
    if (auto it = memo.find(k); it != memo.end()) return it->second;
    memo[k] = true;  // cycle-free (alpha strictly decreases); placeholder
    bool result;
    if (alpha.ord.is_limit()) {
      result = true;
      for (const auto& b : cofinal_below(alpha.ord, std::min<std::size_t>(cfg.width, 8)))
        if (!eq(x, y, RankValue::fin(b))) { result = false; break; }
    } else {
      RankValue beta = RankValue::fin(ord_pred(alpha.ord));
      result = eq(x, y, beta) && half(x, y, beta) && half(y, x, beta);
    }
    memo[k] = result;
    return result;
  }

  bool answers(const std::vector<IntervalType>& ch,
               const std::vector<IntervalType>& rs, const RankValue& beta) {
    for (std::size_t i = 0; i < ch.size(); ++i)
      if (!eq(ch[i], rs[i], beta)) return false;
    return true;
  }

  bool half(const IntervalType& from, const IntervalType& to, const RankValue& beta) {
    for (std::size_t m = 1; m <= cfg.max_len; ++m) {
      for (const auto& ch : splits(from, m, {})) {
        bool answered = false;
        for (const auto& rs : mirror_splits(to, ch))
          if (answers(ch, rs, beta)) { answered = true; break; }
        if (!answered)
          for (const auto& rs : splits(to, m, hints_of(ch)))
            if (answers(ch, rs, beta)) { answered = true; break; }
        if (!answered) return false;
      }
    }
    return true;
  }
};

bool pattern_match(const std::vector<HarrisonPoint>& us,
                   const std::vector<HarrisonPoint>& vs) {
  for (std::size_t i = 0; i < us.size(); ++i)
    for (std::size_t j = i + 1; j < us.size(); ++j) {
      int a = h_cmp(us[i], us[j]);
      int b = h_cmp(vs[i], vs[j]);
      if ((a < 0) != (b < 0) || (a == 0) != (b == 0)) return false;
    }
  return true;
}

}  // namespace

bool lin_bf_equiv_tuple(const std::vector<HarrisonPoint>& us,
                        const std::vector<HarrisonPoint>& vs,
                        const RankValue& alpha, int K, const LinConfig& cfg) {
  if (us.size() != vs.size())
    throw InputError("lin_bf_equiv_tuple: tuple lengths differ");
  if (!pattern_match(us, vs)) return false;
  if (!alpha.infinite && alpha.ord.is_zero()) return true;
  if (alpha.infinite) {
    // Orbit under order automorphisms: well points are fixed; eta points move
    // freely across rationals at a fixed offset.
    for (std::size_t i = 0; i < us.size(); ++i) {
      if (us[i].eta != vs[i].eta) return false;
      if (!us[i].eta && !(us[i] == vs[i])) return false;
      if (us[i].eta && !(us[i].ord == vs[i].ord)) return false;
    }
    return true;
  }
  std::vector<HarrisonPoint> su = us, sv = vs;
  auto lt = [](const HarrisonPoint& a, const HarrisonPoint& b) { return h_less(a, b); };
  std::sort(su.begin(), su.end(), lt);
  su.erase(std::unique(su.begin(), su.end()), su.end());
  std::sort(sv.begin(), sv.end(), lt);
  sv.erase(std::unique(sv.begin(), sv.end()), sv.end());
  LinGame game(cfg, K);
  for (std::size_t i = 0; i <= su.size(); ++i) {
    std::optional<HarrisonPoint> lo =
        i == 0 ? std::nullopt : std::optional<HarrisonPoint>(su[i - 1]);
    std::optional<HarrisonPoint> hi =
        i == su.size() ? std::nullopt : std::optional<HarrisonPoint>(su[i]);
    std::optional<HarrisonPoint> lo2 =
        i == 0 ? std::nullopt : std::optional<HarrisonPoint>(sv[i - 1]);
    std::optional<HarrisonPoint> hi2 =
        i == sv.size() ? std::nullopt : std::optional<HarrisonPoint>(sv[i]);
    if (!game.eq(h_interval(lo, hi, K), h_interval(lo2, hi2, K), alpha))
      return false;
  }
  return true;
}

bool lin_bf_equiv(const HarrisonPoint& u, const HarrisonPoint& v,
                  const RankValue& alpha, int K, const LinConfig& cfg) {
  return lin_bf_equiv_tuple({u}, {v}, alpha, K, cfg);
}

}  // namespace scottlab
