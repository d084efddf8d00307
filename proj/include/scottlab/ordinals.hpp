#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scottlab/common.hpp"

namespace scottlab {

// --- exact rationals -------------------------------------------------------

struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;  // > 0, gcd(|num|, den) = 1
  Rat() = default;
  Rat(std::int64_t n, std::int64_t d);
};

int rat_cmp(const Rat& a, const Rat& b);
bool operator==(const Rat& a, const Rat& b);
bool operator<(const Rat& a, const Rat& b);
Rat rat_mid(const Rat& a, const Rat& b);
std::string to_string(const Rat& q);

// --- ordinals in Cantor normal form ----------------------------------------

// Sum of w^exp * coeff with strictly decreasing exponents and coeff >= 1.
// Arithmetic is exact for all finite exponents; the H(K) construction below
// only admits points whose ordinal parts lie under w^K.
struct Ordinal {
  struct Term {
    std::uint32_t exp;
    std::uint64_t coeff;
    bool operator==(const Term&) const = default;
  };
  std::vector<Term> terms;  // empty = 0

  static Ordinal nat(std::uint64_t n);
  static Ordinal omega_pow(std::uint32_t e, std::uint64_t c = 1);

  bool is_zero() const { return terms.empty(); }
  bool is_finite() const { return terms.empty() || terms.front().exp == 0; }
  bool is_successor() const { return !terms.empty() && terms.back().exp == 0; }
  bool is_limit() const { return !terms.empty() && terms.back().exp > 0; }
  bool operator==(const Ordinal&) const = default;
};

int ord_cmp(const Ordinal& a, const Ordinal& b);
bool operator<(const Ordinal& a, const Ordinal& b);
bool operator<=(const Ordinal& a, const Ordinal& b);

Ordinal ord_add(const Ordinal& a, const Ordinal& b);
// Least x with b + x = a; requires b <= a.
Ordinal ord_sub(const Ordinal& a, const Ordinal& b);
Ordinal ord_succ(const Ordinal& a);
// Requires a successor.
Ordinal ord_pred(const Ordinal& a);
// w * b (left multiplication by omega).
Ordinal omega_times(const Ordinal& b);

// First n points of the canonical increasing sequence cofinal in limit a.
std::vector<Ordinal> cofinal_below(const Ordinal& a, std::size_t n);

// Textual form "w^2*3 + w*1 + 4"; zero prints as "0".
std::string to_string(const Ordinal& a);
Ordinal parse_ordinal(const std::string& text);

// --- rank values ------------------------------------------------------------

// Ordinal rank or the distinguished Infinite value (ill-founded / limit class).
struct RankValue {
  bool infinite = false;
  Ordinal ord;  // meaningful iff !infinite

  static RankValue inf() { return RankValue{true, {}}; }
  static RankValue fin(Ordinal o) { return RankValue{false, std::move(o)}; }
  static RankValue fin(std::uint64_t n) { return fin(Ordinal::nat(n)); }
  bool operator==(const RankValue&) const = default;
};

// Infinite compares above every ordinal.
int rank_cmp(const RankValue& a, const RankValue& b);
bool operator<(const RankValue& a, const RankValue& b);
std::string to_string(const RankValue& r);
RankValue parse_rank(const std::string& text);

// --- the desk-scale Harrison order H(K) = w^K * (1 + eta) -------------------

// WellPart(ord) sits in the initial w^K copy; EtaPart(q, ord) at offset ord
// inside the rational-indexed copy q. Every WellPart precedes every EtaPart;
// EtaParts order lexicographically by (q, ord).
struct HarrisonPoint {
  bool eta = false;
  Rat q;        // meaningful iff eta
  Ordinal ord;  // < w^K

  static HarrisonPoint well(Ordinal o) { return {false, {}, std::move(o)}; }
  static HarrisonPoint etap(Rat r, Ordinal o) { return {true, r, std::move(o)}; }
  bool operator==(const HarrisonPoint&) const = default;
};

int h_cmp(const HarrisonPoint& u, const HarrisonPoint& v);
bool h_less(const HarrisonPoint& u, const HarrisonPoint& v);
HarrisonPoint h_successor(const HarrisonPoint& u);
// Whether u has an immediate predecessor (ordinal part a successor).
bool h_has_pred(const HarrisonPoint& u);
HarrisonPoint h_pred(const HarrisonPoint& u);

// Order type of {v : v < u}: an ordinal for WellPart, ill-founded for EtaPart.
struct PredDescriptor {
  bool ill_founded = false;
  Rat q;        // meaningful iff ill_founded
  Ordinal ord;  // meaningful iff !ill_founded
  bool operator==(const PredDescriptor&) const = default;
};
PredDescriptor h_pred_type(const HarrisonPoint& u);

// Validates the ordinal part lies below w^K.
bool h_valid(const HarrisonPoint& u, int K);

// Textual forms "W(<ord>)" and "Q(<p>/<q>, <ord>)".
std::string to_string(const HarrisonPoint& u);
HarrisonPoint parse_hpoint(const std::string& text);

// --- fixed deterministic enumeration of H(K) --------------------------------

// well(i): CNF ordinals under w^K bucketed by weight sum(exp+coeff), ordered
// (term count, lex) inside buckets. eta(i): diagonal over (dyadic index,
// ordinal index); dyadics by shell den_exp + |num|. point(i) interleaves the
// two by parity. The enumeration is total on H(K) and fixed once and for all.
class HarrisonEnum {
 public:
  explicit HarrisonEnum(int K);
  int K() const { return k_; }
  Ordinal well(std::size_t i) const;
  Rat rational(std::size_t i) const;
  HarrisonPoint eta(std::size_t i) const;
  HarrisonPoint point(std::size_t i) const;

 private:
  int k_;
  mutable std::vector<Ordinal> wells_;
  mutable std::vector<Rat> rats_;
  void grow_wells(std::size_t n) const;
  void grow_rats(std::size_t n) const;
};

// --- the R_n family and the path pi ----------------------------------------

// R_0 = {u : u >= u0} with u1 adjoined (u0 the first EtaPart, u1 = W(0));
// R_{n+1} = successors of R_n plus the enumeration-first point not yet used.
// Membership is decidable by successor-stripping; the WellPart slices are
// kept explicit for sampling.
class RnFamily {
 public:
  explicit RnFamily(int K);

  const HarrisonPoint& u0() const { return u0_; }
  const HarrisonPoint& u1() const { return u1_; }
  int K() const { return enum_.K(); }
  const HarrisonEnum& points() const { return enum_; }

  bool contains(const HarrisonPoint& u, std::size_t n) const;
  // The fresh point w_n adjoined when building R_{n+1}.
  const HarrisonPoint& fresh(std::size_t n) const;
  // Explicit R_n intersect WellPart (finite: successor chains + fresh wells).
  std::vector<HarrisonPoint> well_slice(std::size_t n) const;
  // First `count` members of R_n in enumeration order (both parts).
  std::vector<HarrisonPoint> sample(std::size_t n, std::size_t count) const;

 private:
  HarrisonEnum enum_;
  HarrisonPoint u0_, u1_;
  mutable std::vector<HarrisonPoint> fresh_;  // w_0, w_1, ...
  void grow_fresh(std::size_t n) const;
};

// Greedy cofinal path: pi(0) = u1; pi(n+1) is the least WellPart member of
// R_{n+1} above pi(n), preferring one >= the first enumerated WellPart above
// pi(n). Result is strictly increasing through the well part.
std::vector<HarrisonPoint> build_path_pi(const RnFamily& rn, std::size_t len);

// --- back-and-forth on the order H(K) ---------------------------------------

// Interval descriptor: a well-ordered interval of type `tail`, or a copy of
// the whole order followed by `tail` (ill-founded head). Every interval of
// H(K) with endpoint descriptions reduces to one of these two shapes.
struct IntervalType {
  bool eta_head = false;
  Ordinal tail;
  bool empty() const { return !eta_head && tail.is_zero(); }
  bool operator==(const IntervalType&) const = default;
};
std::string to_string(const IntervalType& it);

// Open interval (lo, hi) of H(K); nullopt = unbounded on that side.
IntervalType h_interval(const std::optional<HarrisonPoint>& lo,
                        const std::optional<HarrisonPoint>& hi, int K);

struct LinConfig {
  std::size_t width = 16;     // candidate split offsets per interval
  std::size_t max_len = 4;    // longest challenge tuple per round
  std::uint64_t node_guard = 2'000'000;
};

// Decides (H(K), u) ~^alpha (H(K), v) by memoized game search over interval
// descriptors. Tuple version compares pointed configurations; order/equality
// patterns must match and corresponding intervals must be equivalent.
bool lin_bf_equiv(const HarrisonPoint& u, const HarrisonPoint& v,
                  const RankValue& alpha, int K, const LinConfig& cfg = {});
bool lin_bf_equiv_tuple(const std::vector<HarrisonPoint>& us,
                        const std::vector<HarrisonPoint>& vs,
                        const RankValue& alpha, int K, const LinConfig& cfg = {});

}  // namespace scottlab
