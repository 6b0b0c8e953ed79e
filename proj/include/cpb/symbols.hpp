#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpb/cells.hpp"
#include "cpb/errors.hpp"
#include "cpb/geometry.hpp"
#include "cpb/polygon.hpp"

namespace cpb {

using BigInt = boost::multiprecision::cpp_int;

// Per-turn symbols are integer vectors of length k whose entries satisfy
// the sandwich constraints; the signs select the upper or lower half-cell
// and play no role in admissibility.
using Symbol = std::vector<long long>;

struct AdmissibleWord {
  enum class Kind { finite, periodic };
  std::vector<Symbol> symbols;
  Kind kind{Kind::finite};
};

struct SymbolicConstants {
  double alpha{};     // product of the alpha_plus factors, > 1
  double nu{}, lambda{};
  double nu_prime{}, lambda_prime{};
  double tau{};
  double gamma_minus{}, gamma_plus{};  // cyclic addend sums at j = 1
  std::vector<double> gamma_plus_j;    // per-arc cyclic sums
  std::vector<double> lambda_j;        // one-sided factor products
};

enum class ChiPolicy {
  geometric,  // smallest indices for which the transition estimates apply
  symbolic,   // raised floors so every alphabet-level estimate holds
};

struct SymbolicParams {
  int k{};
  std::vector<double> alpha_minus, alpha_plus, beta_minus, beta_plus;
  std::vector<long long> chi;

  static SymbolicParams from_polygon_geometric(
      const CircularPolygon<double>& poly) {
    SymbolicParams sp;
    sp.k = poly.size();
    for (int j = 0; j < sp.k; ++j) {
      const auto ab = alpha_beta(poly, j);
      sp.alpha_minus.push_back(ab.alpha_minus);
      sp.alpha_plus.push_back(ab.alpha_plus);
      sp.beta_minus.push_back(ab.beta_minus);
      sp.beta_plus.push_back(ab.beta_plus);
    }
    sp.chi = compute_chi(poly);
    return sp;
  }

  // Raised floors: gap-free transition windows on every arc, and a first-arc
  // floor chi_1 >= all other floors large enough for the one-step window
  // n-1, n+1 in Xi^1_1(n) and the linear envelopes of xi^0_j.
  static SymbolicParams from_polygon(const CircularPolygon<double>& poly,
                                     ChiPolicy policy = ChiPolicy::symbolic,
                                     double chi1_multiplier = 1.0) {
    SymbolicParams sp = from_polygon_geometric(poly);
    if (policy == ChiPolicy::geometric) return sp;
    const int k = sp.k;
    for (int j = 0; j < k; ++j) {
      // gap-free unions of the forward windows (values at slot j) and of
      // the backward windows (values at slot j+1)
      const double am = sp.alpha_minus[j], ap = sp.alpha_plus[j];
      const double bm = sp.beta_minus[j], bp = sp.beta_plus[j];
      const double gap_fwd = (am + bm + bp) / (ap - am);
      const double gap_bwd = (am * ap + bm * ap + (1 + bp) * am) / (ap - am);
      sp.chi[j] = std::max<long long>(
          sp.chi[j], static_cast<long long>(std::floor(gap_fwd)) + 1);
      sp.chi[(j + 1) % k] = std::max<long long>(
          sp.chi[(j + 1) % k],
          static_cast<long long>(std::floor(gap_bwd)) + 1);
    }
    long long chi1 = *std::max_element(sp.chi.begin(), sp.chi.end());
    const auto c = sp.envelope_constants();
    double need = 0;
    for (int j = 0; j < k; ++j) {
      need = std::max(need, c.gamma_plus_j[j] * 2 / (c.alpha - 1));
      const double lj = c.lambda_j[j];
      const double gj = sp.gamma_oneside(j);
      if (lj - c.nu > 0) need = std::max(need, gj / (lj - c.nu));
    }
    need = std::max(need, (1 + c.gamma_plus) / (c.alpha - 1));
    need = std::max(need, (1 + c.gamma_minus) / (1 - 1 / c.alpha));
    chi1 = std::max<long long>(chi1,
                               static_cast<long long>(std::floor(need)) + 1);
    sp.chi[0] = static_cast<long long>(
        std::ceil(double(chi1) * std::max(1.0, chi1_multiplier)));
    return sp;
  }

  double alpha() const {
    double a = 1;
    for (double v : alpha_plus) a *= v;
    return a;
  }

  // gamma_j of the one-sided recursion (j is 0-based; gamma_0 = 0)
  double gamma_oneside(int j) const {
    double g = 0;
    for (int m = 1; m <= j; ++m) {
      double prod = 1;
      for (int l = 1; l <= m - 1; ++l) prod *= alpha_plus[j - l];
      g += prod * (beta_plus[j - m] + 1);
    }
    return g;
  }

  // cyclic gamma^+/- at 0-based arc j
  double gamma_cyclic(int j, bool plus) const {
    const auto& a = plus ? alpha_plus : alpha_minus;
    const auto& b = plus ? beta_plus : beta_minus;
    double g = 0;
    for (int m = 1; m <= k; ++m) {
      double prod = 1;
      for (int l = 1; l <= m - 1; ++l) prod *= a[((j - l) % k + k) % k];
      g += prod * (b[((j - m) % k + k) % k] + 1);
    }
    return g;
  }

  struct Envelope {
    double alpha{}, nu{}, lambda{}, gamma_plus{}, gamma_minus{};
    std::vector<double> lambda_j, gamma_plus_j;
  };

  Envelope envelope_constants() const {
    Envelope e;
    e.alpha = alpha();
    e.lambda_j.resize(k);
    double prod = 1;
    for (int j = 0; j < k; ++j) {
      e.lambda_j[j] = prod;
      prod *= alpha_plus[j];
    }
    e.lambda = *std::max_element(e.lambda_j.begin(), e.lambda_j.end());
    e.nu = *std::min_element(e.lambda_j.begin(), e.lambda_j.end()) / 2;
    e.gamma_plus_j.resize(k);
    for (int j = 0; j < k; ++j) e.gamma_plus_j[j] = gamma_cyclic(j, true);
    e.gamma_plus = e.gamma_plus_j[0];
    e.gamma_minus = gamma_cyclic(0, false);
    return e;
  }
};

namespace detail {

// Strict comparison a < b with a guard band: exact ties decide false, and
// values inside the ambiguity zone are refused.
inline bool strictly_less_guarded(double a, double b) {
  const double d = b - a;
  const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  const double fp_slack = 64 * std::numeric_limits<double>::epsilon() * scale;
  if (std::fabs(d) <= fp_slack) return false;
  if (std::fabs(d) < 1e-9 * scale)
    throw GuardBandAmbiguous("comparison of " + std::to_string(a) + " and " +
                             std::to_string(b) + " inside the guard band");
  return d > 0;
}

struct IntInterval {
  long long lo{}, hi{};
  bool empty() const { return hi < lo; }
  long long size() const { return empty() ? 0 : hi - lo + 1; }
  bool contains(long long v) const { return v >= lo && v <= hi; }
};

}  // namespace detail

// Integers reachable forward across transition m from value v, floored at
// the next slot's chi.
inline detail::IntInterval forward_window(const SymbolicParams& sp, int m,
                                          long long v, long long next_chi) {
  detail::IntInterval w;
  w.lo = std::max(next_chi,
                  smallest_int_above(sp.alpha_minus[m] * double(v) +
                                     sp.beta_minus[m]));
  w.hi = largest_int_below(sp.alpha_plus[m] * double(v) - sp.beta_plus[m]);
  return w;
}

// Integers w from which v is reachable across transition m.
inline detail::IntInterval backward_window(const SymbolicParams& sp, int m,
                                           long long v, long long prev_chi) {
  detail::IntInterval w;
  w.lo = std::max(prev_chi, smallest_int_above(
                                (double(v) + sp.beta_plus[m]) /
                                sp.alpha_plus[m]));
  w.hi = largest_int_below((double(v) - sp.beta_minus[m]) / sp.alpha_minus[m]);
  return w;
}

inline bool chains(const SymbolicParams& sp, int m, long long a, long long b) {
  return detail::strictly_less_guarded(sp.alpha_minus[m] * double(a) +
                                           sp.beta_minus[m],
                                       double(b)) &&
         detail::strictly_less_guarded(double(b), sp.alpha_plus[m] * double(a) -
                                                      sp.beta_plus[m]);
}

inline bool is_admissible_symbol(const SymbolicParams& sp, const Symbol& q) {
  if (static_cast<int>(q.size()) != sp.k)
    throw InvalidParameter("symbol length differs from the arc count");
  for (int j = 0; j < sp.k; ++j)
    if (std::llabs(q[j]) < sp.chi[j]) return false;
  for (int j = 0; j + 1 < sp.k; ++j)
    if (!chains(sp, j, std::llabs(q[j]), std::llabs(q[j + 1]))) return false;
  return true;
}

inline bool is_admissible_word(const SymbolicParams& sp,
                               const AdmissibleWord& w) {
  for (const auto& q : w.symbols)
    if (!is_admissible_symbol(sp, q)) return false;
  const std::size_t m = w.symbols.size();
  const std::size_t pairs =
      (w.kind == AdmissibleWord::Kind::periodic) ? m : (m == 0 ? 0 : m - 1);
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto& a = w.symbols[i];
    const auto& b = w.symbols[(i + 1) % m];
    if (!chains(sp, sp.k - 1, std::llabs(a[sp.k - 1]), std::llabs(b[0])))
      return false;
  }
  return true;
}

// Extremes (zeta, xi) of the set of values the (i, j) entry can take over
// all admissible continuations with first entry n. i counts turns (may be
// negative), j is the 0-based arc. Exact under gap-free windows.
struct XiBounds {
  long long zeta{}, xi{};
  bool empty() const { return xi < zeta; }
};

namespace detail {

// Propagate an integer interval of values through one transition. The
// per-value windows have nondecreasing endpoints, so the image extremes
// come from the outermost values with nonempty windows.
template <class WindowFn>
IntInterval propagate_interval(IntInterval cur, WindowFn&& window) {
  if (cur.empty()) return cur;
  long long vlo = cur.lo;
  IntInterval wlo = window(vlo);
  while (wlo.empty() && vlo < cur.hi) wlo = window(++vlo);
  long long vhi = cur.hi;
  IntInterval whi = window(vhi);
  while (whi.empty() && vhi > cur.lo) whi = window(--vhi);
  if (wlo.empty() || whi.empty()) return {1, 0};
  return {wlo.lo, whi.hi};
}

}  // namespace detail

inline XiBounds xi_bounds(const SymbolicParams& sp, long long i, int j,
                          long long n, long long max_window = 64) {
  if (std::llabs(i) > max_window)
    throw WindowTooLarge("turn offset " + std::to_string(i) +
                         " beyond configured window");
  if (j < 0 || j >= sp.k) throw IndexOutOfRange("arc index out of range");
  if (n < sp.chi[0]) throw InvalidParameter("n below chi_1");
  detail::IntInterval cur{n, n};
  if (i >= 0) {
    const long long slots = i * sp.k + j;
    for (long long p = 0; p < slots && !cur.empty(); ++p) {
      const int m = static_cast<int>(p % sp.k);
      const int next = static_cast<int>((p + 1) % sp.k);
      cur = detail::propagate_interval(cur, [&](long long v) {
        return forward_window(sp, m, v, sp.chi[next]);
      });
    }
  } else {
    const long long slots = -i * sp.k - j;
    for (long long p = 0; p < slots && !cur.empty(); ++p) {
      const int m = static_cast<int>(((-1 - p) % sp.k + sp.k) % sp.k);
      cur = detail::propagate_interval(cur, [&](long long v) {
        return backward_window(sp, m, v, sp.chi[m]);
      });
    }
  }
  return {cur.lo, cur.hi};
}

inline detail::IntInterval xi_set(const SymbolicParams& sp, long long i, int j,
                                  long long n, long long max_window = 64) {
  const auto b = xi_bounds(sp, i, j, n, max_window);
  return {b.zeta, b.xi};
}

inline SymbolicConstants compute_constants(const SymbolicParams& sp) {
  SymbolicConstants c;
  const auto e = sp.envelope_constants();
  c.alpha = e.alpha;
  if (!(c.alpha > 1))
    throw InvalidParameter("alpha_plus product must exceed 1");
  c.lambda_j = e.lambda_j;
  c.gamma_plus_j = e.gamma_plus_j;
  c.lambda = e.lambda;
  c.nu = e.nu;
  c.gamma_plus = e.gamma_plus;
  c.gamma_minus = e.gamma_minus;
  // tau: convergent product of the worst-case relative losses of the
  // maximal recursion, truncated once the tail factor is 1 - O(1e-15)
  double tau = 1;
  for (int j = 0; j < sp.k; ++j) {
    double tj = 1;
    XiBounds b{sp.chi[0], sp.chi[0]};
    // advance to arc j of turn 0
    for (int p = 0; p < j; ++p) {
      const auto w = forward_window(sp, p, b.xi, sp.chi[(p + 1) % sp.k]);
      b.xi = w.hi;
    }
    for (int l = 0; l < 4096; ++l) {
      const double factor = 1 - e.gamma_plus_j[j] / (c.alpha * double(b.xi));
      if (factor <= 0)
        throw InvalidParameter("chi_1 too small for a positive tau");
      tj *= factor;
      if (1 - factor < 1e-15) break;
      for (int p = 0; p < sp.k; ++p) {
        const int m = (j + p) % sp.k;
        const auto w = forward_window(sp, m, b.xi, sp.chi[(m + 1) % sp.k]);
        b.xi = w.hi;
      }
    }
    tau = std::min(tau, tj);
  }
  c.tau = tau;
  c.nu_prime = sp.k * c.tau * c.nu / (c.lambda * c.alpha);
  c.lambda_prime = sp.k * c.lambda * c.alpha / (c.tau * c.nu * (c.alpha - 1));
  if (!(c.nu < c.lambda) || !(c.nu_prime < c.lambda_prime) ||
      !(c.tau > 0 && c.tau < 1))
    throw InvalidParameter("inconsistent symbolic constants");
  return c;
}

// s^i: impacts during the first i turns; s^i_j adds the first j arcs of
// turn i (0-based j).
inline long long partial_sum(const AdmissibleWord& w, long long i, int j = 0) {
  if (i < 0 || i > static_cast<long long>(w.symbols.size()))
    throw IndexOutOfRange("turn index out of range");
  long long s = 0;
  for (long long m = 0; m < i; ++m)
    for (long long e : w.symbols[static_cast<std::size_t>(m)])
      s += std::llabs(e);
  if (j > 0) {
    if (i >= static_cast<long long>(w.symbols.size()))
      throw IndexOutOfRange("arc partial sum past the last turn");
    const auto& q = w.symbols[static_cast<std::size_t>(i)];
    if (j > static_cast<int>(q.size()))
      throw IndexOutOfRange("arc index out of range");
    for (int m = 0; m < j; ++m) s += std::llabs(q[m]);
  }
  return s;
}

namespace detail {

// Fill entries 2..k of a symbol with first entry v so that the wraparound
// window of its last entry contains every value of [next_lo, next_hi].
inline std::optional<Symbol> complete_symbol(const SymbolicParams& sp,
                                             long long v, long long next_lo,
                                             long long next_hi) {
  const int k = sp.k;
  // forward reachable intervals
  std::vector<IntInterval> reach(k);
  reach[0] = {v, v};
  for (int j = 1; j < k; ++j) {
    const auto wlo = forward_window(sp, j - 1, reach[j - 1].lo, sp.chi[j]);
    const auto whi = forward_window(sp, j - 1, reach[j - 1].hi, sp.chi[j]);
    reach[j] = {wlo.empty() ? whi.lo : wlo.lo, whi.hi};
    if (reach[j].empty()) return std::nullopt;
  }
  // last entry must reach the whole target range across the wraparound
  IntInterval last;
  last.lo = std::max(reach[k - 1].lo,
                     smallest_int_above((double(next_hi) + sp.beta_plus[k - 1]) /
                                        sp.alpha_plus[k - 1]));
  last.hi = std::min(reach[k - 1].hi,
                     largest_int_below((double(next_lo) - sp.beta_minus[k - 1]) /
                                       sp.alpha_minus[k - 1]));
  if (last.empty()) return std::nullopt;
  Symbol q(static_cast<std::size_t>(k));
  q[static_cast<std::size_t>(k - 1)] = (last.lo + last.hi) / 2;
  // walk back, staying reachable from v and able to reach the chosen tail
  for (int j = k - 2; j >= 1; --j) {
    const auto back = backward_window(sp, j, q[static_cast<std::size_t>(j + 1)],
                                      sp.chi[j]);
    IntInterval pick{std::max(back.lo, reach[j].lo),
                     std::min(back.hi, reach[j].hi)};
    if (pick.empty()) return std::nullopt;
    q[static_cast<std::size_t>(j)] = (pick.lo + pick.hi) / 2;
  }
  q[0] = v;
  return q;
}

}  // namespace detail

// Connecting word from q_minus to q_plus, both kept verbatim: the first
// intermediate entry starts inside the wrap window of q_minus's last entry,
// then the first entries walk by one per turn towards |q_plus|_1.
inline AdmissibleWord connect_words(const SymbolicParams& sp,
                                    const Symbol& q_minus,
                                    const Symbol& q_plus) {
  if (!is_admissible_symbol(sp, q_minus) || !is_admissible_symbol(sp, q_plus))
    throw InvalidParameter("endpoints must be admissible symbols");
  const long long b = std::llabs(q_plus[0]);
  AdmissibleWord w;
  w.symbols.push_back(q_minus);
  const auto w0 = forward_window(sp, sp.k - 1,
                                 std::llabs(q_minus[sp.k - 1]), sp.chi[0]);
  if (w0.empty()) throw Unreachable("left endpoint has no continuation");
  std::vector<long long> firsts;
  long long v = std::clamp(b, w0.lo, w0.hi);
  if (v != b || !chains(sp, sp.k - 1, std::llabs(q_minus[sp.k - 1]), b)) {
    firsts.push_back(v);
    for (long long guard = 0; v != b; ++guard) {
      if (guard > std::llabs(w0.lo - b) + std::llabs(w0.hi - b) + 4)
        throw Unreachable("connector walked past its target");
      v += (b > v) ? 1 : -1;
      if (v != b) firsts.push_back(v);
    }
  }
  for (std::size_t i = 0; i < firsts.size(); ++i) {
    const long long nxt = (i + 1 < firsts.size()) ? firsts[i + 1] : b;
    auto mid = detail::complete_symbol(sp, firsts[i], nxt, nxt);
    if (!mid) throw Unreachable("no completion at first entry " +
                                std::to_string(firsts[i]));
    w.symbols.push_back(*mid);
  }
  w.symbols.push_back(q_plus);
  if (!is_admissible_word(sp, w))
    throw Unreachable("connector failed its own admissibility check");
  return w;
}

// An N-element set of symbols, every ordered pair of which chains; the
// first entries are base, base+1, ..., base+N-1.
inline std::vector<Symbol> clique(const SymbolicParams& sp, int N) {
  const auto e = sp.envelope_constants();
  double need = (double(sp.chi[0]) - e.gamma_minus) * e.alpha;
  need = std::max(need, (N + e.gamma_plus) / (e.alpha - 1));
  need = std::max(need, (N + e.gamma_minus) / (1 - 1 / e.alpha));
  long long base =
      std::max<long long>(sp.chi[0],
                          static_cast<long long>(std::floor(need)) + 1);
  for (int attempt = 0; attempt < 48; ++attempt) {
    std::vector<Symbol> out;
    bool ok = true;
    for (int m = 0; m < N && ok; ++m) {
      auto q =
          detail::complete_symbol(sp, base + m, base, base + N - 1);
      if (!q)
        ok = false;
      else
        out.push_back(*q);
    }
    if (ok) {
      AdmissibleWord pair;
      pair.kind = AdmissibleWord::Kind::finite;
      for (int i = 0; i < N && ok; ++i)
        for (int j = 0; j < N && ok; ++j) {
          pair.symbols = {out[static_cast<std::size_t>(i)],
                          out[static_cast<std::size_t>(j)]};
          ok = is_admissible_word(sp, pair);
        }
    }
    if (ok) return out;
    base *= 2;
  }
  throw Unreachable("no mutually chaining symbol set found");
}

struct WordCount {
  BigInt count{};
  double entropy_rate{};
};

inline double log_bigint(const BigInt& x) {
  if (x <= 0) return -std::numeric_limits<double>::infinity();
  const long long bits = static_cast<long long>(boost::multiprecision::msb(x));
  if (bits < 900) return std::log(x.convert_to<double>());
  const BigInt top = x >> (bits - 52);
  return std::log(top.convert_to<double>()) +
         double(bits - 52) * std::log(2.0);
}

// Number of admissible |q|-itineraries of the given number of turns whose
// first entries are capped at n_max. Sign choices are not counted.
inline WordCount count_words(const SymbolicParams& sp, int turns,
                             long long n_max) {
  if (turns < 1) throw InvalidParameter("need at least one turn");
  if (n_max < sp.chi[0]) throw CapTooSmall("cap below chi_1");
  const long long lo1 = sp.chi[0];
  const std::size_t nv = static_cast<std::size_t>(n_max - lo1 + 1);

  // per-turn chain counts conditioned on the first entry, plus the counts
  // restricted by the next turn's first entry
  std::vector<BigInt> tail(nv);           // chains regardless of successor
  std::vector<std::vector<BigInt>> step(  // chains by successor first entry
      nv, std::vector<BigInt>(nv));
  for (std::size_t vi = 0; vi < nv; ++vi) {
    const long long v = lo1 + static_cast<long long>(vi);
    std::map<long long, BigInt> layer{{v, 1}};
    for (int j = 0; j + 1 < sp.k; ++j) {
      std::map<long long, BigInt> next;
      for (const auto& [val, cnt] : layer) {
        const auto w = forward_window(sp, j, val, sp.chi[j + 1]);
        for (long long u = w.lo; u <= w.hi; ++u) next[u] += cnt;
      }
      layer.swap(next);
    }
    for (const auto& [val, cnt] : layer) {
      tail[vi] += cnt;
      const auto w = forward_window(sp, sp.k - 1, val, lo1);
      for (long long u = std::max(w.lo, lo1); u <= std::min(w.hi, n_max); ++u)
        step[vi][static_cast<std::size_t>(u - lo1)] += cnt;
    }
  }

  std::vector<BigInt> f(tail);  // one remaining turn
  for (int t = 1; t < turns; ++t) {
    std::vector<BigInt> g(nv);
    for (std::size_t vi = 0; vi < nv; ++vi)
      for (std::size_t ui = 0; ui < nv; ++ui)
        if (step[vi][ui] != 0) g[vi] += step[vi][ui] * f[ui];
    f.swap(g);
  }
  WordCount wc;
  for (const auto& c : f) wc.count += c;
  wc.entropy_rate = log_bigint(wc.count) / double(turns);
  return wc;
}

}  // namespace cpb
