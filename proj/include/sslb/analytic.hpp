#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "sslb/arith.hpp"
#include "sslb/errors.hpp"
#include "sslb/prime_table.hpp"
#include "sslb/summation.hpp"

namespace sslb {

// ---------------------------------------------------------------------------
// Logarithmic integral, offset convention: li(x) = integral_2^x dt/log t,
// so li(2) = 0. Adaptive Simpson, local error < 1e-12 per interval.
// ---------------------------------------------------------------------------

namespace detail {

inline double li_integrand(double t) { return 1.0 / std::log(t); }

inline double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double li_adaptive(double a, double fa, double b, double fb, double fm,
                          double whole, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = li_integrand(lm), frm = li_integrand(rm);
  double left = simpson(a, fa, m, fm, flm);
  double right = simpson(m, fm, b, fb, frm);
  double err = left + right - whole;
  if (depth <= 0 || std::abs(err) < 15.0 * eps)
    return left + right + err / 15.0;
  return li_adaptive(a, fa, m, fm, flm, left, 0.5 * eps, depth - 1) +
         li_adaptive(m, fm, b, fb, frm, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

inline double li(double x) {
  if (!(x >= 2.0)) throw DomainError("li: x must be >= 2");
  if (x == 2.0) return 0.0;
  double fa = detail::li_integrand(2.0);
  double fb = detail::li_integrand(x);
  double fm = detail::li_integrand(0.5 * (2.0 + x));
  double whole = detail::simpson(2.0, fa, x, fb, fm);
  return detail::li_adaptive(2.0, fa, x, fb, fm, whole, 1e-12, 60);
}

// ---------------------------------------------------------------------------
// Prime counts in arithmetic progressions.
// ---------------------------------------------------------------------------

// pi(x; q, b), optionally range-restricted from below (the pi' count with
// lower = p1 and x = x/p1).
struct ApCountQuery {
  double x = 0;          // inclusive upper limit
  std::uint64_t q = 1;   // modulus
  std::uint64_t b = 0;   // residue class in [0, q-1]
  double lower = 0;      // inclusive lower limit (0 for the plain count)
};

namespace detail {

// Exact count of primes p in [lo, hi] with p = b (mod q). Walks whichever
// is cheaper: the primes vector or the progression itself.
inline std::uint64_t count_primes_ap(const PrimeTable& table, double lo, double hi,
                                     std::uint64_t q, std::uint64_t b) {
  if (q == 0) throw DomainError("ap count: modulus must be positive");
  if (b >= q) throw DomainError("ap count: residue must lie in [0, q-1]");
  if (hi > static_cast<double>(table.limit()))
    throw RangeError("ap count: x exceeds the sieve limit");
  std::uint64_t nlo = lo <= 2 ? 2 : static_cast<std::uint64_t>(std::ceil(lo));
  if (hi < 2) return 0;
  std::uint64_t nhi = static_cast<std::uint64_t>(hi);
  if (nlo > nhi) return 0;

  const auto& primes = table.primes();
  auto it_lo = std::lower_bound(primes.begin(), primes.end(), nlo);
  auto it_hi = std::upper_bound(it_lo, primes.end(), nhi);
  std::uint64_t prime_steps = static_cast<std::uint64_t>(it_hi - it_lo);
  std::uint64_t ap_steps = (nhi - nlo) / q + 1;

  std::uint64_t count = 0;
  if (prime_steps <= ap_steps) {
    for (auto it = it_lo; it != it_hi; ++it)
      if (*it % q == b) ++count;
  } else {
    std::uint64_t first = nlo + (b + q - nlo % q) % q;
    for (std::uint64_t n = first; n <= nhi; n += q)
      if (table.is_prime(n)) ++count;
  }
  return count;
}

}  // namespace detail

inline std::uint64_t pi_ap(const ApCountQuery& query, const PrimeTable& table) {
  if (query.lower != 0)
    throw DomainError("pi_ap: lower must be 0 (use pi_restricted)");
  return detail::count_primes_ap(table, 0.0, query.x, query.q, query.b);
}

// pi': primes p with lower <= p <= x and p = b (mod q), both ends inclusive.
inline std::uint64_t pi_restricted(const ApCountQuery& query, const PrimeTable& table) {
  if (query.lower > query.x) return 0;
  return detail::count_primes_ap(table, query.lower, query.x, query.q, query.b);
}

// ---------------------------------------------------------------------------
// Brun-Titchmarsh majorant: 2x / (phi(q) log(2x/q)).
// ---------------------------------------------------------------------------

inline double brun_titchmarsh_majorant(double x, std::uint64_t q, const PrimeTable& table) {
  if (q < 2) throw DomainError("brun_titchmarsh_majorant: q must be >= 2");
  double arg = 2.0 * x / static_cast<double>(q);
  if (arg <= 1.0)
    throw DomainError("brun_titchmarsh_majorant: log argument <= 1 (bound unusable)");
  return 2.0 * x / (static_cast<double>(euler_phi(q, table)) * std::log(arg));
}

// ---------------------------------------------------------------------------
// V(X) = sum over primes q in (X, rX] of pi(x; q, a) log q, with the
// normalized bound ratio V(X) log x / ((r-1) x).
// ---------------------------------------------------------------------------

struct VxReport {
  double x = 0;
  double X = 0;
  double r = 0;
  std::int64_t a = 0;
  double value = 0;
  double bound_ratio = 0;
  bool out_of_window = false;  // X outside (x^{1/2}, x^{3/4})
};

inline VxReport hooley_V(double x, double X, double r, std::int64_t a,
                         const PrimeTable& table) {
  if (!(r > 1.0 && r < 2.0)) throw DomainError("hooley_V: r must lie in (1, 2)");
  if (a == 0) throw DomainError("hooley_V: a must be nonzero");
  double abs_a = static_cast<double>(a < 0 ? -a : a);
  if (x + abs_a > static_cast<double>(table.limit()))
    throw RangeError("hooley_V: x + |a| exceeds the sieve limit");

  VxReport rep;
  rep.x = x;
  rep.X = X;
  rep.r = r;
  rep.a = a;
  rep.out_of_window = !(X > std::sqrt(x) && X < std::pow(x, 0.75));

  const auto& primes = table.primes();
  // (X, rX]: q >= floor(X)+1, q <= floor(rX).
  std::uint64_t qlo = static_cast<std::uint64_t>(X) + 1;
  std::uint64_t qhi = static_cast<std::uint64_t>(r * X);
  auto it = std::lower_bound(primes.begin(), primes.end(), qlo);
  auto end = std::upper_bound(it, primes.end(), qhi);
  CompensatedSum sum;
  for (; it != end; ++it) {
    std::uint64_t q = *it;
    std::uint64_t c = detail::count_primes_ap(table, 0.0, x, q, residue_mod(a, q));
    if (c != 0) sum.add(static_cast<double>(c) * std::log(static_cast<double>(q)));
  }
  rep.value = sum.value();
  rep.bound_ratio = rep.value * std::log(x) / ((r - 1.0) * x);
  return rep;
}

// ---------------------------------------------------------------------------
// Bombieri-Vinogradov discrepancy sum:
//   sum_{q <= Q} max_{(b,q)=1} | pi(x; q, b) - li(x)/phi(q) |.
// Moduli run over all integers by default; prime_moduli_only restricts to
// primes (the shape used where q is a prime divisor).
// ---------------------------------------------------------------------------

inline double bv_discrepancy(double x, double Q, const PrimeTable& table,
                             bool prime_moduli_only = false) {
  if (x > static_cast<double>(table.limit()))
    throw RangeError("bv_discrepancy: x exceeds the sieve limit");
  if (Q < 1.0) return 0.0;
  const double lix = li(x);
  const auto& primes = table.primes();
  auto prime_end = std::upper_bound(primes.begin(), primes.end(),
                                    static_cast<std::uint64_t>(x));
  std::uint64_t qmax = static_cast<std::uint64_t>(Q);
  CompensatedSum total;
  std::vector<std::uint64_t> counts;
  for (std::uint64_t q = 1; q <= qmax; ++q) {
    if (prime_moduli_only && !table.is_prime(q)) continue;
    counts.assign(q, 0);
    for (auto it = primes.begin(); it != prime_end; ++it) ++counts[*it % q];
    double expected = lix / static_cast<double>(euler_phi(q, table));
    double worst = 0.0;
    for (std::uint64_t b = 0; b < q; ++b) {
      if (q != 1 && std::gcd(b, q) != 1) continue;
      double d = std::abs(static_cast<double>(counts[b]) - expected);
      if (d > worst) worst = d;
    }
    total.add(worst);
  }
  return total.value();
}

// ---------------------------------------------------------------------------
// Weighted Mertens sum over prime powers: sum_{q^s <= Q} log q / phi(q^s),
// which tracks log Q + O(1).
// ---------------------------------------------------------------------------

inline double mertens_weighted_sum(double Q, const PrimeTable& table) {
  if (Q < 2.0) return 0.0;
  if (Q > static_cast<double>(table.limit()))
    throw RangeError("mertens_weighted_sum: Q exceeds the sieve limit");
  std::uint64_t qmax = static_cast<std::uint64_t>(Q);
  const auto& primes = table.primes();
  auto end = std::upper_bound(primes.begin(), primes.end(), qmax);
  CompensatedSum sum;
  for (auto it = primes.begin(); it != end; ++it) {
    std::uint64_t q = *it;
    double lq = std::log(static_cast<double>(q));
    // phi(q^s) = q^{s-1} (q - 1)
    for (std::uint64_t qpow = q, phi = q - 1; qpow <= qmax;) {
      sum.add(lq / static_cast<double>(phi));
      if (qpow > qmax / q) break;
      qpow *= q;
      phi *= q;
    }
  }
  return sum.value();
}

// ---------------------------------------------------------------------------
// Reference constants from the shifted-prime literature.
// ---------------------------------------------------------------------------

struct ReferenceConstant {
  std::string name;
  double value = 0;
  std::string description;
};

inline std::vector<ReferenceConstant> reference_constants() {
  std::vector<ReferenceConstant> out;
  out.push_back({"motohashi_limit", 1.0 - 1.0 / (2.0 * std::exp(0.25)),
                 "1 - 1/(2 e^{1/4}) evaluated directly = 0.610599608464...; "
                 "note: the figure 0.611059... often quoted for this constant "
                 "deviates from the direct evaluation"});
  out.push_back({"quoted_motohashi_limit", 0.611059,
                 "the commonly printed decimal for 1 - 1/(2 e^{1/4}); kept as a "
                 "literal for comparison against motohashi_limit"});
  out.push_back({"hooley_limit", 0.625,
                 "Hooley's exponent for the largest prime factor of shifted primes"});
  out.push_back({"theta_min", 0.6, "lower end of the theorem's theta window"});
  out.push_back({"hooley_nsquare_exponent", 0.1001483,
                 "Hooley's exponent for P+(n^2+1)/n"});
  out.push_back({"deshouillers_iwaniec_exponent", 0.202468,
                 "Deshouillers-Iwaniec exponent for P+(n^2+1)/n"});
  out.push_back({"hooley_average_bt_exponent", 0.619933,
                 "Hooley's first shifted-prime exponent via the averaged "
                 "Brun-Titchmarsh inequality"});
  return out;
}

}  // namespace sslb
