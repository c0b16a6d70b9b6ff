#pragma once

#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "sslb/arith.hpp"
#include "sslb/errors.hpp"
#include "sslb/prime_table.hpp"

namespace sslb {

// n = p1 * p2 with p1 <= p2 both prime; the representation is unique.
struct Semiprime {
  std::uint64_t n = 0;
  std::uint64_t p1 = 0;
  std::uint64_t p2 = 0;
};

inline bool is_semiprime(std::uint64_t n, const PrimeTable& table) {
  if (n == 0) throw DomainError("is_semiprime: n must be positive");
  if (n > table.limit()) throw RangeError("is_semiprime: n exceeds the sieve limit");
  if (n < 4) return false;
  std::uint64_t p = table.smallest_factor(n);
  std::uint64_t m = n / p;
  return m >= 2 && table.is_prime(m);
}

// All semiprimes n <= x in increasing n. One cursor per p1 <= sqrt(x), each
// walking p2 over primes in [p1, x/p1]; a min-heap on n merges the streams.
inline std::vector<Semiprime> enumerate_semiprimes(std::uint64_t x, const PrimeTable& table) {
  if (x > table.limit()) throw RangeError("enumerate_semiprimes: x exceeds the sieve limit");
  std::vector<Semiprime> out;
  if (x < 4) return out;

  const auto& primes = table.primes();
  struct Cursor {
    std::uint64_t n;
    std::size_t i;  // p1 index
    std::size_t j;  // p2 index, j >= i
  };
  auto later = [](const Cursor& a, const Cursor& b) { return a.n > b.n; };
  std::priority_queue<Cursor, std::vector<Cursor>, decltype(later)> heap(later);

  for (std::size_t i = 0; i < primes.size(); ++i) {
    std::uint64_t p = primes[i];
    if (p > x / p) break;
    heap.push({p * p, i, i});
  }
  double dx = static_cast<double>(x);
  out.reserve(static_cast<std::size_t>(dx / std::log(dx) * std::log(std::log(dx + 4.0)) + 16));

  while (!heap.empty()) {
    Cursor c = heap.top();
    heap.pop();
    out.push_back({c.n, primes[c.i], primes[c.j]});
    std::size_t j = c.j + 1;
    if (j < primes.size() && primes[j] <= x / primes[c.i])
      heap.push({primes[c.i] * primes[j], c.i, j});
  }
  return out;
}

// Lemma-style short-interval count over (x, x+y] with the Hensley-type
// majorant 2y log log y / log y.
struct IntervalCountReport {
  double x = 0;
  double y = 0;
  std::uint64_t count = 0;
  double hensley_bound = 0;
  double ratio = 0;
};

inline IntervalCountReport count_semiprimes_interval(double x, double y,
                                                     const PrimeTable& table) {
  if (y < 3.0) throw DomainError("count_semiprimes_interval: y must be >= 3");
  if (x < 0.0) throw DomainError("count_semiprimes_interval: x must be >= 0");
  if (x + y > static_cast<double>(table.limit()))
    throw RangeError("count_semiprimes_interval: x + y exceeds the sieve limit");

  IntervalCountReport rep;
  rep.x = x;
  rep.y = y;
  std::uint64_t lo = static_cast<std::uint64_t>(x);  // count n > x, so start at lo+1
  std::uint64_t hi = static_cast<std::uint64_t>(x + y);
  for (std::uint64_t n = lo + 1; n <= hi; ++n)
    if (n >= 4 && is_semiprime(n, table)) ++rep.count;
  rep.hensley_bound = 2.0 * y * std::log(std::log(y)) / std::log(y);
  rep.ratio = static_cast<double>(rep.count) / rep.hensley_bound;
  return rep;
}

// m_s(q) = #{semiprime n <= x : q^s | n + a, n + a > 0}. Walks the residue
// class of -a mod q^s rather than the semiprimes.
inline std::uint64_t m_s(std::uint64_t q, std::uint32_t s, std::uint64_t x,
                         std::int64_t a, const PrimeTable& table) {
  if (q < 2) throw DomainError("m_s: q must be a prime >= 2");
  if (q <= table.limit() && !table.is_prime(q)) throw DomainError("m_s: q must be prime");
  if (s == 0) throw DomainError("m_s: s must be positive");
  if (a == 0) throw DomainError("m_s: a must be nonzero");
  std::uint64_t abs_a = static_cast<std::uint64_t>(a < 0 ? -a : a);
  if (x > table.limit() || abs_a > table.limit() - x)
    throw RangeError("m_s: x + |a| exceeds the sieve limit");

  // q^s > x + |a| admits no positive multiple of q^s among the n + a.
  std::uint64_t bound = x + abs_a;
  std::uint64_t qs = 1;
  for (std::uint32_t k = 0; k < s; ++k) {
    if (qs > bound / q) return 0;
    qs *= q;
  }
  if (qs > bound) return 0;

  std::uint64_t ra = residue_mod(a, qs);
  std::uint64_t r = ra == 0 ? 0 : qs - ra;  // n = r (mod q^s) makes q^s | n + a
  std::uint64_t lo = 4;
  if (a < 0) lo = std::max(lo, abs_a + 1);  // keep n + a positive
  if (lo > x) return 0;
  std::uint64_t n0 = lo + (r + qs - lo % qs) % qs;
  std::uint64_t count = 0;
  for (std::uint64_t n = n0; n <= x; n += qs)
    if (is_semiprime(n, table)) ++count;
  return count;
}

// Largest s with q^s <= x + 1, by integer power iteration.
inline std::uint32_t s_max(std::uint64_t q, std::uint64_t x) {
  if (q < 2) throw DomainError("s_max: q must be >= 2");
  if (x < 2) throw DomainError("s_max: x must be >= 2");
  std::uint32_t s = 0;
  std::uint64_t value = 1;
  std::uint64_t cap = (x + 1) / q;
  while (value <= cap) {
    value *= q;
    ++s;
  }
  return s;
}

}  // namespace sslb
