#pragma once

#include <cstdint>
#include <cstdlib>
#include <utility>
#include <vector>

#include "sslb/errors.hpp"
#include "sslb/prime_table.hpp"

namespace sslb {

// Prime-power decomposition of n. Factors are (prime, exponent) pairs
// with strictly increasing primes; the product reconstructs n exactly.
struct Factorization {
  std::uint64_t n = 0;
  std::vector<std::pair<std::uint64_t, std::uint32_t>> factors;
};

// n <= limit uses the spf chain; limit < n <= limit^2 falls back to trial
// division by the stored primes (the remainder after removing all p <=
// sqrt(n) is itself prime).
inline Factorization factorize(std::uint64_t n, const PrimeTable& table) {
  if (n < 2) throw DomainError("factorize: n must be >= 2");
  Factorization f;
  f.n = n;
  if (n <= table.limit()) {
    std::uint64_t m = n;
    while (m > 1) {
      std::uint64_t p = table.smallest_factor(m);
      std::uint32_t e = 0;
      do {
        m /= p;
        ++e;
      } while (m % p == 0);
      f.factors.emplace_back(p, e);
    }
    return f;
  }
  const std::uint64_t lim = table.limit();
  if (n / lim > lim) throw RangeError("factorize: n exceeds limit^2");
  std::uint64_t m = n;
  for (std::uint64_t p : table.primes()) {
    if (p * p > m) break;
    if (m % p != 0) continue;
    std::uint32_t e = 0;
    do {
      m /= p;
      ++e;
    } while (m % p == 0);
    f.factors.emplace_back(p, e);
  }
  if (m > 1) f.factors.emplace_back(m, 1);
  return f;
}

// P+(n): the largest prime factor.
inline std::uint64_t largest_prime_factor(std::uint64_t n, const PrimeTable& table) {
  if (n < 2) throw DomainError("largest_prime_factor: n must be >= 2");
  if (n <= table.limit()) {
    std::uint64_t m = n, top = 0;
    while (m > 1) {
      std::uint64_t p = table.smallest_factor(m);
      top = p;
      do {
        m /= p;
      } while (m % p == 0);
    }
    return top;
  }
  auto f = factorize(n, table);
  return f.factors.back().first;
}

// phi(q) = q * prod_{p|q} (1 - 1/p), exact in integers.
inline std::uint64_t euler_phi(std::uint64_t q, const PrimeTable& table) {
  if (q == 0) throw DomainError("euler_phi: q must be positive");
  if (q == 1) return 1;
  std::uint64_t r = q;
  for (const auto& [p, e] : factorize(q, table).factors) r = r / p * (p - 1);
  return r;
}

// tau(|a|): number of divisors.
inline std::uint64_t divisor_count(std::int64_t a, const PrimeTable& table) {
  if (a == 0) throw DomainError("divisor_count: a must be nonzero");
  std::uint64_t n = a < 0 ? static_cast<std::uint64_t>(-(a + 1)) + 1
                          : static_cast<std::uint64_t>(a);
  if (n == 1) return 1;
  std::uint64_t t = 1;
  for (const auto& [p, e] : factorize(n, table).factors) t *= e + 1;
  return t;
}

// Inverse of u mod m in [1, m-1], extended Euclid. Throws NoInverseError
// when gcd(u, m) != 1 (the p1 = q collision case; callers skip the term).
inline std::uint64_t mod_inverse(std::int64_t u, std::uint64_t m) {
  if (m < 2) throw DomainError("mod_inverse: modulus must be >= 2");
  std::int64_t mm = static_cast<std::int64_t>(m);
  std::int64_t a = ((u % mm) + mm) % mm;
  std::int64_t r0 = mm, r1 = a, t0 = 0, t1 = 1;
  while (r1 != 0) {
    std::int64_t q = r0 / r1;
    r0 -= q * r1;
    std::swap(r0, r1);
    t0 -= q * t1;
    std::swap(t0, t1);
  }
  if (r0 != 1) throw NoInverseError("mod_inverse: arguments are not coprime");
  return static_cast<std::uint64_t>(((t0 % mm) + mm) % mm);
}

// Canonical residue of a possibly negative shift: a = -1 means q - 1.
inline std::uint64_t residue_mod(std::int64_t a, std::uint64_t q) {
  if (q == 0) throw DomainError("residue_mod: modulus must be positive");
  std::int64_t qq = static_cast<std::int64_t>(q);
  return static_cast<std::uint64_t>(((a % qq) + qq) % qq);
}

}  // namespace sslb
