#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <new>
#include <numeric>
#include <vector>

#include "sslb/errors.hpp"
#include "sslb/parallel.hpp"

namespace sslb {

// Sieve output shared by every other module: the ordered primes up to
// `limit` plus a smallest-prime-factor table for O(log n) factorization.
// spf storage uses 0 as the "n is prime" sentinel (the spf of a composite
// n is <= sqrt(n), so it always fits in 32 bits); smallest_factor()
// resolves the sentinel. Immutable after construction, safe to share
// across threads.
class PrimeTable {
 public:
  struct SieveOptions {
    unsigned workers = 1;
    std::size_t segment_size = std::size_t{1} << 20;
    // 0 = unlimited. Checked against the spf table + primes estimate
    // before allocating.
    std::uint64_t memory_budget_bytes = 0;
  };

  static PrimeTable sieve(std::uint64_t limit) { return sieve(limit, SieveOptions{}); }

  static PrimeTable sieve(std::uint64_t limit, const SieveOptions& opt) {
    if (limit < 2) throw DomainError("sieve limit must be >= 2");
    PrimeTable t;
    t.limit_ = limit;
    if (opt.memory_budget_bytes != 0) {
      // spf entries + a pi(limit) ~ limit/log(limit) primes vector.
      long double est = (static_cast<long double>(limit) + 1) * 4;
      long double lg = std::log(static_cast<long double>(std::max<std::uint64_t>(limit, 3)));
      est += static_cast<long double>(limit) / lg * 8 * 1.2L;
      if (est > static_cast<long double>(opt.memory_budget_bytes))
        throw ResourceError("sieve would exceed the configured memory budget");
    }
    try {
      t.build(opt);
    } catch (const std::bad_alloc&) {
      throw ResourceError("allocation failed while sieving");
    }
    return t;
  }

  // Rebuild from a deserialized spf table (cache path). Derives the primes
  // vector from the sentinel entries.
  static PrimeTable from_spf(std::uint64_t limit, std::vector<std::uint32_t> spf) {
    if (limit < 2 || spf.size() != limit + 1)
      throw DomainError("spf table size does not match limit");
    PrimeTable t;
    t.limit_ = limit;
    t.spf_ = std::move(spf);
    for (std::uint64_t n = 2; n <= limit; ++n)
      if (t.spf_[n] == 0) t.primes_.push_back(n);
    return t;
  }

  std::uint64_t limit() const { return limit_; }
  const std::vector<std::uint64_t>& primes() const { return primes_; }

  bool is_prime(std::uint64_t n) const { return n >= 2 && n <= limit_ && spf_[n] == 0; }

  // Raw entry: 0 means prime (for n >= 2).
  std::uint32_t spf_raw(std::uint64_t n) const { return spf_[n]; }
  const std::vector<std::uint32_t>& spf_table() const { return spf_; }

  std::uint64_t smallest_factor(std::uint64_t n) const {
    if (n < 2 || n > limit_) throw RangeError("smallest_factor: n outside table range");
    std::uint32_t s = spf_[n];
    return s == 0 ? n : s;
  }

  // pi(x): number of primes <= x.
  std::size_t count_primes_upto(double x) const {
    if (x < 2) return 0;
    std::uint64_t n = static_cast<std::uint64_t>(x);
    return static_cast<std::size_t>(
        std::upper_bound(primes_.begin(), primes_.end(), n) - primes_.begin());
  }

  // Index of the first prime strictly greater than x.
  std::size_t first_prime_index_above(double x) const {
    if (x < 2) return 0;
    std::uint64_t n = static_cast<std::uint64_t>(x);
    return static_cast<std::size_t>(
        std::upper_bound(primes_.begin(), primes_.end(), n) - primes_.begin());
  }

  // Empty table; every lookup is out of range until assigned from sieve or
  // from_spf.
  PrimeTable() = default;

 private:

  void build(const SieveOptions& opt) {
    const std::uint64_t limit = limit_;
    spf_.assign(limit + 1, 0);

    // Base primes up to sqrt(limit) via a plain local sieve.
    std::uint64_t root = 1;
    while ((root + 1) * (root + 1) <= limit) ++root;
    std::vector<std::uint8_t> comp(root + 1, 0);
    std::vector<std::uint64_t> base;
    for (std::uint64_t p = 2; p <= root; ++p) {
      if (comp[p]) continue;
      base.push_back(p);
      for (std::uint64_t m = p * p; m <= root; m += p) comp[m] = 1;
    }

    // Mark segments independently: any unmarked multiple of p is >= p*p,
    // so each segment only needs the base primes in ascending order.
    const std::uint64_t seg = std::max<std::size_t>(opt.segment_size, 1024);
    const std::size_t nsegs = static_cast<std::size_t>((limit - 1) / seg + 1);
    run_blocks(nsegs, opt.workers, [&](std::size_t si, unsigned) {
      const std::uint64_t lo = 2 + static_cast<std::uint64_t>(si) * seg;
      const std::uint64_t hi = std::min(lo + seg - 1, limit);
      for (std::uint64_t p : base) {
        if (p * p > hi) break;
        std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
        for (std::uint64_t m = start; m <= hi; m += p)
          if (spf_[m] == 0) spf_[m] = static_cast<std::uint32_t>(p);
      }
    });

    // Collect primes: per-segment counts, exclusive prefix, parallel fill.
    std::vector<std::size_t> counts(nsegs, 0);
    run_blocks(nsegs, opt.workers, [&](std::size_t si, unsigned) {
      const std::uint64_t lo = 2 + static_cast<std::uint64_t>(si) * seg;
      const std::uint64_t hi = std::min(lo + seg - 1, limit);
      std::size_t c = 0;
      for (std::uint64_t n = lo; n <= hi; ++n)
        if (spf_[n] == 0) ++c;
      counts[si] = c;
    });
    std::vector<std::size_t> offsets(nsegs, 0);
    std::exclusive_scan(counts.begin(), counts.end(), offsets.begin(), std::size_t{0});
    primes_.resize(offsets.back() + counts.back());
    run_blocks(nsegs, opt.workers, [&](std::size_t si, unsigned) {
      const std::uint64_t lo = 2 + static_cast<std::uint64_t>(si) * seg;
      const std::uint64_t hi = std::min(lo + seg - 1, limit);
      std::size_t at = offsets[si];
      for (std::uint64_t n = lo; n <= hi; ++n)
        if (spf_[n] == 0) primes_[at++] = n;
    });
  }

  std::uint64_t limit_ = 0;
  std::vector<std::uint32_t> spf_;
  std::vector<std::uint64_t> primes_;
};

}  // namespace sslb
