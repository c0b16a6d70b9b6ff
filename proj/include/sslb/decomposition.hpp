#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sslb/errors.hpp"
#include "sslb/parallel.hpp"
#include "sslb/prime_table.hpp"
#include "sslb/summation.hpp"

namespace sslb {

struct DecompositionParams {
  std::uint64_t x = 0;
  std::int64_t a = -1;
  double theta = 0.62;
  double epsilon = 0.005;
  double bv_exponent = 1.0;     // B in Q = x^{1/4} (log x)^{-B}
  double bv_exponent_c2 = 1.0;  // B(p1) in Q1 = sqrt(x/p1) (log(x/p1))^{-B}
  double r = 1.5;               // subdivision ratio, reporting only
  std::optional<double> q_override;
  bool allow_exploratory = false;

  // Theorem-mode runs keep theta inside (0.6, 0.625); exploratory runs may
  // widen to the structural range (0.5, 1).
  void validate() const {
    if (x < 4) throw DomainError("params: x must be >= 4");
    if (a == 0) throw DomainError("params: a must be nonzero");
    if (!(theta > 0.5 && theta < 1.0))
      throw DomainError("params: theta must lie in (0.5, 1)");
    if (!allow_exploratory && !(theta > 0.6 && theta < 0.625))
      throw DomainError(
          "params: theta outside the theorem window (0.6, 0.625); "
          "pass allow_exploratory to widen");
    if (!(epsilon > 0.0 && epsilon <= 0.01))
      throw DomainError("params: epsilon must lie in (0, 0.01]");
    if (!(bv_exponent >= 0.0)) throw DomainError("params: bv_exponent must be >= 0");
    if (!(bv_exponent_c2 >= 0.0))
      throw DomainError("params: bv_exponent_c2 must be >= 0");
    if (!(r > 1.0 && r < 2.0)) throw DomainError("params: r must lie in (1, 2)");
    if (q_override && !(*q_override > 0.0 && std::isfinite(*q_override)))
      throw DomainError("params: q_override must be positive and finite");
  }
};

enum Bucket : int { kA = 0, kB, kC1, kC2, kC3, kC4, kC5, kResidual, kNumBuckets };

inline const std::array<const char*, kNumBuckets>& bucket_names() {
  static const std::array<const char*, kNumBuckets> names = {
      "A", "B", "C1", "C2", "C3", "C4", "C5", "residual"};
  return names;
}

// nu_q = sum_s m_s; m[s-1] holds m_s.
struct LedgerEntry {
  std::uint64_t q = 0;
  std::uint64_t nu = 0;
  std::vector<std::uint32_t> m;
};

struct ExponentLedger {
  std::uint64_t x = 0;
  std::int64_t a = 0;
  std::vector<LedgerEntry> entries;  // ascending q
  std::uint64_t semiprime_count = 0;
  std::uint64_t skipped_terms = 0;  // n + a < 2

  const LedgerEntry* find(std::uint64_t q) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), q,
                               [](const LedgerEntry& e, std::uint64_t v) { return e.q < v; });
    return it != entries.end() && it->q == q ? &*it : nullptr;
  }

  // sum nu_q log q, ascending q; equals log R up to float tolerance.
  double weighted_log_sum() const {
    CompensatedSum s;
    for (const auto& e : entries)
      s.add(static_cast<double>(e.nu) * std::log(static_cast<double>(e.q)));
    return s.value();
  }
};

struct DecompositionReport {
  DecompositionParams params;
  double logR = 0;
  std::array<double, kNumBuckets> sums{};
  std::array<std::uint64_t, kNumBuckets> counts{};
  double c2_bv = 0, c2_bt = 0;  // C2 split at Q1, informational
  std::uint64_t c2_bv_count = 0, c2_bt_count = 0;
  double Q_used = 0;
  std::uint64_t Q_floor = 0;
  std::uint64_t max_pplus = 0;
  double theta_star = 0;
  std::uint64_t semiprime_count = 0;
  std::uint64_t skipped_terms = 0;
  std::uint64_t incidence_count = 0;
  bool empty_range = false;
  std::vector<std::pair<std::string, double>> ratios;

  double bucket_total() const {
    CompensatedSum t;
    for (double v : sums) t.add(v);
    return t.value();
  }
};

// Each bucket against the shape of its claimed majorant/minorant, eta terms
// dropped. Pure reporting.
inline std::vector<std::pair<std::string, double>> asymptotic_ratios(
    const DecompositionReport& rep) {
  double x = static_cast<double>(rep.params.x);
  double lx = std::log(x);
  double llx = std::log(lx);
  double th = rep.params.theta;
  std::vector<std::pair<std::string, double>> out;
  out.emplace_back("a_ratio", rep.sums[kA] / (0.25 * x * llx));
  out.emplace_back("b_ratio", rep.sums[kB] / (std::pow(x, 11.0 / 12.0) *
                                              std::pow(lx, 1.0 + rep.params.bv_exponent / 3.0)));
  out.emplace_back("c1_ratio", rep.sums[kC1] * lx / (x * llx * llx));
  out.emplace_back("c2_ratio", rep.sums[kC2] / (0.25 * x * llx));
  out.emplace_back("c3_ratio", rep.sums[kC3] / ((th - 0.5) * x * llx));
  out.emplace_back("c4_ratio", rep.sums[kC4] / x);
  double c5_denom = (2.5 - 4.0 * th) * x * llx;
  out.emplace_back("c5_ratio", c5_denom < 1e-12
                                   ? std::numeric_limits<double>::infinity()
                                   : rep.sums[kC5] / c5_denom);
  return out;
}

namespace detail {

// p2 index chunks of fixed grain per p1; boundaries do not depend on the
// worker count, so block-ordered float merges are reproducible.
inline constexpr std::size_t kBlockGrain = 32768;

struct SemiprimeBlock {
  std::size_t i;   // p1 index
  std::size_t jb;  // first p2 index
  std::size_t je;  // one past last p2 index
};

inline std::vector<SemiprimeBlock> make_semiprime_blocks(std::uint64_t x,
                                                         const PrimeTable& table) {
  std::vector<SemiprimeBlock> blocks;
  const auto& primes = table.primes();
  for (std::size_t i = 0; i < primes.size(); ++i) {
    std::uint64_t p = primes[i];
    if (p > x / p) break;
    std::uint64_t cap = x / p;
    std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(primes.begin(), primes.end(), cap) - primes.begin());
    for (std::size_t jb = i; jb < hi; jb += kBlockGrain)
      blocks.push_back({i, jb, std::min(jb + kBlockGrain, hi)});
  }
  return blocks;
}

struct BlockPartial {
  std::array<CompensatedSum, kNumBuckets> sums;
  std::array<std::uint64_t, kNumBuckets> counts{};
  CompensatedSum c2_bv, c2_bt, logR;
  std::uint64_t c2_bv_count = 0, c2_bt_count = 0;
  std::uint64_t semis = 0, skipped = 0, max_pplus = 0;
};

}  // namespace detail

struct DecompositionResult {
  DecompositionReport report;
  ExponentLedger ledger;
  bool has_ledger = false;
};

// One pass over all semiprimes n <= x: factor n + a once and credit every
// prime-power incidence (n, q, s) to exactly one bucket; optionally also
// accumulate the per-q ledger. Block boundaries and merge order are fixed,
// so the result is identical for every worker count.
inline DecompositionResult decompose_pass(const DecompositionParams& params,
                                          const PrimeTable& table, unsigned workers = 1,
                                          bool want_ledger = false) {
  if (params.a == 0) throw DomainError("decompose: a must be nonzero");
  if (params.x < 1) throw DomainError("decompose: x must be positive");
  std::uint64_t abs_a = static_cast<std::uint64_t>(params.a < 0 ? -params.a : params.a);
  if (params.x > table.limit() || abs_a > table.limit() - params.x)
    throw RangeError("decompose: x + |a| exceeds the sieve limit");
  if (workers == 0) workers = 1;

  const double dx = static_cast<double>(params.x);
  const double Q = params.q_override ? *params.q_override
                                     : std::pow(dx, 0.25) * std::pow(std::log(dx), -params.bv_exponent);
  const std::uint64_t Qf =
      Q >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max()
                  : static_cast<std::uint64_t>(std::floor(Q));
  const double x14 = std::pow(dx, 0.25);
  const double xth = std::pow(dx, params.theta);
  const double p1th = std::pow(dx, 1.0 - 4.0 * params.theta / (3.0 - params.epsilon));

  auto blocks = detail::make_semiprime_blocks(params.x, table);
  std::vector<detail::BlockPartial> partials(blocks.size());
  using WorkerLedger = std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>;
  std::vector<WorkerLedger> wledgers(want_ledger ? workers : 0);

  const auto& primes = table.primes();
  const auto& spf = table.spf_table();
  const std::int64_t a = params.a;

  run_blocks(blocks.size(), workers, [&](std::size_t bi, unsigned wid) {
    const auto& blk = blocks[bi];
    auto& part = partials[bi];
    WorkerLedger* led = want_ledger ? &wledgers[wid] : nullptr;

    const std::uint64_t p1 = primes[blk.i];
    const double xp = dx / static_cast<double>(p1);
    const double sq = std::sqrt(xp);
    const double q1t = sq * std::pow(std::log(xp), -params.bv_exponent_c2);
    const double btt = std::pow(xp, 0.75 - params.epsilon);
    const double p1d = static_cast<double>(p1);

    for (std::size_t j = blk.jb; j < blk.je; ++j) {
      std::int64_t m = static_cast<std::int64_t>(p1 * primes[j]) + a;
      if (m < 2) {
        ++part.skipped;
        continue;
      }
      ++part.semis;
      part.logR.add(std::log(static_cast<double>(m)));

      std::uint64_t rem = static_cast<std::uint64_t>(m);
      std::uint64_t last_q = 0;
      while (rem > 1) {
        std::uint32_t f = spf[rem];
        std::uint64_t q = f ? f : rem;
        last_q = q;
        const double qd = static_cast<double>(q);
        const double lq = std::log(qd);
        std::uint64_t qs = 1;
        std::uint32_t e = 0;
        while (rem % q == 0) {
          rem /= q;
          ++e;
          qs *= q;
          int bucket;
          if (qs <= Qf) {
            bucket = kA;
          } else if (e >= 2) {
            bucket = kB;
          } else if (qd <= x14) {
            bucket = kC1;
          } else if (qd <= sq) {
            bucket = kC2;
            if (qd <= q1t) {
              part.c2_bv.add(lq);
              ++part.c2_bv_count;
            } else {
              part.c2_bt.add(lq);
              ++part.c2_bt_count;
            }
          } else if (qd > xth) {
            bucket = kC5;
          } else if (p1d <= p1th) {
            bucket = kC3;
          } else if (qd > btt) {
            bucket = kC4;
          } else {
            bucket = kResidual;
          }
          part.sums[bucket].add(lq);
          ++part.counts[bucket];
        }
        if (led) {
          auto& mvec = (*led)[q];
          if (mvec.size() < e) mvec.resize(e, 0);
          for (std::uint32_t s = 0; s < e; ++s) ++mvec[s];
        }
      }
      if (last_q > part.max_pplus) part.max_pplus = last_q;
    }
  });

  DecompositionResult res;
  auto& rep = res.report;
  rep.params = params;
  rep.Q_used = Q;
  rep.Q_floor = Qf;

  std::array<CompensatedSum, kNumBuckets> sums;
  CompensatedSum c2_bv, c2_bt, logR;
  for (const auto& part : partials) {
    for (int k = 0; k < kNumBuckets; ++k) {
      sums[k].merge(part.sums[k]);
      rep.counts[k] += part.counts[k];
    }
    c2_bv.merge(part.c2_bv);
    c2_bt.merge(part.c2_bt);
    logR.merge(part.logR);
    rep.c2_bv_count += part.c2_bv_count;
    rep.c2_bt_count += part.c2_bt_count;
    rep.semiprime_count += part.semis;
    rep.skipped_terms += part.skipped;
    rep.max_pplus = std::max(rep.max_pplus, part.max_pplus);
  }
  for (int k = 0; k < kNumBuckets; ++k) {
    rep.sums[k] = sums[k].value();
    rep.incidence_count += rep.counts[k];
  }
  rep.c2_bv = c2_bv.value();
  rep.c2_bt = c2_bt.value();
  rep.logR = logR.value();
  rep.empty_range = rep.semiprime_count == 0;
  rep.theta_star =
      rep.max_pplus ? std::log(static_cast<double>(rep.max_pplus)) / std::log(dx) : 0.0;
  rep.ratios = asymptotic_ratios(rep);

  if (want_ledger) {
    res.has_ledger = true;
    res.ledger.x = params.x;
    res.ledger.a = params.a;
    res.ledger.semiprime_count = rep.semiprime_count;
    res.ledger.skipped_terms = rep.skipped_terms;
    WorkerLedger merged;
    for (auto& wl : wledgers) {
      for (auto& [q, mvec] : wl) {
        auto& dst = merged[q];
        if (dst.size() < mvec.size()) dst.resize(mvec.size(), 0);
        for (std::size_t s = 0; s < mvec.size(); ++s) dst[s] += mvec[s];
      }
      wl.clear();
    }
    res.ledger.entries.reserve(merged.size());
    for (auto& [q, mvec] : merged) {
      LedgerEntry e;
      e.q = q;
      e.m = std::move(mvec);
      for (std::uint32_t c : e.m) e.nu += c;
      res.ledger.entries.push_back(std::move(e));
    }
    std::sort(res.ledger.entries.begin(), res.ledger.entries.end(),
              [](const LedgerEntry& l, const LedgerEntry& r2) { return l.q < r2.q; });
  }
  return res;
}

// Tiling: A + B + sum C_i + residual must reproduce log R; a violation is
// always a bug, never data.
inline void enforce_tiling(const DecompositionReport& rep) {
  double total = rep.bucket_total();
  double tol = 1e-9 * std::max(1.0, std::abs(rep.logR));
  if (std::abs(total - rep.logR) > tol)
    throw InvariantError("tiling violation: bucket total " + std::to_string(total) +
                         " != logR " + std::to_string(rep.logR));
}

inline DecompositionReport classify_incidences(const DecompositionParams& params,
                                               const PrimeTable& table,
                                               unsigned workers = 1) {
  params.validate();
  auto rep = decompose_pass(params, table, workers, false).report;
  enforce_tiling(rep);
  return rep;
}

struct LogRValue {
  double value = 0;
  bool empty_range = false;
  std::uint64_t skipped_terms = 0;
};

inline LogRValue compute_logR(std::uint64_t x, std::int64_t a, const PrimeTable& table,
                              unsigned workers = 1) {
  DecompositionParams p;
  p.x = x;
  p.a = a;
  auto rep = decompose_pass(p, table, workers, false).report;
  return {rep.logR, rep.empty_range, rep.skipped_terms};
}

inline ExponentLedger build_ledger(std::uint64_t x, std::int64_t a, const PrimeTable& table,
                                   unsigned workers = 1) {
  DecompositionParams p;
  p.x = x;
  p.a = a;
  return std::move(decompose_pass(p, table, workers, true).ledger);
}

// C5 mass: sum of m_1(q) log q over q > x^theta. Positive exactly when some
// P+(n + a) exceeds x^theta.
inline double c5_mass(const ExponentLedger& ledger, double theta) {
  double xth = std::pow(static_cast<double>(ledger.x), theta);
  CompensatedSum s;
  for (const auto& e : ledger.entries) {
    if (static_cast<double>(e.q) > xth && !e.m.empty() && e.m[0] > 0)
      s.add(static_cast<double>(e.m[0]) * std::log(static_cast<double>(e.q)));
  }
  return s.value();
}

struct TheoremCheck {
  std::uint64_t x = 0;
  std::uint64_t max_pplus = 0;
  double theta_star = 0;
  bool pass = false;
};

// max P+(n + a) over semiprimes n <= x, against x^theta.
inline TheoremCheck verify_theorem(std::uint64_t x, std::int64_t a, double theta,
                                   const PrimeTable& table, unsigned workers = 1) {
  if (a == 0) throw DomainError("verify_theorem: a must be nonzero");
  if (x < 4) throw DomainError("verify_theorem: x must be >= 4");
  std::uint64_t abs_a = static_cast<std::uint64_t>(a < 0 ? -a : a);
  if (x > table.limit() || abs_a > table.limit() - x)
    throw RangeError("verify_theorem: x + |a| exceeds the sieve limit");
  if (workers == 0) workers = 1;

  auto blocks = detail::make_semiprime_blocks(x, table);
  std::vector<std::uint64_t> block_max(blocks.size(), 0);
  std::vector<std::uint64_t> block_terms(blocks.size(), 0);
  const auto& primes = table.primes();
  const auto& spf = table.spf_table();

  run_blocks(blocks.size(), workers, [&](std::size_t bi, unsigned) {
    const auto& blk = blocks[bi];
    const std::uint64_t p1 = primes[blk.i];
    std::uint64_t best = 0, terms = 0;
    for (std::size_t j = blk.jb; j < blk.je; ++j) {
      std::int64_t m = static_cast<std::int64_t>(p1 * primes[j]) + a;
      if (m < 2) continue;
      ++terms;
      std::uint64_t rem = static_cast<std::uint64_t>(m);
      std::uint64_t q = 0;
      while (rem > 1) {
        std::uint32_t f = spf[rem];
        q = f ? f : rem;
        while (rem % q == 0) rem /= q;
      }
      if (q > best) best = q;
    }
    block_max[bi] = best;
    block_terms[bi] = terms;
  });

  TheoremCheck out;
  out.x = x;
  std::uint64_t terms = 0;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    out.max_pplus = std::max(out.max_pplus, block_max[bi]);
    terms += block_terms[bi];
  }
  if (terms == 0) throw DomainError("verify_theorem: no semiprime terms in range");
  out.theta_star = std::log(static_cast<double>(out.max_pplus)) /
                   std::log(static_cast<double>(x));
  out.pass = static_cast<double>(out.max_pplus) > std::pow(static_cast<double>(x), theta);
  return out;
}

inline std::vector<TheoremCheck> theta_scan(const std::vector<std::uint64_t>& xs,
                                            std::int64_t a, double theta,
                                            const PrimeTable& table, unsigned workers = 1) {
  std::vector<TheoremCheck> out;
  out.reserve(xs.size());
  for (std::uint64_t x : xs) out.push_back(verify_theorem(x, a, theta, table, workers));
  return out;
}

}  // namespace sslb
