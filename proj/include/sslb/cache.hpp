#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sslb/errors.hpp"
#include "sslb/prime_table.hpp"

namespace sslb {

// Sieve cache layout: "SSLB", version byte 0x01, limit as 8-byte LE, then the
// spf entries for n = 2..limit as 4-byte LE (0 = prime sentinel). Any
// mismatch or truncation invalidates the file; it is never partially reused.

inline constexpr unsigned char kCacheVersion = 0x01;

namespace detail {

inline void put_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline bool get_u64_le(std::istream& is, std::uint64_t& v) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return true;
}

}  // namespace detail

inline void write_sieve_cache(const std::string& path, const PrimeTable& table) {
  namespace fs = std::filesystem;
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ResourceError("cache: cannot open " + tmp + " for writing");
    os.write("SSLB", 4);
    os.put(static_cast<char>(kCacheVersion));
    detail::put_u64_le(os, table.limit());
    const auto& spf = table.spf_table();
    static_assert(sizeof(spf[0]) == 4);
    if constexpr (std::endian::native == std::endian::little) {
      os.write(reinterpret_cast<const char*>(spf.data() + 2),
               static_cast<std::streamsize>(4 * (spf.size() - 2)));
    } else {
      for (std::size_t n = 2; n < spf.size(); ++n) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(spf[n] >> (8 * i));
        os.write(reinterpret_cast<const char*>(b), 4);
      }
    }
    if (!os) throw ResourceError("cache: write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ResourceError("cache: cannot move " + tmp + " to " + path);
  }
}

// nullopt on any mismatch: missing file, bad magic or version, limit other
// than requested, truncation, trailing bytes, or an entry that cannot be a
// smallest factor.
inline std::optional<PrimeTable> try_read_sieve_cache(const std::string& path,
                                                      std::uint64_t limit) {
  if (limit < 2) return std::nullopt;
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[4];
  if (!is.read(magic, 4) || std::string_view(magic, 4) != "SSLB") return std::nullopt;
  int version = is.get();
  if (version != kCacheVersion) return std::nullopt;
  std::uint64_t file_limit = 0;
  if (!detail::get_u64_le(is, file_limit) || file_limit != limit) return std::nullopt;

  std::vector<std::uint32_t> spf(limit + 1, 0);
  if constexpr (std::endian::native == std::endian::little) {
    if (!is.read(reinterpret_cast<char*>(spf.data() + 2),
                 static_cast<std::streamsize>(4 * (limit - 1))))
      return std::nullopt;
  } else {
    for (std::uint64_t n = 2; n <= limit; ++n) {
      unsigned char b[4];
      if (!is.read(reinterpret_cast<char*>(b), 4)) return std::nullopt;
      std::uint32_t v = 0;
      for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
      spf[n] = v;
    }
  }
  if (is.get() != std::char_traits<char>::eof()) return std::nullopt;

  for (std::uint64_t n = 2; n <= limit; ++n) {
    std::uint32_t p = spf[n];
    if (p == 0) continue;
    if (p < 2 || static_cast<std::uint64_t>(p) * p > n || n % p != 0) return std::nullopt;
  }
  return PrimeTable::from_spf(limit, std::move(spf));
}

// Read-through: a valid cache short-circuits the sieve; otherwise sieve and
// (best effort) refresh the file.
inline PrimeTable cached_sieve(const std::string& path, std::uint64_t limit,
                               const PrimeTable::SieveOptions& opt = {},
                               bool* cache_hit = nullptr) {
  if (auto t = try_read_sieve_cache(path, limit)) {
    if (cache_hit) *cache_hit = true;
    return std::move(*t);
  }
  if (cache_hit) *cache_hit = false;
  PrimeTable t = PrimeTable::sieve(limit, opt);
  write_sieve_cache(path, t);
  return t;
}

}  // namespace sslb
