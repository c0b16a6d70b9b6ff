#pragma once

#include <stdexcept>
#include <string>

namespace sslb {

// Error taxonomy mirrors the CLI exit codes: domain/config -> 1,
// resource -> 2, internal invariant -> 3. Check failures (a lemma ratio
// out of bounds, a theorem row failing) are ordinary return values, not
// exceptions.

struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

struct RangeError : std::out_of_range {
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// A violated internal invariant (e.g. the bucket tiling failing to add up
// to log R). Always a bug, never a user error.
struct InvariantError : std::logic_error {
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

// gcd(u, m) != 1 in a modular inverse. Callers treat this as the p1 = q
// collision signal and skip the offending term.
struct NoInverseError : DomainError {
  explicit NoInverseError(const std::string& what) : DomainError(what) {}
};

}  // namespace sslb
