#pragma once

#include <cmath>

namespace sslb {

// Neumaier-compensated accumulator. Long bucket sums add ~10^7 log-terms;
// naive accumulation loses ~3 digits there, compensation keeps the error
// at a few ulps. Merging partials in a fixed order keeps results
// bit-identical across worker counts.
class CompensatedSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  // Canonical merge rule: fold the partial's main term, then its
  // compensation. Call in ascending block order.
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace sslb
