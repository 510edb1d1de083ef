#pragma once

#include <cstddef>
#include <span>

namespace homog {

/// Block size of the fixed summation tree. Partial sums are formed over
/// contiguous blocks of this many terms and then combined pairwise, so the
/// result does not depend on the number of OpenMP threads.
inline constexpr std::size_t kReductionBlock = 1024;

/// Deterministic parallel sum.
double deterministic_sum(std::span<const double> values);

/// Deterministic parallel dot product sum_i a_i b_i.
double deterministic_dot(std::span<const double> a, std::span<const double> b);

/// Serial left-to-right dot product, kept as the reference for tests.
double reference_dot(std::span<const double> a, std::span<const double> b);

/// Neumaier-compensated accumulator. Sums of band-limited periodic samples
/// come out correctly rounded in practice, which keeps means of
/// trigonometric coefficients exact.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  void add(const CompensatedSum& other) noexcept;
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace homog
