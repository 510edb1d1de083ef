#include "homog/reduction.hpp"

#include <cmath>
#include <vector>

#include "homog/error.hpp"

namespace homog {
namespace {

double pairwise(std::vector<double>& partials) {
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size();
  while (n > 1) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < n / 2; ++i) partials[i] = partials[2 * i] + partials[2 * i + 1];
    if (n % 2 == 1) partials[n / 2] = partials[n - 1];
    n = half;
  }
  return partials[0];
}

template <typename Term>
double blocked_sum(std::size_t n, Term term) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partials(blocks, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partials[static_cast<std::size_t>(b)] = s;
  }
  return pairwise(partials);
}

}  // namespace

double deterministic_sum(std::span<const double> values) {
  return blocked_sum(values.size(), [&](std::size_t i) { return values[i]; });
}

double deterministic_dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw GridMismatch("dot product of vectors with different lengths");
  return blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double reference_dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw GridMismatch("dot product of vectors with different lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

void CompensatedSum::add(const CompensatedSum& other) noexcept {
  add(other.sum_);
  add(other.carry_);
}

}  // namespace homog
