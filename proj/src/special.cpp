#include "ewaldmd/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <tuple>

namespace ewaldmd {

std::pair<double, double> screened_coulomb_exact(double u) {
  const double x = std::sqrt(u);
  const double g = std::erfc(x) / x;
  return {g, (g + 2.0 / std::sqrt(std::numbers::pi) * std::exp(-u)) / u};
}

namespace {

constexpr std::size_t kTerms = ScreenedCoulombTable::kTerms;

// Coefficients in powers of t of the Chebyshev interpolant through samples
// taken at the Chebyshev nodes t_j = cos(pi (j + 1/2) / n).
std::array<double, kTerms> monomial_interpolant(const std::array<double, kTerms>& samples) {
  constexpr std::size_t n = kTerms;
  std::array<double, n> cheb{};
  for (std::size_t k = 0; k < n; ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += samples[j] *
             std::cos(std::numbers::pi * static_cast<double>(k) * (static_cast<double>(j) + 0.5) / static_cast<double>(n));
    }
    cheb[k] = (k == 0 ? 1.0 : 2.0) * sum / static_cast<double>(n);
  }
  // T_{k+1} = 2 t T_k - T_{k-1}, tracked in powers of t.
  std::array<double, n> prev{};
  std::array<double, n> cur{};
  std::array<double, n> mono{};
  prev[0] = 1.0;
  cur[1] = 1.0;
  mono[0] = cheb[0];
  mono[1] = cheb[1];
  for (std::size_t k = 2; k < n; ++k) {
    std::array<double, n> next{};
    for (std::size_t d = 0; d < n; ++d) next[d] = (d > 0 ? 2.0 * cur[d - 1] : 0.0) - prev[d];
    for (std::size_t d = 0; d < n; ++d) mono[d] += cheb[k] * next[d];
    prev = cur;
    cur = next;
  }
  return mono;
}

}  // namespace

ScreenedCoulombTable::ScreenedCoulombTable() {
  constexpr int per_octave = 1 << kMantissaBits;
  const std::size_t bins = static_cast<std::size_t>(kMaxExponent - kMinExponent) * per_octave;
  coeff_.resize(bins * 2 * kTerms);
  for (std::size_t b = 0; b < bins; ++b) {
    const int exponent = kMinExponent + static_cast<int>(b / per_octave);
    const auto m = static_cast<double>(b % per_octave);
    const double lo = std::ldexp(1.0 + m / per_octave, exponent);
    const double hi = std::ldexp(1.0 + (m + 1.0) / per_octave, exponent);
    std::array<double, kTerms> g{};
    std::array<double, kTerms> f{};
    for (std::size_t j = 0; j < kTerms; ++j) {
      const double t = std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(kTerms));
      std::tie(g[j], f[j]) = screened_coulomb_exact(lo + (hi - lo) * 0.5 * (t + 1.0));
    }
    const auto gc = monomial_interpolant(g);
    const auto fc = monomial_interpolant(f);
    std::copy(gc.begin(), gc.end(), coeff_.begin() + static_cast<std::ptrdiff_t>(b * 2 * kTerms));
    std::copy(fc.begin(), fc.end(), coeff_.begin() + static_cast<std::ptrdiff_t>(b * 2 * kTerms + kTerms));
  }
}

const ScreenedCoulombTable& ScreenedCoulombTable::instance() {
  static const ScreenedCoulombTable table;
  return table;
}

}  // namespace ewaldmd
