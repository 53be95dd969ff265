#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace ewaldmd {

// Screened-Coulomb functions of the dimensionless u = alpha r^2:
//   G(u) = erfc(sqrt(u)) / sqrt(u)
//   F(u) = (G(u) + 2 exp(-u) / sqrt(pi)) / u
// so erfc(sqrt(alpha) r) / r = sqrt(alpha) G and the radial force factor
// (q_i q_j times the separation vector gives the force) is alpha^(3/2) F.
std::pair<double, double> screened_coulomb_exact(double u);

// G and F tabulated on [2^kMinExponent, 2^kMaxExponent). Bins are selected by
// the exponent and leading mantissa bits of u, so each spans 1/64 of an
// octave; within a bin both functions are degree-6 polynomials (Chebyshev
// interpolants re-expanded in powers of the local coordinate). Relative error
// is ~1e-13 for u < 16; beyond that erfc < 1e-8 and the absolute error is
// negligible. No sqrt, division or exp is needed per lookup.
class ScreenedCoulombTable {
 public:
  static constexpr int kMinExponent = -20;
  static constexpr int kMaxExponent = 6;
  static constexpr int kMantissaBits = 6;
  static constexpr std::size_t kTerms = 7;

  static const ScreenedCoulombTable& instance();

  static constexpr bool covers(double u) {
    return u >= 1.0 / (1 << -kMinExponent) && u < static_cast<double>(1 << kMaxExponent);
  }

  // Requires covers(u).
  std::pair<double, double> operator()(double u) const {
    constexpr int kShift = 52 - kMantissaBits;
    const auto bits = std::bit_cast<std::uint64_t>(u);
    const std::uint64_t bin = (bits >> kShift) - (static_cast<std::uint64_t>(1023 + kMinExponent) << kMantissaBits);
    // Remaining mantissa bits as a double in [1, 2), mapped to t in [-1, 1).
    const double frac =
        std::bit_cast<double>(((bits & ((std::uint64_t{1} << kShift) - 1)) << kMantissaBits) | kOneBits);
    const double t = 2.0 * frac - 3.0;
    const double* g = coeff_.data() + bin * 2 * kTerms;
    const double* f = g + kTerms;
    return {poly(g, t), poly(f, t)};
  }

 private:
  static constexpr std::uint64_t kOneBits = 0x3FF0000000000000ULL;

  static double poly(const double* c, double t) {
    // Estrin's scheme keeps the dependency chain short.
    const double t2 = t * t;
    const double t4 = t2 * t2;
    return (c[0] + c[1] * t + (c[2] + c[3] * t) * t2) + (c[4] + c[5] * t + c[6] * t2) * t4;
  }

  ScreenedCoulombTable();
  std::vector<double> coeff_;  // per bin: kTerms for G, then kTerms for F
};

}  // namespace ewaldmd
