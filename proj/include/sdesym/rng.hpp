#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace sdesym {

/// Counter-based random streams built on Philox4x32-10 (Salmon et al.,
/// "Parallel random numbers: as easy as 1, 2, 3", SC 2011).
///
/// Draw d of stream s under master seed k is a pure function
/// philox(key = k, counter = (d_lo, d_hi, stream_lo, stream_hi)); substreams
/// never need coordination, results are independent of draw order, and the
/// same (seed, stream, draw) always reproduces the same value.
namespace rng {

namespace detail {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace detail

inline std::array<std::uint32_t, 4> philox4x32(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  constexpr std::uint32_t kWeylB = 0xBB67AE85u;
  constexpr std::uint32_t kMulA = 0xD2511F53u;
  constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    detail::mulhilo(kMulA, ctr[0], lo0, hi0);
    detail::mulhilo(kMulB, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

/// Uniform double in the open interval (0, 1) with 53-bit resolution.
inline double uniform_open01(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t draw) {
  std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                      static_cast<std::uint32_t>(seed >> 32)};
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32),
      static_cast<std::uint32_t>(stream),
      static_cast<std::uint32_t>(stream >> 32)};
  auto out = philox4x32(ctr, key);
  std::uint64_t bits =
      (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Inverse of the standard normal CDF, Wichura's AS 241 (PPND16): a pure
/// rational approximation, accurate to full double precision.
inline double inverse_normal_cdf(double p) {
  const double q = p - 0.5;
  double r, num, den;
  if (q > -0.425 && q < 0.425) {
    r = 0.180625 - q * q;
    num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                6.7265770927008700853e4) *
                   r +
               4.5921953931549871457e4) *
                  r +
              1.3731693765509461125e4) *
                 r +
             1.9715909503065514427e3) *
                r +
            1.3314166789178437745e2) *
               r +
           3.3871328727963666080e0);
    den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                3.9307895800092710610e4) *
                   r +
               2.1213794301586595867e4) *
                  r +
              5.3941960214247511077e3) *
                 r +
             6.8718700749205790830e2) *
                r +
            4.2313330701600911252e1) *
               r +
           1.0);
    return q * num / den;
  }
  r = q < 0 ? p : 1.0 - p;
  // p in (0,1) by contract; r > 0
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) *
                    r +
                2.41780725177450611770e-1) *
                   r +
               1.27045825245236838258e0) *
                  r +
              3.64784832476320460504e0) *
                 r +
             5.76949722146069140550e0) *
                r +
            4.63033784615654529590e0) *
               r +
           1.42343711074968357734e0);
    den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) *
                    r +
                1.51986665636164571966e-2) *
                   r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e0) *
                r +
            2.05319162663775882187e0) *
               r +
           1.0);
  } else {
    r -= 5.0;
    num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) *
                    r +
                1.24266094738807843860e-3) *
                   r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e0) *
                r +
            5.46378491116411436990e0) *
               r +
           6.65790464350110377720e0);
    den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                    r +
                1.84631831751005468180e-5) *
                   r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
  }
  double v = num / den;
  return q < 0 ? -v : v;
}

inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t draw) {
  return inverse_normal_cdf(uniform_open01(seed, stream, draw));
}

/// Stream ids reserved by the library (documented so that outputs are
/// reproducible across components).
enum : std::uint64_t {
  kStreamWiener = 0,       // + path index; Brownian increments
  kStreamInitialCloud = 1ull << 32,  // + path index; ensemble initial states
  kStreamSampler = 2ull << 32,       // zero-test and level-set sampling
  kStreamGenerators = 3ull << 32,    // property-test input generation
};

}  // namespace rng
}  // namespace sdesym
