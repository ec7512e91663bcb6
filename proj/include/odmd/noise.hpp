///
/// \file noise.hpp
///
/// Seeded noise sources: unit-mean gamma factors for multiplicative
/// corruption, and FFT-shaped pink noise for the combustor heat source.
///
#ifndef ODMD_NOISE_HPP
#define ODMD_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "odmd/numerics.hpp"

namespace odmd {

using Rng = std::mt19937_64;

struct GammaNoise {
  double sigma2 = 1e-3;
};

struct PinkNoise {
  double intensity = 0.0016;  // RMS(d) / reference RMS
};

struct NoiseSpec {
  std::variant<GammaNoise, PinkNoise> kind;
  std::uint64_t seed = 0;

  void validate() const {
    if (const auto* g = std::get_if<GammaNoise>(&kind)) {
      if (!(g->sigma2 > 0.0) || !std::isfinite(g->sigma2))
        throw InvalidInput("NoiseSpec: sigma2 must be positive");
    } else if (!(std::get<PinkNoise>(kind).intensity > 0.0)) {
      throw InvalidInput("NoiseSpec: intensity must be positive");
    }
  }
};

/// Gamma(shape 1/sigma2, scale sigma2): mean 1, variance sigma2.
inline std::vector<double> sample_gamma_unit_mean(double sigma2, std::size_t count,
                                                  std::uint64_t seed) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw InvalidInput("sample_gamma_unit_mean: sigma2 must be positive");
  Rng rng(seed);
  std::gamma_distribution<double> dist(1.0 / sigma2, sigma2);
  std::vector<double> out(count);
  for (double& v : out) {
    // Underflow to 0 is possible only for enormous sigma2; redraw to keep
    // factors strictly positive.
    do v = dist(rng);
    while (!(v > 0.0));
  }
  return out;
}

/// X .* eps with eps unit-mean gamma, drawn column-major. sigma2 = 0 returns X.
inline RealMatrix apply_multiplicative(const RealMatrix& x, double sigma2, std::uint64_t seed) {
  if (sigma2 == 0.0) return x;
  const std::vector<double> eps =
      sample_gamma_unit_mean(sigma2, static_cast<std::size_t>(x.size()), seed);
  RealMatrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.size(); ++i) out(i) = x(i) * eps[static_cast<std::size_t>(i)];
  return out;
}

///
/// White Gaussian noise shaped in frequency by f^{-1/2} (power ~ 1/f) with
/// the DC bin removed, then scaled so that RMS(d) = intensity * reference_rms.
///
inline RealVector pink_noise(Index length, double dt, double intensity, double reference_rms,
                             std::uint64_t seed) {
  if (length < 2) throw InvalidInput("pink_noise: length must be at least 2");
  if (!(dt > 0.0)) throw InvalidInput("pink_noise: dt must be positive");
  if (intensity < 0.0 || !(reference_rms >= 0.0))
    throw InvalidInput("pink_noise: intensity and reference rms must be nonnegative");
  if (intensity == 0.0 || reference_rms == 0.0) return RealVector::Zero(length);

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(static_cast<std::size_t>(length));
  for (double& v : white) v = normal(rng);

  Eigen::FFT<double> fft;
  std::vector<Complex> spectrum;
  fft.fwd(spectrum, white);
  const double df = 1.0 / (static_cast<double>(length) * dt);
  spectrum[0] = 0.0;
  for (Index k = 1; k < length; ++k) {
    const Index fold = std::min(k, length - k);
    spectrum[static_cast<std::size_t>(k)] /= std::sqrt(static_cast<double>(fold) * df);
  }
  std::vector<Complex> shaped;
  fft.inv(shaped, spectrum);

  RealVector out(length);
  for (Index n = 0; n < length; ++n) out(n) = shaped[static_cast<std::size_t>(n)].real();
  const double rms = std::sqrt(out.squaredNorm() / static_cast<double>(length));
  out *= intensity * reference_rms / rms;
  return out;
}

}  // namespace odmd

#endif  // ODMD_NOISE_HPP
