#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "rmtk/rng.hpp"

namespace rmtk {

/// Circularly symmetric complex normal with E|Z|^2 = variance; real and
/// imaginary parts are independent N(0, variance/2).
struct ComplexGaussian {
  double variance = 1.0;
};

/// Uniform on {1, -1, i, -i}.
struct FourPointUniform {};

/// Uniform on {1, -1}.
struct RealRademacher {};

/// Finite support with explicit probabilities.
struct LatticeUniform {
  std::vector<std::complex<double>> support;
  std::vector<double> probabilities;
};

struct Constant {
  std::complex<double> value;
};

/// +value or -value with probability p/2 each, 0 otherwise. Centered, with
/// E|Z|^2 = p |value|^2.
struct SparseBernoulli {
  double p = 1.0;
  std::complex<double> value = 1.0;
};

using DistributionSpec = std::variant<ComplexGaussian, FourPointUniform, RealRademacher,
                                      LatticeUniform, Constant, SparseBernoulli>;

/// Throws ValidationError when the parameters do not describe a distribution.
void validate(const DistributionSpec& dist);

std::complex<double> draw(const DistributionSpec& dist, Rng& rng);

/// One draw from a fresh stream for `seed`.
std::complex<double> sample_scalar(const DistributionSpec& dist, const SeedSpec& seed);

/// Difference of two independent draws.
std::complex<double> draw_symmetrized(const DistributionSpec& dist, Rng& rng);

std::complex<double> mean(const DistributionSpec& dist);
double second_moment(const DistributionSpec& dist);

/// Law of s*Z when Z ~ dist. Every family is closed under scaling.
DistributionSpec scaled(const DistributionSpec& dist, double s);

/// Config-file spelling, e.g. "gaussian(1)", "fourpoint", "constant(1+2i)".
std::string to_string(const DistributionSpec& dist);

/// Inverse of to_string. Also accepts the bare names "gaussian"/"ginibre",
/// "rademacher", "fourpoint", and "lattice([z1, z2, ...], [p1, p2, ...])".
DistributionSpec parse_distribution(const std::string& text);

}  // namespace rmtk
