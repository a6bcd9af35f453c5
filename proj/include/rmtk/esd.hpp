#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "rmtk/complex_matrix.hpp"

namespace rmtk {

/// Empirical spectral distribution: mu(s, t) = (1/n) #{k : Re l_k <= s, Im l_k <= t}.
class Esd {
 public:
  Esd() = default;
  explicit Esd(std::vector<cplx> eigenvalues);

  double operator()(double s, double t) const;

  const std::vector<cplx>& eigenvalues() const noexcept { return eig_; }
  std::size_t size() const noexcept { return eig_.size(); }

 private:
  std::vector<cplx> eig_;
};

/// ESD of scale * A.
Esd compute_esd(const ComplexMatrix& a, double scale);

/// CDF of the uniform measure on the unit disc:
/// (1/pi) area{|x| <= 1, Re x <= s, Im x <= t}, in closed form.
double circular_law_cdf(double s, double t);

/// Square evaluation grid [-half_width, half_width]^2 with `points` per axis.
struct EsdGrid {
  double half_width = 2.5;
  std::size_t points = 201;
  std::vector<double> axis() const;
};

/// max |mu_a - mu_b| over X x Y, where X (Y) is the grid axis together with
/// the real (imaginary) parts of all atoms of both measures. For two
/// empirical measures this is the supremum over the whole plane.
double esd_distance(const Esd& a, const Esd& b, const EsdGrid& grid = {});

/// Same evaluation set, built from the grid and the atoms of `a`.
double esd_distance(const Esd& a, const std::function<double(double, double)>& limit_cdf,
                    const EsdGrid& grid = {});

}  // namespace rmtk
