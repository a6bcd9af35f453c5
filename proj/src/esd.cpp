#include "rmtk/esd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rmtk/errors.hpp"
#include "rmtk/linalg.hpp"

namespace rmtk {
namespace {

// Antiderivative of sqrt(1 - x^2) on [-1, 1].
double half_chord_integral(double x) {
  x = std::clamp(x, -1.0, 1.0);
  return 0.5 * (x * std::sqrt(1.0 - x * x) + std::asin(x));
}

std::vector<double> merged_axis(const std::vector<double>& grid, const std::vector<double>& extra) {
  std::vector<double> out = grid;
  out.insert(out.end(), extra.begin(), extra.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// counts[i * ny + j] = #{atoms with re <= xs[i], im <= ys[j]}.
std::vector<std::size_t> cumulative_counts(const std::vector<cplx>& atoms, const std::vector<double>& xs,
                                           const std::vector<double>& ys) {
  const std::size_t nx = xs.size();
  const std::size_t ny = ys.size();
  std::vector<std::size_t> c(nx * ny, 0);
  for (const auto& z : atoms) {
    const auto ix = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), z.real()) - xs.begin());
    const auto iy = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), z.imag()) - ys.begin());
    if (ix < nx && iy < ny) ++c[ix * ny + iy];
  }
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      std::size_t v = c[i * ny + j];
      if (i > 0) v += c[(i - 1) * ny + j];
      if (j > 0) v += c[i * ny + j - 1];
      if (i > 0 && j > 0) v -= c[(i - 1) * ny + j - 1];
      c[i * ny + j] = v;
    }
  return c;
}

std::vector<double> reals(const std::vector<cplx>& z) {
  std::vector<double> out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k].real();
  return out;
}

std::vector<double> imags(const std::vector<cplx>& z) {
  std::vector<double> out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k].imag();
  return out;
}

void check_grid(const EsdGrid& g) {
  if (g.points == 0 || !(g.half_width > 0.0)) throw ValidationError("ESD grid must be non-empty");
}

}  // namespace

Esd::Esd(std::vector<cplx> eigenvalues) : eig_(std::move(eigenvalues)) {}

double Esd::operator()(double s, double t) const {
  if (eig_.empty()) return 0.0;
  std::size_t count = 0;
  for (const auto& z : eig_)
    if (z.real() <= s && z.imag() <= t) ++count;
  return static_cast<double>(count) / static_cast<double>(eig_.size());
}

Esd compute_esd(const ComplexMatrix& a, double scale) {
  if (!a.is_square()) throw ValidationError("compute_esd: matrix must be square");
  ComplexMatrix b = a;
  b *= scale;
  return Esd(eigenvalues(b).values);
}

double circular_law_cdf(double s, double t) {
  if (s <= -1.0 || t <= -1.0) return 0.0;
  s = std::min(s, 1.0);
  const double pi = std::numbers::pi;
  if (t >= 1.0) return 2.0 * (half_chord_integral(s) - half_chord_integral(-1.0)) / pi;

  // Vertical slices at abscissa x contribute min(t, h) + h where h = sqrt(1 - x^2),
  // clipped at zero; the two regimes switch at |x| = a.
  const double a = std::sqrt(1.0 - t * t);
  double area = 0.0;
  if (t >= 0.0) {
    const double up = std::min(s, -a);
    if (up > -1.0) area += 2.0 * (half_chord_integral(up) - half_chord_integral(-1.0));
  }
  if (s > -a) {
    const double up = std::min(s, a);
    area += t * (up + a) + half_chord_integral(up) - half_chord_integral(-a);
  }
  if (t >= 0.0 && s > a) area += 2.0 * (half_chord_integral(s) - half_chord_integral(a));
  return std::clamp(area / pi, 0.0, 1.0);
}

std::vector<double> EsdGrid::axis() const {
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = 0.0;
    return out;
  }
  const double h = 2.0 * half_width / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = -half_width + h * static_cast<double>(i);
  return out;
}

double esd_distance(const Esd& a, const Esd& b, const EsdGrid& grid) {
  check_grid(grid);
  std::vector<cplx> both = a.eigenvalues();
  both.insert(both.end(), b.eigenvalues().begin(), b.eigenvalues().end());
  const std::vector<double> g = grid.axis();
  const std::vector<double> xs = merged_axis(g, reals(both));
  const std::vector<double> ys = merged_axis(g, imags(both));
  const auto ca = cumulative_counts(a.eigenvalues(), xs, ys);
  const auto cb = cumulative_counts(b.eigenvalues(), xs, ys);
  const double na = a.size() ? static_cast<double>(a.size()) : 1.0;
  const double nb = b.size() ? static_cast<double>(b.size()) : 1.0;
  double best = 0.0;
  for (std::size_t k = 0; k < ca.size(); ++k)
    best = std::max(best, std::abs(static_cast<double>(ca[k]) / na - static_cast<double>(cb[k]) / nb));
  return best;
}

double esd_distance(const Esd& a, const std::function<double(double, double)>& limit_cdf, const EsdGrid& grid) {
  check_grid(grid);
  const std::vector<double> g = grid.axis();
  const std::vector<double> xs = merged_axis(g, reals(a.eigenvalues()));
  const std::vector<double> ys = merged_axis(g, imags(a.eigenvalues()));
  const auto ca = cumulative_counts(a.eigenvalues(), xs, ys);
  const double na = a.size() ? static_cast<double>(a.size()) : 1.0;
  double best = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j)
      best = std::max(best, std::abs(static_cast<double>(ca[i * ys.size() + j]) / na - limit_cdf(xs[i], ys[j])));
  return best;
}

}  // namespace rmtk
