#include "rmtk/anticonc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "rmtk/errors.hpp"
#include "rmtk/parallel.hpp"

namespace rmtk {
namespace {

constexpr double kPi = std::numbers::pi;

// hypot(dx, dy) <= r, with the squared form deciding everything except a
// thin shell around r where hypot itself is consulted.
struct RadiusTest {
  double r;
  double lo2;
  double hi2;
  explicit RadiusTest(double radius) : r(radius), lo2(radius * radius * (1.0 - 1e-9)), hi2(radius * radius * (1.0 + 1e-9)) {}
  bool operator()(double dx, double dy) const {
    const double d2 = dx * dx + dy * dy;
    if (d2 <= lo2) return true;
    if (d2 > hi2) return false;
    return std::hypot(dx, dy) <= r;
  }
};

void check_samples(std::size_t m, const char* who) {
  if (m < 100) throw ValidationError(std::string(who) + ": needs at least 100 samples");
}

void check_laws(const CoordinateLaws& laws, std::size_t n) {
  if (laws.empty()) throw ValidationError("no coordinate laws given");
  if (laws.size() != 1 && laws.size() != n)
    throw ValidationError("coordinate laws must be given once or once per coordinate");
  for (const auto& d : laws) validate(d);
}

bool lex_less(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

struct Weighted {
  std::vector<cplx> pts;
  std::vector<std::size_t> weight;
  std::vector<std::size_t> first_index;
};

Weighted dedupe(std::span<const cplx> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(points[a], points[b]); });
  Weighted w;
  for (std::size_t k : order) {
    if (!w.pts.empty() && w.pts.back() == points[k]) {
      ++w.weight.back();
    } else {
      w.pts.push_back(points[k]);
      w.weight.push_back(1);
      w.first_index.push_back(k);
    }
  }
  return w;
}

struct Best {
  std::size_t count = 0;
  std::size_t index = std::numeric_limits<std::size_t>::max();

  void offer(std::size_t c, std::size_t i) {
    if (c > count || (c == count && i < index)) {
      count = c;
      index = i;
    }
  }
};

// Fallback for extreme aspect ratios: x-sorted window sweep.
Best sweep_count(const Weighted& w, double r) {
  const RadiusTest within(r);
  Best best;
  const std::size_t u = w.pts.size();
  for (std::size_t a = 0; a < u; ++a) {
    std::size_t total = 0;
    const double xa = w.pts[a].real();
    std::size_t lo = a;
    while (lo > 0 && xa - w.pts[lo - 1].real() <= r) --lo;
    for (std::size_t b = lo; b < u && w.pts[b].real() - xa <= r; ++b)
      if (within(w.pts[a].real() - w.pts[b].real(), w.pts[a].imag() - w.pts[b].imag())) total += w.weight[b];
    best.offer(total, w.first_index[a]);
  }
  return best;
}

struct Cell {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  std::vector<std::uint32_t> members;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  std::size_t weight = 0;
  std::size_t full = 0;  // weight of neighbor cells entirely within r of every member
  std::vector<std::uint32_t> partial;
  std::size_t upper = 0;
};

struct CellKey {
  std::int64_t ix;
  std::int64_t iy;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    return static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(k.ix) * 0x9E3779B97F4A7C15ULL ^
                                          static_cast<std::uint64_t>(k.iy)));
  }
};

double max_dx_point_box(double p, double lo, double hi) { return std::max(p - lo, hi - p); }
double min_dx_point_box(double p, double lo, double hi) { return std::max({0.0, lo - p, p - hi}); }

Best grid_count(const Weighted& w, double r, double x0, double y0, double h) {
  const RadiusTest within(r);
  std::vector<Cell> cells;
  std::unordered_map<CellKey, std::uint32_t, CellKeyHash> index;
  for (std::uint32_t k = 0; k < w.pts.size(); ++k) {
    const auto ix = static_cast<std::int64_t>(std::floor((w.pts[k].real() - x0) / h));
    const auto iy = static_cast<std::int64_t>(std::floor((w.pts[k].imag() - y0) / h));
    auto [it, inserted] = index.try_emplace(CellKey{ix, iy}, static_cast<std::uint32_t>(cells.size()));
    if (inserted) {
      Cell c;
      c.ix = ix;
      c.iy = iy;
      c.xmin = c.xmax = w.pts[k].real();
      c.ymin = c.ymax = w.pts[k].imag();
      cells.push_back(std::move(c));
    }
    Cell& c = cells[it->second];
    c.members.push_back(k);
    c.weight += w.weight[k];
    c.xmin = std::min(c.xmin, w.pts[k].real());
    c.xmax = std::max(c.xmax, w.pts[k].real());
    c.ymin = std::min(c.ymin, w.pts[k].imag());
    c.ymax = std::max(c.ymax, w.pts[k].imag());
  }

  const std::int64_t reach = static_cast<std::int64_t>(std::ceil(r / h)) + 1;
  for (auto& c : cells) {
    for (std::int64_t dx = -reach; dx <= reach; ++dx) {
      for (std::int64_t dy = -reach; dy <= reach; ++dy) {
        const auto it = index.find(CellKey{c.ix + dx, c.iy + dy});
        if (it == index.end()) continue;
        const Cell& d = cells[it->second];
        const double min_x = std::max({0.0, d.xmin - c.xmax, c.xmin - d.xmax});
        const double min_y = std::max({0.0, d.ymin - c.ymax, c.ymin - d.ymax});
        if (!within(min_x, min_y)) continue;
        const double max_x = std::max(c.xmax - d.xmin, d.xmax - c.xmin);
        const double max_y = std::max(c.ymax - d.ymin, d.ymax - c.ymin);
        if (within(max_x, max_y))
          c.full += d.weight;
        else
          c.partial.push_back(it->second);
        c.upper += d.weight;
      }
    }
  }

  std::vector<std::uint32_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return cells[a].upper > cells[b].upper; });

  Best best;
  for (std::uint32_t ci : order) {
    const Cell& c = cells[ci];
    if (c.upper < best.count) break;
    for (std::uint32_t k : c.members) {
      const cplx p = w.pts[k];
      std::size_t total = c.full;
      for (std::uint32_t di : c.partial) {
        const Cell& d = cells[di];
        if (within(max_dx_point_box(p.real(), d.xmin, d.xmax), max_dx_point_box(p.imag(), d.ymin, d.ymax))) {
          total += d.weight;
          continue;
        }
        if (!within(min_dx_point_box(p.real(), d.xmin, d.xmax), min_dx_point_box(p.imag(), d.ymin, d.ymax)))
          continue;
        for (std::uint32_t q : d.members)
          if (within(p.real() - w.pts[q].real(), p.imag() - w.pts[q].imag())) total += w.weight[q];
      }
      best.offer(total, w.first_index[k]);
    }
  }
  return best;
}

// Rows of v * X~ with duplicates merged; row s has multiplicity weight[s].
struct WeightedRows {
  std::vector<std::vector<cplx>> rows;
  std::vector<double> weight;
  double total = 0.0;
};

WeightedRows weighted_rows(std::span<const cplx> v, const ComplexMatrix& xtilde) {
  const std::size_t n = v.size();
  if (xtilde.cols() != n) throw ValidationError("sample width does not match the vector dimension");
  std::vector<std::vector<cplx>> rows(xtilde.rows(), std::vector<cplx>(n));
  for (std::size_t s = 0; s < xtilde.rows(); ++s)
    for (std::size_t j = 0; j < n; ++j) rows[s][j] = v[j] * xtilde(s, j);
  auto less = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), lex_less);
  };
  std::sort(rows.begin(), rows.end(), less);
  WeightedRows out;
  for (auto& row : rows) {
    if (!out.rows.empty() && out.rows.back() == row) {
      out.weight.back() += 1.0;
    } else {
      out.rows.push_back(std::move(row));
      out.weight.push_back(1.0);
    }
  }
  out.total = static_cast<double>(xtilde.rows());
  return out;
}

// Weighted sum of dist^2(theta w_s); stops early once the sum reaches `limit`.
double weighted_dist2_sum(const WeightedRows& wr, cplx theta, double limit) {
  double sum = 0.0;
  for (std::size_t s = 0; s < wr.rows.size(); ++s) {
    sum += wr.weight[s] * lattice_dist2(theta, wr.rows[s]);
    if (sum >= limit) break;
  }
  return sum;
}

void check_query(const CrlcdQuery& q) {
  if (q.v.empty()) throw ValidationError("crlcd: empty vector");
  const double nv = norm2(q.v);
  if (!(nv >= 0.5 && nv <= 2.0)) throw ValidationError("crlcd: ||v|| must lie in [1/2, 2]");
  if (!(q.grid_min > 0.0) || !(q.grid_max > q.grid_min) || q.points_per_decade == 0)
    throw ValidationError("crlcd: empty modulus grid");
  if (q.phase_points < 8) throw ValidationError("crlcd: at least 8 phase points are required");
  if (!(q.L > 0.0)) throw ValidationError("crlcd: L must be positive");
  if (!(q.u > 0.0 && q.u < 1.0)) throw ValidationError("crlcd: u must lie in (0, 1)");
  if (!(q.rel_tol > 0.0)) throw ValidationError("crlcd: bisection tolerance must be positive");
}

double crlcd_bound(const CrlcdQuery& q, double v_norm2, cplx theta) {
  return std::min(q.u * (std::norm(theta) * v_norm2), q.L * q.L);
}

}  // namespace

const DistributionSpec& coordinate_law(const CoordinateLaws& laws, std::size_t j) {
  return laws.size() == 1 ? laws.front() : laws[j];
}

std::vector<cplx> symmetrize_samples(const DistributionSpec& dist, std::size_t m, const SeedSpec& seed) {
  if (m == 0) throw ValidationError("symmetrize_samples: m must be at least 1");
  validate(dist);
  Rng rng(seed);
  std::vector<cplx> out(m);
  for (auto& z : out) z = draw_symmetrized(dist, rng);
  return out;
}

std::vector<cplx> sample_linear_form(std::span<const cplx> v, const CoordinateLaws& laws, std::size_t m,
                                     const SeedSpec& seed) {
  check_laws(laws, v.size());
  Rng rng(seed);
  std::vector<cplx> out(m);
  for (auto& s : out) {
    cplx acc{};
    for (std::size_t j = 0; j < v.size(); ++j) acc += v[j] * draw(coordinate_law(laws, j), rng);
    s = acc;
  }
  return out;
}

BallCount max_ball_count(std::span<const cplx> points, double r) {
  if (!(r >= 0.0)) throw ValidationError("radius must be non-negative");
  BallCount out;
  if (points.empty()) return out;
  for (const auto& p : points)
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) throw ValidationError("non-finite sample point");
  const Weighted w = dedupe(points);

  Best best;
  if (r == 0.0 || w.pts.size() == 1) {
    for (std::size_t k = 0; k < w.pts.size(); ++k) best.offer(w.weight[k], w.first_index[k]);
  } else {
    double x0 = w.pts[0].real(), x1 = x0, y0 = w.pts[0].imag(), y1 = y0;
    for (const auto& p : w.pts) {
      x0 = std::min(x0, p.real());
      x1 = std::max(x1, p.real());
      y0 = std::min(y0, p.imag());
      y1 = std::max(y1, p.imag());
    }
    // Cells of side r/8 unless that leaves them nearly empty.
    const double spread = std::sqrt((x1 - x0) * (y1 - y0) / static_cast<double>(w.pts.size()));
    const double h = std::clamp(2.0 * spread, r / 8.0, r / 2.0);
    const double nx = (x1 - x0) / h;
    const double ny = (y1 - y0) / h;
    if (h > 0.0 && nx < 1e9 && ny < 1e9)
      best = grid_count(w, r, x0, y0, h);
    else
      best = sweep_count(w, r);
  }
  out.count = best.count;
  out.center = points[best.index];
  return out;
}

ConcentrationEstimate concentration_of_samples(std::span<const cplx> points, double r) {
  if (points.empty()) throw ValidationError("no sample points");
  const double m = static_cast<double>(points.size());
  ConcentrationEstimate e;
  e.radius = r;
  e.samples = points.size();
  const BallCount at_r = max_ball_count(points, r);
  e.estimate = static_cast<double>(at_r.count) / m;
  e.std_err = std::sqrt(e.estimate * (1.0 - e.estimate) / m);
  e.witness_center = at_r.center;
  const BallCount at_2r = max_ball_count(points, 2.0 * r);
  e.estimate_2r = static_cast<double>(at_2r.count) / m;
  e.std_err_2r = std::sqrt(e.estimate_2r * (1.0 - e.estimate_2r) / m);
  return e;
}

ConcentrationEstimate levy_concentration(std::span<const cplx> v, const CoordinateLaws& laws, double r,
                                         std::size_t m, const SeedSpec& seed) {
  check_samples(m, "levy_concentration");
  if (!(r >= 0.0)) throw ValidationError("levy_concentration: radius must be non-negative");
  return concentration_of_samples(sample_linear_form(v, laws, m, seed), r);
}

Estimate p_functional(std::span<const cplx> v, const CoordinateLaws& laws, std::size_t m, const SeedSpec& seed) {
  check_samples(m, "p_functional");
  check_laws(laws, v.size());
  Rng rng(seed);
  std::vector<double> vals(m);
  for (auto& val : vals) {
    cplx acc{};
    for (std::size_t j = 0; j < v.size(); ++j) {
      const cplx xt = draw_symmetrized(coordinate_law(laws, j), rng);
      if (rng.bernoulli(0.5)) acc += v[j] * xt;
    }
    val = std::exp(-kPi * std::norm(acc));
  }
  return mean_estimate(vals);
}

double dist_to_integer(double x) { return std::abs(x - std::nearbyint(x)); }

double torus_norm(cplx a, const DistributionSpec& dist, std::size_t m, const SeedSpec& seed) {
  check_samples(m, "torus_norm");
  validate(dist);
  Rng rng(seed);
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double d = dist_to_integer((a * draw_symmetrized(dist, rng)).real());
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(m));
}

ComplexMatrix symmetrized_vector_samples(const CoordinateLaws& laws, std::size_t n, std::size_t m,
                                         const SeedSpec& seed) {
  check_laws(laws, n);
  Rng rng(seed);
  ComplexMatrix x(m, n);
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t j = 0; j < n; ++j) x(s, j) = draw_symmetrized(coordinate_law(laws, j), rng);
  return x;
}

double lattice_dist2(cplx theta, std::span<const cplx> w) {
  double sum = 0.0;
  for (const auto& z : w) {
    const cplx t = theta * z;
    const double a = dist_to_integer(t.real());
    const double b = dist_to_integer(t.imag());
    sum += a * a + b * b;
  }
  return sum;
}

Estimate expected_lattice_dist2(cplx theta, std::span<const cplx> v, const CoordinateLaws& laws, std::size_t m,
                                const SeedSpec& seed) {
  check_samples(m, "expected_lattice_dist2");
  const ComplexMatrix xt = symmetrized_vector_samples(laws, v.size(), m, seed);
  std::vector<double> vals(m);
  std::vector<cplx> w(v.size());
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t j = 0; j < v.size(); ++j) w[j] = v[j] * xt(s, j);
    vals[s] = lattice_dist2(theta, w);
  }
  return mean_estimate(vals);
}

bool crlcd_condition(const CrlcdQuery& q, const ComplexMatrix& xtilde, cplx theta, double* lhs, double* bound) {
  const WeightedRows wr = weighted_rows(q.v, xtilde);
  const double b = crlcd_bound(q, norm2_squared(q.v), theta);
  const double sum = weighted_dist2_sum(wr, theta, std::numeric_limits<double>::infinity());
  if (lhs) *lhs = sum / wr.total;
  if (bound) *bound = b;
  return sum < b * wr.total;
}

CrlcdResult crlcd_on_samples(const CrlcdQuery& q, const ComplexMatrix& xtilde, std::size_t workers) {
  check_query(q);
  if (xtilde.rows() == 0) throw ValidationError("crlcd: no samples");
  const WeightedRows wr = weighted_rows(q.v, xtilde);
  const double vn2 = norm2_squared(q.v);

  std::vector<double> moduli;
  for (std::size_t i = 0;; ++i) {
    const double mod = q.grid_min * std::pow(10.0, static_cast<double>(i) / static_cast<double>(q.points_per_decade));
    if (mod > q.grid_max * (1.0 + 1e-12)) break;
    moduli.push_back(mod);
  }
  std::vector<cplx> phases(q.phase_points);
  for (std::size_t k = 0; k < q.phase_points; ++k)
    phases[k] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(q.phase_points));

  auto qualifies = [&](cplx theta) {
    const double limit = crlcd_bound(q, vn2, theta) * wr.total;
    return weighted_dist2_sum(wr, theta, limit) < limit;
  };

  CrlcdResult res;
  res.grid_moduli = moduli.size();
  res.distinct_samples = wr.rows.size();
  res.cap = q.grid_max;

  std::vector<char> hit(phases.size());
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    parallel_for(phases.size(), workers, [&](std::size_t k) { hit[k] = qualifies(moduli[i] * phases[k]) ? 1 : 0; });
    if (std::find(hit.begin(), hit.end(), 1) == hit.end()) continue;
    // Refine every qualifying phase; the infimum may sit at any of them.
    double hi = moduli[i];
    cplx phase = phases[static_cast<std::size_t>(std::find(hit.begin(), hit.end(), 1) - hit.begin())];
    if (i > 0) {
      res.last_failing_modulus = moduli[i - 1];
      for (std::size_t k = 0; k < phases.size(); ++k) {
        if (!hit[k]) continue;
        double lo = moduli[i - 1], top = moduli[i];
        while (top - lo > q.rel_tol * top) {
          const double mid = 0.5 * (lo + top);
          if (mid <= lo || mid >= top) break;
          if (qualifies(mid * phases[k]))
            top = mid;
          else
            lo = mid;
        }
        if (top < hi) {
          hi = top;
          phase = phases[k];
        }
      }
    }
    res.value = hi;
    res.witness_theta = hi * phase;
    res.bound_at_witness = crlcd_bound(q, vn2, res.witness_theta);
    res.lhs_at_witness =
        weighted_dist2_sum(wr, res.witness_theta, std::numeric_limits<double>::infinity()) / wr.total;
    return res;
  }
  res.capped = true;
  res.value = q.grid_max;
  res.witness_theta = q.grid_max;
  res.last_failing_modulus = moduli.empty() ? 0.0 : moduli.back();
  res.bound_at_witness = crlcd_bound(q, vn2, res.witness_theta);
  res.lhs_at_witness = weighted_dist2_sum(wr, res.witness_theta, std::numeric_limits<double>::infinity()) / wr.total;
  return res;
}

CrlcdResult crlcd(const CrlcdQuery& q, const CoordinateLaws& laws, const SeedSpec& seed, std::size_t workers) {
  check_query(q);
  if (q.mc_samples == 0) throw ValidationError("crlcd: mc_samples must be positive");
  const ComplexMatrix xt = symmetrized_vector_samples(laws, q.v.size(), q.mc_samples, seed);
  return crlcd_on_samples(q, xt, workers);
}

InequalityReport verify_levy_p_bound(std::span<const cplx> v, const CoordinateLaws& laws, double r, std::size_t m,
                                     const SeedSpec& seed) {
  const ConcentrationEstimate rho = levy_concentration(v, laws, r, m, seed.child(0));
  const Estimate p = p_functional(v, laws, m, seed.child(1));
  const double factor = std::exp(kPi * r * r);
  InequalityReport rep;
  rep.name = "levy-p";
  rep.lhs = rho.estimate;
  rep.lhs_std_err = rho.std_err;
  rep.rhs = factor * p.value;
  rep.rhs_std_err = factor * p.std_err;
  rep.margin = factor * (p.value + 3.0 * p.std_err) - (rho.estimate - 3.0 * rho.std_err);
  rep.flag = rep.margin < 0.0;
  rep.parameters = {{"r", r}, {"m", static_cast<double>(m)}, {"n", static_cast<double>(v.size())},
                    {"p_functional", p.value}, {"rho_2r", rho.estimate_2r}};
  return rep;
}

InequalityReport verify_doubling_bound(std::span<const cplx> w, const CoordinateLaws& laws, double r,
                                       const QuadratureSpec& quad, std::size_t m, const SeedSpec& seed,
                                       std::size_t workers) {
  if (w.empty() || w.size() > 4) throw ValidationError("doubling bound: dimension must be between 1 and 4");
  if (!(std::exp(-kPi * quad.radius * quad.radius) < 1e-12))
    throw ValidationError("doubling bound: truncation radius too small (need exp(-pi R^2) < 1e-12)");
  if (quad.nodes < 3) throw ValidationError("doubling bound: at least 3 quadrature nodes per axis");
  check_samples(quad.mc_samples, "doubling bound quadrature");

  const ConcentrationEstimate rho = levy_concentration(w, laws, r, m, seed.child(0));
  const ComplexMatrix xt = symmetrized_vector_samples(laws, w.size(), quad.mc_samples, seed.child(1));

  const WeightedRows wr = weighted_rows(w, xt);
  const std::size_t nodes = quad.nodes;
  const double h = 2.0 * quad.radius / static_cast<double>(nodes - 1);
  std::vector<double> upper(nodes * nodes);
  std::vector<double> point(nodes * nodes);
  parallel_for(nodes * nodes, workers, [&](std::size_t idx) {
    const std::size_t a = idx / nodes;
    const std::size_t b = idx % nodes;
    const cplx xi(-quad.radius + h * static_cast<double>(a), -quad.radius + h * static_cast<double>(b));
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t s = 0; s < wr.rows.size(); ++s) {
      const double d = lattice_dist2(xi, wr.rows[s]);
      s1 += wr.weight[s] * d;
      s2 += wr.weight[s] * d * d;
    }
    const double mcount = wr.total;
    const double mean = s1 / mcount;
    const double var = std::max(0.0, (s2 - mcount * mean * mean) / (mcount - 1.0));
    const double se = std::sqrt(var / mcount);
    const double wa = (a == 0 || a + 1 == nodes) ? 0.5 : 1.0;
    const double wb = (b == 0 || b + 1 == nodes) ? 0.5 : 1.0;
    const double gauss = std::exp(-kPi * std::norm(xi));
    upper[idx] = wa * wb * h * h * std::exp(-0.5 * std::max(0.0, mean - 3.0 * se)) * gauss;
    point[idx] = wa * wb * h * h * std::exp(-0.5 * mean) * gauss;
  });
  double integral_upper = 0.0;
  double integral_point = 0.0;
  for (std::size_t i = 0; i < upper.size(); ++i) {
    integral_upper += upper[i];
    integral_point += point[i];
  }

  const double pref = 2.0 * std::exp(2.0 * kPi * r * r);
  const double rho_low = std::max(0.0, rho.estimate - 3.0 * rho.std_err);
  InequalityReport rep;
  rep.name = "doubling";
  rep.lhs = rho.estimate * rho.estimate;
  rep.lhs_std_err = 2.0 * rho.estimate * rho.std_err;
  rep.rhs = pref * integral_upper;
  rep.rhs_std_err = pref * (integral_upper - integral_point);
  rep.margin = rep.rhs - rho_low * rho_low;
  rep.flag = rep.margin < 0.0;
  rep.parameters = {{"r", r},
                    {"m", static_cast<double>(m)},
                    {"n", static_cast<double>(w.size())},
                    {"quad_radius", quad.radius},
                    {"quad_nodes", static_cast<double>(nodes)},
                    {"quad_mc_samples", static_cast<double>(quad.mc_samples)},
                    {"integral", integral_point},
                    {"integral_upper", integral_upper}};
  rep.note = "rhs uses E dist^2 - 3 SE at every node";
  return rep;
}

InequalityReport verify_crlcd_tail_bound(std::span<const cplx> v, const CoordinateLaws& laws, double eps,
                                         const CrlcdQuery& q_in, std::size_t m, const SeedSpec& seed,
                                         std::size_t workers) {
  if (!(eps > 0.0)) throw ValidationError("crlcd tail bound: eps must be positive");
  CrlcdQuery q = q_in;
  q.v.assign(v.begin(), v.end());
  const ConcentrationEstimate rho = levy_concentration(v, laws, eps, m, seed.child(0));
  const CrlcdResult d = crlcd(q, laws, seed.child(1), workers);

  const double t1 = eps / std::sqrt(q.u);
  const double t2 = std::exp(-q.L * q.L / 4.0);
  const double t3 = std::exp(-(kPi / 4.0) * eps * eps * d.value * d.value);
  const double bracket = t1 + t2 + t3;
  const double c_hat = rho.estimate / bracket;
  constexpr double kMaxConstant = 1e3;

  InequalityReport rep;
  rep.name = "crlcd-tail";
  rep.lhs = rho.estimate;
  rep.lhs_std_err = rho.std_err;
  rep.rhs = bracket;
  rep.margin = kMaxConstant * bracket - rho.estimate;
  rep.flag = c_hat > kMaxConstant;
  rep.parameters = {{"eps", eps},
                    {"L", q.L},
                    {"u", q.u},
                    {"m", static_cast<double>(m)},
                    {"crlcd", d.value},
                    {"crlcd_capped", d.capped ? 1.0 : 0.0},
                    {"term_eps", t1},
                    {"term_L", t2},
                    {"term_crlcd", t3},
                    {"C_hat", c_hat}};
  rep.note = "flag when C_hat = lhs / rhs exceeds 1e3";
  return rep;
}

UniformAnticoncResult verify_uniform_anticonc(std::span<const cplx> v, const CoordinateLaws& laws,
                                              std::vector<double> c_grid, std::size_t m, const SeedSpec& seed) {
  check_samples(m, "verify_uniform_anticonc");
  if (c_grid.empty()) throw ValidationError("uniform anti-concentration: empty c grid");
  for (double c : c_grid)
    if (!(c > 0.0 && c < 1.0)) throw ValidationError("uniform anti-concentration: c values must lie in (0, 1)");
  std::sort(c_grid.begin(), c_grid.end(), std::greater<>());
  const std::vector<cplx> pts = sample_linear_form(v, laws, m, seed);

  UniformAnticoncResult out;
  out.report.name = "uniform";
  ConcentrationEstimate last;
  for (double c : c_grid) {
    const BallCount bc = max_ball_count(pts, c);
    const double est = static_cast<double>(bc.count) / static_cast<double>(m);
    const double se = std::sqrt(est * (1.0 - est) / static_cast<double>(m));
    last.estimate = est;
    last.std_err = se;
    last.radius = c;
    if (est + 3.0 * se <= 1.0 - c) {
      out.found = true;
      out.best_c = c;
      break;
    }
  }
  out.report.lhs = last.estimate;
  out.report.lhs_std_err = last.std_err;
  out.report.rhs = 1.0 - last.radius;
  out.report.margin = (1.0 - last.radius) - (last.estimate + 3.0 * last.std_err);
  out.report.flag = !out.found;
  out.report.parameters = {{"best_c", out.found ? out.best_c : 0.0},
                           {"c_min", c_grid.back()},
                           {"c_max", c_grid.front()},
                           {"m", static_cast<double>(m)},
                           {"n", static_cast<double>(v.size())}};
  out.report.note = out.found ? "largest c with rho_c + 3 SE <= 1 - c"
                              : "no c in the grid satisfies rho_c + 3 SE <= 1 - c";
  return out;
}

}  // namespace rmtk
