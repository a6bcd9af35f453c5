#include "rmtk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rmtk/errors.hpp"
#include "rmtk/linalg.hpp"
#include "rmtk/parallel.hpp"

namespace rmtk {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// A / sqrt(n) - z I
ComplexMatrix normalized_shifted(const ComplexMatrix& a, cplx z) {
  const double s = 1.0 / std::sqrt(static_cast<double>(a.rows()));
  ComplexMatrix b = a;
  b *= s;
  for (std::size_t i = 0; i < b.rows(); ++i) b(i, i) -= z;
  return b;
}

double quantile_sorted(const std::vector<double>& xs, double p) {
  if (xs.empty()) return kNaN;
  const double h = p * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

// Runs `per_trial` for every (n, trial) and collects the finite results as
// comparison records; nullopt marks an excluded trial.
ComparisonResult run_comparison(const ExperimentConfig& cfg, const std::string& quantity,
                                const std::function<std::optional<double>(const ComplexMatrix&, const ComplexMatrix&,
                                                                          std::size_t)>& per_trial) {
  validate(cfg, true);
  ComparisonResult res;
  res.quantity = quantity;
  for (std::size_t n : cfg.n_list) {
    const EnsembleSpec ex = cfg.x(n);
    const EnsembleSpec ey = cfg.y(n);
    validate(ex);
    validate(ey);
    std::vector<std::optional<double>> vals(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
      const SeedSpec s = trial_seed(cfg.base_seed, n, t);
      try {
        vals[t] = per_trial(sample_matrix(ex, s), sample_matrix(ey, s), n);
      } catch (const NumericalError&) {
        vals[t] = std::nullopt;
      }
    });
    std::vector<double> used;
    std::size_t excluded = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      if (vals[t] && std::isfinite(*vals[t])) {
        res.records.push_back({t, n, *vals[t]});
        used.push_back(*vals[t]);
      } else {
        ++excluded;
      }
    }
    res.per_n.push_back(summarize_abs(n, used, excluded));
  }
  return res;
}

}  // namespace

void validate(const ExperimentConfig& cfg, bool needs_y) {
  if (!cfg.x) throw ValidationError("experiment needs an X ensemble");
  if (needs_y && !cfg.y) throw ValidationError("comparison needs a Y ensemble");
  if (cfg.n_list.empty()) throw ValidationError("experiment needs at least one n");
  for (std::size_t n : cfg.n_list)
    if (n == 0) throw ValidationError("n must be positive");
  if (cfg.trials == 0) throw ValidationError("trials must be at least 1");
  if (!std::isfinite(cfg.z.real()) || !std::isfinite(cfg.z.imag())) throw ValidationError("z must be finite");
}

SeedSpec trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial) {
  return SeedSpec{base_seed, trial}.child(n);
}

ComparisonSummary summarize_abs(std::size_t n, const std::vector<double>& values, std::size_t excluded) {
  ComparisonSummary s;
  s.n = n;
  s.used = values.size();
  s.excluded = excluded;
  if (values.empty()) {
    s.mean_abs = s.median_abs = s.iqr_abs = kNaN;
    return s;
  }
  std::vector<double> a(values.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    a[k] = std::abs(values[k]);
    sum += a[k];
  }
  s.mean_abs = sum / static_cast<double>(a.size());
  std::sort(a.begin(), a.end());
  s.median_abs = quantile_sorted(a, 0.5);
  s.iqr_abs = quantile_sorted(a, 0.75) - quantile_sorted(a, 0.25);
  return s;
}

TailFit fit_tail_constants(const std::vector<TailRow>& rows) {
  TailFit best;
  best.sse = std::numeric_limits<double>::infinity();
  if (rows.empty()) return best;
  constexpr int kPoints = 101;
  for (int k = 0; k < kPoints; ++k) {
    const double c = 1e-3 * std::pow(10.0, 5.0 * k / (kPoints - 1));
    double fp = 0.0;
    double ff = 0.0;
    for (const auto& r : rows) {
      const double f = r.eps + std::exp(-c * r.eps * r.eps * static_cast<double>(r.n));
      fp += f * r.prob;
      ff += f * f;
    }
    const double C = ff > 0.0 ? std::max(0.0, fp / ff) : 0.0;
    double sse = 0.0;
    for (const auto& r : rows) {
      const double f = r.eps + std::exp(-c * r.eps * r.eps * static_cast<double>(r.n));
      sse += (C * f - r.prob) * (C * f - r.prob);
    }
    if (sse < best.sse) best = {C, c, sse};
  }
  return best;
}

TailResult run_tail_experiment(const ExperimentConfig& cfg) {
  validate(cfg, false);
  if (cfg.eps_list.empty()) throw ValidationError("tail experiment needs at least one eps");
  for (double e : cfg.eps_list)
    if (!(e > 0.0)) throw ValidationError("eps values must be positive");
  TailResult res;
  for (std::size_t n : cfg.n_list) {
    const EnsembleSpec ens = cfg.x(n);
    validate(ens);
    std::vector<double> sn(cfg.trials, kNaN);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
      try {
        sn[t] = smallest_singular_value(sample_matrix(ens, trial_seed(cfg.base_seed, n, t)));
      } catch (const NumericalError&) {
        sn[t] = kNaN;
      }
    });
    const auto valid = static_cast<std::size_t>(std::count_if(sn.begin(), sn.end(), [](double x) { return !std::isnan(x); }));
    res.failures.push_back(cfg.trials - valid);
    for (double eps : cfg.eps_list) {
      const double thr = eps / std::sqrt(static_cast<double>(n));
      const auto hits = static_cast<std::size_t>(std::count_if(sn.begin(), sn.end(), [&](double x) { return x <= thr; }));
      TailRow row;
      row.n = n;
      row.eps = eps;
      row.trials = valid;
      if (valid > 0) {
        const Estimate e = proportion_estimate(hits, valid);
        row.prob = e.value;
        row.std_err = e.std_err;
      } else {
        row.prob = row.std_err = kNaN;
      }
      res.rows.push_back(row);
    }
    res.smallest.push_back(std::move(sn));
  }
  std::vector<TailRow> fit_rows;
  for (const auto& r : res.rows)
    if (r.trials > 0) fit_rows.push_back(r);
  const TailFit fit = fit_tail_constants(fit_rows);
  res.C_fit = fit.C;
  res.c_fit = fit.c;
  res.fit_sse = fit.sse;
  return res;
}

ComparisonResult log_det_comparison(const ExperimentConfig& cfg) {
  const cplx z = cfg.z;
  return run_comparison(cfg, "logdet", [z](const ComplexMatrix& ax, const ComplexMatrix& ay, std::size_t n) -> std::optional<double> {
    const double lx = log_abs_det(normalized_shifted(ax, z));
    const double ly = log_abs_det(normalized_shifted(ay, z));
    if (!std::isfinite(lx) || !std::isfinite(ly)) return std::nullopt;
    return (lx - ly) / static_cast<double>(n);
  });
}

std::size_t distance_sum_first_index(std::size_t n) {
  const double nd = static_cast<double>(n);
  const double lo = std::ceil(nd - std::pow(nd, 0.99) - 1e-12);
  return static_cast<std::size_t>(std::max(1.0, lo));
}

std::optional<double> row_distance_log_sum(const ComplexMatrix& b, std::size_t first) {
  const std::size_t n = b.rows();
  IncrementalBasis basis(b.cols());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t before = basis.rank();
    const double d = basis.add(b.row(i));
    if (basis.rank() == before || !(d > 0.0)) return std::nullopt;
    if (i + 1 >= first) sum += std::log(d);
  }
  return sum / static_cast<double>(n);
}

ComparisonResult distance_sum_comparison(const ExperimentConfig& cfg) {
  const cplx z = cfg.z;
  ComparisonResult res =
      run_comparison(cfg, "distsum", [z](const ComplexMatrix& ax, const ComplexMatrix& ay, std::size_t n) -> std::optional<double> {
        const std::size_t first = distance_sum_first_index(n);
        const auto sx = row_distance_log_sum(normalized_shifted(ax, z), first);
        const auto sy = row_distance_log_sum(normalized_shifted(ay, z), first);
        if (!sx || !sy) return std::nullopt;
        return *sx - *sy;
      });
  for (auto& s : res.per_n) {
    s.index_lo = distance_sum_first_index(s.n);
    s.index_hi = s.n;
  }
  return res;
}

ComparisonResult esd_comparison(const ExperimentConfig& cfg) {
  const EsdGrid grid = cfg.grid;
  return run_comparison(cfg, "esd", [grid](const ComplexMatrix& ax, const ComplexMatrix& ay, std::size_t n) -> std::optional<double> {
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    return esd_distance(compute_esd(ax, s), compute_esd(ay, s), grid);
  });
}

ExtremeSvResult extreme_sv_check(const ExperimentConfig& cfg) {
  validate(cfg, false);
  ExtremeSvResult res;
  for (std::size_t n : cfg.n_list) {
    const EnsembleSpec ens = cfg.x(n);
    validate(ens);
    const cplx shift = cfg.z * std::sqrt(static_cast<double>(n));
    std::vector<ExtremeSvRecord> recs(cfg.trials);
    std::vector<char> ok(cfg.trials, 0);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
      ComplexMatrix a = sample_matrix(ens, trial_seed(cfg.base_seed, n, t));
      for (std::size_t i = 0; i < n; ++i) a(i, i) -= shift;
      try {
        const auto sv = singular_values(a);
        recs[t] = {t, n, sv.values.front().real(), sv.values.back().real()};
        ok[t] = 1;
      } catch (const NumericalError&) {
        ok[t] = 0;
      }
    });
    std::size_t used = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      if (ok[t]) {
        res.records.push_back(recs[t]);
        ++used;
      } else {
        ++res.failures;
      }
    }
    for (double C : cfg.c_grid) {
      const double big = std::pow(static_cast<double>(n), C);
      const double tiny = std::pow(static_cast<double>(n), -C);
      std::size_t large = 0;
      std::size_t small = 0;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        if (!ok[t]) continue;
        if (recs[t].sigma1 >= big) ++large;
        if (recs[t].sigman <= tiny) ++small;
      }
      const double denom = used ? static_cast<double>(used) : kNaN;
      res.frequencies.push_back({n, C, static_cast<double>(large) / denom, static_cast<double>(small) / denom});
    }
  }
  return res;
}

EsdExperimentResult run_esd_experiment(const ExperimentConfig& cfg) {
  validate(cfg, false);
  const std::size_t n = cfg.n_list.front();
  const EnsembleSpec ens = cfg.x(n);
  validate(ens);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<std::optional<std::vector<cplx>>> eig(cfg.trials);
  std::vector<double> dist(cfg.trials, kNaN);
  parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
    try {
      const Esd e = compute_esd(sample_matrix(ens, trial_seed(cfg.base_seed, n, t)), s);
      dist[t] = esd_distance(e, circular_law_cdf, cfg.grid);
      eig[t] = e.eigenvalues();
    } catch (const NumericalError&) {
      eig[t] = std::nullopt;
    }
  });
  EsdExperimentResult res;
  res.n = n;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    if (!eig[t]) {
      ++res.failures;
      continue;
    }
    for (std::size_t k = 0; k < eig[t]->size(); ++k) res.atoms.push_back({t, k, (*eig[t])[k]});
    res.circular_distance.push_back({t, n, dist[t]});
  }
  return res;
}

}  // namespace rmtk
