// Acceptance suite: one PASS/FAIL line per criterion, detail lines indented.
// Usage: rmtk_acceptance [criterion ...]   (no argument runs all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "rmtk/anticonc.hpp"
#include "rmtk/errors.hpp"
#include "rmtk/esd.hpp"
#include "rmtk/experiments.hpp"
#include "rmtk/linalg.hpp"
#include "rmtk/parallel.hpp"

using namespace rmtk;

namespace {

struct Verdict {
  bool pass = false;
  std::string summary;
};

void info(const std::string& line) { std::cout << "  " << line << "\n"; }

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

EnsembleFactory iid(DistributionSpec d) {
  return [d](std::size_t n) { return iid_ensemble(n, d); };
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

Verdict edelman() {
  ExperimentConfig c;
  c.x = [](std::size_t n) { return ginibre_ensemble(n); };
  c.n_list = {64};
  c.eps_list = {0.1, 0.3, 0.5, 1.0};
  c.trials = 2000;
  c.base_seed = 2024;
  c.workers = default_workers();
  const TailResult r = run_tail_experiment(c);
  bool ok = r.failures[0] == 0;
  for (const auto& row : r.rows) {
    const double bound = row.eps * row.eps + 3.0 * row.std_err;
    info("eps=" + fmt(row.eps) + " P=" + fmt(row.prob) + " SE=" + fmt(row.std_err) + " eps^2+3SE=" + fmt(bound));
    ok = ok && row.prob <= bound;
  }
  return {ok, "Ginibre n=64, 2000 trials: P(s_n <= eps/sqrt n) <= eps^2 + 3 SE for eps in {0.1,0.3,0.5,1}"};
}

Verdict tail_shape() {
  ExperimentConfig c;
  c.x = iid(FourPointUniform{});
  c.n_list = {32, 64, 128};
  c.eps_list = {0.1, 0.25, 0.5, 1.0};
  c.trials = 1000;
  c.base_seed = 77;
  c.workers = default_workers();
  const TailResult r = run_tail_experiment(c);
  bool monotone = true;
  double ratio32 = 0.0, ratio128 = 0.0, se128 = 0.0;
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const auto& row = r.rows[k];
    if (k > 0 && r.rows[k - 1].n == row.n && row.prob < r.rows[k - 1].prob) monotone = false;
    if (row.eps == 0.5) {
      info("n=" + std::to_string(row.n) + " eps=0.5 P=" + fmt(row.prob) + " SE=" + fmt(row.std_err) + " P/eps=" + fmt(row.prob / row.eps));
      if (row.n == 32) ratio32 = row.prob / row.eps;
      if (row.n == 128) {
        ratio128 = row.prob / row.eps;
        se128 = row.std_err / row.eps;
      }
    }
  }
  info("fit C=" + fmt(r.C_fit) + " c=" + fmt(r.c_fit) + " (reported only)");
  info(std::string("monotone in eps: ") + (monotone ? "yes" : "no"));
  const bool ok = monotone && ratio128 <= 2.0 * ratio32 + 3.0 * se128;
  return {ok, "four-point, eps=0.5, 1000 trials: P/eps at n=128 <= 2 x (P/eps at n=32) + 3 SE; curves monotone in eps"};
}

Verdict identity() {
  const std::size_t n = 8;
  const EnsembleSpec ens = ginibre_ensemble(n);
  std::size_t accepted = 0, rejected = 0;
  double worst = 0.0;
  for (std::size_t t = 0; accepted < 100; ++t) {
    try {
      worst = std::max(worst, negative_second_moment_check(sample_matrix(ens, trial_seed(5, n, t))).rel_err);
      ++accepted;
    } catch (const NearSingularError&) {
      ++rejected;
    }
  }
  info("instances=" + std::to_string(accepted) + " rejected as near-singular=" + std::to_string(rejected) +
       " max rel_err=" + fmt(worst, 3));
  return {worst <= 1e-8, "negative second moment identity on 100 random 8x8 matrices, rel_err <= 1e-8"};
}

DistributionSpec random_law(Rng& rng) {
  switch (rng.index(5)) {
    case 0: return ComplexGaussian{1.0};
    case 1: return FourPointUniform{};
    case 2: return RealRademacher{};
    case 3: return SparseBernoulli{0.5, std::sqrt(2.0)};
    default: return LatticeUniform{{2.0, -2.0, cplx(0, 0.5), cplx(0, -0.5)}, {0.1, 0.1, 0.4, 0.4}};
  }
}

std::vector<cplx> random_vector(std::size_t n, Rng& rng) {
  std::vector<cplx> v(n);
  for (auto& z : v) z = cplx(rng.normal(), rng.normal());
  const double s = norm2(v) / (0.5 + 1.5 * rng.uniform());
  for (auto& z : v) z /= s;
  return v;
}

Verdict anticonc_suite() {
  Rng rng(SeedSpec{31, 0});
  std::size_t levy_flags = 0;
  double levy_min_margin = 1e300;
  for (std::size_t k = 0; k < 50; ++k) {
    const std::size_t n = 1 + rng.index(8);
    const std::vector<cplx> v = random_vector(n, rng);
    CoordinateLaws laws;
    for (std::size_t j = 0; j < n; ++j) laws.push_back(random_law(rng));
    const double r = 0.05 + 1.45 * rng.uniform();
    const InequalityReport rep = verify_levy_p_bound(v, laws, r, 20000, SeedSpec{100, k});
    levy_flags += rep.flag;
    levy_min_margin = std::min(levy_min_margin, rep.margin);
  }
  info("levy-p: 50 cases, flags=" + std::to_string(levy_flags) + ", smallest margin=" + fmt(levy_min_margin));

  std::size_t dbl_flags = 0;
  double dbl_min_margin = 1e300;
  QuadratureSpec quad;
  quad.radius = 3.0;
  quad.nodes = 61;
  quad.mc_samples = 2000;
  for (std::size_t k = 0; k < 10; ++k) {
    const std::size_t n = 1 + rng.index(4);
    const std::vector<cplx> w = random_vector(n, rng);
    CoordinateLaws laws;
    for (std::size_t j = 0; j < n; ++j) laws.push_back(random_law(rng));
    const double r = 0.1 + 0.9 * rng.uniform();
    const InequalityReport rep = verify_doubling_bound(w, laws, r, quad, 20000, SeedSpec{200, k}, default_workers());
    dbl_flags += rep.flag;
    dbl_min_margin = std::min(dbl_min_margin, rep.margin);
  }
  info("doubling: 10 cases, R=3 (exp(-pi R^2)=" + fmt(std::exp(-std::numbers::pi * 9.0), 3) + "), flags=" +
       std::to_string(dbl_flags) + ", smallest margin=" + fmt(dbl_min_margin));

  double worst_c = 0.0;
  std::size_t tail_cases = 0;
  for (std::size_t k = 0; k < 8; ++k) {
    const std::size_t n = 1 + rng.index(4);
    const std::vector<cplx> v = random_vector(n, rng);
    CoordinateLaws laws;
    for (std::size_t j = 0; j < n; ++j) laws.push_back(random_law(rng));
    CrlcdQuery q;
    q.mc_samples = 4000;
    q.points_per_decade = 20;
    q.phase_points = 32;
    const double eps = std::vector<double>{0.05, 0.1, 0.3}[k % 3];
    const InequalityReport rep = verify_crlcd_tail_bound(v, laws, eps, q, 20000, SeedSpec{300, k}, default_workers());
    for (const auto& [name, value] : rep.parameters)
      if (name == "C_hat") worst_c = std::max(worst_c, value);
    ++tail_cases;
  }
  info("crlcd-tail: " + std::to_string(tail_cases) + " cases, largest C_hat=" + fmt(worst_c));
  const bool ok = levy_flags == 0 && dbl_flags == 0 && worst_c <= 1e3;
  return {ok, "anti-concentration: levy-p 50 cases and doubling 10 cases without flags, C_hat <= 1e3"};
}

ComplexMatrix column(const std::vector<cplx>& xs) {
  ComplexMatrix m(xs.size(), 1);
  for (std::size_t k = 0; k < xs.size(); ++k) m(k, 0) = xs[k];
  return m;
}

std::vector<cplx> pair_differences(const std::vector<cplx>& s) {
  std::vector<cplx> out;
  for (const auto& a : s)
    for (const auto& b : s) out.push_back(a - b);
  return out;
}

Verdict crlcd_oracles() {
  CrlcdQuery q;
  q.v = {1.0};
  q.u = 0.3;
  q.L = 10.0;
  q.mc_samples = 20000;
  const CrlcdResult rad = crlcd(q, {RealRademacher{}}, SeedSpec{1, 0}, default_workers());
  const CrlcdResult four = crlcd(q, {FourPointUniform{}}, SeedSpec{2, 0}, default_workers());
  const CrlcdResult gau = crlcd(q, {ComplexGaussian{1.0}}, SeedSpec{3, 0}, default_workers());
  const bool rad_ok = std::abs(rad.value - 0.5) <= 1e-3;
  const bool four_ok = std::abs(four.value - 1.0) <= 1e-3;
  const bool gau_ok = gau.capped;
  info("rademacher: " + fmt(rad.value, 6) + " (target 0.5 +- 1e-3) " + (rad_ok ? "ok" : "miss"));
  info("four-point: " + fmt(four.value, 6) + " (target 1.0 +- 1e-3) " + (four_ok ? "ok" : "miss"));
  info("gaussian: " + fmt(gau.value, 6) + (gau.capped ? " (cap)" : " (not capped)") + " (target: cap sentinel " +
       fmt(q.grid_max) + ") " + (gau_ok ? "ok" : "miss"));

  // The same search on the exact symmetrized laws (all ordered pairs).
  const double rad_exact = 1.0 / (2.0 + std::sqrt(0.6));
  const double four_exact = 1.0 / (std::sqrt(2.0) + std::sqrt(0.3));
  const double rad_enum = crlcd_on_samples(q, column(pair_differences({1.0, -1.0}))).value;
  const double four_enum = crlcd_on_samples(q, column(pair_differences({1.0, -1.0, cplx(0, 1), cplx(0, -1)}))).value;
  info("enumerated law, rademacher: " + fmt(rad_enum, 9) + " vs 1/(2+sqrt 0.6)=" + fmt(rad_exact, 9));
  info("enumerated law, four-point: " + fmt(four_enum, 9) + " vs 1/(sqrt 2+sqrt 0.3)=" + fmt(four_exact, 9));
  CrlcdQuery small = q;
  small.L = 0.25;
  small.mc_samples = 4000;
  const CrlcdResult gcap = crlcd(small, {ComplexGaussian{1.0}}, SeedSpec{3, 0}, default_workers());
  info("gaussian with L=0.25: " + fmt(gcap.value) + (gcap.capped ? " (cap)" : " (not capped)"));
  return {rad_ok && four_ok && gau_ok, "CRLCD e1 targets: rademacher 0.5, four-point 1.0 (+-1e-3), gaussian cap at u=0.3, L=10"};
}

Verdict levy_closed_form() {
  const std::vector<cplx> e1{1.0};
  const ConcentrationEstimate e = levy_concentration(e1, {ComplexGaussian{1.0}}, 1.0, 50000, SeedSpec{11, 0});
  const double exact = 1.0 - std::exp(-1.0);
  info("rho_1(e1)=" + fmt(e.estimate, 6) + " SE=" + fmt(e.std_err, 3) + " closed form=" + fmt(exact, 6));
  return {std::abs(e.estimate - exact) <= 0.02, "Levy concentration, complex Gaussian, r=1, m=5e4: within 0.02 of 1 - 1/e"};
}

Verdict universality() {
  ExperimentConfig c;
  c.x = iid(ComplexGaussian{1.0});
  c.y = iid(FourPointUniform{});
  c.n_list = {256};
  c.trials = 20;
  c.base_seed = 256;
  c.workers = default_workers();
  const EsdExperimentResult circ = run_esd_experiment(c);
  std::size_t circ_hits = 0;
  std::vector<double> circ_vals;
  for (const auto& r : circ.circular_distance) {
    circ_hits += r.value <= 0.08;
    circ_vals.push_back(r.value);
  }
  const double circ_frac = circ_vals.empty() ? 0.0 : static_cast<double>(circ_hits) / static_cast<double>(circ_vals.size());
  info("Ginibre vs circular law, n=256: fraction <= 0.08 is " + fmt(circ_frac) + " (median " + fmt(median(circ_vals)) +
       ", failures " + std::to_string(circ.failures) + ")");

  const ComparisonResult esd = esd_comparison(c);
  std::size_t esd_hits = 0;
  std::vector<double> esd_vals;
  for (const auto& r : esd.records) {
    esd_hits += r.value <= 0.08;
    esd_vals.push_back(r.value);
  }
  const double esd_frac = esd_vals.empty() ? 0.0 : static_cast<double>(esd_hits) / static_cast<double>(esd_vals.size());
  info("Gaussian vs four-point ESD, n=256: fraction <= 0.08 is " + fmt(esd_frac) + " (median " + fmt(median(esd_vals)) +
       ", excluded " + std::to_string(esd.per_n[0].excluded) + ")");

  ExperimentConfig l = c;
  l.n_list = {64, 128};
  l.trials = 200;
  l.z = cplx(1.0, 1.0);
  const ComparisonResult ld = log_det_comparison(l);
  const double med64 = ld.per_n[0].median_abs;
  const double med128 = ld.per_n[1].median_abs;
  info("median |log-det difference| at z=1+i: n=64 " + fmt(med64) + ", n=128 " + fmt(med128));
  const bool ok = circ_frac >= 0.8 && esd_frac >= 0.8 && med128 <= med64;
  return {ok, "n=256, 20 trials: ESD distances <= 0.08 in >= 80% of trials; median |log-det diff| at 128 <= at 64"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Verdict determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(RMTK_TEST_DIR) / "acceptance_determinism";
  fs::create_directories(dir);
  const fs::path cfg = dir / "exp.toml";
  std::ofstream(cfg) << "n = [16, 32]\ntrials = 24\nz = \"0.5+0.5i\"\n[x]\ndist = \"fourpoint\"\n[y]\ndist = \"gaussian\"\n";
  const fs::path esd_cfg = dir / "esd.toml";
  std::ofstream(esd_cfg) << "n = 48\ntrials = 6\ndist = \"fourpoint\"\n";

  struct Job {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Job> jobs{
      {"tail", {"tail", "--config", esd_cfg.string(), "--set", "n=[16, 32]", "--set", "trials=50"}},
      {"esd", {"esd", "--config", esd_cfg.string()}},
      {"circular-law", {"circular-law", "--config", esd_cfg.string()}},
      {"logdet", {"universality", "--config", cfg.string(), "--set", "quantity=logdet"}},
      {"distsum", {"universality", "--config", cfg.string(), "--set", "quantity=distsum"}},
      {"esd-cmp", {"universality", "--config", cfg.string(), "--set", "quantity=esd"}},
      {"extreme-sv", {"universality", "--config", cfg.string(), "--set", "quantity=extreme-sv"}},
  };
  bool ok = true;
  for (const auto& job : jobs) {
    std::vector<std::string> outputs;
    for (const char* w : {"1", "4", "1"}) {
      const fs::path out = dir / (job.name + "_w" + w + "_" + std::to_string(outputs.size()) + ".csv");
      std::vector<std::string> args = job.args;
      for (const char* a : {"--workers", w, "--output"}) args.emplace_back(a);
      args.push_back(out.string());
      std::ostringstream so, se;
      if (cli::run(args, so, se) != 0) {
        info(job.name + ": run failed: " + se.str());
        ok = false;
      }
      outputs.push_back(slurp(out));
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
    info(job.name + ": " + std::to_string(outputs[0].size()) + " bytes, workers 1/4/1 " + (same ? "identical" : "DIFFER"));
    ok = ok && same;
  }
  return {ok, "re-runs from the same resolved config give byte-identical CSV for worker counts 1 and 4"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"edelman", edelman},
      {"tail-shape", tail_shape},
      {"identity", identity},
      {"anticonc-suite", anticonc_suite},
      {"crlcd-oracles", crlcd_oracles},
      {"levy-closed-form", levy_closed_form},
      {"universality", universality},
      {"determinism", determinism},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted) {
    const bool known = std::any_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == w; });
    if (!known) {
      std::cerr << "unknown criterion '" << w << "'\n";
      return 2;
    }
  }
  bool all = true;
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.summary << " [" << fmt(secs, 3) << " s]\n";
    std::cout.flush();
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
