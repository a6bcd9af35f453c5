#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmtk/anticonc.hpp"
#include "rmtk/config.hpp"
#include "rmtk/ensemble.hpp"
#include "rmtk/errors.hpp"
#include "rmtk/experiments.hpp"
#include "rmtk/linalg.hpp"
#include "rmtk/matrix_io.hpp"
#include "rmtk/parallel.hpp"
#include "rmtk/results_csv.hpp"
#include "rmtk/sphere.hpp"

namespace rmtk::cli {
namespace {

using json = nlohmann::ordered_json;

struct Context {
  const Config& cfg;
  const Invocation& inv;
  std::size_t workers;
  std::ostream& out;
};

using Handler = std::function<int(const Context&)>;

struct CommandSpec {
  std::string name;
  std::string help;
  /// Keys with their default values; filled into the resolved config.
  std::vector<std::pair<std::string, std::string>> defaults;
  /// Keys accepted without a default.
  std::set<std::string> optional;
  Handler run;
};

std::vector<std::pair<std::string, std::string>> ensemble_defaults(const std::string& p) {
  return {{p + "dist", "\"gaussian\""}, {p + "shift", "0"}, {p + "scale", "1"},
          {p + "declared_b", "0.5"}, {p + "declared_K", "1.0"}};
}

std::set<std::string> ensemble_optional(const std::string& p) { return {p + "alpha", p + "beta"}; }

const std::vector<std::pair<std::string, std::string>> kCrlcdDefaults = {
    {"L", "10"}, {"u", "0.3"}, {"grid_min", "0.01"}, {"grid_max", "1000"}, {"points_per_decade", "40"},
    {"phase_points", "64"}, {"rel_tol", "1e-7"}};

template <class... Lists>
std::vector<std::pair<std::string, std::string>> join(const Lists&... lists) {
  std::vector<std::pair<std::string, std::string>> out;
  (out.insert(out.end(), lists.begin(), lists.end()), ...);
  return out;
}

json estimate_json(const Estimate& e) { return {{"estimate", e.value}, {"std_err", e.std_err}, {"samples", e.samples}}; }

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json report_json(const InequalityReport& r) {
  json params = json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  json j = {{"name", r.name},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"std_errs", {{"lhs", r.lhs_std_err}, {"rhs", r.rhs_std_err}}},
            {"margin", r.margin},
            {"flag", r.flag},
            {"parameters", params}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json summary_json(const ComparisonSummary& s) {
  json j = {{"n", s.n},
            {"used", s.used},
            {"excluded", s.excluded},
            {"mean_abs", s.mean_abs},
            {"median_abs", s.median_abs},
            {"iqr_abs", s.iqr_abs}};
  if (s.index_hi > 0) j["index_range"] = {s.index_lo, s.index_hi};
  return j;
}

json crlcd_json(const CrlcdResult& r) {
  return {{"value", r.value},
          {"capped", r.capped},
          {"cap", r.cap},
          {"witness_theta", complex_json(r.witness_theta)},
          {"lhs_at_witness", r.lhs_at_witness},
          {"bound_at_witness", r.bound_at_witness},
          {"last_failing_modulus", r.last_failing_modulus},
          {"grid_moduli", r.grid_moduli},
          {"distinct_samples", r.distinct_samples}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write failed for '" + path + "'");
}

const std::string& require_output(const Context& c) {
  if (c.inv.output_path.empty()) throw ValidationError(c.inv.subcommand + " requires --output");
  return c.inv.output_path;
}

// Reports go to stdout, and to --output when given.
int emit_report(const Context& c, json report, bool flagged) {
  report["flag"] = flagged;
  const std::string text = report.dump(2) + "\n";
  if (!c.inv.output_path.empty()) write_text(c.inv.output_path, text);
  c.out << text;
  return static_cast<int>(flagged ? ExitCode::Flagged : ExitCode::Ok);
}

// Data commands write the CSV to --output and a summary to stdout.
int emit_summary(const Context& c, const json& summary) {
  c.out << summary.dump(2) << "\n";
  return static_cast<int>(ExitCode::Ok);
}

ExperimentConfig experiment_from(const Context& c, const std::string& xp, const std::string& yp) {
  const Config& cfg = c.cfg;
  ExperimentConfig e;
  e.x = ensemble_factory(cfg, xp);
  if (!yp.empty()) e.y = ensemble_factory(cfg, yp);
  if (cfg.has("z")) e.z = cfg.get_complex("z", 0.0);
  e.n_list = cfg.get_sizes("n", {});
  if (cfg.has("eps")) e.eps_list = cfg.get_doubles("eps", {});
  e.trials = cfg.get_size("trials", 1);
  e.base_seed = cfg.get_u64("base_seed", 0);
  e.workers = c.workers;
  if (cfg.has("c_grid")) e.c_grid = cfg.get_doubles("c_grid", {});
  if (cfg.has("grid_half_width")) e.grid.half_width = cfg.get_double("grid_half_width", 2.5);
  if (cfg.has("grid_points")) e.grid.points = cfg.get_size("grid_points", 201);
  return e;
}

std::size_t single_n(const Config& cfg) {
  const auto ns = cfg.get_sizes("n", {});
  if (ns.size() != 1) throw ValidationError("key 'n': expected a single dimension");
  return ns.front();
}

CrlcdQuery query_from(const Config& cfg, std::vector<cplx> v) {
  CrlcdQuery q;
  q.v = std::move(v);
  q.L = cfg.get_double("L", q.L);
  q.u = cfg.get_double("u", q.u);
  q.grid_min = cfg.get_double("grid_min", q.grid_min);
  q.grid_max = cfg.get_double("grid_max", q.grid_max);
  q.points_per_decade = cfg.get_size("points_per_decade", q.points_per_decade);
  q.phase_points = cfg.get_size("phase_points", q.phase_points);
  q.mc_samples = cfg.get_size("mc_samples", q.mc_samples);
  q.rel_tol = cfg.get_double("rel_tol", q.rel_tol);
  return q;
}

SphereParams sphere_from(const Config& cfg) {
  return SphereParams{cfg.get_double("delta", 0.1), cfg.get_double("rho", 0.1)};
}

double fraction_at_most(const std::vector<ComparisonRecord>& records, double threshold) {
  if (records.empty()) return 0.0;
  const auto hits = std::count_if(records.begin(), records.end(),
                                  [&](const ComparisonRecord& r) { return r.value <= threshold; });
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

// ---- subcommands ----

int cmd_sample(const Context& c) {
  const Config& cfg = c.cfg;
  const std::size_t n = single_n(cfg);
  const EnsembleSpec ens = ensemble_factory(cfg, "")(n);
  const std::uint64_t base = cfg.get_u64("base_seed", 0);
  const std::size_t trial = cfg.get_size("trial", 0);
  const ComplexMatrix a = sample_matrix(ens, trial_seed(base, n, trial));
  write_matrix_csv(std::filesystem::path(require_output(c)), a);

  const HsBudgetReport hs = check_hs_budget(ens, cfg.get_size("hs_trials", 200), base);
  const BConditionReport b =
      check_b_condition(ens.law(0, 0), ens.declared_b, cfg.get_size("b_trials", 20000), base);
  const Estimate pastur = check_pastur(ens, cfg.get_double("pastur_eps", 0.5), cfg.get_size("pastur_trials", 200), base);
  const Norms norms = operator_and_hs_norms(a);

  json report = {{"n", n},
                 {"trial", trial},
                 {"norms", {{"operator", norms.s1}, {"hilbert_schmidt", norms.hs}}},
                 {"hs_budget",
                  {{"normalized_hs", estimate_json(hs.normalized_hs)},
                   {"declared_K", hs.declared_K},
                   {"within_budget", hs.within_budget}}},
                 {"b_condition",
                  {{"b", b.b},
                   {"two_sided", estimate_json(b.two_sided)},
                   {"two_sided_pass", b.two_sided_pass},
                   {"lower_only", estimate_json(b.lower_only)},
                   {"lower_only_pass", b.lower_only_pass}}},
                 {"pastur", estimate_json(pastur)}};
  report["flag"] = !hs.within_budget || !b.two_sided_pass;
  c.out << report.dump(2) << "\n";
  return static_cast<int>(report["flag"].get<bool>() ? ExitCode::Flagged : ExitCode::Ok);
}

int cmd_tail(const Context& c) {
  const std::string& path = require_output(c);
  const ExperimentConfig e = experiment_from(c, "", "");
  const TailResult r = run_tail_experiment(e);
  persist_results(tail_table(r), path);
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n}, {"eps", row.eps}, {"trials", row.trials}, {"prob", row.prob}, {"stderr", row.std_err}});
  return emit_summary(c, {{"rows", rows},
                          {"failures", r.failures},
                          {"fit", {{"C", r.C_fit}, {"c", r.c_fit}, {"sse", r.fit_sse}}}});
}

json distance_summary(const std::vector<ComparisonRecord>& records, double threshold) {
  std::vector<double> values;
  for (const auto& r : records) values.push_back(r.value);
  const ComparisonSummary s = summarize_abs(0, values, 0);
  return {{"trials", values.size()},
          {"mean", s.mean_abs},
          {"median", s.median_abs},
          {"iqr", s.iqr_abs},
          {"threshold", threshold},
          {"fraction_at_most_threshold", fraction_at_most(records, threshold)}};
}

int cmd_esd(const Context& c) {
  const std::string& path = require_output(c);
  const EsdExperimentResult r = run_esd_experiment(experiment_from(c, "", ""));
  persist_results(esd_table(r.atoms), path);
  return emit_summary(c, {{"n", r.n},
                          {"failures", r.failures},
                          {"circular_distance", distance_summary(r.circular_distance, c.cfg.get_double("threshold", 0.08))}});
}

int cmd_circular_law(const Context& c) {
  const std::string& path = require_output(c);
  const EsdExperimentResult r = run_esd_experiment(experiment_from(c, "", ""));
  persist_results(comparison_table(r.circular_distance), path);
  return emit_summary(c, {{"n", r.n},
                          {"failures", r.failures},
                          {"circular_distance", distance_summary(r.circular_distance, c.cfg.get_double("threshold", 0.08))}});
}

int cmd_universality(const Context& c) {
  const std::string& path = require_output(c);
  const std::string quantity = c.cfg.get_string("quantity", "logdet");
  if (quantity == "extreme-sv") {
    const ExtremeSvResult r = extreme_sv_check(experiment_from(c, "x.", ""));
    persist_results(extreme_sv_table(r), path);
    json freq = json::array();
    for (const auto& f : r.frequencies)
      freq.push_back({{"n", f.n}, {"C", f.C}, {"large", f.large}, {"small", f.small}});
    return emit_summary(c, {{"quantity", quantity}, {"failures", r.failures}, {"frequencies", freq}});
  }
  const ExperimentConfig e = experiment_from(c, "x.", "y.");
  ComparisonResult r;
  if (quantity == "logdet")
    r = log_det_comparison(e);
  else if (quantity == "distsum")
    r = distance_sum_comparison(e);
  else if (quantity == "esd")
    r = esd_comparison(e);
  else
    throw ValidationError("key 'quantity': expected logdet, distsum, esd or extreme-sv, got '" + quantity + "'");
  persist_results(comparison_table(r.records), path);
  json per_n = json::array();
  for (const auto& s : r.per_n) per_n.push_back(summary_json(s));
  json summary = {{"quantity", r.quantity}, {"per_n", per_n}};
  if (quantity == "esd") {
    const double threshold = c.cfg.get_double("threshold", 0.08);
    json fractions = json::array();
    for (std::size_t n : e.n_list) {
      std::vector<ComparisonRecord> at_n;
      for (const auto& rec : r.records)
        if (rec.n == n) at_n.push_back(rec);
      fractions.push_back({{"n", n}, {"threshold", threshold}, {"fraction_at_most_threshold", fraction_at_most(at_n, threshold)}});
    }
    summary["threshold_fractions"] = fractions;
  }
  return emit_summary(c, summary);
}

int cmd_anticonc_verify(const Context& c) {
  const Config& cfg = c.cfg;
  const std::string verifier = cfg.get_string("verifier", "levy-p");
  const CoordinateLaws laws = laws_from_config(cfg, "gaussian");
  const std::vector<cplx> v = vector_from_config(cfg, "v", single_n(cfg));
  const SeedSpec seed{cfg.get_u64("base_seed", 0), 0};
  const std::size_t m = cfg.get_size("m", 20000);
  const double r = cfg.get_double("r", 1.0);

  if (verifier == "levy-p") {
    const InequalityReport rep = verify_levy_p_bound(v, laws, r, m, seed);
    return emit_report(c, report_json(rep), rep.flag);
  }
  if (verifier == "doubling") {
    QuadratureSpec quad;
    quad.radius = cfg.get_double("quad_radius", quad.radius);
    quad.nodes = cfg.get_size("quad_nodes", quad.nodes);
    quad.mc_samples = cfg.get_size("quad_mc_samples", quad.mc_samples);
    const InequalityReport rep = verify_doubling_bound(v, laws, r, quad, m, seed, c.workers);
    return emit_report(c, report_json(rep), rep.flag);
  }
  if (verifier == "crlcd-tail") {
    const InequalityReport rep =
        verify_crlcd_tail_bound(v, laws, cfg.get_double("eps", 0.1), query_from(cfg, v), m, seed, c.workers);
    return emit_report(c, report_json(rep), rep.flag);
  }
  if (verifier == "uniform") {
    const UniformAnticoncResult res = verify_uniform_anticonc(v, laws, cfg.get_doubles("c_grid", {}), m, seed);
    json j = report_json(res.report);
    j["found"] = res.found;
    j["best_c"] = res.best_c;
    return emit_report(c, j, res.report.flag || !res.found);
  }
  throw ValidationError("key 'verifier': expected levy-p, doubling, crlcd-tail or uniform, got '" + verifier + "'");
}

int cmd_crlcd(const Context& c) {
  const Config& cfg = c.cfg;
  const CoordinateLaws laws = laws_from_config(cfg, "gaussian");
  const CrlcdQuery q = query_from(cfg, vector_from_config(cfg, "v", single_n(cfg)));
  const CrlcdResult r = crlcd(q, laws, SeedSpec{cfg.get_u64("base_seed", 0), 0}, c.workers);
  return emit_report(c, crlcd_json(r), false);
}

int cmd_sphere_probe(const Context& c) {
  const Config& cfg = c.cfg;
  const std::string probe = cfg.get_string("probe", "single-vector");
  const std::size_t n = single_n(cfg);
  const EnsembleSpec ens = ensemble_factory(cfg, "")(n);
  const SphereParams params = sphere_from(cfg);
  const std::uint64_t base = cfg.get_u64("base_seed", 0);
  const std::size_t trials = cfg.get_size("trials", 1);
  json common = {{"probe", probe}, {"n", n}, {"delta", params.delta}, {"rho", params.rho}, {"trials", trials}};

  if (probe == "single-vector") {
    const std::vector<cplx> v = vector_from_config(cfg, "v", n);
    const SingleVectorReport r = single_vector_invertibility(ens, v, cfg.get_doubles("c_grid", {}), trials, base, c.workers);
    json rows = json::array();
    for (const auto& row : r.rows)
      rows.push_back({{"c", row.c}, {"prob", estimate_json(row.prob)}, {"reference", row.reference}, {"qualifies", row.qualifies}});
    common["rows"] = rows;
    common["found"] = r.found;
    common["best_c"] = r.best_c;
    return emit_report(c, common, !r.found);
  }
  if (probe == "compressible") {
    const CompressibleReport r = compressible_inf_probe(ens, params, cfg.get_size("vector_samples", 1000), trials,
                                                        cfg.get_doubles("thresholds", {}), base, c.workers);
    common["vector_samples"] = r.vector_samples;
    common["max_sampled_dist"] = r.max_sampled_dist;
    json rows = json::array();
    for (std::size_t k = 0; k < r.thresholds.size(); ++k)
      rows.push_back({{"threshold", r.thresholds[k]}, {"fraction_below", r.fraction_below[k]}});
    common["thresholds"] = rows;
    if (c.inv.audit) common["min_ratio"] = r.min_ratio;
    return emit_report(c, common, false);
  }
  if (probe == "distance") {
    const DistanceProbeReport r = invertibility_via_distance_probe(ens, params, cfg.get_double("eps", 0.1), trials, base, c.workers);
    common["lhs"] = r.lhs.value;
    common["rhs"] = r.rhs.value;
    common["std_errs"] = {{"lhs", r.lhs.std_err}, {"rhs", r.rhs.std_err}};
    common["margin"] = r.margin;
    return emit_report(c, common, r.flag);
  }
  if (probe == "crlcd-scan") {
    CrlcdQuery tmpl = query_from(cfg, {});
    std::vector<std::vector<cplx>> candidates;
    if (cfg.has("v")) candidates.push_back(vector_from_config(cfg, "v", n));
    const CrlcdScanReport r = crlcd_incompressible_scan(ens, params, tmpl, cfg.get_size("vector_samples", 8), candidates,
                                                        SeedSpec{base, 0}, c.workers);
    common["column_second_moment"] = r.column_second_moment;
    common["scanned"] = r.scanned;
    common["all_capped"] = r.all_capped;
    common["min_crlcd"] = r.min_crlcd;
    common["h_fit"] = r.h_fit;
    json entries = json::array();
    for (const auto& e : r.entries) {
      json j = {{"kind", e.classification.kind == VectorKind::Incompressible ? "incompressible"
                         : e.classification.kind == VectorKind::Sparse    ? "sparse"
                                                                          : "compressible"},
                {"dist_to_sparse", e.classification.dist_to_sparse},
                {"scanned", e.scanned}};
      if (e.scanned) j["crlcd"] = crlcd_json(e.crlcd);
      if (c.inv.audit) {
        json vec = json::array();
        for (const auto& z : e.v) vec.push_back(complex_json(z));
        j["v"] = vec;
      }
      entries.push_back(j);
    }
    common["entries"] = entries;
    return emit_report(c, common, !(r.h_fit > 0.0));
  }
  throw ValidationError("key 'probe': expected single-vector, compressible, distance or crlcd-scan, got '" + probe + "'");
}

int cmd_identity_check(const Context& c) {
  const Config& cfg = c.cfg;
  const std::size_t n = single_n(cfg);
  const EnsembleSpec ens = ensemble_factory(cfg, "")(n);
  const std::uint64_t base = cfg.get_u64("base_seed", 0);
  const std::size_t trials = cfg.get_size("trials", 1);
  const double tol = cfg.get_double("tol", 1e-8);
  if (trials == 0) throw ValidationError("key 'trials': must be positive");

  struct Slot {
    bool rejected = false;
    SecondMomentIdentity id;
  };
  std::vector<Slot> slots(trials);
  parallel_for(trials, c.workers, [&](std::size_t t) {
    try {
      slots[t].id = negative_second_moment_check(sample_matrix(ens, trial_seed(base, n, t)));
    } catch (const NearSingularError&) {
      slots[t].rejected = true;
    }
  });

  json instances = json::array();
  std::size_t rejected = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    if (slots[t].rejected) {
      ++rejected;
      instances.push_back({{"trial", t}, {"rejected", true}});
      continue;
    }
    const auto& id = slots[t].id;
    worst = std::max(worst, id.rel_err);
    instances.push_back({{"trial", t}, {"lhs", id.lhs}, {"rhs", id.rhs}, {"rel_err", id.rel_err}});
  }
  if (rejected == trials) throw NumericalError("identity-check: every instance was near-singular");
  json report = {{"n", n}, {"trials", trials}, {"tol", tol}, {"rejected", rejected},
                 {"max_rel_err", worst}, {"instances", instances}};
  return emit_report(c, report, worst > tol);
}

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> specs = [] {
    const auto ens = ensemble_defaults("");
    const auto ens_opt = ensemble_optional("");
    std::set<std::string> xy_opt = ensemble_optional("x.");
    for (const auto& k : ensemble_optional("y.")) xy_opt.insert(k);
    const std::vector<std::pair<std::string, std::string>> seed = {{"base_seed", "1"}};
    const std::vector<std::pair<std::string, std::string>> grid = {{"grid_half_width", "2.5"}, {"grid_points", "201"}};
    const std::set<std::string> laws_opt = {"dists"};

    std::vector<CommandSpec> v;
    v.push_back({"sample", "draw one matrix and check the ensemble hypotheses",
                 join(seed, ens,
                      std::vector<std::pair<std::string, std::string>>{{"n", "64"}, {"trial", "0"}, {"hs_trials", "200"},
                                                                       {"b_trials", "20000"}, {"pastur_eps", "0.5"},
                                                                       {"pastur_trials", "200"}}),
                 ens_opt, cmd_sample});
    v.push_back({"tail", "smallest singular value tail probabilities",
                 join(seed, ens,
                      std::vector<std::pair<std::string, std::string>>{
                          {"n", "[64]"}, {"eps", "[0.1, 0.3, 0.5, 1.0]"}, {"trials", "200"}}),
                 ens_opt, cmd_tail});
    v.push_back({"esd", "eigenvalues of A/sqrt(n) per trial",
                 join(seed, ens, grid,
                      std::vector<std::pair<std::string, std::string>>{{"n", "128"}, {"trials", "10"}, {"threshold", "0.08"}}),
                 ens_opt, cmd_esd});
    v.push_back({"circular-law", "distance of each trial's ESD to the circular law",
                 join(seed, ens, grid,
                      std::vector<std::pair<std::string, std::string>>{{"n", "128"}, {"trials", "10"}, {"threshold", "0.08"}}),
                 ens_opt, cmd_circular_law});
    v.push_back({"universality", "compare two ensembles (logdet, distsum, esd, extreme-sv)",
                 join(seed, ensemble_defaults("x."), ensemble_defaults("y."), grid,
                      std::vector<std::pair<std::string, std::string>>{{"quantity", "\"logdet\""},
                                                                       {"n", "[64]"},
                                                                       {"trials", "50"},
                                                                       {"z", "\"0\""},
                                                                       {"c_grid", "[0.5, 1.0, 1.5, 2.0]"},
                                                                       {"threshold", "0.08"}}),
                 xy_opt, cmd_universality});
    v.push_back({"anticonc-verify", "anti-concentration inequality checks (levy-p, doubling, crlcd-tail, uniform)",
                 join(seed, kCrlcdDefaults,
                      std::vector<std::pair<std::string, std::string>>{{"verifier", "\"levy-p\""},
                                                                       {"n", "1"},
                                                                       {"v", "\"e1\""},
                                                                       {"dist", "\"gaussian\""},
                                                                       {"r", "1.0"},
                                                                       {"m", "20000"},
                                                                       {"eps", "0.1"},
                                                                       {"c_grid", "[0.05, 0.1, 0.2, 0.3, 0.5]"},
                                                                       {"quad_radius", "3.0"},
                                                                       {"quad_nodes", "61"},
                                                                       {"quad_mc_samples", "2000"},
                                                                       {"mc_samples", "20000"}}),
                 laws_opt, cmd_anticonc_verify});
    v.push_back({"crlcd", "complex randomized least common denominator of a vector",
                 join(seed, kCrlcdDefaults,
                      std::vector<std::pair<std::string, std::string>>{
                          {"n", "1"}, {"v", "\"e1\""}, {"dist", "\"gaussian\""}, {"mc_samples", "20000"}}),
                 laws_opt, cmd_crlcd});
    std::set<std::string> sphere_opt = ens_opt;
    sphere_opt.insert("v");
    v.push_back({"sphere-probe", "invertibility probes (single-vector, compressible, distance, crlcd-scan)",
                 join(seed, ens, kCrlcdDefaults,
                      std::vector<std::pair<std::string, std::string>>{{"probe", "\"single-vector\""},
                                                                       {"n", "64"},
                                                                       {"trials", "200"},
                                                                       {"delta", "0.1"},
                                                                       {"rho", "0.1"},
                                                                       {"c_grid", "[0.05, 0.1, 0.2, 0.3]"},
                                                                       {"vector_samples", "1000"},
                                                                       {"thresholds", "[0.01, 0.05, 0.1]"},
                                                                       {"eps", "0.1"},
                                                                       {"mc_samples", "2000"}}),
                 sphere_opt, cmd_sphere_probe});
    v.push_back({"identity-check", "negative second moment identity on random matrices",
                 join(seed, ens,
                      std::vector<std::pair<std::string, std::string>>{{"n", "8"}, {"trials", "1"}, {"tol", "1e-8"}}),
                 ens_opt, cmd_identity_check});
    return v;
  }();
  return specs;
}

const CommandSpec& find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return c;
  throw ValidationError("unknown subcommand '" + name + "'");
}

Config resolve_config(const CommandSpec& spec, const Invocation& inv) {
  Config cfg = Config::load(inv.config_path);
  for (const auto& o : inv.overrides) cfg.apply_override(o);
  if (inv.seed) cfg.set("base_seed", ConfigValue::number(std::to_string(*inv.seed)));

  std::set<std::string> allowed = spec.optional;
  for (const auto& [k, v] : spec.defaults) allowed.insert(k);
  cfg.reject_unknown(allowed);
  // A vector given as dists replaces the single dist default.
  for (const auto& [k, v] : spec.defaults) {
    if (k == "dist" && cfg.has("dists")) continue;
    if (!cfg.has(k)) cfg.set(k, parse_config_value(v));
  }
  return cfg;
}

struct ErrorInfo {
  std::string kind;
  std::string message;
  ExitCode code;
};

int report_error(const ErrorInfo& e, bool as_json, std::ostream& err) {
  if (as_json) {
    json j = {{"error", {{"kind", e.kind}, {"message", e.message}, {"exit_status", static_cast<int>(e.code)}}}};
    err << j.dump() << "\n";
  } else {
    err << "rmtk: " << e.kind << " error: " << e.message << "\n";
  }
  return static_cast<int>(e.code);
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : commands()) out.push_back(c.name);
    return out;
  }();
  return names;
}

ParseOutcome parse_invocation(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random matrix toolkit: estimators, verifiers and experiments", "rmtk"};
  app.require_subcommand(1);
  Invocation inv;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, std::pair<CLI::Option*, CLI::Option*>> opts;
  for (const auto& spec : commands()) {
    CLI::App* s = app.add_subcommand(spec.name, spec.help);
    s->add_option("--config", inv.config_path, "config file")->required();
    s->add_option("--output", inv.output_path, "output file (CSV for data commands, JSON for reports)");
    s->add_option("--set", inv.overrides, "override key=value (repeatable)")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    auto* so = s->add_option("--seed", seed, "base seed override");
    auto* wo = s->add_option("--workers", workers, "worker threads (default: RMTK_WORKERS or hardware)");
    s->add_flag("--json-errors", inv.json_errors, "machine-readable errors on stderr");
    s->add_flag("--audit", inv.audit, "include sampled vectors and per-trial values in reports");
    subs[spec.name] = s;
    opts[spec.name] = {so, wo};
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return {std::nullopt, app.exit(e, out, err)};
  } catch (const CLI::CallForAllHelp& e) {
    return {std::nullopt, app.exit(e, out, err)};
  } catch (const CLI::ParseError& e) {
    const bool json_errors = std::find(args.begin(), args.end(), "--json-errors") != args.end();
    return {std::nullopt, report_error({"usage", e.what(), ExitCode::Usage}, json_errors, err)};
  }

  for (const auto& [name, s] : subs) {
    if (!s->parsed()) continue;
    inv.subcommand = name;
    if (opts[name].first->count() > 0) inv.seed = seed;
    if (opts[name].second->count() > 0) {
      if (workers == 0) return {std::nullopt, report_error({"usage", "--workers must be positive", ExitCode::Usage}, inv.json_errors, err)};
      inv.workers = workers;
    }
  }
  for (const auto& o : inv.overrides)
    if (o.find('=') == std::string::npos)
      return {std::nullopt,
              report_error({"usage", "invalid override '" + o + "': expected key=value", ExitCode::Usage}, inv.json_errors, err)};
  return {inv, 0};
}

int dispatch(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    const CommandSpec& spec = find_command(inv.subcommand);
    const Config cfg = resolve_config(spec, inv);
    if (!inv.output_path.empty())
      write_text(inv.output_path + ".config.toml", "# resolved config: rmtk " + inv.subcommand + "\n" + cfg.to_text());
    const std::size_t workers = inv.workers ? *inv.workers : default_workers();
    return spec.run(Context{cfg, inv, workers, out});
  } catch (const ValidationError& e) {
    return report_error({"validation", e.what(), ExitCode::Usage}, inv.json_errors, err);
  } catch (const IoError& e) {
    return report_error({"io", e.what(), ExitCode::Usage}, inv.json_errors, err);
  } catch (const NumericalError& e) {
    return report_error({"numerical", e.what(), ExitCode::Numerical}, inv.json_errors, err);
  } catch (const std::invalid_argument& e) {
    return report_error({"validation", e.what(), ExitCode::Usage}, inv.json_errors, err);
  } catch (const std::exception& e) {
    return report_error({"internal", e.what(), ExitCode::Numerical}, inv.json_errors, err);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const ParseOutcome p = parse_invocation(args, out, err);
  if (!p.invocation) return p.exit_status;
  return dispatch(*p.invocation, out, err);
}

}  // namespace rmtk::cli
