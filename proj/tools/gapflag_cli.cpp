// gapflag: command-line front end for gap coordinates, information geometry,
// flag-manifold sampling, identity checks and GKLS evolution.
//
// Exit codes: 0 success, 1 verification FAIL, 2 invalid input,
// 3 numerical breakdown, 4 I/O failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gapflag/errors.hpp"
#include "gapflag/gkls.hpp"
#include "gapflag/info_geometry.hpp"
#include "gapflag/io.hpp"
#include "gapflag/spectral_core.hpp"
#include "gapflag/sun_param.hpp"

namespace {

using namespace gapflag;
using io::Json;

constexpr int kExitFail = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;
constexpr std::uint64_t kDefaultSeed = 20260101;

struct Options {
  int n = 0;
  std::vector<double> p, r;
  std::uint64_t seed = kDefaultSeed;
  std::string format = "json";
  std::string out;
  bool sort = false;
  // geometry
  bool fisher = false, bures = false, purity = false, kl = false, entropy = false;
  // verify / sample
  std::uint64_t samples = 100000;
  std::uint64_t trials = 1000;
  double tolerance = 0.05;
  // evolve
  std::string model_path, rho0_path, method = "both", states_out;
  double dt = 1e-3, t_end = 1.0;
  std::size_t record_every = 1;
  bool fallback = false;
};

Json header(const std::string& command, const Options& o, Json params) {
  Json h;
  h["tool"] = "gapflag";
  h["version"] = GAPFLAG_VERSION;
  h["command"] = command;
  h["seed"] = o.seed;
  h["params"] = std::move(params);
  return h;
}

std::string csv_header(const Json& h) {
  std::ostringstream os;
  os << "# tool: gapflag\n# version: " << GAPFLAG_VERSION << "\n# command: "
     << h["command"].get<std::string>() << "\n# seed: " << h["seed"].get<std::uint64_t>() << '\n';
  for (const auto& [key, value] : h["params"].items()) os << "# " << key << ": " << value.dump() << '\n';
  return os.str();
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
  } else {
    io::write_text_file(o.out, text);
  }
}

void require_n(int n) {
  if (n < 2) throw ValidationError("--n must be at least 2");
}

RealVector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

GapVector gaps_option(const Options& o) {
  require_n(o.n);
  if (static_cast<int>(o.r.size()) != o.n - 1)
    throw ValidationError("--r must have n-1 = " + std::to_string(o.n - 1) + " entries");
  return GapVector(to_vector(o.r));
}

Json rational_json(const Rational& q) {
  Json j;
  j["exact"] = q.str();
  j["value"] = static_cast<double>(q);
  return j;
}

Json real_matrix_json(const RealMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_row(const std::string& name, const RealVector& v) {
  std::string line = name;
  for (Eigen::Index k = 0; k < v.size(); ++k) line += "," + io::format_double(v(k));
  return line + "\n";
}

// -- convert -----------------------------------------------------------------

int cmd_convert(const Options& o) {
  require_n(o.n);
  if (o.p.empty() == o.r.empty()) throw ValidationError("give exactly one of --p or --r");
  GapVector r = o.p.empty() ? gaps_option(o) : GapVector(RealVector::Zero(o.n - 1));
  Json params;
  params["n"] = o.n;
  if (!o.p.empty()) {
    if (static_cast<int>(o.p.size()) != o.n)
      throw ValidationError("--p must have n = " + std::to_string(o.n) + " entries");
    params["p"] = o.p;
    r = o.sort ? gaps_from_unsorted(o.p) : gaps_from_probs(ProbVector(to_vector(o.p)));
  } else {
    params["r"] = o.r;
  }
  params["sort"] = o.sort;
  const ProbVector p = probs_from_gaps(r);
  Json h = header("convert", o, params);

  if (o.format == "csv") {
    emit(o, csv_header(h) + csv_row("r", r.values()) + csv_row("p", p.values()) +
                "in_polytope,true\n");
    return 0;
  }
  Json out = h;
  out["r"] = io::vector_to_json(r.values());
  out["p"] = io::vector_to_json(p.values());
  out["in_polytope"] = true;
  emit(o, out.dump(2) + "\n");
  return 0;
}

// -- geometry ----------------------------------------------------------------

int cmd_geometry(const Options& o) {
  const GapVector r = gaps_option(o);
  const ProbVector p = probs_from_gaps(r);
  const bool all = !(o.fisher || o.bures || o.purity || o.kl || o.entropy);
  Json params;
  params["n"] = o.n;
  params["r"] = o.r;
  Json h = header("geometry", o, params);
  Json out = h;
  std::string csv = csv_header(h);

  if (all || o.fisher) {
    const RealMatrix g = fisher_metric_r(r).g;
    out["fisher"] = real_matrix_json(g);
    for (Eigen::Index a = 0; a < g.rows(); ++a)
      csv += csv_row("fisher_row_" + std::to_string(a + 1), g.row(a).transpose());
  }
  if (all || o.bures) {
    const BuresDecomposition b = bures_decomposition(r);
    Json bj;
    bj["spectral"] = real_matrix_json(b.spectral_part.g);
    Json weights = Json::array();
    for (const auto& [pair, w] : b.angular_weights) {
      weights.push_back({{"i", pair.first + 1}, {"j", pair.second + 1}, {"weight", w}});
      csv += "bures_angular_" + std::to_string(pair.first + 1) + "_" +
             std::to_string(pair.second + 1) + "," + io::format_double(w) + "\n";
    }
    bj["angular"] = std::move(weights);
    out["bures"] = std::move(bj);
    for (Eigen::Index a = 0; a < b.spectral_part.g.rows(); ++a)
      csv += csv_row("bures_spectral_row_" + std::to_string(a + 1),
                     b.spectral_part.g.row(a).transpose());
  }
  if (all || o.purity) {
    const double trace_route = purity_from_probs(p);
    Json pj;
    pj["value"] = trace_route;
    try {
      const int k = crossover_index(r);
      pj["gap_route"] = purity_gap(r);
      pj["crossover_index"] = k;
    } catch (const CrossoverTieError&) {
      pj["gap_route"] = nullptr;
      pj["crossover_index"] = nullptr;
    }
    out["purity"] = std::move(pj);
    csv += "purity," + io::format_double(trace_route) + "\n";
  }
  if (all || o.kl) {
    out["kl"] = {{"exact", kl_exact(p)}, {"quadratic", kl_quadratic(r)}};
    csv += "kl_exact," + io::format_double(kl_exact(p)) + "\nkl_quadratic," +
           io::format_double(kl_quadratic(r)) + "\n";
  }
  if (all || o.entropy) {
    out["entropy"] = shannon_entropy(p);
    csv += "entropy," + io::format_double(shannon_entropy(p)) + "\n";
  }
  emit(o, o.format == "csv" ? csv : out.dump(2) + "\n");
  return 0;
}

// -- verify --------------------------------------------------------------------

struct Check {
  std::string name;
  double error = 0.0;
  double bound = 0.0;
  bool pass = false;
  Json detail = Json::object();
};

int report(const Options& o, const std::string& which, Json params, const std::vector<Check>& checks) {
  Json out = header("verify " + which, o, std::move(params));
  bool ok = true;
  Json list = Json::array();
  for (const auto& c : checks) {
    Json j;
    j["name"] = c.name;
    j["error"] = c.error;
    j["bound"] = c.bound;
    j["status"] = c.pass ? "PASS" : "FAIL";
    if (!c.detail.empty()) j["detail"] = c.detail;
    list.push_back(std::move(j));
    ok = ok && c.pass;
  }
  out["checks"] = std::move(list);
  out["status"] = ok ? "PASS" : "FAIL";
  emit(o, out.dump(2) + "\n");
  return ok ? 0 : kExitFail;
}

int verify_identity(const Options& o) {
  require_n(o.n);
  std::vector<Check> checks;
  for (int i = 0; i < o.n; ++i) {
    const MonteCarloMatrix mc = resolution_check(o.n, i, o.samples, o.seed);
    Check c{"column_" + std::to_string(i + 1), mc.frobenius_error, o.tolerance,
            mc.frobenius_error < o.tolerance};
    c.detail["samples"] = mc.samples;
    checks.push_back(std::move(c));
  }
  return report(o, "identity", {{"n", o.n}, {"N", o.samples}, {"tolerance", o.tolerance}}, checks);
}

int verify_measure(const Options& o) {
  require_n(o.n);
  if (o.samples < 2) throw ValidationError("--N must be at least 2");
  Rng rng(o.seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t s = 0; s < o.samples; ++s) {
    const double f = flag_density(uniform_angles(o.n, rng));
    sum += f;
    sum_sq += f * f;
  }
  const double box = angle_box_volume(o.n);
  const double nn = static_cast<double>(o.samples);
  const double mean = sum / nn;
  const double var = std::max(0.0, (sum_sq / nn - mean * mean) * nn / (nn - 1.0));
  const double estimate = box * mean;
  const double sigma = box * std::sqrt(var / nn);
  Check c{"normalization", std::abs(estimate - 1.0), 3.0 * sigma,
          std::abs(estimate - 1.0) <= 3.0 * sigma};
  c.detail = {{"estimate", estimate}, {"standard_error", sigma}};
  return report(o, "measure", {{"n", o.n}, {"N", o.samples}}, {c});
}

int verify_volumes(const Options& o) {
  require_n(o.n);
  if (o.n > kMaxExactDim) throw ValidationError("--n must be at most " + std::to_string(kMaxExactDim));
  Rational fact_nm1 = 1;
  for (int m = 2; m <= o.n - 1; ++m) fact_nm1 *= m;
  const Rational expected_weighted = 1 / (fact_nm1 * fact_nm1);
  const Rational expected_ordered = 1 / (fact_nm1 * fact_nm1 * o.n);
  const Rational weighted = weighted_simplex_volume(o.n);
  const Rational ordered = ordered_simplex_volume(o.n);

  std::vector<Check> checks;
  Check w{"weighted_simplex_exact", static_cast<double>(abs(weighted - expected_weighted)), 0.0,
          weighted == expected_weighted};
  w.detail = {{"computed", rational_json(weighted)}, {"expected", rational_json(expected_weighted)}};
  checks.push_back(w);
  Check d{"ordered_simplex_exact", static_cast<double>(abs(ordered - expected_ordered)), 0.0,
          ordered == expected_ordered};
  d.detail = {{"computed", rational_json(ordered)}, {"expected", rational_json(expected_ordered)}};
  checks.push_back(d);
  const Rational ratio = weighted / ordered;
  Check q{"ratio_equals_n", static_cast<double>(abs(ratio - o.n)), 0.0, ratio == o.n};
  q.detail = {{"ratio", rational_json(ratio)}};
  checks.push_back(q);

  if (o.samples > 0) {
    const VolumeEstimate mw = estimate_weighted_simplex_volume(o.n, o.samples, o.seed);
    const VolumeEstimate mo = estimate_ordered_simplex_volume(o.n, o.samples, mix_seed(o.seed, 1));
    for (const auto& [name, est, exact] :
         {std::tuple{"weighted_simplex_monte_carlo", mw, expected_weighted},
          std::tuple{"ordered_simplex_monte_carlo", mo, expected_ordered}}) {
      const double err = std::abs(est.estimate - static_cast<double>(exact));
      Check m{name, err, 3.0 * est.standard_error, err <= 3.0 * est.standard_error};
      m.detail = {{"estimate", est.estimate}, {"standard_error", est.standard_error}};
      checks.push_back(m);
    }
  }
  Json params = {{"n", o.n}, {"N", o.samples}};
  params["flag_volume"] = flag_volume(o.n);
  params["state_space_volume"] = state_space_volume(o.n);
  return report(o, "volumes", params, checks);
}

int verify_unitarity(const Options& o) {
  require_n(o.n);
  Rng rng(o.seed);
  double max_unitarity = 0.0, max_det = 0.0;
  for (std::uint64_t t = 0; t < o.trials; ++t) {
    const AngleSet angles = uniform_angles(o.n, rng, true);
    const ComplexMatrix u = coset_unitary(angles).matrix();
    const ComplexMatrix full = full_unitary(angles).matrix();
    for (const ComplexMatrix* m : {&u, &full}) {
      max_unitarity = std::max(max_unitarity, unitarity_defect(*m));
      max_det = std::max(max_det, std::abs(m->determinant() - 1.0));
    }
  }
  return report(o, "unitarity", {{"n", o.n}, {"trials", o.trials}},
                {{"unitarity", max_unitarity, 1e-12, max_unitarity < 1e-12},
                 {"determinant", max_det, 1e-12, max_det < 1e-12}});
}

int verify_qutrit_matrix(const Options& o) {
  Rng rng(o.seed);
  double worst = 0.0;
  for (std::uint64_t t = 0; t < o.trials; ++t) {
    const AngleSet angles = uniform_angles(3, rng);
    const ComplexMatrix diff = coset_unitary(angles).matrix() - qutrit_coset_closed_form(angles);
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return report(o, "qutrit-matrix", {{"n", 3}, {"trials", o.trials}},
                {{"max_entry_deviation", worst, 1e-12, worst < 1e-12}});
}

// -- evolve --------------------------------------------------------------------

double fitted_rate(const Trajectory& traj) {
  double st = 0, sy = 0, stt = 0, sty = 0, count = 0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double r1 = traj.gaps[k](0);
    if (!(r1 > 0.0)) continue;
    const double t = traj.times[k], y = std::log(r1);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    count += 1;
  }
  const double denom = count * stt - st * st;
  return (count < 2 || denom == 0.0) ? std::nan("") : (count * sty - st * sy) / denom;
}

std::string with_suffix(const std::string& path, const std::string& tag) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "." + tag;
  return path.substr(0, dot) + "." + tag + path.substr(dot);
}

int cmd_evolve(const Options& o) {
  if (o.method != "direct" && o.method != "split" && o.method != "both")
    throw ValidationError("--method must be direct, split or both");
  const LindbladModel model = io::model_from_json(io::read_json_file(o.model_path));
  const DensityMatrix rho0 = io::state_from_json(io::read_json_file(o.rho0_path));
  if (rho0.dim() != model.dim()) throw ValidationError("initial state and model dimensions differ");
  step_count(o.t_end, o.dt);

  Json params;
  params["n"] = model.dim();
  params["model"] = o.model_path;
  params["rho0"] = o.rho0_path;
  params["method"] = o.method;
  params["dt"] = o.dt;
  params["t_end"] = o.t_end;
  params["record_every"] = o.record_every;
  params["fallback"] = o.fallback;
  Json out = header("evolve", o, params);

  IntegrationOptions opts;
  opts.record_every = o.record_every;
  opts.fallback_to_direct = true;

  std::vector<std::string> methods;
  if (o.method != "split") methods.push_back("direct");
  if (o.method != "direct") methods.push_back("split");

  int status = 0;
  std::vector<Trajectory> trajectories;
  for (const std::string& m : methods) {
    Trajectory traj = m == "direct" ? integrate_direct(rho0, model, o.t_end, o.dt, opts)
                                    : integrate_split(rho0, model, o.t_end, o.dt, opts);
    Json summary;
    if (traj.breakdown_time) {
      summary["breakdown_time"] = *traj.breakdown_time;
      if (!o.fallback) {
        const std::size_t keep = traj.frames.size();
        traj.times.resize(keep);
        traj.states.resize(keep);
        traj.gaps.resize(keep);
        traj.diagnostics.resize(keep);
        summary["status"] = "breakdown";
        std::cerr << "gapflag: split integration broke down at t = "
                  << io::format_double(*traj.breakdown_time)
                  << " (degenerate spectrum); rerun with --fallback to continue directly\n";
        status = kExitNumerical;
      } else {
        summary["status"] = "completed_with_fallback";
      }
    } else {
      summary["status"] = "completed";
    }
    summary["records"] = traj.times.size();
    summary["t_final"] = traj.times.back();
    summary["r_final"] = io::vector_to_json(traj.gaps.back());
    const double rate = fitted_rate(traj);
    summary["fitted_r1_rate"] = std::isnan(rate) ? Json(nullptr) : Json(rate);
    double max_trace = 0.0;
    for (const auto& d : traj.diagnostics) max_trace = std::max(max_trace, d.trace_error);
    summary["max_trace_error"] = max_trace;

    if (!o.out.empty()) {
      const std::string path = methods.size() > 1 ? with_suffix(o.out, m) : o.out;
      std::ostringstream csv;
      io::Header h = {{"tool", "gapflag"}, {"version", GAPFLAG_VERSION}, {"command", "evolve"},
                      {"seed", std::to_string(o.seed)}, {"method", m}};
      for (const auto& [key, value] : params.items())
        if (key != "method") h.emplace_back(key, value.dump());
      if (traj.breakdown_time) h.emplace_back("breakdown_time", io::format_double(*traj.breakdown_time));
      io::write_trajectory_csv(csv, traj, h);
      io::write_text_file(path, csv.str());
      summary["csv"] = path;
    }
    if (!o.states_out.empty()) {
      const std::string path = methods.size() > 1 ? with_suffix(o.states_out, m) : o.states_out;
      std::ostringstream lines;
      io::write_trajectory_states(lines, traj);
      io::write_text_file(path, lines.str());
      summary["states"] = path;
    }
    out[m] = std::move(summary);
    trajectories.push_back(std::move(traj));
  }

  if (trajectories.size() == 2) {
    const Trajectory& a = trajectories[0];
    const Trajectory& b = trajectories[1];
    const std::size_t common = std::min(a.states.size(), b.states.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < common; ++k) worst = std::max(worst, (a.states[k] - b.states[k]).norm());
    out["max_divergence"] = worst;
    out["compared_records"] = common;
  }
  std::cout << out.dump(2) << "\n";
  return status;
}

// -- sample --------------------------------------------------------------------

// Asymptotic Kolmogorov survival function Q(lambda).
double kolmogorov_pvalue(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

int cmd_sample(const Options& o) {
  require_n(o.n);
  Json out = header("sample", o, {{"n", o.n}, {"N", o.samples}});
  FlagSampler sampler(o.n, o.seed);
  Json frames = Json::array();
  std::vector<double> overlaps;
  ComplexMatrix resolution = ComplexMatrix::Zero(o.n, o.n);
  for (std::uint64_t s = 0; s < o.samples; ++s) {
    const ComplexMatrix u = sampler.next_matrix();
    frames.push_back(io::matrix_to_json(u));
    overlaps.push_back(std::norm(u(0, 0)));
    resolution += static_cast<double>(o.n) * (u.col(0) * u.col(0).adjoint());
  }
  out["frames"] = std::move(frames);
  if (o.samples == 0) {
    out["diagnostics"] = nullptr;
  } else {
    // |<e_1|u_1>|^2 is Beta(1, n-1): CDF 1 - (1-x)^{n-1}.
    std::sort(overlaps.begin(), overlaps.end());
    const double nn = static_cast<double>(overlaps.size());
    double d = 0.0;
    for (std::size_t k = 0; k < overlaps.size(); ++k) {
      const double cdf = 1.0 - std::pow(1.0 - overlaps[k], o.n - 1);
      d = std::max({d, (k + 1) / nn - cdf, cdf - k / nn});
    }
    const double lambda = (std::sqrt(nn) + 0.12 + 0.11 / std::sqrt(nn)) * d;
    const double critical = 1.628 / std::sqrt(nn);
    Json diag;
    diag["ks_statistic"] = d;
    diag["ks_critical_1pct"] = critical;
    diag["ks_pvalue"] = kolmogorov_pvalue(lambda);
    diag["ks_pass"] = d < critical;
    resolution /= nn;
    diag["resolution_frobenius_error"] =
        (resolution - ComplexMatrix::Identity(o.n, o.n)).norm();
    out["diagnostics"] = std::move(diag);
  }
  emit(o, out.dump(2) + "\n");
  return 0;
}

std::uint64_t env_seed() {
  const char* env = std::getenv("GAPFLAG_SEED");
  if (!env || !*env) return kDefaultSeed;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used, 10);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("GAPFLAG_SEED is not an unsigned 64-bit integer");
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  try {
    o.seed = env_seed();
  } catch (const ValidationError& e) {
    std::cerr << "gapflag: " << e.what() << "\n";
    return kExitValidation;
  }

  CLI::App app{"Gap coordinates, flag-manifold angles and GKLS evolution for n-level density matrices"};
  app.set_version_flag("--version", GAPFLAG_VERSION);
  app.require_subcommand(1);
  auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "64-bit RNG seed (default: $GAPFLAG_SEED or built-in)");
  };
  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    c->add_option("--out", o.out, "Write output to this file instead of stdout");
  };

  auto* convert = app.add_subcommand("convert", "Convert between descending spectra p and gaps r");
  convert->add_option("--n", o.n, "Dimension")->required();
  convert->add_option("--p", o.p, "Descending probabilities, comma separated")->delimiter(',');
  convert->add_option("--r", o.r, "Gap coordinates, comma separated")->delimiter(',');
  convert->add_flag("--sort", o.sort, "Sort --p descending before converting");
  add_seed(convert);
  add_format(convert);

  auto* geometry = app.add_subcommand("geometry", "Metrics and purity at a gap vector");
  geometry->add_option("--n", o.n, "Dimension")->required();
  geometry->add_option("--r", o.r, "Gap coordinates, comma separated")->delimiter(',')->required();
  geometry->add_flag("--fisher", o.fisher, "Fisher-Rao metric in r");
  geometry->add_flag("--bures", o.bures, "Bures spectral and angular parts");
  geometry->add_flag("--purity", o.purity, "Trace-distance purity R");
  geometry->add_flag("--kl", o.kl, "Relative entropy to the maximally mixed spectrum");
  geometry->add_flag("--entropy", o.entropy, "Shannon entropy of the spectrum");
  add_seed(geometry);
  add_format(geometry);

  auto* verify = app.add_subcommand("verify", "Numerical identity checks with PASS/FAIL report");
  verify->require_subcommand(1);
  struct VerifyCommand {
    const char* name;
    const char* help;
    int (*run)(const Options&);
    std::uint64_t default_samples;
  };
  const VerifyCommand verify_commands[] = {
      {"identity", "Resolution of the identity by flag Monte Carlo", verify_identity, 100000},
      {"measure", "Normalization of the flag-manifold density", verify_measure, 100000},
      {"volumes", "Exact simplex volumes plus Monte-Carlo estimates", verify_volumes, 1000000},
      {"unitarity", "Unitarity and det = 1 of angle-built frames", verify_unitarity, 0},
      {"qutrit-matrix", "Coset product against the closed-form qutrit matrix", verify_qutrit_matrix,
       0},
  };
  const VerifyCommand* chosen = nullptr;
  for (const auto& vc : verify_commands) {
    auto* sub = verify->add_subcommand(vc.name, vc.help);
    if (std::string(vc.name) != "qutrit-matrix") sub->add_option("--n", o.n, "Dimension")->required();
    if (vc.default_samples > 0)
      sub->add_option("--N", o.samples, "Monte-Carlo sample count")
          ->default_str(std::to_string(vc.default_samples));
    else
      sub->add_option("--trials", o.trials, "Random angle draws");
    if (std::string(vc.name) == "identity")
      sub->add_option("--tolerance", o.tolerance, "Frobenius error bound");
    add_seed(sub);
    sub->add_option("--out", o.out, "Write the report to this file instead of stdout");
    sub->callback([&o, &chosen, &vc, sub] {
      chosen = &vc;
      if (vc.default_samples > 0 && sub->count("--N") == 0) o.samples = vc.default_samples;
    });
  }

  auto* evolve = app.add_subcommand("evolve", "Integrate a GKLS model directly and/or in split form");
  evolve->add_option("--model", o.model_path, "Model JSON {n, H, jumps, rates}")->required();
  evolve->add_option("--rho0", o.rho0_path, "Initial state JSON {rho} or {r, U}")->required();
  evolve->add_option("--method", o.method, "direct, split or both")
      ->check(CLI::IsMember({"direct", "split", "both"}));
  evolve->add_option("--dt", o.dt, "RK4 step");
  evolve->add_option("--t-end", o.t_end, "Final time");
  evolve->add_option("--record-every", o.record_every, "Record every k-th step");
  evolve->add_option("--out", o.out, "Trajectory CSV (method tag inserted for --method both)");
  evolve->add_option("--states-out", o.states_out, "Full states as JSON lines");
  evolve->add_flag("--fallback", o.fallback, "Continue directly after a split breakdown");
  add_seed(evolve);

  auto* sample = app.add_subcommand("sample", "Invariant-measure flag frames with KS diagnostics");
  sample->add_option("--n", o.n, "Dimension")->required();
  sample->add_option("--N", o.samples, "Number of frames")->default_str("1000");
  add_seed(sample);
  sample->add_option("--out", o.out, "Write JSON to this file instead of stdout");
  sample->callback([&] {
    if (sample->count("--N") == 0) o.samples = 1000;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*convert) return cmd_convert(o);
    if (*geometry) return cmd_geometry(o);
    if (*verify) return chosen->run(o);
    if (*evolve) return cmd_evolve(o);
    if (*sample) return cmd_sample(o);
  } catch (const ValidationError& e) {
    std::cerr << "gapflag: invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "gapflag: numerical breakdown: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "gapflag: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}
