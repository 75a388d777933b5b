#include "gapflag/gkls.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gapflag/errors.hpp"
#include "gapflag/info_geometry.hpp"
#include "gapflag/random.hpp"
#include "gapflag/sun_param.hpp"

namespace gapflag {

namespace {

const Complex kI(0.0, 1.0);

ComplexMatrix pauli(int k) {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  switch (k) {
    case 1:
      s << 0.0, 1.0, 1.0, 0.0;
      break;
    case 2:
      s << 0.0, -kI, kI, 0.0;
      break;
    default:
      s << 1.0, 0.0, 0.0, -1.0;
      break;
  }
  return s;
}

RealVector probs_unchecked(const RealVector& r) {
  const int n = static_cast<int>(r.size()) + 1;
  return RealVector::Constant(n, 1.0 / n) + jacobian_matrix(n) * r;
}

std::string time_string(double t) {
  std::ostringstream os;
  os.precision(10);
  os << t;
  return os.str();
}

double min_adjacent_gap(const RealVector& descending) {
  double g = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k + 1 < descending.size(); ++k)
    g = std::min(g, descending(k) - descending(k + 1));
  return g;
}

RealVector adjacent_gaps(const RealVector& descending) {
  RealVector r(descending.size() - 1);
  for (Eigen::Index k = 0; k + 1 < descending.size(); ++k) r(k) = descending(k) - descending(k + 1);
  return r;
}

ComplexMatrix polar_factor(const ComplexMatrix& u) {
  Eigen::JacobiSVD<ComplexMatrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

void check_times(double t_end, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be non-negative");
}

}  // namespace

LindbladModel::LindbladModel(ComplexMatrix hamiltonian, std::vector<ComplexMatrix> jumps,
                             std::vector<double> rates)
    : h_(std::move(hamiltonian)), jumps_(std::move(jumps)), rates_(std::move(rates)) {
  if (h_.rows() < 2 || h_.rows() != h_.cols())
    throw ValidationError("Hamiltonian must be square with n >= 2");
  if (hermiticity_defect(h_) > kValidationTol) throw ValidationError("Hamiltonian is not Hermitian");
  if (jumps_.size() != rates_.size())
    throw ValidationError("jump operators and rates differ in count");
  for (const auto& l : jumps_)
    if (l.rows() != h_.rows() || l.cols() != h_.cols())
      throw ValidationError("jump operator dimension does not match the Hamiltonian");
  for (double h : rates_)
    if (!(h >= 0.0) || !std::isfinite(h)) throw ValidationError("rates must be non-negative");
}

LindbladModel LindbladModel::with_hamiltonian(ComplexMatrix hamiltonian) const {
  return LindbladModel(std::move(hamiltonian), jumps_, rates_);
}

ComplexMatrix dissipator(const ComplexMatrix& rho, const LindbladModel& model) {
  if (rho.rows() != model.dim() || rho.cols() != model.dim())
    throw ValidationError("state and model dimensions differ");
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (std::size_t k = 0; k < model.jumps().size(); ++k) {
    const ComplexMatrix& l = model.jumps()[k];
    const ComplexMatrix ldl = l.adjoint() * l;
    out += model.rates()[k] * (l * rho * l.adjoint() - 0.5 * (rho * ldl + ldl * rho));
  }
  return out;
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const LindbladModel& model) {
  const ComplexMatrix& h = model.hamiltonian();
  return -kI * (h * rho - rho * h) + dissipator(rho, model);
}

ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const LindbladModel& model) {
  return lindblad_rhs(rho.matrix(), model);
}

LindbladModel random_lindblad_model(int n, int jump_count, std::uint64_t seed,
                                    double hamiltonian_scale, double jump_scale) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&]() {
    ComplexMatrix g(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) g(i, j) = Complex(normal(rng), normal(rng)) / std::sqrt(2.0);
    return g;
  };
  const ComplexMatrix g = gaussian();
  ComplexMatrix h = hamiltonian_scale * 0.5 * (g + g.adjoint());
  std::vector<ComplexMatrix> jumps;
  for (int k = 0; k < jump_count; ++k) jumps.push_back(jump_scale * gaussian() / std::sqrt(double(n)));
  return LindbladModel(std::move(h), std::move(jumps), std::vector<double>(jump_count, 1.0));
}

SplitRates split_rhs(const SplitState& state, const LindbladModel& model) {
  return split_rhs(state.r.values(), state.u, model);
}

SplitRates split_rhs(const RealVector& r, const ComplexMatrix& u, const LindbladModel& model) {
  const int n = model.dim();
  if (u.rows() != n || u.cols() != n || r.size() != n - 1)
    throw ValidationError("split state and model dimensions differ");
  const double min_gap = r.minCoeff();
  if (min_gap <= kDegeneracyThreshold) {
    throw DegeneracyError("spectral gap " + time_string(min_gap) +
                          " below the degeneracy threshold; spectral-angular chart breaks down");
  }
  const RealVector p = probs_unchecked(r);
  const ComplexMatrix rho = u * p.cast<Complex>().asDiagonal() * u.adjoint();

  SplitRates out;
  out.dissipator_tilde = u.adjoint() * dissipator(rho, model) * u;
  const ComplexMatrix h_tilde = u.adjoint() * model.hamiltonian() * u;
  out.dissipator_diag = out.dissipator_tilde.diagonal().real();
  out.r_dot.resize(n - 1);
  for (int a = 0; a < n - 1; ++a)
    out.r_dot(a) = out.dissipator_diag(a) - out.dissipator_diag(a + 1);
  out.p_dot = jacobian_matrix(n) * out.r_dot;

  // Off-diagonal part of rho_r' + [W, rho_r] = -i[H~, rho_r] + L~ with
  // rho_r = diag(p): W_ij (p_j - p_i) = -i H~_ij (p_j - p_i) + L~_ij.
  out.omega_tilde = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        out.omega_tilde(i, j) = -kI * h_tilde(i, j) + out.dissipator_tilde(i, j) / (p(j) - p(i));
  out.omega = u * out.omega_tilde * u.adjoint();
  return out;
}

std::size_t step_count(double t_end, double dt) {
  check_times(t_end, dt);
  if (t_end == 0.0) return 0;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9)));
}

Trajectory integrate_direct(const DensityMatrix& rho0, const LindbladModel& model, double t_end,
                            double dt, const IntegrationOptions& options) {
  if (rho0.dim() != model.dim()) throw ValidationError("state and model dimensions differ");
  const std::size_t steps = step_count(t_end, dt);
  const double h = steps ? t_end / static_cast<double>(steps) : 0.0;
  const std::size_t stride = std::max<std::size_t>(1, options.record_every);

  Trajectory traj;
  traj.method = "direct";
  auto record = [&](double t, const ComplexMatrix& rho, double trace_error, const RealVector& evals) {
    traj.times.push_back(t);
    traj.states.push_back(rho);
    traj.gaps.push_back(adjacent_gaps(evals));
    traj.diagnostics.push_back({trace_error, evals.minCoeff(), min_adjacent_gap(evals), 0.0});
  };

  ComplexMatrix rho = rho0.matrix();
  record(0.0, rho, std::abs(rho.trace().real() - 1.0), descending_eigenvalues(rho));
  for (std::size_t s = 1; s <= steps; ++s) {
    const ComplexMatrix k1 = lindblad_rhs(rho, model);
    const ComplexMatrix k2 = lindblad_rhs(rho + 0.5 * h * k1, model);
    const ComplexMatrix k3 = lindblad_rhs(rho + 0.5 * h * k2, model);
    const ComplexMatrix k4 = lindblad_rhs(rho + h * k3, model);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = (0.5 * (rho + rho.adjoint())).eval();
    const double trace = rho.trace().real();
    const double drift = std::abs(trace - 1.0);
    rho /= trace;

    const double t = static_cast<double>(s) * h;
    const RealVector evals = descending_eigenvalues(rho);
    if (evals.minCoeff() < -options.positivity_tolerance) {
      throw PositivityError("positivity lost at t = " + time_string(t) + " (min eigenvalue " +
                                time_string(evals.minCoeff()) + ")",
                            t, evals.minCoeff());
    }
    if (s % stride == 0 || s == steps) record(t, rho, drift, evals);
  }
  return traj;
}

Trajectory integrate_split(const DensityMatrix& rho0, const LindbladModel& model, double t_end,
                           double dt, const IntegrationOptions& options) {
  if (rho0.dim() != model.dim()) throw ValidationError("state and model dimensions differ");
  const int n = model.dim();
  const std::size_t steps = step_count(t_end, dt);
  const double h = steps ? t_end / static_cast<double>(steps) : 0.0;
  const std::size_t stride = std::max<std::size_t>(1, options.record_every);

  const SpectralFrame start = eigendecompose_ordered(rho0);
  RealVector r = start.r.values();
  ComplexMatrix u = start.frame.matrix();
  if (r.minCoeff() <= kDegeneracyThreshold)
    throw DegeneracyError("initial state is too close to a degenerate spectrum", 0.0);

  Trajectory traj;
  traj.method = "split";
  auto record = [&](double t, double drift) {
    const RealVector p = probs_unchecked(r);
    const ComplexMatrix rho = u * p.cast<Complex>().asDiagonal() * u.adjoint();
    traj.times.push_back(t);
    traj.states.push_back(rho);
    traj.gaps.push_back(r);
    traj.frames.push_back(u);
    traj.diagnostics.push_back(
        {std::abs(rho.trace().real() - 1.0), p.minCoeff(), r.minCoeff(), drift});
  };

  struct Derivative {
    RealVector r_dot;
    ComplexMatrix u_dot;
  };
  auto derivative = [&](const RealVector& rs, const ComplexMatrix& us, double ts) {
    if (rs.minCoeff() <= kDegeneracyThreshold) {
      throw DegeneracyError("spectral chart breakdown at t = " + time_string(ts) +
                                ": adjacent eigenvalues within " + time_string(kDegeneracyThreshold),
                            ts);
    }
    const SplitRates rates = split_rhs(rs, us, model);
    return Derivative{rates.r_dot, us * rates.omega_tilde};
  };

  record(0.0, 0.0);
  double t = 0.0;
  try {
    for (std::size_t s = 1; s <= steps; ++s) {
      t = static_cast<double>(s - 1) * h;
      const Derivative k1 = derivative(r, u, t);
      const Derivative k2 = derivative(r + 0.5 * h * k1.r_dot, u + 0.5 * h * k1.u_dot, t + 0.5 * h);
      const Derivative k3 = derivative(r + 0.5 * h * k2.r_dot, u + 0.5 * h * k2.u_dot, t + 0.5 * h);
      const Derivative k4 = derivative(r + h * k3.r_dot, u + h * k3.u_dot, t + h);
      const RealVector r_next = r + (h / 6.0) * (k1.r_dot + 2.0 * k2.r_dot + 2.0 * k3.r_dot + k4.r_dot);
      const ComplexMatrix u_next =
          u + (h / 6.0) * (k1.u_dot + 2.0 * k2.u_dot + 2.0 * k3.u_dot + k4.u_dot);
      if (r_next.minCoeff() <= kDegeneracyThreshold) {
        throw DegeneracyError("spectral chart breakdown at t = " + time_string(t + h) +
                                  ": adjacent eigenvalues within " +
                                  time_string(kDegeneracyThreshold),
                              t + h);
      }
      const double drift = unitarity_defect(u_next);
      r = r_next;
      u = polar_factor(u_next);
      if (s % stride == 0 || s == steps) record(static_cast<double>(s) * h, drift);
    }
  } catch (const DegeneracyError& err) {
    if (!options.fallback_to_direct) throw;
    traj.breakdown_time = err.time().value_or(t);
    const RealVector p = probs_unchecked(r);
    ComplexMatrix rho = u * p.cast<Complex>().asDiagonal() * u.adjoint();
    rho = (0.5 * (rho + rho.adjoint())).eval();
    rho /= rho.trace().real();
    const double remaining = t_end - t;
    if (remaining > 0.0) {
      Trajectory rest = integrate_direct(DensityMatrix(rho), model, remaining, h, options);
      for (std::size_t k = 1; k < rest.times.size(); ++k) {
        traj.times.push_back(t + rest.times[k]);
        traj.states.push_back(rest.states[k]);
        traj.gaps.push_back(rest.gaps[k]);
        traj.diagnostics.push_back(rest.diagnostics[k]);
      }
    }
  }
  (void)n;
  return traj;
}

// -- qubit ---------------------------------------------------------------------

LindbladModel pauli_model(const ComplexMatrix& hamiltonian, const std::array<double, 3>& rates) {
  return LindbladModel(hamiltonian, {pauli(1), pauli(2), pauli(3)},
                       {rates[0], rates[1], rates[2]});
}

QubitRates qubit_rhs(const QubitAngles& state, const ComplexMatrix& hamiltonian,
                     const std::array<double, 3>& rates) {
  if (hamiltonian.rows() != 2 || hamiltonian.cols() != 2 ||
      hermiticity_defect(hamiltonian) > kValidationTol)
    throw ValidationError("qubit Hamiltonian must be a Hermitian 2x2 matrix");
  for (double h : rates)
    if (!(h >= 0.0)) throw ValidationError("rates must be non-negative");
  if (!(state.r > 0.0)) throw DegeneracyError("qubit chart undefined at r = 0");
  const double st = std::sin(state.theta);
  if (std::abs(st) <= 1e-8) throw DegeneracyError("qubit chart singular at theta in {0, pi}");

  const double h00 = hamiltonian(0, 0).real();
  const double h11 = hamiltonian(1, 1).real();
  const double re01 = hamiltonian(0, 1).real();
  const double im01 = hamiltonian(0, 1).imag();
  const auto [h1, h2, h3] = rates;
  const double cp = std::cos(state.phi), sp = std::sin(state.phi);
  const double ct = std::cos(state.theta);

  QubitRates out;
  out.phi_dot = h00 - h11 - 2.0 * (ct / st) * (re01 * cp - im01 * sp) +
                (h2 - h1) * std::sin(2.0 * state.phi);
  out.theta_dot = -2.0 * (re01 * sp + im01 * cp) +
                  std::sin(2.0 * state.theta) * (h1 * cp * cp + h2 * sp * sp - h3);
  const double rate = -2.0 * (h1 * (1.0 - st * st * cp * cp) + h2 * (1.0 - st * st * sp * sp) +
                              h3 * st * st);
  out.r_dot = rate * state.r;
  return out;
}

DensityMatrix qubit_density(const QubitAngles& state) {
  const double st = std::sin(state.theta);
  const double x = state.r * st * std::cos(state.phi);
  const double y = state.r * st * std::sin(state.phi);
  const double z = state.r * std::cos(state.theta);
  const ComplexMatrix rho =
      0.5 * (ComplexMatrix::Identity(2, 2) + x * pauli(1) + y * pauli(2) + z * pauli(3));
  return DensityMatrix(rho);
}

QubitRates qubit_rates_from_split(const QubitAngles& state, const LindbladModel& model) {
  if (model.dim() != 2) throw ValidationError("qubit model must be 2-dimensional");
  const double st = std::sin(state.theta);
  if (std::abs(st) <= 1e-8) throw DegeneracyError("qubit chart singular at theta in {0, pi}");
  RealVector r(1);
  r(0) = state.r;
  const ComplexMatrix u = rotation_factor(2, 0, 1, state.theta, state.phi).matrix();
  const SplitRates rates = split_rhs(r, u, model);

  // Bloch vector of u_1 and its derivative under u_1' = Omega u_1.
  const ComplexVector u1 = u.col(0);
  Eigen::Vector3d bloch, bloch_dot;
  for (int k = 1; k <= 3; ++k) {
    const ComplexMatrix s = pauli(k);
    bloch(k - 1) = (u1.adjoint() * s * u1)(0, 0).real();
    bloch_dot(k - 1) = (u1.adjoint() * (s * rates.omega - rates.omega * s) * u1)(0, 0).real();
  }
  QubitRates out;
  out.r_dot = rates.r_dot(0);
  out.theta_dot = -bloch_dot(2) / st;
  out.phi_dot = (bloch(0) * bloch_dot(1) - bloch(1) * bloch_dot(0)) / (st * st);
  return out;
}

// -- real qutrit -----------------------------------------------------------------

Eigen::Matrix3d euler_rotation(double alpha, double beta, double gamma) {
  auto rz = [](double a) {
    Eigen::Matrix3d m;
    m << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
    return m;
  };
  Eigen::Matrix3d ry;
  ry << std::cos(beta), 0.0, std::sin(beta), 0.0, 1.0, 0.0, -std::sin(beta), 0.0, std::cos(beta);
  return rz(alpha) * ry * rz(gamma);
}

Eigen::Matrix3d euler_omega(const QutritEuler& state, double alpha_dot, double beta_dot,
                            double gamma_dot) {
  const double sb = std::sin(state.beta), cb = std::cos(state.beta);
  const double sg = std::sin(state.gamma), cg = std::cos(state.gamma);
  const double w12 = -(alpha_dot * cb + gamma_dot);
  const double w13 = alpha_dot * sb * sg + beta_dot * cg;
  const double w23 = alpha_dot * sb * cg - beta_dot * sg;
  Eigen::Matrix3d omega;
  omega << 0.0, w12, w13, -w12, 0.0, w23, -w13, -w23, 0.0;
  return omega;
}

DensityMatrix real_qutrit_density(const QutritEuler& state) {
  RealVector r(2);
  r << state.r1, state.r2;
  const RealVector p = probs_from_gaps(GapVector(r)).values();
  const Eigen::Matrix3d u = euler_rotation(state.alpha, state.beta, state.gamma);
  const Eigen::Matrix3d rho = u * p.asDiagonal() * u.transpose();
  return DensityMatrix(rho.cast<Complex>());
}

QutritRates real_qutrit_rhs(const QutritEuler& state, const Eigen::Matrix3d& a,
                            const LindbladModel& dissipator_model) {
  if (dissipator_model.dim() != 3) throw ValidationError("real qutrit dissipator must be 3x3");
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > kValidationTol)
    throw ValidationError("generator A must be antisymmetric");
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      ComplexMatrix s = ComplexMatrix::Zero(3, 3);
      s(i, j) = 1.0;
      s(j, i) = 1.0;
      const ComplexMatrix image = dissipator(s, dissipator_model);
      if (image.imag().cwiseAbs().maxCoeff() > kValidationTol ||
          (image.real() - image.real().transpose()).cwiseAbs().maxCoeff() > kValidationTol)
        throw ValidationError("dissipator does not preserve real symmetric matrices");
    }
  const double sb = std::sin(state.beta);
  if (std::abs(sb) <= 1e-8) throw DegeneracyError("Euler chart singular at beta in {0, pi}");
  if (state.r1 <= 1e-8 || state.r2 <= 1e-8 || state.r1 + state.r2 <= 1e-8)
    throw DegeneracyError("real qutrit spectrum is degenerate");

  RealVector r(2);
  r << state.r1, state.r2;
  const RealVector p = probs_from_gaps(GapVector(r)).values();
  const Eigen::Matrix3d u = euler_rotation(state.alpha, state.beta, state.gamma);
  const Eigen::Matrix3d rho = u * p.asDiagonal() * u.transpose();
  const Eigen::Matrix3d l_tilde =
      u.transpose() * dissipator(rho.cast<Complex>(), dissipator_model).real() * u;
  const Eigen::Matrix3d a_tilde = u.transpose() * a * u;

  QutritRates out;
  out.d = l_tilde.diagonal();
  out.k = l_tilde;
  out.k.diagonal().setZero();
  out.r1_dot = out.d(0) - out.d(1);
  out.r2_dot = out.d(1) - out.d(2);

  const double w12 = a_tilde(0, 1) - out.k(0, 1) / state.r1;
  const double w23 = a_tilde(1, 2) - out.k(1, 2) / state.r2;
  const double w13 = a_tilde(0, 2) - out.k(0, 2) / (state.r1 + state.r2);
  out.omega << 0.0, w12, w13, -w12, 0.0, w23, -w13, -w23, 0.0;

  const double sg = std::sin(state.gamma), cg = std::cos(state.gamma);
  const double transverse = w13 * sg + w23 * cg;
  out.alpha_dot = transverse / sb;
  out.beta_dot = w13 * cg - w23 * sg;
  out.gamma_dot = -w12 - (std::cos(state.beta) / sb) * transverse;
  return out;
}

// -- secular factorization --------------------------------------------------------

SecularReport secular_factorization_test(const LindbladModel& model, const SplitState& state,
                                         double tolerance) {
  const int n = model.dim();
  if (state.u.rows() != n || state.r.dim() != n)
    throw ValidationError("split state and model dimensions differ");
  if (state.r.values().minCoeff() <= kDegeneracyThreshold)
    throw DegeneracyError("secular test needs a nondegenerate state");

  SecularReport report;
  report.probes.push_back(state.r.values());
  // Fixed probe family: sorted uniform spectra with every gap at least 0.1/n^2.
  Rng rng(0x5ec1a7ULL);
  std::exponential_distribution<double> expo(1.0);
  const double min_gap = 0.1 / (n * n);
  constexpr int kProbes = 8;
  for (int attempt = 0; attempt < 100000 && static_cast<int>(report.probes.size()) < kProbes;
       ++attempt) {
    RealVector p(n);
    for (int k = 0; k < n; ++k) p(k) = expo(rng);
    p /= p.sum();
    std::sort(p.data(), p.data() + n, std::greater<>());
    if (p(n - 1) < min_gap) continue;
    const RealVector r = adjacent_gaps(p);
    if (r.minCoeff() < min_gap) continue;
    report.probes.push_back(r);
  }

  auto ratios = [&](const RealVector& r) {
    const RealVector p = probs_unchecked(r);
    const ComplexMatrix rho = state.u * p.cast<Complex>().asDiagonal() * state.u.adjoint();
    const ComplexMatrix k = state.u.adjoint() * dissipator(rho, model) * state.u;
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out(i, j) = k(i, j) / (p(i) - p(j));
    return out;
  };

  const ComplexMatrix reference = ratios(report.probes.front());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) report.spread[{i, j}] = 0.0;
  for (std::size_t q = 1; q < report.probes.size(); ++q) {
    const ComplexMatrix current = ratios(report.probes[q]);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double& s = report.spread[{i, j}];
        s = std::max(s, std::abs(current(i, j) - reference(i, j)));
      }
  }
  for (const auto& [pair, s] : report.spread) report.max_spread = std::max(report.max_spread, s);
  report.factorized = report.max_spread < tolerance;
  return report;
}

}  // namespace gapflag
