#include "qthermo/phasespace.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qthermo {

std::pair<RealVector, RealVector> gauss_legendre(Index n) {
  if (n < 1) {
    throw InvalidArgument("gauss_legendre: need at least one node");
  }
  RealVector nodes(n), weights(n);
  const Index half = (n + 1) / 2;
  for (Index i = 0; i < half; ++i) {
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (Index k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) {
        p0 = 1.0;
        p1 = x;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (Index k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = pk;
    }
    dp = (n == 1) ? 1.0 : static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes(i) = -x;
    nodes(n - 1 - i) = x;
    weights(i) = w;
    weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) {
    nodes(n / 2) = 0.0;
  }
  return {nodes, weights};
}

RealMatrix periodic_derivative_matrix(Index n) {
  RealMatrix d = RealMatrix::Zero(n, n);
  const double h = 2.0 * kPi / static_cast<double>(n);
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < n; ++l) {
      if (k == l) {
        continue;
      }
      const Index diff = k - l;
      const double sign = (std::abs(diff) % 2 == 0) ? 1.0 : -1.0;
      const double half_angle = 0.5 * static_cast<double>(diff) * h;
      d(k, l) = (n % 2 == 0) ? 0.5 * sign / std::tan(half_angle)
                             : 0.5 * sign / std::sin(half_angle);
    }
  }
  return d;
}

// --- SphereGrid --------------------------------------------------------------

SphereGrid::SphereGrid(const SpinBasis& basis, Index n_theta, Index n_phi) : basis_(basis) {
  const Index need_theta = min_theta_nodes(basis);
  const Index need_phi = min_phi_nodes(basis);
  if (n_theta < need_theta || n_phi < need_phi) {
    std::ostringstream msg;
    msg << "sphere grid " << n_theta << " x " << n_phi << " is too small for N = "
        << basis.dimension() << ": need n_theta >= " << need_theta << " and n_phi >= "
        << need_phi;
    throw InvalidArgument(msg.str());
  }
  auto [x, w] = gauss_legendre(n_theta);
  theta_.resize(n_theta);
  theta_weights_.resize(n_theta);
  // Nodes ordered by increasing theta (decreasing cos theta).
  for (Index i = 0; i < n_theta; ++i) {
    theta_(i) = std::acos(x(n_theta - 1 - i));
    theta_weights_(i) = w(n_theta - 1 - i);
  }
  phi_.resize(n_phi);
  for (Index k = 0; k < n_phi; ++k) {
    phi_(k) = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_phi);
  }
  phi_derivative_ = periodic_derivative_matrix(n_phi);
}

double SphereGrid::integrate(const RealMatrix& values) const {
  return phi_weight() * (theta_weights_.transpose() * values.rowwise().sum())(0);
}

SphereGrid build_sphere_grid(const SpinBasis& basis, Index n_theta, Index n_phi) {
  return SphereGrid(basis, n_theta, n_phi);
}

// --- PhaseSpace --------------------------------------------------------------

PhaseSpace::PhaseSpace(SphereGrid grid) : grid_(std::move(grid)) {
  const CoherentStateGenerator<double> generator(grid_.basis());
  const Index n = grid_.basis().dimension();
  states_.resize(n, grid_.size());
  theta_derivatives_.resize(n, grid_.size());
  for (Index i = 0; i < grid_.n_theta(); ++i) {
    for (Index k = 0; k < grid_.n_phi(); ++k) {
      const Index col = i * grid_.n_phi() + k;
      states_.col(col) = generator.state(grid_.theta()(i), grid_.phi()(k));
      theta_derivatives_.col(col) = generator.theta_derivative(grid_.theta()(i), grid_.phi()(k));
    }
  }
}

PhaseSpace::PhaseSpace(const SpinBasis& basis, Index n_theta, Index n_phi)
    : PhaseSpace(SphereGrid(basis, n_theta, n_phi)) {}

// --- Husimi function -----------------------------------------------------------

namespace {

RealMatrix to_table(const RealVector& flat, Index n_theta, Index n_phi) {
  RealMatrix out(n_theta, n_phi);
  for (Index i = 0; i < n_theta; ++i) {
    for (Index k = 0; k < n_phi; ++k) {
      out(i, k) = flat(i * n_phi + k);
    }
  }
  return out;
}

double spin_prefactor(const SphereGrid& grid) {
  return static_cast<double>(grid.basis().dimension()) / (4.0 * kPi);
}

}  // namespace

double HusimiField::normalisation() const {
  return spin_prefactor(space->grid()) * space->grid().integrate(q);
}

HusimiField husimi_q(const Matrix& rho, std::shared_ptr<const PhaseSpace> space, double t,
                     bool with_derivatives) {
  if (!space) {
    throw InvalidArgument("husimi_q: missing phase space");
  }
  const SphereGrid& grid = space->grid();
  if (rho.rows() != grid.basis().dimension() || rho.cols() != rho.rows()) {
    throw InvalidArgument("husimi_q: state dimension does not match the phase space");
  }
  const Matrix applied = rho * space->states();
  const RealVector q = space->states().conjugate().cwiseProduct(applied).colwise().sum().real();

  HusimiField field;
  field.time = t;
  field.q = to_table(q, grid.n_theta(), grid.n_phi());
  if (with_derivatives) {
    const RealVector dq =
        2.0 * space->theta_derivatives().conjugate().cwiseProduct(applied).colwise().sum().real();
    field.dq_dtheta = to_table(dq, grid.n_theta(), grid.n_phi());
    field.dq_dphi = field.q * grid.phi_derivative().transpose();
  }
  field.space = std::move(space);
  return field;
}

double wehrl_entropy(const HusimiField& field) {
  const RealMatrix integrand =
      field.q.unaryExpr([](double q) { return q > kHusimiFloor ? q * std::log(q) : 0.0; });
  return -spin_prefactor(field.space->grid()) * field.space->grid().integrate(integrand);
}

ChannelRates localisation_rates(const HusimiField& field, const PhysicalParams& params) {
  ChannelRates out;
  if (params.localisation == 0.0) {
    return out;
  }
  const SphereGrid& grid = field.space->grid();
  RealMatrix integrand = RealMatrix::Zero(grid.n_theta(), grid.n_phi());
  for (Index i = 0; i < grid.n_theta(); ++i) {
    const double cot = 1.0 / std::tan(grid.theta()(i));
    for (Index k = 0; k < grid.n_phi(); ++k) {
      const double q = field.q(i, k);
      if (q <= kHusimiFloor) {
        continue;
      }
      const double phi = grid.phi()(k);
      // J_x(Q) = i (sin phi d_theta + cot theta cos phi d_phi) Q
      const double jx = std::sin(phi) * field.dq_dtheta(i, k) + cot * std::cos(phi) * field.dq_dphi(i, k);
      integrand(i, k) = jx * jx / q;
    }
  }
  const double coupling = localisation_spin_coupling(params, grid.basis());
  out.production = coupling * spin_prefactor(grid) * grid.integrate(integrand);
  return out;
}

ChannelRates thermal_rates(const HusimiField& field, const PhysicalParams& params) {
  ChannelRates out;
  if (params.thermal_coupling == 0.0) {
    return out;
  }
  const SphereGrid& grid = field.space->grid();
  const double j = grid.basis().spin();
  const double c = 2.0 * params.occupation + 1.0;
  RealMatrix flux = RealMatrix::Zero(grid.n_theta(), grid.n_phi());
  RealMatrix production = RealMatrix::Zero(grid.n_theta(), grid.n_phi());
  for (Index i = 0; i < grid.n_theta(); ++i) {
    const double theta = grid.theta()(i);
    const double s = std::sin(theta);
    const double cs = std::cos(theta);
    const double tn = std::tan(theta);
    for (Index k = 0; k < grid.n_phi(); ++k) {
      const double q = field.q(i, k);
      if (q <= kHusimiFloor) {
        continue;
      }
      const double dth = field.dq_dtheta(i, k);
      const double jz2 = field.dq_dphi(i, k) * field.dq_dphi(i, k);  // |J_z(Q)|^2
      flux(i, k) = s * (2.0 * j * q * s / (c - cs) - dth);
      const double drift = 2.0 * j * q * s + (cs - c) * dth;
      production(i, k) = (jz2 * (c * cs - 1.0) / (tn * s) + drift * drift / (c - cs)) / q;
    }
  }
  const double coupling = thermal_spin_coupling(params, grid.basis());
  out.flux = coupling * j * (2.0 * j + 1.0) / (4.0 * kPi) * grid.integrate(flux);
  out.production = coupling * (2.0 * j + 1.0) / (8.0 * kPi) * grid.integrate(production);
  return out;
}

// --- Entropy-rate decomposition ---------------------------------------------

double EntropyRecord::max_rate() const {
  return std::max({std::abs(pi_lc), std::abs(pi_th), std::abs(phi_th)});
}

double unitary_entropy_rate(const Matrix& rho, const Matrix& hamiltonian, double hbar,
                            double dt_u, const std::shared_ptr<const PhaseSpace>& space) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(hamiltonian));
  const Vector phases =
      (solver.eigenvalues().cast<Complex>() * Complex(0, -dt_u / hbar)).array().exp().matrix();
  const Matrix forward = solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
  const Matrix ahead = forward * rho * forward.adjoint();
  const Matrix behind = forward.adjoint() * rho * forward;
  const double s_ahead = wehrl_entropy(husimi_q(ahead, space, 0.0, false));
  const double s_behind = wehrl_entropy(husimi_q(behind, space, 0.0, false));
  return (s_ahead - s_behind) / (2.0 * dt_u);
}

namespace {

EntropyRecord record_at(const Trajectory& traj, std::size_t k, const HusimiField& field,
                        double entropy, double entropy_rate,
                        const std::shared_ptr<const PhaseSpace>& space) {
  const MasterEquation& eq = *traj.equation;
  const double t = traj.times[k];
  const PhysicalParams params = eq.params_at(t);

  EntropyRecord r;
  r.t = t;
  r.entropy = entropy;
  r.entropy_rate = entropy_rate;
  r.unitary_rate =
      unitary_entropy_rate(traj.states[k], eq.hamiltonian(t), params.hbar, traj.step / 10.0, space);
  const ChannelRates lc = localisation_rates(field, params);
  const ChannelRates th = thermal_rates(field, params);
  r.pi_lc = lc.production;
  r.phi_lc = lc.flux;
  r.pi_th = th.production;
  r.phi_th = th.flux;
  r.residual =
      std::abs(r.entropy_rate - (r.unitary_rate + r.pi_lc - r.phi_lc + r.pi_th - r.phi_th));
  return r;
}

void require_equation(const Trajectory& traj) {
  if (!traj.equation) {
    throw InvalidArgument("trajectory carries no master equation");
  }
}

}  // namespace

EntropyRecord decompose_entropy_rate(const Trajectory& traj, std::size_t k,
                                     const std::shared_ptr<const PhaseSpace>& space) {
  require_equation(traj);
  if (traj.size() < 3 || k < 1 || k + 1 >= traj.size()) {
    throw InvalidArgument("decompose_entropy_rate: step index " + std::to_string(k) +
                          " needs neighbours on both sides");
  }
  const double h = traj.spacing();
  const HusimiField field = husimi_q(traj.states[k], space, traj.times[k]);
  const double s_prev = wehrl_entropy(husimi_q(traj.states[k - 1], space, 0.0, false));
  const double s_next = wehrl_entropy(husimi_q(traj.states[k + 1], space, 0.0, false));
  return record_at(traj, k, field, wehrl_entropy(field), (s_next - s_prev) / (2.0 * h), space);
}

std::vector<EntropyRecord> entropy_series(const Trajectory& traj,
                                          const std::shared_ptr<const PhaseSpace>& space) {
  require_equation(traj);
  const std::size_t n = traj.size();
  if (n < 2) {
    throw InvalidArgument("entropy_series: trajectory needs at least two samples");
  }
  std::vector<HusimiField> fields;
  std::vector<double> entropy(n);
  fields.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    fields.push_back(husimi_q(traj.states[k], space, traj.times[k]));
    entropy[k] = wehrl_entropy(fields.back());
  }
  const double h = traj.spacing();
  std::vector<EntropyRecord> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    double rate = 0.0;
    if (n == 2) {
      rate = (entropy[1] - entropy[0]) / h;
    } else if (k == 0) {
      rate = (-3.0 * entropy[0] + 4.0 * entropy[1] - entropy[2]) / (2.0 * h);
    } else if (k + 1 == n) {
      rate = (3.0 * entropy[k] - 4.0 * entropy[k - 1] + entropy[k - 2]) / (2.0 * h);
    } else {
      rate = (entropy[k + 1] - entropy[k - 1]) / (2.0 * h);
    }
    out.push_back(record_at(traj, k, fields[k], entropy[k], rate, space));
  }
  return out;
}

}  // namespace qthermo
