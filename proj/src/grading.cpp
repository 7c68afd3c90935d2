#include "qthermo/grading.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qthermo {

namespace {

// Eigenvalues below this are round-off of the eigensolver; their square
// roots would otherwise leak ~sqrt(eps) into the fidelity.
double noise_floor(const RealVector& values) {
  return static_cast<double>(values.size()) * std::numeric_limits<double>::epsilon() *
         values.cwiseAbs().maxCoeff();
}

// sqrt of a Hermitian matrix with negative eigenvalues set to zero.
Matrix clamped_sqrt(const Matrix& m, double& clamp) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m));
  RealVector values = solver.eigenvalues();
  const double floor = noise_floor(values);
  for (Index k = 0; k < values.size(); ++k) {
    if (values(k) < 0) {
      clamp += -values(k);
    }
    if (values(k) <= floor) {
      values(k) = 0;
    }
  }
  return solver.eigenvectors() * values.cwiseSqrt().cast<Complex>().asDiagonal() *
         solver.eigenvectors().adjoint();
}

}  // namespace

FidelityResult fidelity_checked(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols() || rho.rows() != rho.cols()) {
    throw InvalidArgument("fidelity: states have different dimensions");
  }
  FidelityResult out;
  const Matrix root = clamped_sqrt(rho, out.clamp);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(root * sigma * root),
                                               Eigen::EigenvaluesOnly);
  const double floor = noise_floor(solver.eigenvalues());
  double trace = 0.0;
  for (Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const double v = solver.eigenvalues()(k);
    if (v < 0) {
      out.clamp += -v;
    } else if (v > floor) {
      trace += std::sqrt(v);
    }
  }
  out.value = std::clamp(trace * trace, 0.0, 1.0);
  return out;
}

double fidelity(const Matrix& rho, const Matrix& sigma) { return fidelity_checked(rho, sigma).value; }

SpeedScore speed_score(double tau, double tau_qsl) {
  if (!(tau > 0)) {
    throw InvalidArgument("speed_score: tau must be > 0");
  }
  if (!(tau_qsl >= 0)) {
    throw InvalidArgument("speed_score: tau_qsl must be >= 0");
  }
  SpeedScore out;
  if (tau_qsl == 0.0) {
    out.notice = "speed limit time is zero; speed score set to 0";
    return out;
  }
  out.value = std::clamp(1.0 - 0.1 * std::log10(tau / tau_qsl), 0.0, 1.0);
  return out;
}

double thermodynamic_score(double sigma) { return std::exp(-sigma); }

double sigma_ir(const std::vector<EntropyRecord>& records) {
  if (records.size() < 2) {
    throw InvalidArgument("sigma_ir: need at least two records");
  }
  const double h = records[1].t - records[0].t;
  if (!(h > 0)) {
    throw InvalidArgument("sigma_ir: record times must increase");
  }
  double sum = 0.0;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const double step = records[k].t - records[k - 1].t;
    if (std::abs(step - h) > 1e-9 * h) {
      std::ostringstream msg;
      msg << "sigma_ir: gap in the record sequence at t = " << records[k - 1].t;
      throw InvalidArgument(msg.str());
    }
    const double a = records[k - 1].pi_lc + records[k - 1].pi_th;
    const double b = records[k].pi_lc + records[k].pi_th;
    sum += 0.5 * (a + b) * step;
  }
  return sum;
}

Matrix target_state(const ProtocolSpec& spec, const PhysicalParams& params,
                    std::shared_ptr<const OperatorSet> ops, const EvolveOptions& options) {
  spec.validate();
  const Matrix h_free = double_well_hamiltonian(params, spec.c1, spec.c2, *ops);
  const WellStates wells = well_states(h_free, *ops);
  auto equation = std::make_shared<MasterEquation>(
      ops, params, [h_free](double) { return h_free; }, spec.duration);
  return evolve(pure_state(wells.left), equation, options).final_state();
}

GradingReport compose_report(double tau, double tau_qsl, double fidelity_value, double sigma,
                             const std::string& kind, const std::string& digest) {
  GradingReport r;
  r.tau = tau;
  r.tau_qsl = tau_qsl;
  r.fidelity = fidelity_value;
  r.sigma_ir = sigma;
  r.kind = kind;
  r.digest = digest;

  const SpeedScore speed = speed_score(tau, tau_qsl);
  if (speed.notice) {
    r.notices.push_back(*speed.notice);
  }
  r.g_speed = speed.value;
  r.g_fidelity = std::clamp(fidelity_value, 0.0, 1.0);
  if (sigma < 0) {
    std::ostringstream msg;
    msg << "negative integrated entropy production " << sigma << " treated as 0";
    r.notices.push_back(msg.str());
  }
  r.g_thermo = thermodynamic_score(std::max(sigma, 0.0));
  r.grade = r.g_speed * r.g_fidelity * r.g_thermo;
  return r;
}

GradingReport grade(const ProtocolRun& run, const std::vector<EntropyRecord>& records,
                    const Matrix& target, const std::string& digest) {
  const QslEstimate qsl = qsl_time(run.trajectory);
  const FidelityResult f = fidelity_checked(run.trajectory.final_state(), target);
  GradingReport r = compose_report(run.spec.duration, qsl.tau_qsl, f.value, sigma_ir(records),
                                   to_string(run.spec.kind), digest);
  r.qsl_bound = qsl.bound;
  if (f.clamp > 1e-12) {
    std::ostringstream msg;
    msg << "fidelity clamped negative eigenvalues of total magnitude " << f.clamp;
    r.notices.push_back(msg.str());
  }
  return r;
}

}  // namespace qthermo
