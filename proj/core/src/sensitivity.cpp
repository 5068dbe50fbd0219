#include "suscept/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "suscept/error.hpp"

namespace suscept {

SensitivityBundle::SensitivityBundle(ModelConfig cfg, LimitCycle cycle, Trajectory traj, Eigen::MatrixXd gram)
    : cfg_(cfg), cycle_(std::move(cycle)), traj_(std::move(traj)), gram_(std::move(gram)) {
  layout_.parameters = static_cast<Eigen::Index>(suscept::parameter_count(cfg_.order));
}

State SensitivityBundle::state(double tau) const {
  return {traj_.component_at(tau, 0), traj_.component_at(tau, 1)};
}

Eigen::Vector2d SensitivityBundle::s(Eigen::Index alpha, double tau) const {
  const auto i = layout_.s(alpha);
  return {traj_.component_at(tau, i), traj_.component_at(tau, i + 1)};
}

Matrix2 SensitivityBundle::phi(double tau) const {
  const auto i = layout_.phi();
  Matrix2 m;
  m << traj_.component_at(tau, i), traj_.component_at(tau, i + 2), traj_.component_at(tau, i + 1),
      traj_.component_at(tau, i + 3);
  return m;
}

Eigen::Vector2d SensitivityBundle::psi(double tau) const {
  const auto i = layout_.psi();
  return {traj_.component_at(tau, i), traj_.component_at(tau, i + 1)};
}

Eigen::VectorXd SensitivityBundle::basis_from(const Vector& aug) const {
  const auto p = layout_.parameters;
  Eigen::VectorXd b(layout_.basis_size());
  for (Eigen::Index a = 0; a < p; ++a) b[a] = aug[layout_.s(a) + 1];
  b[p] = aug[layout_.phi() + 1];
  b[p + 1] = aug[layout_.psi() + 1];
  return b;
}

Eigen::VectorXd SensitivityBundle::basis(double tau) const { return basis_from(traj_.at(tau)); }

SensitivityBundle integrate_variational(const LimitCycle& cycle, const ModelConfig& cfg,
                                        const IntegratorSettings& settings) {
  cfg.validate();
  if (!cycle.params.is_zero()) {
    throw Error(ErrorKind::InvalidArgument, "variational system is evaluated at the best fit a = 0");
  }
  if (!(cycle.period > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "cycle has no measured period");
  }

  const VanDerPolField field(cfg);
  AugmentedLayout layout;
  layout.parameters = static_cast<Eigen::Index>(field.parameter_count());
  const Eigen::Index p = layout.parameters;
  const Eigen::Index nb = layout.basis_size();
  const double period = cycle.period;

  Vector y0 = Vector::Zero(layout.total_size());
  y0[0] = cycle.anchor.x;
  y0[1] = cycle.anchor.y;
  y0[layout.phi()] = 1.0;
  y0[layout.phi() + 3] = 1.0;

  auto rhs = [field, layout, p, nb, period, fa = std::vector<double>(static_cast<std::size_t>(p)),
              b = Eigen::VectorXd(nb)](double, const Vector& y, Vector& dy) mutable {
    const State z{y[0], y[1]};
    const State f = field.rhs(z);
    const Matrix2 fz = field.jacobian_state(z);
    field.jacobian_params(z, fa);

    dy[0] = period * f.x;
    dy[1] = period * f.y;
    for (Eigen::Index a = 0; a < p; ++a) {
      const auto i = layout.s(a);
      const double sx = y[i], sy = y[i + 1];
      dy[i] = period * (fz(0, 0) * sx + fz(0, 1) * sy + fa[static_cast<std::size_t>(a)]);
      dy[i + 1] = period * (fz(1, 0) * sx + fz(1, 1) * sy);
      b[a] = sy;
    }
    const auto ip = layout.phi();
    for (int col = 0; col < 2; ++col) {
      const double px = y[ip + 2 * col], py = y[ip + 2 * col + 1];
      dy[ip + 2 * col] = period * (fz(0, 0) * px + fz(0, 1) * py);
      dy[ip + 2 * col + 1] = period * (fz(1, 0) * px + fz(1, 1) * py);
    }
    const auto is = layout.psi();
    dy[is] = period * (fz(0, 0) * y[is] + fz(0, 1) * y[is + 1]) + f.x;
    dy[is + 1] = period * (fz(1, 0) * y[is] + fz(1, 1) * y[is + 1]) + f.y;
    b[p] = y[ip + 1];
    b[p + 1] = y[is + 1];

    Eigen::Index g = layout.gram();
    for (Eigen::Index i = 0; i < nb; ++i) {
      for (Eigen::Index j = i; j < nb; ++j) dy[g++] = b[i] * b[j];
    }
  };

  IntegratorSettings s = settings;
  s.controlled = static_cast<std::size_t>(layout.dynamic_size());
  s.dense = static_cast<std::size_t>(layout.dynamic_size());
  Trajectory traj = integrate(rhs, y0, 0.0, 1.0, s);

  Eigen::MatrixXd gram(nb, nb);
  Eigen::Index g = layout.gram();
  const Vector& end = traj.final_state();
  for (Eigen::Index i = 0; i < nb; ++i) {
    for (Eigen::Index j = i; j < nb; ++j) {
      gram(i, j) = end[g];
      gram(j, i) = end[g];
      ++g;
    }
  }
  return SensitivityBundle(cfg, cycle, std::move(traj), std::move(gram));
}

Eigen::MatrixXd CorrectionCoefficients::coefficient_matrix() const {
  const auto p = dx0_da.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p + 2, p);
  a.topRows(p).setIdentity();
  a.row(p) = dx0_da.transpose();
  a.row(p + 1) = dT_da.transpose();
  return a;
}

CorrectionCoefficients solve_corrections(const SensitivityBundle& bundle) {
  const auto& layout = bundle.layout();
  const Vector& end = bundle.end_state();
  const auto ip = layout.phi();
  const auto is = layout.psi();

  // Columns: (I - Phi(1)) e_x and -psi(1).
  const double m00 = 1.0 - end[ip];
  const double m10 = -end[ip + 1];
  const double m01 = -end[is];
  const double m11 = -end[is + 1];
  const double det = m00 * m11 - m01 * m10;
  const double scale = std::max({std::abs(m00), std::abs(m10), std::abs(m01), std::abs(m11)});
  if (!(std::abs(det) > 1e-12 * scale * scale)) {
    throw Error(ErrorKind::SingularConstraint, "periodicity constraint is singular (det = " +
                                                   std::to_string(det) + ")");
  }

  const auto p = layout.parameters;
  CorrectionCoefficients out{Eigen::VectorXd(p), Eigen::VectorXd(p)};
  for (Eigen::Index a = 0; a < p; ++a) {
    const double rx = end[layout.s(a)];
    const double ry = end[layout.s(a) + 1];
    out.dx0_da[a] = (m11 * rx - m01 * ry) / det;
    out.dT_da[a] = (m00 * ry - m10 * rx) / det;
  }
  return out;
}

Eigen::VectorXd total_jacobian(const SensitivityBundle& bundle, const CorrectionCoefficients& corrections,
                               double tau) {
  const Eigen::VectorXd b = bundle.basis(tau);
  const auto p = bundle.parameter_count();
  return b.head(p) + b[p] * corrections.dx0_da + b[p + 1] * corrections.dT_da;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> total_state_sensitivity(const SensitivityBundle& bundle,
                                                                 const CorrectionCoefficients& corrections,
                                                                 double tau) {
  const auto p = bundle.parameter_count();
  const Vector y = bundle.at(tau);
  const auto& layout = bundle.layout();
  Eigen::Matrix<double, 2, Eigen::Dynamic> out(2, p);
  const Eigen::Vector2d phi_x{y[layout.phi()], y[layout.phi() + 1]};
  const Eigen::Vector2d psi{y[layout.psi()], y[layout.psi() + 1]};
  for (Eigen::Index a = 0; a < p; ++a) {
    const Eigen::Vector2d s{y[layout.s(a)], y[layout.s(a) + 1]};
    out.col(a) = s + phi_x * corrections.dx0_da[a] + psi * corrections.dT_da[a];
  }
  return out;
}

}  // namespace suscept
