#include "suscept/dynamics.hpp"

#include <array>
#include <cmath>
#include <string>

#include "suscept/error.hpp"

namespace suscept {

namespace {

constexpr int kMaxOrder = 16;

using PowerTable = std::array<double, kMaxOrder + 1>;

void fill_powers(double base, int order, PowerTable& out) {
  out[0] = 1.0;
  for (int k = 1; k <= order; ++k) out[k] = out[k - 1] * base;
}

}  // namespace

std::size_t parameter_count(int order) {
  if (order < 1) {
    throw Error(ErrorKind::InvalidArgument, "perturbation order must be >= 1, got " + std::to_string(order));
  }
  const auto n = static_cast<std::size_t>(order);
  return (n + 1) * (n + 2) / 2 - 1;
}

std::vector<PerturbationIndex> enumerate_parameters(int order) {
  if (order < 1 || order > kMaxOrder) {
    throw Error(ErrorKind::InvalidArgument,
                "perturbation order must be in [1, " + std::to_string(kMaxOrder) + "], got " +
                    std::to_string(order));
  }
  std::vector<PerturbationIndex> out;
  out.reserve(parameter_count(order));
  for (int m = 0; m <= order; ++m) {
    for (int n = 0; m + n <= order; ++n) {
      if (m == 1 && n == 0) continue;  // duplicates mu
      out.push_back({m, n});
    }
  }
  return out;
}

void ModelConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorKind::InvalidArgument, "mu must be positive and finite");
  }
  if (order < 1 || order > kMaxOrder) {
    throw Error(ErrorKind::InvalidArgument, "order must be in [1, 16]");
  }
}

ParameterVector ParameterVector::zeros(int order) {
  return {order, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count(order)))};
}

ParameterVector ParameterVector::unit(int order, std::size_t alpha, double scale) {
  auto a = zeros(order);
  if (alpha >= a.size()) {
    throw Error(ErrorKind::InvalidArgument, "parameter index out of range");
  }
  a.values[static_cast<Eigen::Index>(alpha)] = scale;
  return a;
}

bool ParameterVector::is_zero() const noexcept {
  return values.size() == 0 || values.cwiseAbs().maxCoeff() == 0.0;
}

VanDerPolField::VanDerPolField(const ModelConfig& cfg)
    : cfg_(cfg), mu2_(cfg.mu * cfg.mu), indices_(enumerate_parameters(cfg.order)) {
  cfg_.validate();
}

State VanDerPolField::rhs(const State& z) const {
  return {mu2_ * nullcline_offset(z), z.x};
}

Matrix2 VanDerPolField::jacobian_state(const State& z) const {
  Matrix2 j;
  j << mu2_ * (1.0 - z.x * z.x), -mu2_, 1.0, 0.0;
  return j;
}

State VanDerPolField::rhs(const State& z, const ParameterVector& a) const {
  if (a.size() != indices_.size()) {
    throw Error(ErrorKind::InvalidArgument, "parameter vector does not match the model order");
  }
  const double u = nullcline_offset(z);
  PowerTable up{}, xp{};
  fill_powers(u, cfg_.order, up);
  fill_powers(z.x, cfg_.order, xp);

  double pert = 0.0;
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const double ai = a.values[static_cast<Eigen::Index>(i)];
    if (ai == 0.0) continue;
    pert += ai * up[indices_[i].m] * xp[indices_[i].n];
  }
  return {mu2_ * (u + pert), z.x};
}

Matrix2 VanDerPolField::jacobian_state(const State& z, const ParameterVector& a) const {
  if (a.size() != indices_.size()) {
    throw Error(ErrorKind::InvalidArgument, "parameter vector does not match the model order");
  }
  const double u = nullcline_offset(z);
  const double du_dx = 1.0 - z.x * z.x;
  PowerTable up{}, xp{};
  fill_powers(u, cfg_.order, up);
  fill_powers(z.x, cfg_.order, xp);

  // d/dx [u^m x^n] = m u^(m-1) u_x x^n + n u^m x^(n-1);  d/dy [u^m x^n] = -m u^(m-1) x^n
  double gx = du_dx;
  double gy = -1.0;
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const double ai = a.values[static_cast<Eigen::Index>(i)];
    if (ai == 0.0) continue;
    const int m = indices_[i].m;
    const int n = indices_[i].n;
    const double dm = m > 0 ? m * up[m - 1] : 0.0;
    const double dn = n > 0 ? n * xp[n - 1] : 0.0;
    gx += ai * (dm * du_dx * xp[n] + up[m] * dn);
    gy += ai * (-dm * xp[n]);
  }
  Matrix2 j;
  j << mu2_ * gx, mu2_ * gy, 1.0, 0.0;
  return j;
}

void VanDerPolField::jacobian_params(const State& z, std::span<double> out_xrow) const {
  const double u = nullcline_offset(z);
  PowerTable up{}, xp{};
  fill_powers(u, cfg_.order, up);
  fill_powers(z.x, cfg_.order, xp);
  for (std::size_t i = 0; i < indices_.size() && i < out_xrow.size(); ++i) {
    out_xrow[i] = mu2_ * up[indices_[i].m] * xp[indices_[i].n];
  }
}

ParamJacobian VanDerPolField::jacobian_params(const State& z) const {
  const auto p = static_cast<Eigen::Index>(indices_.size());
  ParamJacobian out = ParamJacobian::Zero(2, p);
  Eigen::VectorXd row(p);
  jacobian_params(z, std::span<double>(row.data(), indices_.size()));
  out.row(0) = row.transpose();
  return out;
}

State rhs(const State& z, const ParameterVector& a, const ModelConfig& cfg) {
  return VanDerPolField(cfg).rhs(z, a);
}

Matrix2 jacobian_state(const State& z, const ParameterVector& a, const ModelConfig& cfg) {
  return VanDerPolField(cfg).jacobian_state(z, a);
}

ParamJacobian jacobian_params(const State& z, const ModelConfig& cfg) {
  return VanDerPolField(cfg).jacobian_params(z);
}

}  // namespace suscept
