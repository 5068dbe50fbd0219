#include "suscept/susceptibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "suscept/error.hpp"

namespace suscept {

namespace {

struct GaussRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

// Golub-Welsch on the Legendre Jacobi matrix.
GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "quadrature needs at least one node");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussRule rule;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(0.5 * (1.0 + es.eigenvalues()[i]));
    const double v = es.eigenvectors()(0, i);
    rule.weights.push_back(v * v);
  }
  return rule;
}

void apply_sign_convention(Eigen::MatrixXd& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Eigen::Index imax = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&imax);
    if (vectors(imax, k) < 0.0) vectors.col(k) *= -1.0;
  }
}

void set_flags(EigenSystem& es, double relative_floor) {
  const double lead = es.eigenvalues.size() > 0 ? es.eigenvalues[0] : 0.0;
  es.noise_floor = lead * relative_floor;
  es.flagged.assign(static_cast<std::size_t>(es.eigenvalues.size()), false);
  for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k) {
    es.flagged[static_cast<std::size_t>(k)] = es.eigenvalues[k] <= es.noise_floor;
  }
}

double largest_eigenvalue(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

double EigenSystem::spread() const {
  if (eigenvalues.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  return eigenvalues[0] / eigenvalues[eigenvalues.size() - 1];
}

Hessian assemble_hessian(const SensitivityBundle& bundle, const CorrectionCoefficients& corrections) {
  const Eigen::MatrixXd a = corrections.coefficient_matrix();
  const Eigen::MatrixXd full = a.transpose() * bundle.gram() * a;
  const auto p = full.rows();
  Hessian h{Eigen::MatrixXd(p, p), bundle.config().mu, bundle.config().order};
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      h.entries(i, j) = full(i, j);
      h.entries(j, i) = full(i, j);
    }
  }
  return h;
}

EigenSystem eigendecompose(const Hessian& h) {
  if (h.entries.rows() != h.entries.cols()) {
    throw Error(ErrorKind::InvalidArgument, "Hessian must be square");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.entries);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  EigenSystem out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors = es.eigenvectors().rowwise().reverse();
  apply_sign_convention(out.eigenvectors);
  set_flags(out, kGramNoiseFloor);
  return out;
}

JacobianSamples sample_jacobian(const SensitivityBundle& bundle, const CorrectionCoefficients& corrections,
                                int nodes_per_step) {
  const GaussRule rule = gauss_legendre(nodes_per_step);
  const auto& steps = bundle.trajectory().steps();
  const auto p = bundle.parameter_count();
  const Eigen::MatrixXd coeff = corrections.coefficient_matrix();

  JacobianSamples out;
  const auto rows = static_cast<Eigen::Index>(steps.size() * rule.nodes.size());
  out.rows.resize(rows, p);
  out.tau.reserve(static_cast<std::size_t>(rows));
  out.weight.reserve(static_cast<std::size_t>(rows));

  Vector y;
  Eigen::Index r = 0;
  for (const auto& s : steps) {
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double tau = s.t0 + rule.nodes[q] * s.h;
      const double w = rule.weights[q] * s.h;
      s.evaluate(tau, y);
      const Eigen::VectorXd b = bundle.basis_from(y);
      out.rows.row(r++) = std::sqrt(w) * (b.transpose() * coeff);
      out.tau.push_back(tau);
      out.weight.push_back(w);
    }
  }
  return out;
}

namespace {

Eigen::MatrixXd r_factor(const Eigen::MatrixXd& rows) {
  const auto p = rows.cols();
  if (rows.rows() < p) {
    throw Error(ErrorKind::InvalidArgument, "fewer quadrature samples than parameters");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(rows);
  return qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
}

}  // namespace

Hessian hessian_from_samples(const JacobianSamples& samples, double mu, int order) {
  const Eigen::MatrixXd r = r_factor(samples.rows);
  Hessian h{r.transpose() * r, mu, order};
  h.entries = 0.5 * (h.entries + h.entries.transpose()).eval();
  return h;
}

EigenSystem jacobian_spectrum(const JacobianSamples& samples, double relative_floor) {
  const Eigen::MatrixXd r = r_factor(samples.rows);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "SVD of the weighted Jacobian did not converge");
  }
  EigenSystem out;
  out.eigenvalues = svd.singularValues().array().square();
  out.eigenvectors = svd.matrixV();
  apply_sign_convention(out.eigenvectors);
  set_flags(out, relative_floor);
  return out;
}

double hessian_route_discrepancy(const Hessian& gram_route, const Hessian& sample_route) {
  const double lead = largest_eigenvalue(sample_route.entries);
  return (gram_route.entries - sample_route.entries).cwiseAbs().maxCoeff() / lead;
}

std::vector<double> output_grid(const SensitivityBundle& bundle, std::size_t uniform_points,
                                std::size_t max_step_points) {
  const auto& times = bundle.trajectory().times();
  std::vector<double> grid;
  std::size_t stride = 1;
  if (max_step_points > 0 && times.size() > max_step_points) {
    stride = (times.size() + max_step_points - 1) / max_step_points;
  }
  for (std::size_t i = 0; i < times.size(); i += stride) grid.push_back(times[i]);
  if (!times.empty()) grid.push_back(times.back());
  if (uniform_points >= 2) {
    for (std::size_t i = 0; i < uniform_points; ++i) {
      grid.push_back(static_cast<double>(i) / static_cast<double>(uniform_points - 1));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<Eigenprediction> eigenpredictions(const SensitivityBundle& bundle,
                                              const CorrectionCoefficients& corrections, const EigenSystem& eigsys,
                                              const std::vector<double>& grid) {
  const auto modes = eigsys.size();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(grid.size()), bundle.parameter_count());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    jac.row(static_cast<Eigen::Index>(i)) = total_jacobian(bundle, corrections, grid[i]).transpose();
  }
  const Eigen::MatrixXd projected = jac * eigsys.eigenvectors;

  std::vector<Eigenprediction> out;
  out.reserve(static_cast<std::size_t>(modes));
  for (Eigen::Index k = 0; k < modes; ++k) {
    Eigenprediction ep;
    ep.rank = k;
    ep.flagged = eigsys.flagged[static_cast<std::size_t>(k)];
    const double lambda = eigsys.eigenvalues[k];
    const double scale = lambda > 0.0 ? 1.0 / std::sqrt(lambda) : 1.0;
    ep.tau = grid;
    ep.delta_y.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ep.delta_y[i] = projected(static_cast<Eigen::Index>(i), k) * scale;
      ep.amplitude = std::max(ep.amplitude, std::abs(ep.delta_y[i]));
    }
    out.push_back(std::move(ep));
  }
  return out;
}

Eigen::MatrixXd prediction_gram(const JacobianSamples& samples, const EigenSystem& eigsys) {
  Eigen::MatrixXd y = samples.rows * eigsys.eigenvectors;
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    const double lambda = eigsys.eigenvalues[k];
    if (lambda > 0.0) y.col(k) /= std::sqrt(lambda);
  }
  return y.transpose() * y;
}

double default_eta(const SensitivityBundle& bundle, const Eigenprediction& prediction) {
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -ymin;
  for (double tau : prediction.tau) {
    const double y = bundle.state(tau).y;
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (!(prediction.amplitude > 0.0)) return 0.0;
  return 0.05 * 0.5 * (ymax - ymin) / prediction.amplitude;
}

Eigencycle eigencycle(const SensitivityBundle& bundle, const Eigenprediction& prediction, double eta) {
  Eigencycle c;
  c.rank = prediction.rank;
  c.eta = eta;
  c.tau = prediction.tau;
  const auto n = prediction.tau.size();
  c.x.resize(n);
  c.y_unperturbed.resize(n);
  c.y_perturbed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const State z = bundle.state(prediction.tau[i]);
    c.x[i] = z.x;
    c.y_unperturbed[i] = z.y;
    c.y_perturbed[i] = z.y + eta * prediction.delta_y[i];
  }
  return c;
}

double jump_localized_fraction(const SensitivityBundle& bundle, const Eigenprediction& prediction, double window) {
  const auto& tau = prediction.tau;
  const auto n = tau.size();
  if (n < 2) return 0.0;

  std::vector<double> jumps;
  double x_prev = bundle.state(tau[0]).x;
  for (std::size_t i = 1; i < n; ++i) {
    const double x = bundle.state(tau[i]).x;
    if ((x_prev < 0.0) != (x < 0.0)) {
      // linear interpolation is enough to place a window centre
      const double f = x_prev / (x_prev - x);
      jumps.push_back(tau[i - 1] + f * (tau[i] - tau[i - 1]));
    }
    x_prev = x;
  }
  if (jumps.empty()) return 0.0;

  const double half = 0.5 * window / static_cast<double>(jumps.size());
  auto near_jump = [&](double t) {
    for (double j : jumps) {
      double d = std::abs(t - j);
      d = std::min(d, 1.0 - d);
      if (d <= half) return true;
    }
    return false;
  };

  double total = 0.0, local = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double dt = tau[i] - tau[i - 1];
    const double mass = 0.5 * dt * (prediction.delta_y[i] * prediction.delta_y[i] +
                                    prediction.delta_y[i - 1] * prediction.delta_y[i - 1]);
    total += mass;
    if (near_jump(0.5 * (tau[i] + tau[i - 1]))) local += mass;
  }
  return total > 0.0 ? local / total : 0.0;
}

double cost_oracle(const ModelConfig& cfg, const ParameterVector& a, const IntegratorSettings& settings,
                   const OrbitSettings& orbit) {
  if (a.is_zero()) return 0.0;
  const LimitCycle reference = find_limit_cycle(cfg, ParameterVector::zeros(cfg.order), settings, orbit);
  return cost_oracle(cfg, a, reference, settings, orbit);
}

double cost_oracle(const ModelConfig& cfg, const ParameterVector& a, const LimitCycle& reference,
                   const IntegratorSettings& settings, const OrbitSettings& orbit) {
  if (a.is_zero()) return 0.0;
  const State anchor = settle(cfg, a, reference.anchor, settings, orbit);
  const LimitCycle perturbed = measure_period(cfg, a, anchor, settings, orbit);

  IntegratorSettings s = settings;
  s.controlled = 0;
  s.dense = 0;
  auto orbit_of = [&](const LimitCycle& c, const ParameterVector& params) {
    Vector z0(2);
    z0 << c.anchor.x, c.anchor.y;
    return integrate(planar_field(cfg, params), z0, 0.0, c.period, s);
  };
  const Trajectory base = orbit_of(reference, ParameterVector::zeros(cfg.order));
  const Trajectory pert = orbit_of(perturbed, a);

  std::vector<double> breaks;
  breaks.reserve(base.times().size() + pert.times().size());
  for (double t : base.times()) breaks.push_back(t / reference.period);
  for (double t : pert.times()) breaks.push_back(t / perturbed.period);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const GaussRule rule = gauss_legendre(5);
  double acc = 0.0;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    const double lo = breaks[i - 1];
    const double h = breaks[i] - lo;
    if (!(h > 0.0)) continue;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double tau = lo + rule.nodes[q] * h;
      const double d = pert.component_at(tau * perturbed.period, 1) - base.component_at(tau * reference.period, 1);
      acc += rule.weights[q] * h * d * d;
    }
  }
  return 0.5 * acc;
}

PowerLawFit fit_power_laws(const std::vector<double>& mu, const std::vector<EigenSystem>& spectra, double mu_lo,
                           double mu_hi, std::size_t min_points) {
  if (mu.size() != spectra.size()) {
    throw Error(ErrorKind::InvalidArgument, "mu grid and spectra differ in length");
  }
  Eigen::Index ranks = 0;
  for (const auto& s : spectra) ranks = std::max(ranks, s.size());

  PowerLawFit fit;
  for (Eigen::Index k = 0; k < ranks; ++k) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (mu[i] < mu_lo || mu[i] > mu_hi) continue;
      const auto& s = spectra[i];
      if (k >= s.size() || s.flagged[static_cast<std::size_t>(k)] || !(s.eigenvalues[k] > 0.0)) continue;
      lx.push_back(std::log10(mu[i]));
      ly.push_back(std::log10(s.eigenvalues[k]));
    }
    fit.points.push_back(lx.size());
    if (lx.size() < std::max<std::size_t>(min_points, 2)) {
      fit.slope.push_back(std::numeric_limits<double>::quiet_NaN());
      fit.intercept.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    fit.slope.push_back(slope);
    fit.intercept.push_back(my - slope * mx);
  }
  return fit;
}

}  // namespace suscept
