#include "suscept/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "suscept/error.hpp"

namespace suscept {

namespace {

// Dormand & Prince (1980) 5(4) tableau with Shampine's dense output.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Step-size controller (Hairer's DOPRI5 defaults with PI stabilization).
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - kBeta * 0.75;
constexpr double kMaxShrink = 10.0;
constexpr double kMaxGrow = 5.0;

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

void IntegratorSettings::validate() const {
  if (!(rtol >= 1e-14 && rtol <= 1e-2)) {
    throw Error(ErrorKind::InvalidArgument, "rtol must lie in [1e-14, 1e-2]");
  }
  if (!(atol >= 1e-16 && atol <= 1e-2)) {
    throw Error(ErrorKind::InvalidArgument, "atol must lie in [1e-16, 1e-2]");
  }
  if (max_steps == 0) {
    throw Error(ErrorKind::InvalidArgument, "max_steps must be positive");
  }
  if (initial_step && !(*initial_step > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "initial_step must be positive");
  }
}

void DenseStep::evaluate(double t, Vector& out) const {
  const double theta = (t - t0) / h;
  const double theta1 = 1.0 - theta;
  out = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
}

double DenseStep::evaluate_component(double t, Eigen::Index i) const {
  const double theta = (t - t0) / h;
  const double theta1 = 1.0 - theta;
  return r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
}

Eigen::Index Trajectory::dense_dimension() const noexcept {
  return steps_.empty() ? initial_.size() : steps_.front().r1.size();
}

std::size_t Trajectory::locate(double t) const {
  if (steps_.empty()) return 0;
  // times_[k] is the start of step k; times_.back() is the end of the last step.
  auto it = std::upper_bound(times_.begin(), times_.end() - 1, t);
  std::size_t k = static_cast<std::size_t>(std::distance(times_.begin(), it));
  return k == 0 ? 0 : std::min(k - 1, steps_.size() - 1);
}

void Trajectory::at(double t, Vector& out) const {
  if (steps_.empty()) {
    out = initial_;
    return;
  }
  const double tc = std::clamp(t, t_begin(), t_end());
  steps_[locate(tc)].evaluate(tc, out);
}

Vector Trajectory::at(double t) const {
  Vector out;
  at(t, out);
  return out;
}

double Trajectory::component_at(double t, Eigen::Index i) const {
  if (steps_.empty()) return initial_[i];
  const double tc = std::clamp(t, t_begin(), t_end());
  return steps_[locate(tc)].evaluate_component(tc, i);
}

DormandPrince::DormandPrince(VectorField f, Vector y0, double t0, const IntegratorSettings& settings)
    : f_(std::move(f)), settings_(settings), n_(y0.size()), t_(t0), y_(std::move(y0)) {
  settings_.validate();
  if (!all_finite(y_)) {
    throw Error(ErrorKind::NonFiniteState, "initial state is not finite");
  }
  n_ctrl_ = settings_.controlled == 0 ? n_ : std::min<Eigen::Index>(n_, static_cast<Eigen::Index>(settings_.controlled));
  n_dense_ = settings_.dense == 0 ? n_ : std::min<Eigen::Index>(n_, static_cast<Eigen::Index>(settings_.dense));
  for (Vector* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &err_}) v->resize(n_);
  f_(t_, y_, k1_);
  if (settings_.initial_step) h_ = *settings_.initial_step;
}

double DormandPrince::error_norm(const Vector& y_old, const Vector& y_new, const Vector& err) const {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n_ctrl_; ++i) {
    const double sk = settings_.atol + settings_.rtol * std::max(std::abs(y_old[i]), std::abs(y_new[i]));
    const double r = err[i] / sk;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(n_ctrl_));
}

double DormandPrince::initial_step(double t_end) {
  const double hmax = std::abs(t_end - t_);
  double dnf = 0.0, dny = 0.0;
  for (Eigen::Index i = 0; i < n_ctrl_; ++i) {
    const double sk = settings_.atol + settings_.rtol * std::abs(y_[i]);
    dnf += (k1_[i] / sk) * (k1_[i] / sk);
    dny += (y_[i] / sk) * (y_[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);
  ytmp_ = y_ + h * k1_;
  f_(t_ + h, ytmp_, k2_);
  double der2 = 0.0;
  for (Eigen::Index i = 0; i < n_ctrl_; ++i) {
    const double sk = settings_.atol + settings_.rtol * std::abs(y_[i]);
    const double d = (k2_[i] - k1_[i]) / sk;
    der2 += d * d;
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * std::abs(h), h1, hmax});
}

const DenseStep& DormandPrince::step(double t_limit) {
  if (!(t_limit > t_)) {
    throw Error(ErrorKind::InvalidArgument, "step limit must lie ahead of the current time");
  }
  if (h_ <= 0.0) h_ = initial_step(t_limit);

  for (;;) {
    if (accepted_ + rejected_ >= settings_.max_steps) {
      throw Error(ErrorKind::StepLimitExceeded,
                  "max_steps = " + std::to_string(settings_.max_steps) + " reached at t = " + std::to_string(t_));
    }
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_));
    double h = h_;
    bool hits_limit = false;
    if (t_ + 1.01 * h >= t_limit) {
      h = t_limit - t_;
      hits_limit = true;
    }

    ytmp_ = y_ + h * a21 * k1_;
    f_(t_ + c2 * h, ytmp_, k2_);
    ytmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
    f_(t_ + c3 * h, ytmp_, k3_);
    ytmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    f_(t_ + c4 * h, ytmp_, k4_);
    ytmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    f_(t_ + c5 * h, ytmp_, k5_);
    ytmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    const double t_new = hits_limit ? t_limit : t_ + h;
    f_(t_new, ytmp_, k6_);
    ynew_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    f_(t_new, ynew_, k7_);
    err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

    const double err = error_norm(y_, ynew_, err_);
    if (!std::isfinite(err) || !all_finite(ynew_) || !all_finite(k7_)) {
      ++rejected_;
      h_ = 0.1 * h;
      last_rejected_ = true;
      if (h_ < h_min) {
        throw Error(ErrorKind::NonFiniteState, "state overflowed near t = " + std::to_string(t_));
      }
      continue;
    }

    const double fac11 = std::pow(err, kExpo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(fac_old_, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kMaxGrow, kMaxShrink);
      double h_next = h / fac;
      fac_old_ = std::max(err, 1e-4);
      if (last_rejected_) h_next = std::min(h_next, h);
      last_rejected_ = false;

      last_.t0 = t_;
      last_.h = t_new - t_;
      const auto nd = n_dense_;
      last_.r1 = y_.head(nd);
      last_.r2 = ynew_.head(nd) - y_.head(nd);
      last_.r3 = h * k1_.head(nd) - last_.r2;
      last_.r4 = last_.r2 - h * k7_.head(nd) - last_.r3;
      last_.r5 = h * (d1 * k1_.head(nd) + d3 * k3_.head(nd) + d4 * k4_.head(nd) + d5 * k5_.head(nd) +
                      d6 * k6_.head(nd) + d7 * k7_.head(nd));

      t_ = t_new;
      std::swap(y_, ynew_);
      std::swap(k1_, k7_);
      ++accepted_;
      // A limit-truncated step should not shrink the controller's proposal.
      h_ = hits_limit ? std::max(h_next, h_) : h_next;
      return last_;
    }

    ++rejected_;
    last_rejected_ = true;
    h_ = h / std::min(kMaxShrink, fac11 / kSafety);
    if (h_ < h_min) {
      throw Error(ErrorKind::StepLimitExceeded, "step size underflow near t = " + std::to_string(t_));
    }
  }
}

Trajectory DormandPrince::run_to(double t_end) {
  Trajectory traj;
  traj.initial_ = y_;
  traj.times_.push_back(t_);
  while (t_ < t_end) {
    traj.steps_.push_back(step(t_end));
    traj.times_.push_back(t_);
  }
  traj.final_ = y_;
  traj.rejected_ = rejected_;
  return traj;
}

Trajectory integrate(const VectorField& f, const Vector& y0, double t0, double t1,
                     const IntegratorSettings& settings) {
  if (!(t1 > t0)) {
    throw Error(ErrorKind::InvalidArgument, "integration span must satisfy t1 > t0");
  }
  DormandPrince stepper(f, y0, t0, settings);
  return stepper.run_to(t1);
}

namespace {

bool matches(Direction dir, double ga, double gb) {
  return dir == Direction::Rising ? (ga < 0.0 && gb >= 0.0) : (ga > 0.0 && gb <= 0.0);
}

// A crossing localized at t_after leaves |g| at the localization tolerance
// there; that residual must not count as a fresh sign change.
double clamp_excluded(double a, double ga, const EventOptions& opts) {
  return a == opts.t_after && std::abs(ga) <= opts.tolerance ? 0.0 : ga;
}

}  // namespace

Crossing localize_crossing(const DenseStep& step, const EventFunction& g, double a, double ga, double b,
                           double gb, const EventOptions& opts) {
  Vector y;
  auto eval = [&](double t) {
    step.evaluate(t, y);
    return g(t, y);
  };

  Crossing best;
  auto record = [&](double t, double gt) {
    if (best.state.size() == 0 || std::abs(gt) < best.residual) {
      best.t = t;
      best.residual = std::abs(gt);
      best.state = y;
    }
  };

  if (gb == 0.0) {
    step.evaluate(b, y);
    record(b, gb);
    return best;
  }

  constexpr int kBisections = 8;
  int side = 0;  // Illinois bookkeeping
  for (int it = 0; it < opts.max_iterations; ++it) {
    double t;
    if (it < kBisections) {
      t = 0.5 * (a + b);
    } else {
      t = (a * gb - b * ga) / (gb - ga);
      if (!(t > a && t < b)) t = 0.5 * (a + b);
    }
    const double gt = eval(t);
    record(t, gt);
    if (std::abs(gt) < opts.tolerance) break;
    if ((gt < 0.0) == (ga < 0.0)) {
      a = t;
      ga = gt;
      if (side == -1) gb *= 0.5;
      side = -1;
    } else {
      b = t;
      gb = gt;
      if (side == 1) ga *= 0.5;
      side = 1;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b))) break;
  }
  return best;
}

Crossing find_crossing(const Trajectory& traj, const EventFunction& g, Direction dir, const EventOptions& opts) {
  const auto& steps = traj.steps();
  Vector y;
  for (const auto& s : steps) {
    if (s.t1() <= opts.t_after) continue;
    const double a = std::max(s.t0, opts.t_after);
    s.evaluate(a, y);
    const double ga = clamp_excluded(a, g(a, y), opts);
    s.evaluate(s.t1(), y);
    const double gb = g(s.t1(), y);
    if (matches(dir, ga, gb)) {
      return localize_crossing(s, g, a, ga, s.t1(), gb, opts);
    }
  }
  throw Error(ErrorKind::NoCrossing, "no crossing with the requested direction in the trajectory span");
}

Crossing integrate_to_crossing(const VectorField& f, const Vector& y0, double t0, double t_max,
                               const EventFunction& g, Direction dir, const IntegratorSettings& settings,
                               const EventOptions& opts) {
  DormandPrince stepper(f, y0, t0, settings);
  Vector y;
  while (stepper.t() < t_max) {
    const DenseStep& s = stepper.step(t_max);
    if (s.t1() <= opts.t_after) continue;
    const double a = std::max(s.t0, opts.t_after);
    s.evaluate(a, y);
    const double ga = clamp_excluded(a, g(a, y), opts);
    const double gb = g(s.t1(), stepper.y());
    if (matches(dir, ga, gb)) {
      return localize_crossing(s, g, a, ga, s.t1(), gb, opts);
    }
  }
  throw Error(ErrorKind::NoCrossing, "no crossing before t = " + std::to_string(t_max));
}

}  // namespace suscept
