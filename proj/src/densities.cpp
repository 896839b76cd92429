#include "ldgmin/densities.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ldgmin/errors.hpp"

namespace ldgmin {

namespace {

constexpr double kKinkTol = 1e-12;

class PLaplace final : public RadialProfile {
 public:
  explicit PLaplace(double p) : p_(p), q_(p / (p - 1.0)) {}
  double w(double t) const override { return std::pow(t, p_) / p_; }
  double dw(double t) const override { return std::pow(t, p_ - 1.0); }
  double d2w(double t) const override {
    if (t == 0.0) return p_ == 2.0 ? 1.0 : p_ > 2.0 ? 0.0 : singular();
    return (p_ - 1.0) * std::pow(t, p_ - 2.0);
  }
  double dw_over_t(double t) const override {
    if (t == 0.0) return p_ == 2.0 ? 1.0 : p_ > 2.0 ? 0.0 : singular();
    return std::pow(t, p_ - 2.0);
  }
  double conjugate(double s) const override { return std::pow(s, q_) / q_; }

 private:
  [[noreturn]] static double singular() {
    throw UnsupportedOperation("p-Laplace density with p < 2 has no Hessian at 0");
  }
  double p_, q_;
};

class OptimalDesign final : public RadialProfile {
 public:
  OptimalDesign(double mu1, double mu2, double t1, double t2) : mu1_(mu1), mu2_(mu2), t1_(t1), t2_(t2) {}
  double w(double t) const override {
    if (t <= t1_ + kKinkTol) return 0.5 * mu2_ * t * t;
    if (t <= t2_ + kKinkTol) return t1_ * mu2_ * (t - 0.5 * t1_);
    return 0.5 * mu1_ * t * t + t1_ * mu2_ * (0.5 * t2_ - 0.5 * t1_);
  }
  double dw(double t) const override {
    if (t <= t1_ + kKinkTol) return mu2_ * t;
    if (t <= t2_ + kKinkTol) return t1_ * mu2_;
    return mu1_ * t;
  }
  double d2w(double t) const override {
    if (t <= t1_ + kKinkTol) return mu2_;
    if (t <= t2_ + kKinkTol) return 0.0;
    return mu1_;
  }
  double dw_over_t(double t) const override {
    if (t <= t1_ + kKinkTol) return mu2_;
    if (t <= t2_ + kKinkTol) return t1_ * mu2_ / t;
    return mu1_;
  }
  // Slopes [0, mu2 t1] come from the first branch, [mu1 t2, inf) from the
  // third; both intervals meet at s = mu2 t1 = mu1 t2.
  double conjugate(double s) const override {
    if (s <= mu2_ * t1_ + kKinkTol) return s * s / (2.0 * mu2_);
    return s * s / (2.0 * mu1_) - 0.5 * t1_ * mu2_ * (t2_ - t1_);
  }

 private:
  double mu1_, mu2_, t1_, t2_;
};

class Bingham final : public RadialProfile {
 public:
  Bingham(double mu, double g) : mu_(mu), g_(g) {}
  double w(double t) const override { return 0.5 * mu_ * t * t + g_ * t; }
  double dw(double t) const override {
    if (t == 0.0) throw UnsupportedOperation("unregularized Bingham density is not differentiable at 0");
    return mu_ * t + g_;
  }
  double d2w(double) const override {
    throw UnsupportedOperation("unregularized Bingham density provides no Hessian");
  }
  double dw_over_t(double) const override {
    throw UnsupportedOperation("unregularized Bingham density provides no Hessian");
  }
  double conjugate(double s) const override {
    if (s <= g_) return 0.0;
    return (s - g_) * (s - g_) / (2.0 * mu_);
  }
  bool differentiable() const override { return false; }

 private:
  double mu_, g_;
};

class BinghamRegularized final : public RadialProfile {
 public:
  BinghamRegularized(double mu, double g, double eps) : mu_(mu), g_(g), eps_(eps) {}
  double w(double t) const override { return 0.5 * mu_ * t * t + g_ * std::hypot(t, eps_); }
  double dw(double t) const override { return t * dw_over_t(t); }
  double d2w(double t) const override {
    const double r = std::hypot(t, eps_);
    return mu_ + g_ * eps_ * eps_ / (r * r * r);
  }
  double dw_over_t(double t) const override {
    if (eps_ == 0.0 && t == 0.0) {
      throw UnsupportedOperation("Bingham density with eps = 0 is not differentiable at 0");
    }
    return mu_ + g_ / std::hypot(t, eps_);
  }
  double conjugate(double s) const override {
    if (eps_ == 0.0) return s <= g_ ? 0.0 : (s - g_) * (s - g_) / (2.0 * mu_);
    // Solve w'(t) = s; w' is increasing and concave on t >= 0 and the root lies
    // in [0, s / mu]. Safeguarded Newton from the left converges monotonically.
    double lo = 0.0, hi = s / mu_, t = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double f = dw(t) - s;
      if (f > 0.0) hi = t; else lo = t;
      double next = t - f / d2w(t);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-17 * std::max(1.0, t)) {
        t = next;
        break;
      }
      t = next;
    }
    return s * t - w(t);
  }

 private:
  double mu_, g_, eps_;
};

}  // namespace

Vec2 EnergyDensity::gradient(const Vec2& a) const {
  const double t = a.norm();
  if (!profile_->differentiable() && t == 0.0) {
    throw UnsupportedOperation(name_ + ": gradient unavailable at 0");
  }
  if (t == 0.0) return Vec2::Zero();
  if (!profile_->differentiable()) return profile_->dw(t) / t * a;
  return profile_->dw_over_t(t) * a;
}

Mat2 EnergyDensity::hessian(const Vec2& a) const {
  if (!profile_->differentiable()) throw UnsupportedOperation(name_ + ": Hessian unavailable");
  const double t = a.norm();
  const double tangential = profile_->dw_over_t(t);
  if (t == 0.0) return tangential * Mat2::Identity();
  const Vec2 e = a / t;
  const Mat2 radial = e * e.transpose();
  return profile_->d2w(t) * radial + tangential * (Mat2::Identity() - radial);
}

EnergyDensity p_laplace(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p_laplace: need 1 < p < inf");
  std::ostringstream name;
  name << "p-laplace(p=" << p << ")";
  return EnergyDensity(name.str(), p, std::make_shared<PLaplace>(p));
}

double OptimalDesignParameters::t1() const { return std::sqrt(2.0 * lambda * mu1 / mu2); }

EnergyDensity optimal_design(double mu1, double mu2, double t1, double t2) {
  if (!(0.0 < t1 && t1 < t2) || !(0.0 < mu1 && mu1 < mu2)) {
    throw ConfigError("optimal_design: need 0 < t1 < t2 and 0 < mu1 < mu2");
  }
  if (std::abs(t1 * mu2 - mu1 * t2) > 1e-12 * std::max(1.0, t1 * mu2)) {
    throw ConfigError("optimal_design: need t1 mu2 = mu1 t2");
  }
  return EnergyDensity("optimal-design", 2.0, std::make_shared<OptimalDesign>(mu1, mu2, t1, t2));
}

EnergyDensity optimal_design(const OptimalDesignParameters& params) {
  return optimal_design(params.mu1, params.mu2, params.t1(), params.t2());
}

EnergyDensity bingham(double mu, double g) {
  if (!(mu > 0.0) || !(g > 0.0)) throw ConfigError("bingham: need mu, g > 0");
  return EnergyDensity("bingham", 2.0, std::make_shared<Bingham>(mu, g));
}

EnergyDensity bingham_regularized(double mu, double g, double eps) {
  if (!(mu > 0.0) || !(g > 0.0) || !(eps >= 0.0)) throw ConfigError("bingham_regularized: need mu, g > 0, eps >= 0");
  return EnergyDensity("bingham-regularized", 2.0, std::make_shared<BinghamRegularized>(mu, g, eps));
}

}  // namespace ldgmin
