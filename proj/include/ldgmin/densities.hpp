#ifndef LDGMIN_DENSITIES_HPP
#define LDGMIN_DENSITIES_HPP

#include <functional>
#include <memory>
#include <string>

#include "ldgmin/mesh.hpp"

namespace ldgmin {

/// A radial profile W(a) = w(|a|) with its conjugate W*(b) = w*(|b|).
class RadialProfile {
 public:
  virtual ~RadialProfile() = default;
  virtual double w(double t) const = 0;
  virtual double dw(double t) const = 0;
  virtual double d2w(double t) const = 0;
  /// lim w'(t)/t as needed at t = 0 (tangential curvature).
  virtual double dw_over_t(double t) const = 0;
  virtual double conjugate(double s) const = 0;
  virtual bool differentiable() const { return true; }
};

/// Convex energy density W : R^2 -> R bundled with DW, D^2W and W*.
/// Hessians are the honest piecewise ones; kinks resolve to the branch below.
class EnergyDensity {
 public:
  EnergyDensity() = default;
  EnergyDensity(std::string name, double growth, std::shared_ptr<const RadialProfile> profile)
      : name_(std::move(name)), growth_(growth), profile_(std::move(profile)) {}

  const std::string& name() const { return name_; }
  double growth() const { return growth_; }
  bool differentiable() const { return profile_->differentiable(); }
  const RadialProfile& profile() const { return *profile_; }

  double value(const Vec2& a) const { return profile_->w(a.norm()); }
  double conjugate(const Vec2& b) const { return profile_->conjugate(b.norm()); }
  /// Throws UnsupportedOperation where the density has no derivative.
  Vec2 gradient(const Vec2& a) const;
  Mat2 hessian(const Vec2& a) const;

 private:
  std::string name_;
  double growth_ = 2.0;
  std::shared_ptr<const RadialProfile> profile_;
};

/// W(a) = |a|^p / p.
EnergyDensity p_laplace(double p);

/// Three-branch optimal design density; requires 0 < t1 < t2, 0 < mu1 < mu2
/// and t1 mu2 = mu1 t2 (throws ConfigError otherwise).
EnergyDensity optimal_design(double mu1, double mu2, double t1, double t2);

struct OptimalDesignParameters {
  double mu1 = 1.0;
  double mu2 = 2.0;
  double lambda = 0.0145;
  double t1() const;
  double t2() const { return mu2 * t1() / mu1; }
};
EnergyDensity optimal_design(const OptimalDesignParameters& params = {});

/// W(a) = mu |a|^2 / 2 + g |a|. Not differentiable at 0; the Hessian is not provided.
EnergyDensity bingham(double mu, double g);

/// W_eps(a) = mu |a|^2 / 2 + g sqrt(|a|^2 + eps^2), smooth for eps > 0.
EnergyDensity bingham_regularized(double mu, double g, double eps);

}  // namespace ldgmin

#endif  // LDGMIN_DENSITIES_HPP
