#pragma once

// Steady-state sensitivity layer. Each subsystem exposes its equilibrium
// cost and constraint-usage maps; gradients come either from the model's
// closed form or from central differences on those maps. Everything the
// coordination layers consume (controlled variables, reduced gradients,
// opportunity costs) is derived here from the pair (Gamma, Phi).

#include <cstddef>
#include <memory>

#include "distopt/core.hpp"
#include "distopt/plant.hpp"

namespace distopt::grad {

// Cost gradient Gamma (one entry per local input) and constraint
// sensitivity Phi (inputs x coupling constraints) at an operating point.
struct GradientPair {
  Vec gamma;
  Mat phi;
};

// Exogenous conditions a single subsystem sees at one instant. Fields are
// case-specific; unused ones stay at their defaults.
struct LocalConditions {
  double ambient = 0.0;     // outdoor temperature [degC]
  double irradiance = 0.0;  // solar irradiance [kW/m^2]
  double setpoint = 0.0;    // desired room temperature [degC]
  double valve = 1.0;       // production-choke opening in [0, 1]
};

class SubsystemModel {
 public:
  virtual ~SubsystemModel() = default;
  virtual std::size_t n_inputs() const = 0;
  virtual std::size_t n_constraints() const = 0;
  virtual double input_min(std::size_t j) const = 0;
  virtual double input_max(std::size_t j) const = 0;
  // Range over which the steady maps may be evaluated (for finite
  // differences); defaults to the actuation range.
  virtual double eval_min(std::size_t j) const { return input_min(j); }
  virtual double eval_max(std::size_t j) const { return input_max(j); }
  virtual double steady_cost(const Vec& u, const LocalConditions& c) const = 0;
  virtual Vec steady_constraint(const Vec& u, const LocalConditions& c) const = 0;
  virtual GradientPair analytic_gradients(const Vec& u, const LocalConditions& c) const = 0;
  // True when the usage map is exactly the input vector (g_i = u_i), which
  // lets allocation-following degenerate to a direct set.
  virtual bool identity_usage() const { return false; }
};

// House: cost (T_r - T_sp)^2 at thermal equilibrium, resource usage = u.
class HouseModel final : public SubsystemModel {
 public:
  explicit HouseModel(const plant::HouseParams& p, double u_min, double u_max);
  std::size_t n_inputs() const override { return 1; }
  std::size_t n_constraints() const override { return 1; }
  double input_min(std::size_t) const override { return u_min_; }
  double input_max(std::size_t) const override { return u_max_; }
  // The thermal network is linear, so the steady map extends beyond the
  // actuation range; leave finite differences room at the edges.
  double eval_min(std::size_t) const override { return u_min_ - 1.0; }
  double eval_max(std::size_t) const override { return u_max_ + 1.0; }
  double steady_cost(const Vec& u, const LocalConditions& c) const override;
  Vec steady_constraint(const Vec& u, const LocalConditions& c) const override;
  GradientPair analytic_gradients(const Vec& u, const LocalConditions& c) const override;
  bool identity_usage() const override { return true; }
  const plant::HouseParams& params() const { return params_; }
  double dc_gain() const { return dc_gain_; }

 private:
  plant::HouseParams params_;
  double u_min_, u_max_;
  double dc_gain_;
};

// Well: cost -price*Q_l (profit maximization), resource usage = Q_gl.
class WellModel final : public SubsystemModel {
 public:
  explicit WellModel(const plant::WellParams& p, double u_min, double u_max);
  std::size_t n_inputs() const override { return 1; }
  std::size_t n_constraints() const override { return 1; }
  double input_min(std::size_t) const override { return u_min_; }
  double input_max(std::size_t) const override { return u_max_; }
  double eval_min(std::size_t) const override { return 0.0; }
  double eval_max(std::size_t) const override { return plant::well_admissible_max(params_); }
  double steady_cost(const Vec& u, const LocalConditions& c) const override;
  Vec steady_constraint(const Vec& u, const LocalConditions& c) const override;
  GradientPair analytic_gradients(const Vec& u, const LocalConditions& c) const override;
  bool identity_usage() const override { return true; }
  const plant::WellParams& params() const { return params_; }

 private:
  plant::WellParams params_;
  double u_min_, u_max_;
};

enum class GradientMode {
  kAnalytic,
  kFiniteDifference,
};

struct GradientOptions {
  GradientMode mode = GradientMode::kAnalytic;
  double fd_step = 1e-4;
};

// Gradients at (u, c) by the requested mode. Finite differences use
// central steps of fd_step per input and throw InputError when u +- h
// leaves the model's admissible evaluation range.
GradientPair local_gradients(const SubsystemModel& model, const Vec& u,
                             const LocalConditions& c, const GradientOptions& opt);

// c = Gamma + Phi * lambda: the price-corrected steepest-ascent signal each
// local optimality loop drives to zero.
Vec local_controlled_variable(const Vec& gamma, const Mat& phi, const Vec& lambda);

// N^T Gamma with N = null_space_basis(Phi); empty when n == m.
Vec reduced_gradient(const Vec& gamma, const Mat& phi);

// Subsystem marginal value of its allocation: -(Phi^T Phi)^{-1} Phi^T Gamma.
MultiplierResult opportunity_cost(const Vec& gamma, const Mat& phi);

}  // namespace distopt::grad
