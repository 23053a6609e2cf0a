#include "distopt/gradients.hpp"

namespace distopt::grad {

HouseModel::HouseModel(const plant::HouseParams& p, double u_min, double u_max)
    : params_(p), u_min_(u_min), u_max_(u_max), dc_gain_(plant::house_dc_gain(p)) {
  if (!(u_min <= u_max)) throw ValidationError("house model: empty input range");
}

double HouseModel::steady_cost(const Vec& u, const LocalConditions& c) const {
  if (u.size() != 1) throw UsageError("house model: expects one input");
  const plant::HouseState ss =
      plant::house_steady_state(u[0], c.ambient, c.irradiance, params_);
  const double err = ss[1] - c.setpoint;
  return err * err;
}

Vec HouseModel::steady_constraint(const Vec& u, const LocalConditions&) const {
  if (u.size() != 1) throw UsageError("house model: expects one input");
  return Vec{u[0]};
}

GradientPair HouseModel::analytic_gradients(const Vec& u, const LocalConditions& c) const {
  if (u.size() != 1) throw UsageError("house model: expects one input");
  const plant::HouseState ss =
      plant::house_steady_state(u[0], c.ambient, c.irradiance, params_);
  GradientPair g;
  g.gamma = Vec{2.0 * (ss[1] - c.setpoint) * dc_gain_};
  g.phi = Mat(1, 1);
  g.phi(0, 0) = 1.0;
  return g;
}

WellModel::WellModel(const plant::WellParams& p, double u_min, double u_max)
    : params_(p), u_min_(u_min), u_max_(u_max) {
  if (!(u_min <= u_max)) throw ValidationError("well model: empty input range");
  if (u_max > plant::well_admissible_max(p))
    throw ValidationError("well model: actuation range exceeds admissible injection");
}

double WellModel::steady_cost(const Vec& u, const LocalConditions& c) const {
  if (u.size() != 1) throw UsageError("well model: expects one input");
  return -params_.price * plant::well_production(u[0], c.valve, params_);
}

Vec WellModel::steady_constraint(const Vec& u, const LocalConditions&) const {
  if (u.size() != 1) throw UsageError("well model: expects one input");
  return Vec{u[0]};
}

GradientPair WellModel::analytic_gradients(const Vec& u, const LocalConditions& c) const {
  if (u.size() != 1) throw UsageError("well model: expects one input");
  GradientPair g;
  g.gamma = Vec{-params_.price * plant::well_marginal(u[0], c.valve, params_)};
  g.phi = Mat(1, 1);
  g.phi(0, 0) = 1.0;
  return g;
}

GradientPair local_gradients(const SubsystemModel& model, const Vec& u,
                             const LocalConditions& c, const GradientOptions& opt) {
  const std::size_t n = model.n_inputs();
  const std::size_t m = model.n_constraints();
  if (u.size() != n) throw UsageError("local_gradients: input size mismatch");

  if (opt.mode == GradientMode::kAnalytic) return model.analytic_gradients(u, c);

  const double h = opt.fd_step;
  if (!(h > 0.0)) throw UsageError("local_gradients: fd_step must be positive");
  GradientPair g;
  g.gamma.assign(n, 0.0);
  g.phi = Mat(n, m);
  for (std::size_t j = 0; j < n; ++j) {
    if (u[j] - h < model.eval_min(j) || u[j] + h > model.eval_max(j))
      throw InputError("local_gradients: finite-difference probe outside admissible range");
    Vec up = u, dn = u;
    up[j] += h;
    dn[j] -= h;
    g.gamma[j] = (model.steady_cost(up, c) - model.steady_cost(dn, c)) / (2.0 * h);
    const Vec gp = model.steady_constraint(up, c);
    const Vec gn = model.steady_constraint(dn, c);
    if (gp.size() != m || gn.size() != m)
      throw UsageError("local_gradients: constraint arity mismatch");
    for (std::size_t k = 0; k < m; ++k) g.phi(j, k) = (gp[k] - gn[k]) / (2.0 * h);
  }
  return g;
}

Vec local_controlled_variable(const Vec& gamma, const Mat& phi, const Vec& lambda) {
  if (phi.rows != gamma.size())
    throw UsageError("local_controlled_variable: gradient/sensitivity mismatch");
  if (phi.cols != lambda.size())
    throw UsageError("local_controlled_variable: price dimension mismatch");
  Vec c = gamma;
  for (std::size_t i = 0; i < phi.rows; ++i)
    for (std::size_t k = 0; k < phi.cols; ++k) c[i] += phi(i, k) * lambda[k];
  return c;
}

Vec reduced_gradient(const Vec& gamma, const Mat& phi) {
  if (phi.rows != gamma.size())
    throw UsageError("reduced_gradient: gradient/sensitivity mismatch");
  const Mat N = null_space_basis(phi);
  Vec out(N.cols, 0.0);
  for (std::size_t k = 0; k < N.cols; ++k)
    for (std::size_t i = 0; i < N.rows; ++i) out[k] += N(i, k) * gamma[i];
  return out;
}

MultiplierResult opportunity_cost(const Vec& gamma, const Mat& phi) {
  return least_squares_multipliers(gamma, phi);
}

}  // namespace distopt::grad
