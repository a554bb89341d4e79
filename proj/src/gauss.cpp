#include "anchored/gauss.hpp"

#include <cmath>

namespace anchored {

void GaussParams::require_valid() const {
  if (!(sigma_theta > 0.0) || !(sigma > 0.0) || !(c > 0.0) || beta < 0.0)
    throw InvalidSpec("GaussParams requires sigma_theta, sigma, c > 0 and "
                      "beta >= 0");
}

double solve_alpha(const GaussParams& p) {
  p.require_valid();
  if (!(p.beta > 0.0))
    throw InvalidBranch("beta = 0: use uninformative_family");
  const double st2 = p.sigma_theta * p.sigma_theta;
  const double A = p.beta * st2;
  const double B = p.c * p.sigma * p.sigma + p.c * p.beta * p.beta * st2 - st2;
  const double C = -p.c * p.beta * st2;
  // C < 0, so the discriminant exceeds B^2 and the roots straddle zero.
  const double disc = std::sqrt(B * B - 4.0 * A * C);
  const double q = -0.5 * (B + std::copysign(disc, B));
  const double r1 = q / A, r2 = C / q;
  return std::max(r1, r2);
}

double alpha_identity_residual(const GaussParams& p, double alpha) {
  const double st2 = p.sigma_theta * p.sigma_theta;
  return st2 * alpha * (1.0 - p.beta * alpha) -
         p.c * ((p.sigma * p.sigma + p.beta * p.beta * st2) * alpha -
                p.beta * st2);
}

LinearEquilibrium equilibrium(const GaussParams& p) {
  const double alpha = solve_alpha(p);
  LinearEquilibrium eq;
  eq.alpha = alpha;
  eq.action_intercept = -alpha * alpha * p.d / p.c;
  eq.report_theta_coef = (p.c * p.beta + alpha) / (p.c + alpha * alpha);
  eq.report_noise_coef = p.c / (p.c + alpha * alpha);
  eq.report_const = alpha * p.d / p.c;
  return eq;
}

double posterior_variance(const GaussParams& p, double alpha) {
  const double st2 = p.sigma_theta * p.sigma_theta;
  return p.c * (1.0 - p.beta * alpha) * st2 / (p.c + alpha * alpha);
}

GaussWelfare welfare(const GaussParams& p, double alpha) {
  GaussWelfare w;
  w.posterior_var = posterior_variance(p, alpha);
  w.W_R = -0.5 * w.posterior_var;
  const double load = 1.0 + alpha * alpha / p.c;
  w.W_S = -0.5 * (w.posterior_var + p.d * p.d) * load;
  w.expected_distortion_cost =
      alpha * alpha / (2.0 * p.c) * (w.posterior_var + p.d * p.d);
  w.mean_inflation = alpha * p.d / p.c;
  return w;
}

std::pair<double, double> misalignment_thresholds(const GaussParams& p) {
  p.require_valid();
  const double alpha = solve_alpha(p);
  const double st2 = p.sigma_theta * p.sigma_theta;
  const double d_low2 = p.c * p.beta * st2 * (1.0 - p.beta * alpha) /
                        (2.0 * alpha + p.beta * (p.c - alpha * alpha));
  const double d_high2 = p.c * p.beta * st2 / (2.0 * alpha);
  return {std::sqrt(d_low2), std::sqrt(d_high2)};
}

std::pair<LinearEquilibrium, GaussWelfare> uninformative_family(
    double sigma_theta, double c, double d, double alpha) {
  if (!(sigma_theta > 0.0) || !(c > 0.0) || alpha < 0.0)
    throw InvalidSpec("uninformative_family needs sigma_theta, c > 0 and "
                      "alpha >= 0");
  const double st2 = sigma_theta * sigma_theta;
  LinearEquilibrium eq;
  eq.alpha = alpha;
  eq.action_intercept = -alpha * alpha * d / c;
  eq.report_theta_coef = alpha / (c + alpha * alpha);
  eq.report_noise_coef = c / (c + alpha * alpha);
  eq.report_const = alpha * d / c;

  GaussWelfare w;
  w.posterior_var = c * st2 / (c + alpha * alpha);
  w.W_R = -0.5 * w.posterior_var;
  w.W_S = -0.5 * st2 - 0.5 * d * d - d * d * alpha * alpha / (2.0 * c);
  w.expected_distortion_cost =
      alpha * alpha / (2.0 * c) * (w.posterior_var + d * d);
  w.mean_inflation = alpha * d / c;
  return {eq, w};
}

ParetoFrontier pareto_frontier(double sigma_theta, double c, double d,
                               const std::vector<double>& alpha_grid) {
  ParetoFrontier out;
  out.points.reserve(alpha_grid.size());
  double best = -1e300;
  for (double a : alpha_grid) {
    auto [eq, w] = uninformative_family(sigma_theta, c, d, a);
    out.points.push_back({a, w.W_S, w.W_R});
    if (w.W_S + w.W_R > best) {
      best = w.W_S + w.W_R;
      out.argmax_alpha_grid = a;
    }
  }
  // d/dalpha of (W_R + W_S): c^2 st^2 alpha/(c+alpha^2)^2 - d^2 alpha/c = 0
  // has the interior root (c+alpha^2)^2 = c^2 st^2 / d^2 when st > |d|.
  const double st = sigma_theta;
  if (std::abs(d) > 0.0 && st > std::abs(d)) {
    out.argmax_alpha_continuous = std::sqrt(c * (st / std::abs(d) - 1.0));
  } else {
    out.argmax_alpha_continuous = 0.0;  // babbling end of the family
  }
  return out;
}

ModelSpec gaussian_quadratic_model(const GaussParams& p, double trunc_sds) {
  p.require_valid();
  ModelSpec m;
  m.prior = PriorSpec::gaussian(0.0, p.sigma_theta, trunc_sds);
  m.payoffs = PayoffSpec::quadratic(p.d);
  m.cost = CostSpec::quadratic(p.c);
  m.anchor = AnchorSpec::affine_gaussian(0.0, p.beta, p.sigma);
  m.message_space = MessageSpace::real_line();
  return m;
}

}  // namespace anchored
