#pragma once

#include <vector>

#include "anchored/model.hpp"

namespace anchored {

// The five parameters of the Gaussian-quadratic benchmark:
// theta ~ N(0, sigma_theta^2), b = beta*theta + sigma*x, quadratic payoffs
// with bias d, cost (c/2)(r-b)^2.
struct GaussParams {
  double sigma_theta{1.0};
  double beta{1.0};
  double sigma{1.0};
  double c{1.0};
  double d{0.0};

  void require_valid() const;
};

// Affine equilibrium a(r) = alpha*r + action_intercept,
// R(theta,b) = report_theta_coef*theta + report_noise_coef*(b - beta*theta)
//              + report_const.
struct LinearEquilibrium {
  double alpha{0.0};
  double action_intercept{0.0};
  double report_theta_coef{0.0};
  double report_noise_coef{0.0};
  double report_const{0.0};

  double action(double r) const { return alpha * r + action_intercept; }
  double report(double theta, double b, double beta) const {
    return report_theta_coef * theta + report_noise_coef * (b - beta * theta) +
           report_const;
  }
};

struct GaussWelfare {
  double posterior_var{0.0};
  double W_R{0.0};
  double W_S{0.0};
  double expected_distortion_cost{0.0};
  double mean_inflation{0.0};
};

// Unique positive root of
//   beta*st^2*alpha^2 + (c*sigma^2 + c*beta^2*st^2 - st^2)*alpha
//     - c*beta*st^2 = 0.
// Requires beta > 0; the beta = 0 family lives in uninformative_family.
double solve_alpha(const GaussParams& params);

// Residual of the equilibrium identity
//   st^2*alpha*(1 - beta*alpha) - c[(sigma^2 + beta^2 st^2)alpha - beta st^2].
double alpha_identity_residual(const GaussParams& params, double alpha);

LinearEquilibrium equilibrium(const GaussParams& params);
double posterior_variance(const GaussParams& params, double alpha);
GaussWelfare welfare(const GaussParams& params, double alpha);

// Bias levels at which dW^S/dc and dW^S/dsigma change sign; d_low < d_high.
std::pair<double, double> misalignment_thresholds(const GaussParams& params);

// Knife-edge family for uninformative anchors (beta = 0, c*sigma^2 =
// sigma_theta^2); any alpha >= 0 is an equilibrium. alpha = 0 is babbling.
std::pair<LinearEquilibrium, GaussWelfare> uninformative_family(
    double sigma_theta, double c, double d, double alpha);

struct FrontierPoint {
  double alpha{0.0};
  double W_S{0.0};
  double W_R{0.0};
};

struct ParetoFrontier {
  std::vector<FrontierPoint> points;
  double argmax_alpha_grid{0.0};      // best grid point for W_S + W_R
  double argmax_alpha_continuous{0.0};  // root of the first-order condition
};

ParetoFrontier pareto_frontier(double sigma_theta, double c, double d,
                               const std::vector<double>& alpha_grid);

// The benchmark as a ModelSpec (states truncated at +-trunc_sds standard
// deviations) for the ODE/verification machinery.
ModelSpec gaussian_quadratic_model(const GaussParams& params,
                                   double trunc_sds = 8.0);

}  // namespace anchored
