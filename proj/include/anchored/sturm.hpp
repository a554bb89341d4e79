#pragma once

#include <vector>

#include "anchored/gauss.hpp"
#include "anchored/model.hpp"

namespace anchored {

// Neumann problem for L_q v = -(q v')'/q on a truncated interval.
struct SLProblem {
  SampledFunction q;  // density values on the uniform grid
  Grid grid;

  static SLProblem from_density(const Fn1& density, const Interval& iv,
                                int n_nodes);
  void require_valid() const;
};

struct EigenResult {
  double lambda1{0.0};
  double lambda2{0.0};  // next eigenvalue, for the spectral gap
  SampledFunction v1;   // normalized in L^2(q), sign fixed to increasing
  int iterations{0};
};

// First nonconstant eigenpair by shift-inverted iteration with the constant
// mode deflated in the L^2(q) inner product.
EigenResult eigen_first(const SLProblem& problem);

struct Calibration {
  double a0{0.0};
  double A_cov{0.0};
  double H_curv{0.0};
  double lambda1{0.0};
  double c_star{0.0};
  double gap{0.0};  // lambda2 - lambda1
  SampledFunction v1;
};

// Receiver's prior-optimal action: root of E[U^R_1(a, theta)] = 0.
double babbling_action(const ModelSpec& model);

// Critical cost c* = A_cov * lambda1 / (H_curv * phi''(0)) of the
// uninformative-anchor calibration. Requires an uninformative anchor
// (beta = 0) and positive alignment covariance.
Calibration critical_cost(const ModelSpec& model, int grid_nodes = 2001);

// Kernel size of A_cov*L_q - c*phi''(0)*H_curv at a trial cost, measured by
// how many discrete eigenvalues Aa*lambda_k - c*phi''(0)*H fall below tol;
// also returns the smallest magnitude.
struct KernelProbe {
  int dimension{0};
  double smallest_magnitude{0.0};
};
KernelProbe bifurcation_kernel(const ModelSpec& model, double c_trial,
                               int grid_nodes = 2001);

struct SigmaSweepRow {
  double sigma{0.0};
  double c{0.0};      // knife-edge calibration sigma_theta^2 / sigma^2
  double alpha{0.0};
  double posterior_var{0.0};
  double W_R{0.0};
  double reporting_cost{0.0};
  double bias_cost_part{0.0};  // d^2 alpha^2 / (2c) component
};

// Knife-edge family traversal: per sigma the cost is calibrated to keep the
// informative family alive and alpha grows like 1/sigma^2 so the posterior
// variance falls monotonically.
std::vector<SigmaSweepRow> small_sigma_sweep(
    double sigma_theta, double d, const std::vector<double>& sigma_sequence,
    double alpha_at_first = 1.0);

}  // namespace anchored
