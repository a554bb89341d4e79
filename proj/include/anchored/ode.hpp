#pragma once

#include <optional>
#include <vector>

#include "anchored/model.hpp"
#include "anchored/rule.hpp"

namespace anchored {

// Grid-sampled strictly increasing action rule with its derivative; the
// solver also stores the ODE curvature at the nodes.
class ActionRule {
 public:
  ActionRule() = default;
  ActionRule(std::vector<double> report_nodes, std::vector<double> a_values,
             std::vector<double> a_prime_values,
             std::vector<double> a_second_values = {});

  double operator()(double r) const { return a_(r); }
  double slope(double r) const { return ap_(r); }
  // Spline curvature of the slope; independent of the stored ODE rhs.
  double curvature_spline(double r) const { return ap_.derivative(r); }
  // Curvature recorded by the solver (B/A at the nodes) when available.
  double curvature(double r) const {
    return app_ ? (*app_)(r) : curvature_spline(r);
  }

  const std::vector<double>& nodes() const { return a_.nodes(); }
  const std::vector<double>& a_values() const { return a_.values(); }
  const std::vector<double>& a_prime_values() const { return ap_.values(); }
  Interval domain() const { return a_.domain(); }

  ReceiverRule rule() const;
  void require_valid(double consistency_tol = 1e-3) const;

 private:
  SampledFunction a_, ap_;
  std::optional<SampledFunction> app_;
};

// Anchor value that rationalizes report r at state theta under (a, a').
double inverse_anchor(double r, double theta, double a_val, double a_prime,
                      const ModelSpec& model);

// d/dr of the inverse-anchor map; needs the rule curvature.
double inverse_anchor_jacobian(double r, double theta, double a_val,
                               double a_prime, double a_second,
                               const ModelSpec& model);

struct OdeCoefficients {
  double A{0.0};
  double B{0.0};
  double weight{0.0};  // total posterior weight, for normalization
  bool stiff{false};
};

OdeCoefficients ode_coefficients(double r, double a_val, double p,
                                 const ModelSpec& model, int n_theta = 128,
                                 double stiffness_floor = 1e-11);

// Posterior over states after report r; normalized to unit mass.
SampledFunction posterior_density(double r, const ActionRule& rule,
                                  const ModelSpec& model, int n_theta = 257,
                                  bool spline_curvature = false);

// Compact-message boundary equations (H-tail forms).
double boundary_F_minus(const ModelSpec& model, double u, double p,
                        int n_theta = 256);
double boundary_F_plus(const ModelSpec& model, double v, double p,
                       int n_theta = 256);
double boundary_u_star(const ModelSpec& model, double p);
double boundary_v_star(const ModelSpec& model, double p);

// Endpoint pooling masses Pr(r = m_lo), Pr(r = m_hi) implied by the rule.
std::pair<double, double> endpoint_pooling_masses(const ActionRule& rule,
                                                  const ModelSpec& model,
                                                  int n_theta = 512);

struct BvpOptions {
  int theta_nodes{128};
  int report_steps{512};
  double boundary_tol{1e-7};
  int slope_scan_points{25};
  double slope_scan_lo{0.02};   // relative to (action band)/(message width)
  double slope_scan_hi{20.0};
  double stiffness_floor{1e-11};
  bool allow_picard_fallback{true};
  int picard_max_iter{1000};
  double picard_damping{0.5};
};

struct BvpTelemetry {
  double boundary_residual{0.0};
  double bayes_residual_max{0.0};  // normalized, at 32 interior reports
  int stiff_steps{0};
  int candidate_roots{0};
  bool used_picard{false};
  double communication_cost{0.0};
};

struct BvpSolution {
  ActionRule rule;
  BvpTelemetry telemetry;
};

// Shooting solver for the compact-message boundary-value problem; multiple
// slope roots are enumerated and ranked by expected report-anchor cost.
BvpSolution solve_bvp(const ModelSpec& model, const BvpOptions& opts = {});

// Whole-line problems approximated on expanding compact intervals.
struct ExpandingSolution {
  std::vector<double> half_widths;
  std::vector<BvpSolution> solutions;
  double central_drift{0.0};  // max |a_L(r) - a_{L'}(r)| on the common core
};
ExpandingSolution solve_expanding(const ModelSpec& model,
                                  const std::vector<double>& half_widths,
                                  const BvpOptions& opts = {});

// Normalized Bayes residual |int U^R_1 w| / int w at one report, with the
// Jacobian rebuilt from spline curvature (independent of the stored rhs).
double bayes_residual(const ActionRule& rule, const ModelSpec& model, double r,
                      int n_theta = 256);

struct CostFloorObjects {
  SampledFunction T;      // marginal incentive to separate
  SampledFunction Gamma;  // cumulative integral of T
  double expected_Gamma{0.0};
  double fubini_residual{0.0};  // |E[Gamma] - int (1-F) T|
};

CostFloorObjects cost_floor(const ModelSpec& model, int n_nodes = 801);

// Deterministic-anchor separating report rule rho_c with the least-cost
// boundary condition rho_c(theta_lo) = b0(theta_lo).
SampledFunction separating_rho(const ModelSpec& model, double c,
                               int steps = 4000);
// Y_c(theta) = c * phi(rho_c(theta) - b0(theta)).
SampledFunction separating_cost_profile(const ModelSpec& model, double c,
                                        int steps = 4000);

// Expected report-anchor cost E[D(R_a(theta,b), b)] under sender best
// responses to the rule.
double communication_cost(const ReceiverRule& rule, const ModelSpec& model,
                          int n_theta = 96, int n_b = 96);

// Sender's best report against a rule by FOC bisection with a golden-section
// fallback; reports confined to [b-K, b+K] and the rule domain if compact.
double best_report_foc(const ReceiverRule& rule, const ModelSpec& model,
                       double theta, double b, double K);

// Distortion bound K: reports farther than K from the anchor are dominated.
double dominance_bound(const ModelSpec& model);

}  // namespace anchored
