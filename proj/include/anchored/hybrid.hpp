#pragma once

#include <vector>

#include "anchored/cheap_talk.hpp"
#include "anchored/model.hpp"
#include "anchored/ode.hpp"
#include "anchored/rule.hpp"

namespace anchored {

enum class CellSide { Left, Right };

// Fisher informativeness of the linear anchor: (beta/sigma)^2 times the
// noise score's second moment.
double fisher_info(double beta, double sigma, const AnchorSpec& noise);
double fisher_info(const ModelSpec& model);

struct ShiftMoments {
  double mean_shift{0.0};
  double second_moment{0.0};
};

// Leading moments of the anchor-induced posterior-mean shift in a boundary
// cell of the given width.
ShiftMoments shift_moments(CellSide side, double width, double s_theta,
                           double fisher_I);

// Boundary type's expected sender-utility gain from the within-cell report.
double boundary_gain(CellSide side, double width, double d, double delta_hat,
                     double s_theta, double kappa_S, double fisher_I);

// Additional right-cell width restoring boundary indifference.
double width_correction(double h, double d, double delta_hat, double s_theta,
                        double fisher_I);

struct AsymptoticProfiles {
  SampledFunction Y;
  SampledFunction R_profile;
  SampledFunction D_profile;
  double fisher_I{0.0};
  bool D_positive_interior{false};
  double D_integral_gap{0.0};  // max |ODE solution - closed-form integral|

  void require_D_positive() const;
};

AsymptoticProfiles r_and_d_profiles(const ModelSpec& model,
                                    int n_nodes = 801);

enum class Player { Receiver, Sender };

struct LossBreakdown {
  double L_C_leading{0.0};
  double cutoff_cost{0.0};
  double info_gain{0.0};
  double L_H_minus_L_C{0.0};
};

LossBreakdown loss_difference(const ModelSpec& model, double d, Player player);

// ---------------------------------------------------------------------------
// Exact hybrids

enum class ContinuationKind {
  Bvp,         // truncated-prior boundary-value continuation per cell
  Refinement,  // anchor-inference rule a_k(r) = receiver optimum vs q(r|.)
};

struct HybridOptions {
  ContinuationKind continuation{ContinuationKind::Bvp};
  int max_outer_iterations{40};
  double cutoff_tol{1e-7};
  double damping{0.5};
  int b_nodes{48};       // quadrature for label values over anchors
  int welfare_theta_nodes{48};
  int welfare_b_nodes{48};
  BvpOptions bvp{};      // per-cell solver settings
  int refinement_nodes{321};
};

struct CellContinuation {
  Interval cell;
  ReceiverRule rule;
};

struct HybridWelfare {
  double W_R{0.0};
  double W_S{0.0};             // net of reporting costs
  double reporting_cost{0.0};  // E[c phi(r-b)]
  double mismatch_loss_S{0.0};  // -E[U^S], action part only
};

struct HybridEquilibrium {
  Partition partition;
  std::vector<CellContinuation> cells;
  HybridWelfare welfare;
  double max_cutoff_residual{0.0};  // |V_k - V_{k+1}| at the cutoffs
  bool label_order_ok{true};        // a_k < a_{k+1} on the common report grid
  int outer_iterations{0};
  ContinuationKind continuation{ContinuationKind::Bvp};
};

// Sender's ex ante label value against a cell rule.
double label_value(const ModelSpec& model, const ReceiverRule& rule,
                   double theta, int b_nodes = 48);

// Outer fixed point: per-cell anchored continuations, cutoff indifference by
// bisection with damped updates.
HybridEquilibrium hybrid_exact(const ModelSpec& model, int N,
                               const HybridOptions& opts = {});

// Welfare of a fixed (partition, continuations) pair by quadrature.
HybridWelfare hybrid_welfare(const ModelSpec& model,
                             const std::vector<CellContinuation>& cells,
                             const HybridOptions& opts = {});

struct ScalingRow {
  double d{0.0};
  int n_cells{0};
  double reporting_cost{0.0};
  double mismatch_loss{0.0};
};

// Reporting-cost vs action-mismatch components along a bias sequence, on the
// most informative partition with anchored refinement per cell.
std::vector<ScalingRow> reporting_cost_scaling(
    const ModelSpec& model, const std::vector<double>& d_sequence);

// Least-squares slope of log(value) on log(d).
double loglog_slope(const std::vector<double>& d,
                    const std::vector<double>& value);

}  // namespace anchored
