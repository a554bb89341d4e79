#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "anchored/model.hpp"
#include "anchored/ode.hpp"
#include "anchored/rule.hpp"

namespace anchored {

// Sender's optimal report by exhaustive search: coarse grid, then a local
// grid at resolution 1e-4*K, then golden-section to 1e-8. The slow oracle
// that the fast FOC path is checked against.
double sender_best_response(const ReceiverRule& rule, const ModelSpec& model,
                            double theta, double b);

struct NoHolesResult {
  bool pass{true};
  double max_gap_ratio{0.0};  // worst gap / Jacobian-predicted spacing
  double witness_b{0.0};
};

// Image connectedness at grid scale: successive report gaps must stay within
// a factor of the spacing the inverse-anchor Jacobian predicts.
NoHolesResult no_holes_check(const ReceiverRule& rule, const ModelSpec& model,
                             double theta, int b_points = 2001,
                             double b_span_sds = 6.0,
                             double gap_factor = 5.0);

struct ReversionRow {
  double b{0.0};
  double report{0.0};
  double distortion{0.0};  // |R(theta,b) - b|
  bool pooled{false};      // report pinned at a compact-domain endpoint
};

struct ReversionResult {
  std::vector<ReversionRow> table;
  bool decreasing{true};  // distortion falls along increasing |b| (interior)
};

ReversionResult reversion_check(const ReceiverRule& rule,
                                const ModelSpec& model, double theta,
                                const std::vector<double>& extreme_b);

struct BayesBin {
  double report_mean{0.0};
  double residual_mean{0.0};
  double residual_se{0.0};
  std::int64_t count{0};
};

struct BayesConsistency {
  double max_gap_stderr{0.0};  // max |bin residual| / stderr
  std::vector<BayesBin> bins;
  double foc_vs_grid_gap{0.0};  // cross-check of the fast report path
  bool pass(double z_threshold = 4.0) const {
    return max_gap_stderr < z_threshold;
  }
};

// Simulate (theta, b), compute reports, bin by report (equal counts), and
// test E[theta - a(r) | bin] = 0 (FOC residual for nonquadratic losses).
BayesConsistency bayes_consistency(const ReceiverRule& rule,
                                   const ModelSpec& model,
                                   std::int64_t n_samples, int n_bins,
                                   std::uint64_t seed);

struct WelfareMc {
  double W_R{0.0}, W_R_se{0.0};
  double W_S{0.0}, W_S_se{0.0};
  double cost{0.0}, cost_se{0.0};
};

// Antithetic Monte-Carlo over block-indexed streams; the estimate does not
// depend on how blocks are scheduled.
WelfareMc welfare_mc(const ReceiverRule& rule, const ModelSpec& model,
                     std::int64_t n_samples, std::uint64_t seed,
                     int n_blocks = 64);

struct PoolingCheck {
  double model_lo{0.0}, mc_lo{0.0}, se_lo{0.0};
  double model_hi{0.0}, mc_hi{0.0}, se_hi{0.0};
  bool within(double z) const;
};

// Endpoint masses of a compact-message rule vs the H-tail formulas.
PoolingCheck pooling_masses_mc(const ActionRule& rule, const ModelSpec& model,
                               std::int64_t n_samples, std::uint64_t seed);

struct Diagnostics {
  double foc_residual_max{0.0};
  double posterior_mean_gap{0.0};
  double welfare_R_mc{0.0}, welfare_R_se{0.0};
  double welfare_S_mc{0.0}, welfare_S_se{0.0};
  double cost_mc{0.0}, cost_se{0.0};
  bool bayes_pass{false};
  bool no_holes_pass{false};
  double no_holes_witness{0.0};
  bool reversion_pass{true};
  std::optional<PoolingCheck> pooling;
  bool all_pass() const;
};

// Full battery against one candidate rule.
Diagnostics diagnose(const ReceiverRule& rule, const ModelSpec& model,
                     std::int64_t n_samples, std::uint64_t seed,
                     const std::optional<ActionRule>& compact_rule = {});

}  // namespace anchored
