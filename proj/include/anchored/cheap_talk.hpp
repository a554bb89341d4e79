#pragma once

#include <optional>
#include <vector>

#include "anchored/model.hpp"

namespace anchored {

// Ordered state cutoffs including both endpoints of the support.
struct Partition {
  std::vector<double> cutoffs;
  int n_cells{0};

  Interval cell(int k) const { return {cutoffs[k], cutoffs[k + 1]}; }
  void require_valid(const Interval& support) const;
};

struct CellStats {
  double mean_action{0.0};
  double mass{0.0};
  double within_loss_R{0.0};  // per unit of cell mass, >= 0
  double within_loss_S{0.0};
};

struct PartitionWelfare {
  double W_R{0.0};
  double W_S{0.0};
  std::vector<CellStats> cells;
};

// Squared-width profile h(theta)^2 ~ d*Y(theta) of the fine-partition limit.
struct YProfile {
  SampledFunction Y;
  double ode_vs_integral_gap{0.0};  // max |closed form - RK4| on the grid
};

// Crawford-Sobel uniform-quadratic closed form on [0,1]:
// theta_j = j/N + 2 d j (j - N); feasible iff 2 d N (N-1) < 1.
Partition cs_partition_uniform_quadratic(double d, int N);
bool cs_uniform_quadratic_feasible(double d, int N);

// Exact receiver action for one cell: root of the cell-conditional FOC.
double cell_action(const ModelSpec& model, const Interval& cell);

// Forward shooting on the first cutoff for symmetric-loss models.
Partition solve_partition_general(const ModelSpec& model, int N);

// Largest N for which the shooting solver finds a partition.
int max_feasible_cells(const ModelSpec& model, int n_cap = 64);

// Two-cell threshold for the standard normal prior: t + d equals the
// midpoint of the two truncated-normal cell means.
double two_label_threshold_gaussian(double d);

PartitionWelfare partition_welfare(const ModelSpec& model,
                                   const Partition& partition);

YProfile y_profile(const ModelSpec& model, int n_nodes = 801);

struct WidthRatioRow {
  double d{0.0};
  int n_cells{0};
  double max_ratio{0.0};  // max_j |h_j^2 - d Y(theta_j)| / d
};

// Ratios are taken over cutoffs inside `window` (default: the central 80%
// of the support); the width law is a small-d statement on interior
// compacts, and the cell pinned at the top boundary is not covered by it.
std::vector<WidthRatioRow> width_convergence_check(
    const ModelSpec& model, const std::vector<double>& d_sequence,
    std::optional<Interval> window = {});

}  // namespace anchored
