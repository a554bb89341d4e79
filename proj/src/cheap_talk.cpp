#include "anchored/cheap_talk.hpp"

#include <algorithm>
#include <cmath>

namespace anchored {

void Partition::require_valid(const Interval& support) const {
  if (static_cast<int>(cutoffs.size()) != n_cells + 1)
    throw InvalidSpec("partition cutoff count != n_cells + 1");
  for (std::size_t i = 0; i + 1 < cutoffs.size(); ++i)
    if (!(cutoffs[i] < cutoffs[i + 1]))
      throw InvalidSpec("partition cutoffs not strictly increasing");
  if (std::abs(cutoffs.front() - support.lo) > 1e-9 ||
      std::abs(cutoffs.back() - support.hi) > 1e-9)
    throw InvalidSpec("partition does not span the state support");
}

bool cs_uniform_quadratic_feasible(double d, int N) {
  return 2.0 * d * N * (N - 1.0) < 1.0;
}

Partition cs_partition_uniform_quadratic(double d, int N) {
  if (!(d > 0.0) || N < 1) throw InvalidSpec("need d > 0 and N >= 1");
  if (!cs_uniform_quadratic_feasible(d, N))
    throw InfeasiblePartition("2 d N (N-1) >= 1 for N=" + std::to_string(N));
  Partition p;
  p.n_cells = N;
  p.cutoffs.resize(N + 1);
  for (int j = 0; j <= N; ++j)
    p.cutoffs[j] = static_cast<double>(j) / N + 2.0 * d * j * (j - N);
  return p;
}

double cell_action(const ModelSpec& model, const Interval& cell) {
  if (model.payoffs.quadratic_family())
    return model.prior.conditional_mean(cell);
  const auto& recv = model.payoffs.receiver();
  auto foc = [&](double a) {
    return quadrature(
        [&](double t) { return recv.d_a(a, t) * model.prior.density(t); },
        cell, 64);
  };
  double lo = ideal_action_receiver(model, cell.lo);
  double hi = ideal_action_receiver(model, cell.hi);
  if (lo > hi) std::swap(lo, hi);
  return find_root(foc, Interval{lo - 1e-9, hi + 1e-9}, 1e-13);
}

namespace {

// Sender's target action at a boundary state; the indifference condition for
// symmetric losses is that the adjacent cell actions straddle it evenly.
double sender_target(const ModelSpec& model, double theta) {
  if (model.payoffs.quadratic_family())
    return theta +
           model.payoffs.bias() * model.payoffs.delta_hat(theta);
  return ideal_action_sender(model, theta);
}

struct ShotResult {
  // Residual of the last boundary-indifference condition; shots that run out
  // of room early return a graded positive overshoot instead.
  double miss{0.0};
  std::vector<double> cutoffs;
  bool complete{false};
};

ShotResult shoot(const ModelSpec& model, int N, double theta1) {
  const Interval sup = model.theta_support();
  ShotResult res;
  res.cutoffs.assign(1, sup.lo);
  res.cutoffs.push_back(theta1);
  double a_prev = cell_action(model, {sup.lo, theta1});
  // Interior propagation: choose theta_{j+1} so the boundary type at
  // theta_j is indifferent between the adjacent cells.
  for (int j = 1; j + 1 < N; ++j) {
    const double t = res.cutoffs.back();
    const double required = 2.0 * sender_target(model, t) - a_prev;
    const double a_cap = cell_action(model, {t, sup.hi});
    if (required > a_cap) {
      res.miss = (N - 1 - j) * sup.width() + (required - a_cap);
      return res;
    }
    const double eps = 1e-12 * (1.0 + std::abs(t));
    double next;
    const double a_floor = cell_action(model, {t, t + 16 * eps});
    if (required <= a_floor) {
      next = t + 16 * eps;
    } else {
      next = find_root(
          [&](double x) { return cell_action(model, {t, x}) - required; },
          Interval{t + 16 * eps, sup.hi}, 1e-13);
    }
    res.cutoffs.push_back(next);
    a_prev = cell_action(model, {t, next});
  }
  // The last cell is pinned to the upper endpoint; the shot residual is the
  // remaining indifference gap at theta_{N-1}.
  const double t_last = res.cutoffs.back();
  if (t_last >= sup.hi - 1e-12 * (1.0 + std::abs(sup.hi))) {
    res.miss = sup.width();
    return res;
  }
  const double required = 2.0 * sender_target(model, t_last) - a_prev;
  const double a_last = cell_action(model, {t_last, sup.hi});
  res.cutoffs.push_back(sup.hi);
  res.complete = true;
  res.miss = required - a_last;
  return res;
}

}  // namespace

Partition solve_partition_general(const ModelSpec& model, int N) {
  const Interval sup = model.theta_support();
  if (N < 1) throw InvalidSpec("need N >= 1");
  Partition p;
  p.n_cells = N;
  if (N == 1) {
    p.cutoffs = {sup.lo, sup.hi};
    return p;
  }
  const double eps = 1e-10 * sup.width();
  auto miss = [&](double t1) { return shoot(model, N, t1).miss; };
  const double lo = sup.lo + eps;
  const double hi = sup.hi - eps;
  if (miss(lo) > 0.0)
    throw InfeasiblePartition("no " + std::to_string(N) +
                              "-cell partition: first-cell shot overshoots");
  if (miss(hi) < 0.0)
    throw InfeasiblePartition("shooting bracket failed at the upper end");
  const double t1 = find_root(miss, Interval{lo, hi}, 1e-12);
  ShotResult shot = shoot(model, N, t1);
  if (!shot.complete || std::abs(shot.miss) > 1e-9)
    throw InfeasiblePartition("shooting left a boundary-indifference gap");
  p.cutoffs = std::move(shot.cutoffs);
  p.require_valid(sup);
  return p;
}

int max_feasible_cells(const ModelSpec& model, int n_cap) {
  int best = 1;
  for (int n = 2; n <= n_cap; ++n) {
    try {
      solve_partition_general(model, n);
      best = n;
    } catch (const InfeasiblePartition&) {
      break;
    }
  }
  return best;
}

double two_label_threshold_gaussian(double d) {
  if (!(d > 0.0)) throw InvalidSpec("need d > 0");
  auto midpoint_gap = [d](double t) {
    const auto [pdf, cdf] = normal_pdf_cdf(t);
    const double below = -pdf / cdf;
    const double above = pdf / (1.0 - cdf);
    return t + d - 0.5 * (below + above);
  };
  const Interval bracket{-12.0, 0.0};
  if ((midpoint_gap(bracket.lo) > 0.0) == (midpoint_gap(bracket.hi) > 0.0))
    throw OnlyBabbling("no informative two-cell cutoff for d=" +
                       std::to_string(d));
  return find_root(midpoint_gap, bracket, 1e-12);
}

PartitionWelfare partition_welfare(const ModelSpec& model,
                                   const Partition& partition) {
  partition.require_valid(model.theta_support());
  PartitionWelfare out;
  const auto& recv = model.payoffs.receiver();
  const auto& send = model.payoffs.sender();
  for (int k = 0; k < partition.n_cells; ++k) {
    const Interval cell = partition.cell(k);
    CellStats cs;
    cs.mean_action = cell_action(model, cell);
    cs.mass = model.prior.mass(cell);
    const double uR = quadrature(
        [&](double t) {
          return recv.value(cs.mean_action, t) * model.prior.density(t);
        },
        cell, 64);
    const double uS = quadrature(
        [&](double t) {
          return send.value(cs.mean_action, t) * model.prior.density(t);
        },
        cell, 64);
    cs.within_loss_R = cs.mass > 0.0 ? -uR / cs.mass : 0.0;
    cs.within_loss_S = cs.mass > 0.0 ? -uS / cs.mass : 0.0;
    out.W_R += uR;
    out.W_S += uS;
    out.cells.push_back(cs);
  }
  return out;
}

YProfile y_profile(const ModelSpec& model, int n_nodes) {
  const Interval sup = model.theta_support();
  auto delta_hat = [&](double t) { return model.payoffs.delta_hat(t); };
  auto score = [&](double t) { return model.prior.log_density_slope(t); };

  // Cumulative S(theta) = int score, and the closed form
  // Y = 8 e^{-2S/3} int delta_hat e^{2S/3}.
  std::vector<double> th(n_nodes), Svals(n_nodes), Ivals(n_nodes),
      Yvals(n_nodes);
  const double h = sup.width() / (n_nodes - 1);
  th[0] = sup.lo;
  Svals[0] = 0.0;
  Ivals[0] = 0.0;
  for (int i = 1; i < n_nodes; ++i) {
    th[i] = (i + 1 == n_nodes) ? sup.hi : sup.lo + i * h;
    Svals[i] =
        Svals[i - 1] + quadrature(score, Interval{th[i - 1], th[i]}, 16);
  }
  // S evaluated exactly off the node set: cumulative value plus a local
  // quadrature of the score (interpolating S and exponentiating loses
  // relative accuracy on wide supports).
  auto S_exact = [&](int seg, double t) {
    return Svals[seg] + quadrature(score, Interval{th[seg], t}, 8);
  };
  for (int i = 1; i < n_nodes; ++i) {
    Ivals[i] = Ivals[i - 1] +
               quadrature(
                   [&](double t) {
                     return delta_hat(t) *
                            std::exp((2.0 / 3.0) * S_exact(i - 1, t));
                   },
                   Interval{th[i - 1], th[i]}, 16);
  }
  for (int i = 0; i < n_nodes; ++i)
    Yvals[i] = 8.0 * std::exp(-(2.0 / 3.0) * Svals[i]) * Ivals[i];

  // Cross-check: fourth-order stepping of Y' = 8 delta_hat - (2/3) s Y.
  const int substeps = 8;
  auto path = rk4_path(
      [&](double t, double y) {
        return 8.0 * delta_hat(t) - (2.0 / 3.0) * score(t) * y;
      },
      sup.lo, 0.0, sup.hi, substeps * (n_nodes - 1));
  SampledFunction closed(th, Yvals);
  double gap = 0.0;
  // Compare at the shared nodes; off-node comparison would only measure the
  // interpolant.
  for (int i = 0; i < n_nodes; ++i) {
    const double y = path[static_cast<std::size_t>(i) * substeps].second;
    gap = std::max(gap, std::abs(Yvals[i] - y) / (1.0 + std::abs(y)));
  }

  YProfile out;
  out.Y = std::move(closed);
  out.ode_vs_integral_gap = gap;
  return out;
}

std::vector<WidthRatioRow> width_convergence_check(
    const ModelSpec& model, const std::vector<double>& d_sequence,
    std::optional<Interval> window) {
  std::vector<WidthRatioRow> rows;
  const YProfile yp = y_profile(model);
  const Interval sup = model.theta_support();
  const Interval core = window.value_or(
      Interval{sup.lo + 0.1 * sup.width(), sup.hi - 0.1 * sup.width()});
  for (double d : d_sequence) {
    ModelSpec m = model;
    m.payoffs = model.payoffs.with_bias(d);
    const int N = max_feasible_cells(m);
    WidthRatioRow row{d, N, 0.0};
    if (N >= 2) {
      const Partition p = solve_partition_general(m, N);
      for (int j = 1; j < N; ++j) {
        if (!core.contains(p.cutoffs[j])) continue;
        const double hj = p.cutoffs[j] - p.cutoffs[j - 1];
        row.max_ratio = std::max(
            row.max_ratio, std::abs(hj * hj - d * yp.Y(p.cutoffs[j])) / d);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace anchored
