#include "anchored/hybrid.hpp"

#include <algorithm>
#include <cmath>

namespace anchored {

// ---------------------------------------------------------------------------
// Asymptotic machinery

double fisher_info(double beta, double sigma, const AnchorSpec& noise) {
  if (!(sigma > 0.0)) throw InvalidSpec("fisher_info needs sigma > 0");
  if (beta == 0.0) return 0.0;
  const double lambda = beta / sigma;
  const double score_second_moment = quadrature(
      [&](double u) {
        const double s = noise.noise_score(u);
        return s * s * noise.noise_pdf(u);
      },
      Interval{-8.0, 8.0}, 256);
  return lambda * lambda * score_second_moment;
}

double fisher_info(const ModelSpec& model) {
  return fisher_info(model.anchor.beta(), model.anchor.sigma(), model.anchor);
}

ShiftMoments shift_moments(CellSide side, double width, double s_theta,
                           double fisher_I) {
  const double w3 = width * width * width;
  const double w4 = w3 * width;
  ShiftMoments m;
  m.second_moment = fisher_I / 144.0 * w4;
  if (side == CellSide::Right)
    m.mean_shift = -fisher_I / 24.0 * w3 - s_theta * fisher_I / 144.0 * w4;
  else
    m.mean_shift = fisher_I / 24.0 * w3 - s_theta * fisher_I / 144.0 * w4;
  return m;
}

double boundary_gain(CellSide side, double width, double d, double delta_hat,
                     double s_theta, double kappa_S, double fisher_I) {
  const double w3 = width * width * width;
  const double w4 = w3 * width;
  const double w5 = w4 * width;
  if (side == CellSide::Right)
    return kappa_S * fisher_I *
           (5.0 / 288.0 * w4 - d * delta_hat / 24.0 * w3 +
            s_theta / 144.0 * w5);
  return kappa_S * fisher_I *
         (5.0 / 288.0 * w4 + d * delta_hat / 24.0 * w3 -
          s_theta / 144.0 * w5);
}

double width_correction(double h, double d, double delta_hat, double s_theta,
                        double fisher_I) {
  const double h2 = h * h;
  return fisher_I *
         (7.0 / 9.0 * d * delta_hat * h2 - s_theta / 27.0 * h2 * h2);
}

void AsymptoticProfiles::require_D_positive() const {
  if (!D_positive_interior)
    throw AssumptionViolation("D profile not positive on the interior");
}

AsymptoticProfiles r_and_d_profiles(const ModelSpec& model, int n_nodes) {
  AsymptoticProfiles out;
  out.fisher_I = fisher_info(model);
  const YProfile yp = y_profile(model, n_nodes);
  out.Y = yp.Y;
  const Interval sup = model.theta_support();
  auto score = [&](double t) { return model.prior.log_density_slope(t); };
  auto delta_hat = [&](double t) { return model.payoffs.delta_hat(t); };
  const double I = out.fisher_I;
  const auto& Y = out.Y;

  auto path = rk4_path(
      [&](double t, double Rv) {
        const double yv = Y(t);
        return -(2.0 / 3.0) * score(t) * Rv +
               I * (14.0 / 9.0 * delta_hat(t) * yv -
                    2.0 / 27.0 * score(t) * yv * yv);
      },
      sup.lo, 0.0, sup.hi, 4 * (n_nodes - 1));

  std::vector<double> th(n_nodes), Rv(n_nodes), Dv(n_nodes);
  const double h = sup.width() / (n_nodes - 1);
  SampledFunction rpath = [&] {
    std::vector<double> xs, ys;
    xs.reserve(path.size());
    ys.reserve(path.size());
    for (const auto& [x, y] : path) {
      xs.push_back(x);
      ys.push_back(y);
    }
    return SampledFunction(std::move(xs), std::move(ys));
  }();
  for (int i = 0; i < n_nodes; ++i) {
    th[i] = (i + 1 == n_nodes) ? sup.hi : sup.lo + i * h;
    Rv[i] = rpath(th[i]);
    const double yv = Y(th[i]);
    Dv[i] = Rv[i] - I / 12.0 * yv * yv;
  }
  out.R_profile = SampledFunction(th, Rv);
  out.D_profile = SampledFunction(th, Dv);

  out.D_positive_interior = true;
  for (int i = 1; i + 1 < n_nodes; ++i)
    if (!(Dv[i] > 0.0)) out.D_positive_interior = false;

  // Cross-check against the closed-form integral for D from the proof.
  // D(t) = (I/18) int Y (4 delta_hat - s Y / 3) exp(-(2/3) int s).
  std::vector<double> Sv(n_nodes, 0.0);
  for (int i = 1; i < n_nodes; ++i)
    Sv[i] = Sv[i - 1] + quadrature(score, Interval{th[i - 1], th[i]}, 16);
  SampledFunction S(th, Sv);
  std::vector<double> inner(n_nodes, 0.0);
  auto integrand = [&](double t) {
    const double yv = Y(t);
    return yv * (4.0 * delta_hat(t) - score(t) * yv / 3.0) *
           std::exp((2.0 / 3.0) * S(t));
  };
  for (int i = 1; i < n_nodes; ++i)
    inner[i] =
        inner[i - 1] + quadrature(integrand, Interval{th[i - 1], th[i]}, 16);
  double gap = 0.0;
  for (int i = 0; i < n_nodes; ++i) {
    const double Dint =
        I / 18.0 * std::exp(-(2.0 / 3.0) * Sv[i]) * inner[i];
    gap = std::max(gap, std::abs(Dint - Dv[i]));
  }
  out.D_integral_gap = gap;
  return out;
}

LossBreakdown loss_difference(const ModelSpec& model, double d,
                              Player player) {
  if (!(d > 0.0)) throw InvalidSpec("loss_difference needs d > 0");
  const AsymptoticProfiles prof = r_and_d_profiles(model);
  const double kappa = (player == Player::Receiver)
                           ? model.payoffs.kappa_R()
                           : model.payoffs.kappa_S();
  const Interval sup = model.theta_support();
  auto g = [&](double t) { return model.prior.density(t); };
  LossBreakdown out;
  out.L_C_leading =
      d / 24.0 *
      quadrature([&](double t) { return g(t) * kappa * prof.Y(t); }, sup, 512);
  out.cutoff_cost =
      d * d / 24.0 *
      quadrature([&](double t) { return g(t) * kappa * prof.R_profile(t); },
                 sup, 512);
  out.info_gain = d * d / 288.0 *
                  quadrature(
                      [&](double t) {
                        const double yv = prof.Y(t);
                        return g(t) * kappa * prof.fisher_I * yv * yv;
                      },
                      sup, 512);
  out.L_H_minus_L_C = out.cutoff_cost - out.info_gain;
  return out;
}

// ---------------------------------------------------------------------------
// Cell continuations

namespace {

// Anchor-inference rule: the receiver reads the report as the anchor and
// best-responds to the cell posterior; slope computed analytically from the
// score. Sampled once onto a monotone interpolant.
ReceiverRule refinement_rule(const ModelSpec& cell_model, int n_nodes) {
  const Interval cell = cell_model.theta_support();
  const auto& an = cell_model.anchor;
  const double s = an.sigma();
  const Interval rspan{an.b0(cell.lo) - 8.5 * s, an.b0(cell.hi) + 8.5 * s};
  const auto& recv = cell_model.payoffs.receiver();
  const bool quad = cell_model.payoffs.quadratic_family();

  auto action_at = [&](double r) {
    if (quad) {
      double w = 0.0, tw = 0.0;
      const Grid g = Grid::gauss_legendre(cell, 64);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double th = g.nodes[i];
        const double wt = cell_model.prior.density(th) * an.density(r, th) *
                          g.weights[i];
        w += wt;
        tw += th * wt;
      }
      return w > 0.0 ? tw / w : cell.mid();
    }
    auto foc = [&](double a) {
      return quadrature(
          [&](double th) {
            return recv.d_a(a, th) * cell_model.prior.density(th) *
                   an.density(r, th);
          },
          cell, 64);
    };
    return find_root(foc,
                     Interval{ideal_action_receiver(cell_model, cell.lo) -
                                  1e-9,
                              ideal_action_receiver(cell_model, cell.hi) +
                                  1e-9},
                     1e-12);
  };
  auto slope_at = [&](double r) {
    // d/dr of the posterior mean: Cov_w(theta, score)/sigma.
    double w = 0.0, tw = 0.0, sw = 0.0, tsw = 0.0;
    const Grid g = Grid::gauss_legendre(cell, 64);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double th = g.nodes[i];
      const double z = (r - an.b0(th)) / s;
      const double wt =
          cell_model.prior.density(th) * an.density(r, th) * g.weights[i];
      const double sc = an.noise_score(z) / s;
      w += wt;
      tw += th * wt;
      sw += sc * wt;
      tsw += th * sc * wt;
    }
    if (!(w > 0.0)) return 0.0;
    return tsw / w - (tw / w) * (sw / w);
  };

  std::vector<double> rs(n_nodes), av(n_nodes), pv(n_nodes);
  const double h = rspan.width() / (n_nodes - 1);
  for (int i = 0; i < n_nodes; ++i) {
    rs[i] = (i + 1 == n_nodes) ? rspan.hi : rspan.lo + i * h;
    av[i] = action_at(rs[i]);
    pv[i] = quad ? slope_at(rs[i]) : 0.0;
  }
  ReceiverRule rule;
  if (quad) {
    auto a_f = SampledFunction(rs, av);
    auto p_f = SampledFunction(rs, pv);
    rule.a = [a_f](double r) { return a_f(r); };
    rule.a_prime = [p_f](double r) { return p_f(r); };
  } else {
    auto a_f = SampledFunction(rs, av);
    rule.a = [a_f](double r) { return a_f(r); };
    rule.a_prime = [a_f](double r) { return a_f.derivative(r); };
  }
  // Off-span reports carry the flat continuation of the interpolant; treat
  // the domain as effectively unbounded.
  rule.compact = false;
  return rule;
}

ReceiverRule bvp_cell_rule(const ModelSpec& model, const Interval& cell,
                           const BvpOptions& bvp_opts) {
  ModelSpec cm = model.truncate_states(cell);
  const double K = dominance_bound(cm);
  const double s = model.anchor.sigma();
  const double margin = 8.0 * s + K + 1.0;
  cm.message_space = MessageSpace::compact(
      {model.anchor.b0(cell.lo) - margin, model.anchor.b0(cell.hi) + margin});
  const BvpSolution sol = solve_bvp(cm, bvp_opts);
  return sol.rule.rule();
}

ReceiverRule cell_rule(const ModelSpec& model, const Interval& cell,
                       const HybridOptions& opts) {
  if (opts.continuation == ContinuationKind::Bvp)
    return bvp_cell_rule(model, cell, opts.bvp);
  return refinement_rule(model.truncate_states(cell), opts.refinement_nodes);
}

}  // namespace

double label_value(const ModelSpec& model, const ReceiverRule& rule,
                   double theta, int b_nodes) {
  const double K = dominance_bound(model);
  const double s = model.anchor.sigma();
  const double b0 = model.anchor.b0(theta);
  const auto& send = model.payoffs.sender();
  const double c = model.cost.c();
  return quadrature(
      [&](double b) {
        const double r = best_report_foc(rule, model, theta, b, K);
        return (send.value(rule(r), theta) - c * model.cost.phi(r - b)) *
               model.anchor.density(b, theta);
      },
      Interval{b0 - 8.0 * s, b0 + 8.0 * s}, b_nodes);
}

HybridWelfare hybrid_welfare(const ModelSpec& model,
                             const std::vector<CellContinuation>& cells,
                             const HybridOptions& opts) {
  HybridWelfare w;
  const double K = dominance_bound(model);
  const auto& recv = model.payoffs.receiver();
  const auto& send = model.payoffs.sender();
  const double c = model.cost.c();
  const double s = model.anchor.sigma();
  for (const auto& cc : cells) {
    const Grid gth = Grid::gauss_legendre(cc.cell, opts.welfare_theta_nodes);
    for (std::size_t i = 0; i < gth.size(); ++i) {
      const double th = gth.nodes[i];
      const double fw = model.prior.density(th) * gth.weights[i];
      if (!(fw > 0.0)) continue;
      const double b0 = model.anchor.b0(th);
      const Grid gb =
          Grid::gauss_legendre({b0 - 8.0 * s, b0 + 8.0 * s},
                               opts.welfare_b_nodes);
      double uR = 0.0, uS = 0.0, cost = 0.0;
      for (std::size_t j = 0; j < gb.size(); ++j) {
        const double b = gb.nodes[j];
        const double qw = model.anchor.density(b, th) * gb.weights[j];
        const double r = best_report_foc(cc.rule, model, th, b, K);
        const double a = cc.rule(r);
        uR += recv.value(a, th) * qw;
        uS += send.value(a, th) * qw;
        cost += c * model.cost.phi(r - b) * qw;
      }
      w.W_R += fw * uR;
      w.W_S += fw * (uS - cost);
      w.reporting_cost += fw * cost;
      w.mismatch_loss_S += fw * (-uS);
    }
  }
  return w;
}

HybridEquilibrium hybrid_exact(const ModelSpec& model, int N,
                               const HybridOptions& opts) {
  if (N < 1) throw InvalidSpec("hybrid_exact needs N >= 1");
  const Interval sup = model.theta_support();

  std::vector<double> cut(N + 1);
  cut.front() = sup.lo;
  cut.back() = sup.hi;
  if (N >= 2) {
    try {
      const Partition ct = solve_partition_general(model, N);
      cut = ct.cutoffs;
    } catch (const InfeasiblePartition&) {
      // Equal-mass quantile start.
      for (int k = 1; k < N; ++k) {
        const double target = static_cast<double>(k) / N;
        cut[k] = find_root(
            [&](double t) { return model.prior.cdf(t) - target; }, sup,
            1e-10);
      }
    }
  }

  HybridEquilibrium out;
  out.continuation = opts.continuation;
  std::vector<CellContinuation> cells;
  double move = 0.0;
  int outer = 0;
  for (; outer < opts.max_outer_iterations; ++outer) {
    cells.clear();
    for (int k = 0; k < N; ++k) {
      const Interval cell{cut[k], cut[k + 1]};
      cells.push_back({cell, cell_rule(model, cell, opts)});
    }
    if (N == 1) break;
    move = 0.0;
    std::vector<double> next = cut;
    for (int k = 1; k < N; ++k) {
      auto gap = [&](double t) {
        return label_value(model, cells[k - 1].rule, t, opts.b_nodes) -
               label_value(model, cells[k].rule, t, opts.b_nodes);
      };
      const double slack =
          1e-3 * std::min(cut[k] - cut[k - 1], cut[k + 1] - cut[k]);
      const Interval bracket{cut[k - 1] + slack, cut[k + 1] - slack};
      double target = cut[k];
      if ((gap(bracket.lo) > 0.0) != (gap(bracket.hi) > 0.0))
        target = find_root(gap, bracket, 1e-10);
      next[k] = cut[k] + opts.damping * (target - cut[k]);
      move = std::max(move, std::abs(next[k] - cut[k]));
    }
    cut = std::move(next);
    if (move < opts.cutoff_tol) {
      // Final continuations on the converged cutoffs.
      cells.clear();
      for (int k = 0; k < N; ++k) {
        const Interval cell{cut[k], cut[k + 1]};
        cells.push_back({cell, cell_rule(model, cell, opts)});
      }
      break;
    }
  }
  if (N >= 2 && move >= opts.cutoff_tol * 10.0 &&
      outer == opts.max_outer_iterations)
    throw NoHybridFound("outer cutoff loop did not converge");

  out.partition.n_cells = N;
  out.partition.cutoffs = cut;
  out.cells = cells;
  out.outer_iterations = outer;

  // Cutoff indifference residuals.
  for (int k = 1; k < N; ++k) {
    const double vk = label_value(model, cells[k - 1].rule, cut[k],
                                  opts.b_nodes);
    const double vk1 = label_value(model, cells[k].rule, cut[k], opts.b_nodes);
    out.max_cutoff_residual =
        std::max(out.max_cutoff_residual, std::abs(vk - vk1));
  }

  // Label monotonicity on a shared report grid (regularity report).
  for (int k = 1; k < N && out.label_order_ok; ++k) {
    const double s = model.anchor.sigma();
    const double lo = model.anchor.b0(cut[k]) - 4.0 * s;
    const double hi = model.anchor.b0(cut[k]) + 4.0 * s;
    for (int i = 0; i <= 32; ++i) {
      const double r = lo + (hi - lo) * i / 32.0;
      if (!(cells[k - 1].rule(r) < cells[k].rule(r))) {
        out.label_order_ok = false;
        break;
      }
    }
  }

  out.welfare = hybrid_welfare(model, cells, opts);
  return out;
}

// ---------------------------------------------------------------------------
// Reporting-cost scaling

std::vector<ScalingRow> reporting_cost_scaling(
    const ModelSpec& model, const std::vector<double>& d_sequence) {
  std::vector<ScalingRow> rows;
  HybridOptions opts;
  opts.continuation = ContinuationKind::Refinement;
  for (double d : d_sequence) {
    ModelSpec m = model;
    m.payoffs = model.payoffs.with_bias(d);
    ScalingRow row;
    row.d = d;
    if (d == 0.0) {
      rows.push_back(row);  // no misalignment, no distortion
      continue;
    }
    const int N = max_feasible_cells(m);
    row.n_cells = N;
    const Partition p = N >= 2 ? solve_partition_general(m, N)
                               : Partition{{m.theta_support().lo,
                                            m.theta_support().hi},
                                           1};
    std::vector<CellContinuation> cells;
    for (int k = 0; k < N; ++k) {
      const Interval cell = p.cell(k);
      cells.push_back(
          {cell, refinement_rule(m.truncate_states(cell),
                                 opts.refinement_nodes)});
    }
    const HybridWelfare w = hybrid_welfare(m, cells, opts);
    row.reporting_cost = w.reporting_cost;
    row.mismatch_loss = w.mismatch_loss_S;
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(const std::vector<double>& d,
                    const std::vector<double>& value) {
  if (d.size() != value.size() || d.size() < 2)
    throw InvalidSpec("loglog_slope needs matched samples, >= 2");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = std::log(d[i]);
    const double y = std::log(value[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace anchored
