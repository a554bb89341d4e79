#include "anchored/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace anchored {

namespace {

double objective(const ReceiverRule& rule, const ModelSpec& model,
                 double theta, double b, double r) {
  return model.payoffs.sender().value(rule(r), theta) -
         model.cost.c() * model.cost.phi(r - b);
}

}  // namespace

double sender_best_response(const ReceiverRule& rule, const ModelSpec& model,
                            double theta, double b) {
  const double K = dominance_bound(model);
  double lo = b - K, hi = b + K;
  if (rule.compact) {
    lo = std::max(lo, rule.domain.lo);
    hi = std::min(hi, rule.domain.hi);
    if (!(lo < hi)) return rule.domain.clamp(b);
  }
  auto g = [&](double r) { return objective(rule, model, theta, b, r); };

  // Coarse pass, then a local grid at resolution 1e-4*K, then golden.
  const int coarse_n = 201;
  double best_r = lo, best_v = g(lo);
  const double coarse_h = (hi - lo) / (coarse_n - 1);
  for (int i = 1; i < coarse_n; ++i) {
    const double r = (i + 1 == coarse_n) ? hi : lo + i * coarse_h;
    const double v = g(r);
    if (v > best_v) {
      best_v = v;
      best_r = r;
    }
  }
  const double fine_h = 1e-4 * K;
  const double flo = std::max(lo, best_r - coarse_h);
  const double fhi = std::min(hi, best_r + coarse_h);
  for (double r = flo; r <= fhi; r += fine_h) {
    const double v = g(r);
    if (v > best_v) {
      best_v = v;
      best_r = r;
    }
  }
  const double glo = std::max(lo, best_r - fine_h);
  const double ghi = std::min(hi, best_r + fine_h);
  if (glo < ghi) best_r = golden_max(g, Interval{glo, ghi}, 1e-8);
  // Endpoints win ties: a compact-domain boundary optimum stays exact.
  if (g(lo) >= g(best_r)) return lo;
  if (g(hi) > g(best_r)) return hi;
  return best_r;
}

NoHolesResult no_holes_check(const ReceiverRule& rule, const ModelSpec& model,
                             double theta, int b_points, double b_span_sds,
                             double gap_factor) {
  const double s = model.anchor.sigma();
  const double b0 = model.anchor.b0(theta);
  const double lo = b0 - b_span_sds * s, hi = b0 + b_span_sds * s;
  const double db = (hi - lo) / (b_points - 1);
  std::vector<double> reports(b_points);
  const double K = dominance_bound(model);
  for (int i = 0; i < b_points; ++i)
    reports[i] = best_report_foc(rule, model, theta, lo + i * db, K);
  std::sort(reports.begin(), reports.end());

  NoHolesResult res;
  for (int i = 0; i + 1 < b_points; ++i) {
    const double gap = reports[i + 1] - reports[i];
    if (gap <= 0.0) continue;
    // Predicted local spacing: db / (d b_a / d r) at the report.
    const double r = reports[i];
    double predicted = db;
    try {
      const double jac = inverse_anchor_jacobian(
          r, theta, rule(r), rule.slope(r), rule.curvature(r), model);
      if (jac > 1e-12) predicted = db / jac;
    } catch (const SolverError&) {
    }
    const double ratio = gap / (predicted + 1e-300);
    if (ratio > res.max_gap_ratio) {
      res.max_gap_ratio = ratio;
      res.witness_b = lo + i * db;
    }
  }
  res.pass = res.max_gap_ratio <= gap_factor;
  return res;
}

ReversionResult reversion_check(const ReceiverRule& rule,
                                const ModelSpec& model, double theta,
                                const std::vector<double>& extreme_b) {
  ReversionResult res;
  for (double b : extreme_b) {
    ReversionRow row;
    row.b = b;
    row.report = sender_best_response(rule, model, theta, b);
    row.distortion = std::abs(row.report - b);
    if (rule.compact) {
      const double tol = 1e-9 * (1.0 + rule.domain.width());
      row.pooled = std::abs(row.report - rule.domain.lo) < tol ||
                   std::abs(row.report - rule.domain.hi) < tol;
    }
    res.table.push_back(row);
  }
  std::sort(res.table.begin(), res.table.end(),
            [](const ReversionRow& a, const ReversionRow& b) {
              return std::abs(a.b) < std::abs(b.b);
            });
  double prev = -1.0;
  for (const auto& row : res.table) {
    if (row.pooled) continue;
    if (prev >= 0.0 && row.distortion > prev + 1e-12) res.decreasing = false;
    prev = row.distortion;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

struct Draw {
  double theta{0.0};
  double b{0.0};
};

Draw draw_state_anchor(const ModelSpec& model, double z_theta, double z_x) {
  Draw d;
  const auto& prior = model.prior;
  switch (prior.kind()) {
    case PriorSpec::Kind::Gaussian:
      d.theta = prior.gaussian_mean() + prior.gaussian_sd() * z_theta;
      d.theta = prior.support().clamp(d.theta);
      break;
    case PriorSpec::Kind::Uniform: {
      // Map the normal deviate through its CDF for a uniform state.
      d.theta = prior.support().lo +
                prior.support().width() * normal_cdf(z_theta);
      break;
    }
    case PriorSpec::Kind::Tabulated:
      throw InvalidSpec("MC sampling supports uniform and gaussian priors");
  }
  d.b = model.anchor.b0(d.theta) + model.anchor.sigma() * z_x;
  return d;
}

}  // namespace

BayesConsistency bayes_consistency(const ReceiverRule& rule,
                                   const ModelSpec& model,
                                   std::int64_t n_samples, int n_bins,
                                   std::uint64_t seed) {
  const double K = dominance_bound(model);
  const bool quad = model.payoffs.quadratic_family();
  const auto& recv = model.payoffs.receiver();
  std::vector<double> reports(n_samples), resid(n_samples);

  const int n_blocks = 64;
  const std::int64_t block = (n_samples + n_blocks - 1) / n_blocks;
  BayesConsistency out;
  for (int bidx = 0; bidx < n_blocks; ++bidx) {
    RngStream rng(seed, static_cast<std::uint64_t>(bidx));
    const std::int64_t first = bidx * block;
    const std::int64_t last = std::min<std::int64_t>(n_samples, first + block);
    for (std::int64_t i = first; i < last; ++i) {
      const Draw d = draw_state_anchor(model, rng.normal(), rng.normal());
      const double r = best_report_foc(rule, model, d.theta, d.b, K);
      reports[i] = r;
      resid[i] = quad ? d.theta - rule(r) : recv.d_a(rule(r), d.theta);
    }
  }

  // Cross-check the FOC path against the grid+golden oracle on a slice.
  {
    RngStream rng(seed ^ 0x5eedcafeULL, 0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Draw d = draw_state_anchor(model, rng.normal(), rng.normal());
      const double r_fast = best_report_foc(rule, model, d.theta, d.b, K);
      const double r_grid = sender_best_response(rule, model, d.theta, d.b);
      worst = std::max(worst, std::abs(r_fast - r_grid));
    }
    out.foc_vs_grid_gap = worst;
  }

  // Equal-count bins by report rank.
  std::vector<std::int64_t> order(n_samples);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::int64_t a, std::int64_t b) {
              return reports[a] < reports[b];
            });
  const std::int64_t per = n_samples / n_bins;
  for (int k = 0; k < n_bins; ++k) {
    const std::int64_t first = k * per;
    const std::int64_t last =
        (k + 1 == n_bins) ? n_samples : first + per;
    BayesBin bin;
    bin.count = last - first;
    double sum = 0.0, sum2 = 0.0, rsum = 0.0;
    for (std::int64_t j = first; j < last; ++j) {
      const double e = resid[order[j]];
      sum += e;
      sum2 += e * e;
      rsum += reports[order[j]];
    }
    const double n = static_cast<double>(bin.count);
    bin.residual_mean = sum / n;
    const double var = std::max(sum2 / n - bin.residual_mean * bin.residual_mean, 0.0);
    bin.residual_se = std::sqrt(var / n);
    bin.report_mean = rsum / n;
    out.bins.push_back(bin);
    if (bin.residual_se > 0.0)
      out.max_gap_stderr = std::max(
          out.max_gap_stderr, std::abs(bin.residual_mean) / bin.residual_se);
  }
  return out;
}

WelfareMc welfare_mc(const ReceiverRule& rule, const ModelSpec& model,
                     std::int64_t n_samples, std::uint64_t seed,
                     int n_blocks) {
  const double K = dominance_bound(model);
  const auto& recv = model.payoffs.receiver();
  const auto& send = model.payoffs.sender();
  const double c = model.cost.c();
  const std::int64_t n_pairs = n_samples / 2;
  const std::int64_t block = (n_pairs + n_blocks - 1) / n_blocks;

  // Antithetic pairs (z, -z); accumulate pair means per block.
  double sR = 0.0, sR2 = 0.0, sS = 0.0, sS2 = 0.0, sC = 0.0, sC2 = 0.0;
  std::int64_t count = 0;
  for (int bidx = 0; bidx < n_blocks; ++bidx) {
    RngStream rng(seed, static_cast<std::uint64_t>(bidx));
    const std::int64_t first = bidx * block;
    const std::int64_t last = std::min(n_pairs, first + block);
    for (std::int64_t i = first; i < last; ++i) {
      const double zt = rng.normal();
      const double zx = rng.normal();
      double uR = 0.0, uS = 0.0, uC = 0.0;
      for (int sgn : {+1, -1}) {
        const Draw d = draw_state_anchor(model, sgn * zt, sgn * zx);
        const double r = best_report_foc(rule, model, d.theta, d.b, K);
        const double a = rule(r);
        const double cost = c * model.cost.phi(r - d.b);
        uR += recv.value(a, d.theta);
        uS += send.value(a, d.theta) - cost;
        uC += cost;
      }
      uR *= 0.5;
      uS *= 0.5;
      uC *= 0.5;
      sR += uR;
      sR2 += uR * uR;
      sS += uS;
      sS2 += uS * uS;
      sC += uC;
      sC2 += uC * uC;
      ++count;
    }
  }
  WelfareMc w;
  const double n = static_cast<double>(count);
  auto finish = [n](double s, double s2, double& mean, double& se) {
    mean = s / n;
    const double var = std::max(s2 / n - mean * mean, 0.0);
    se = std::sqrt(var / n);
  };
  finish(sR, sR2, w.W_R, w.W_R_se);
  finish(sS, sS2, w.W_S, w.W_S_se);
  finish(sC, sC2, w.cost, w.cost_se);
  return w;
}

bool PoolingCheck::within(double z) const {
  return std::abs(mc_lo - model_lo) <= z * se_lo + 1e-12 &&
         std::abs(mc_hi - model_hi) <= z * se_hi + 1e-12;
}

PoolingCheck pooling_masses_mc(const ActionRule& rule, const ModelSpec& model,
                               std::int64_t n_samples, std::uint64_t seed) {
  PoolingCheck out;
  const auto [m_lo, m_hi] = endpoint_pooling_masses(rule, model);
  out.model_lo = m_lo;
  out.model_hi = m_hi;
  const ReceiverRule rr = rule.rule();
  const double K = dominance_bound(model);
  const Interval M = rule.domain();
  const double tol = 1e-9 * (1.0 + M.width());
  std::int64_t hits_lo = 0, hits_hi = 0;
  const int n_blocks = 64;
  const std::int64_t block = (n_samples + n_blocks - 1) / n_blocks;
  for (int bidx = 0; bidx < n_blocks; ++bidx) {
    RngStream rng(seed, static_cast<std::uint64_t>(bidx));
    const std::int64_t first = bidx * block;
    const std::int64_t last = std::min(n_samples, first + block);
    for (std::int64_t i = first; i < last; ++i) {
      const Draw d = draw_state_anchor(model, rng.normal(), rng.normal());
      const double r = best_report_foc(rr, model, d.theta, d.b, K);
      if (std::abs(r - M.lo) < tol) ++hits_lo;
      if (std::abs(r - M.hi) < tol) ++hits_hi;
    }
  }
  const double n = static_cast<double>(n_samples);
  out.mc_lo = hits_lo / n;
  out.mc_hi = hits_hi / n;
  out.se_lo = std::sqrt(std::max(out.mc_lo * (1.0 - out.mc_lo), 1e-12) / n);
  out.se_hi = std::sqrt(std::max(out.mc_hi * (1.0 - out.mc_hi), 1e-12) / n);
  return out;
}

bool Diagnostics::all_pass() const {
  bool ok = bayes_pass && no_holes_pass && reversion_pass;
  if (pooling) ok = ok && pooling->within(3.0);
  return ok;
}

Diagnostics diagnose(const ReceiverRule& rule, const ModelSpec& model,
                     std::int64_t n_samples, std::uint64_t seed,
                     const std::optional<ActionRule>& compact_rule) {
  Diagnostics d;
  const BayesConsistency bc =
      bayes_consistency(rule, model, n_samples, 50, seed);
  d.posterior_mean_gap = bc.max_gap_stderr;
  d.bayes_pass = bc.pass();

  const WelfareMc w = welfare_mc(rule, model, n_samples, seed + 1);
  d.welfare_R_mc = w.W_R;
  d.welfare_R_se = w.W_R_se;
  d.welfare_S_mc = w.W_S;
  d.welfare_S_se = w.W_S_se;
  d.cost_mc = w.cost;
  d.cost_se = w.cost_se;

  const Interval sup = model.theta_support();
  d.no_holes_pass = true;
  for (double t : {sup.lo + 0.25 * sup.width(), sup.mid(),
                   sup.lo + 0.75 * sup.width()}) {
    const NoHolesResult nh = no_holes_check(rule, model, t);
    if (!nh.pass) {
      d.no_holes_pass = false;
      d.no_holes_witness = nh.witness_b;
    }
  }

  // FOC residual of the receiver rule at sampled reports.
  if (compact_rule) {
    double worst = 0.0;
    const Interval M = compact_rule->domain();
    for (int i = 1; i <= 32; ++i)
      worst = std::max(worst,
                       bayes_residual(*compact_rule, model,
                                      M.lo + M.width() * i / 33.0));
    d.foc_residual_max = worst;
    d.pooling = pooling_masses_mc(*compact_rule, model, n_samples, seed + 2);
  }
  return d;
}

}  // namespace anchored
