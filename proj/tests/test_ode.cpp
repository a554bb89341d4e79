#include <doctest.h>

#include <cmath>

#include "anchored/gauss.hpp"
#include "anchored/ode.hpp"
#include "oracles.hpp"

using namespace anchored;

namespace {

ActionRule affine_action_rule(const LinearEquilibrium& eq, const Interval& M,
                              int n = 201) {
  std::vector<double> r(n), a(n), p(n), app(n, 0.0);
  for (int i = 0; i < n; ++i) {
    r[i] = M.lo + M.width() * i / (n - 1);
    a[i] = eq.action(r[i]);
    p[i] = eq.alpha;
  }
  return ActionRule(r, a, p, app);
}

ModelSpec benchmark(double d, double trunc = 8.0) {
  return gaussian_quadratic_model({1.0, 1.0, 1.0, 1.0, d}, trunc);
}

}  // namespace

TEST_CASE("inverse anchor: affine formula, bliss point, numeric value") {
  const ModelSpec m = benchmark(0.0);
  const GaussParams gp{1.0, 1.0, 1.0, 1.0, 0.0};
  const double alpha = solve_alpha(gp);

  // At the sender's bliss point the report equals the anchor.
  const double theta = 0.4;
  const double a_bliss = theta + 0.0;
  CHECK(inverse_anchor(1.3, theta, a_bliss, alpha, m) ==
        doctest::Approx(1.3));

  // Closed form b = r + (alpha/c)(a - theta - d).
  const double b = inverse_anchor(1.0, 0.0, alpha * 1.0, alpha, m);
  CHECK(b == doctest::Approx(1.0 + alpha * alpha).epsilon(1e-12));
  CHECK(b == doctest::Approx(1.381966011).epsilon(1e-8));
}

TEST_CASE("posterior density: gaussian posterior from the affine rule") {
  const GaussParams gp{1.0, 1.0, 1.0, 1.0, 0.25};
  const ModelSpec m = benchmark(0.25);
  const LinearEquilibrium eq = equilibrium(gp);
  const ActionRule rule = affine_action_rule(eq, {-12.0, 12.0});
  const double target_var = posterior_variance(gp, eq.alpha);

  for (double r : {-0.8, 0.0, 1.1}) {
    const SampledFunction post = posterior_density(r, rule, m, 513);
    const Interval sup = m.theta_support();
    const double mass =
        quadrature([&](double t) { return post(t); }, sup, 512);
    CHECK(std::abs(mass - 1.0) < 1e-8);
    const double mean =
        quadrature([&](double t) { return t * post(t); }, sup, 512);
    const double var = quadrature(
        [&](double t) { return (t - mean) * (t - mean) * post(t); }, sup,
        512);
    CHECK(std::abs(var - target_var) < 1e-6);
    // Quadratic receiver: the action is the posterior mean.
    CHECK(std::abs(mean - rule(r)) < 1e-7);
  }

  // Diffuse anchors: posterior reverts to the prior.
  ModelSpec diffuse = m;
  diffuse.anchor = AnchorSpec::affine_gaussian(0.0, 1.0, 100.0);
  GaussParams gpd = gp;
  gpd.sigma = 100.0;
  const LinearEquilibrium eqd = equilibrium(gpd);
  const ActionRule ruled = affine_action_rule(eqd, {-12.0, 12.0});
  const SampledFunction post = posterior_density(0.3, ruled, diffuse);
  for (double t : {-1.0, 0.0, 1.5})
    CHECK(std::abs(post(t) - diffuse.prior.density(t)) < 2e-3);
}

TEST_CASE("ode coefficients: affine rule solves the Bayes equation") {
  const GaussParams gp{1.0, 1.0, 1.0, 1.0, 0.0};
  const ModelSpec m = benchmark(0.0, 6.0);  // states truncated at +-6 sd
  const LinearEquilibrium eq = equilibrium(gp);
  for (double r : {-1.0, 0.2, 1.5}) {
    const OdeCoefficients co =
        ode_coefficients(r, eq.action(r), eq.alpha, m, 256);
    REQUIRE(co.weight > 0.0);
    CHECK(std::abs(co.B / co.weight) < 1e-4);  // truncation-limited
    CHECK(co.A / co.weight > 0.0);
    CHECK_FALSE(co.stiff);
  }

  // c large: the rationalizing anchor collapses to the report.
  ModelSpec stiff_cost = m;
  stiff_cost.cost = CostSpec::quadratic(1e8);
  CHECK(inverse_anchor(0.7, 0.0, 0.4, 0.5, stiff_cost) ==
        doctest::Approx(0.7).epsilon(1e-8));
}

TEST_CASE("action rule: invariants and violations") {
  std::vector<double> r{0.0, 1.0, 2.0}, a{0.0, 0.5, 1.0}, p{0.5, 0.5, 0.5};
  ActionRule ok(r, a, p);
  ok.require_valid();
  CHECK(ok.rule().slope(1.3) == doctest::Approx(0.5));

  std::vector<double> bad_a{0.0, 0.6, 0.5};
  CHECK_THROWS_AS(ActionRule(r, bad_a, p).require_valid(),
                  RegularityViolation);
  std::vector<double> bad_p{0.5, -0.1, 0.5};
  CHECK_THROWS_AS(ActionRule(r, a, bad_p).require_valid(),
                  RegularityViolation);
  // Slope inconsistent with the increments of a.
  std::vector<double> wild_p{2.0, 2.0, 2.0};
  CHECK_THROWS_AS(ActionRule(r, a, wild_p).require_valid(),
                  RegularityViolation);
}

TEST_CASE("solve_bvp: oracle equivalence on the truncated benchmark") {
  ModelSpec m = benchmark(0.0, 4.0);
  m.message_space = MessageSpace::compact({-6.0, 6.0});
  const BvpSolution sol = solve_bvp(m);
  const GaussParams gp{1.0, 1.0, 1.0, 1.0, 0.0};
  const double alpha = solve_alpha(gp);

  CHECK(sol.telemetry.boundary_residual < 1e-6);
  CHECK_FALSE(sol.telemetry.used_picard);
  sol.rule.require_valid();

  // Central half of the message space: rule within 2e-2 of the closed form,
  // slope within 3 percent.
  for (double r = -3.0; r <= 3.0; r += 0.5) {
    CHECK(std::abs(sol.rule(r) - alpha * r) < 2e-2);
    CHECK(std::abs(sol.rule.slope(r) - alpha) / alpha < 0.03);
  }
  CHECK(sol.telemetry.bayes_residual_max < 1e-5);

  // Pooling masses are small but strictly positive on this geometry.
  const auto [lo_mass, hi_mass] = endpoint_pooling_masses(sol.rule, m);
  CHECK(lo_mass > 0.0);
  CHECK(hi_mass > 0.0);
  CHECK(lo_mass < 0.05);
  CHECK(hi_mass < 0.05);
}

TEST_CASE("solve_bvp: babbling off the uninformative knife edge") {
  ModelSpec m;
  m.prior = PriorSpec::gaussian(0.0, 1.0, 4.0);
  m.payoffs = PayoffSpec::quadratic(0.1);
  m.cost = CostSpec::quadratic(2.0);  // c sigma^2 != sigma_theta^2
  m.anchor = AnchorSpec::affine_gaussian(0.0, 0.0, 1.0);
  m.message_space = MessageSpace::compact({-5.0, 5.0});
  const BvpSolution sol = solve_bvp(m);
  // Near-constant rule: total action variation far below the prior sd.
  const double range =
      sol.rule(sol.rule.domain().hi) - sol.rule(sol.rule.domain().lo);
  CHECK(range >= 0.0);
  CHECK(range < 0.15);
}

TEST_CASE("expanding message intervals: central rule settles") {
  ModelSpec m = benchmark(0.0, 4.0);
  const ExpandingSolution ex = solve_expanding(m, {4.0, 6.0, 8.0});
  CHECK(ex.central_drift < 5e-3);
}

TEST_CASE("cost floor: quadratic closed form and Fubini identity") {
  ModelSpec m;
  m.prior = PriorSpec::uniform({0.0, 1.0});
  m.payoffs = PayoffSpec::quadratic(0.1);
  m.cost = CostSpec::quadratic(1.0);
  m.anchor = AnchorSpec::affine_gaussian(0.0, 1.0, 0.25);
  const CostFloorObjects cf = cost_floor(m);

  for (double t : {0.1, 0.5, 0.9}) {
    CHECK(cf.T(t) == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(cf.Gamma(t) == doctest::Approx(0.1 * t).epsilon(1e-8));
  }
  CHECK(cf.expected_Gamma == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(cf.fubini_residual < 1e-8);

  // Exact alignment: no incentive to separate, zero floor.
  ModelSpec aligned = m;
  aligned.payoffs = PayoffSpec::quadratic(0.0);
  const CostFloorObjects cf0 = cost_floor(aligned);
  CHECK(std::abs(cf0.expected_Gamma) < 1e-12);
  CHECK(std::abs(cf0.T(0.5)) < 1e-12);
}

TEST_CASE("separating rho: analytic solution and cost-floor convergence") {
  ModelSpec m;
  m.prior = PriorSpec::uniform({0.0, 1.0});
  m.payoffs = PayoffSpec::quadratic(0.1);
  m.cost = CostSpec::quadratic(1.0);
  m.anchor = AnchorSpec::affine_gaussian(0.0, 1.0, 0.25);
  const double d = 0.1;

  // With T = d and b0 = theta, the inverse rule solves
  // theta = rho - (d/c)(1 - exp(-c rho / d)).
  for (double c : {1.0, 0.25}) {
    const SampledFunction rho = separating_rho(m, c);
    CHECK(rho.strictly_increasing());
    CHECK(rho(0.0) == doctest::Approx(0.0).epsilon(1e-10));
    for (double t : {0.2, 0.5, 0.8}) {
      const double r = rho(t);
      const double implied = r - d / c * (1.0 - std::exp(-c * r / d));
      CHECK(std::abs(implied - t) < 1e-6);
    }
  }

  // sup |Gamma - Y_c| halves when c falls by 4 (the sqrt(c) rate). The
  // asymptotic regime at c in {1, 1/4, 1/16} needs separation incentives
  // well above the cost scale, hence the d = 5 variant.
  ModelSpec strong = m;
  strong.payoffs = PayoffSpec::quadratic(5.0);
  const CostFloorObjects cf = cost_floor(strong);
  std::vector<double> sups;
  for (double c : {1.0, 0.25, 0.0625}) {
    const SampledFunction yc = separating_cost_profile(strong, c);
    double sup = 0.0;
    for (double t = 0.0; t <= 1.0; t += 0.01) {
      const double gap = cf.Gamma(t) - yc(t);
      CHECK(gap > -1e-9);  // Y_c never exceeds Gamma
      sup = std::max(sup, gap);
    }
    sups.push_back(sup);
  }
  CHECK(sups[1] / sups[0] > 0.45);
  CHECK(sups[1] / sups[0] < 0.62);
  CHECK(sups[2] / sups[1] > 0.45);
  CHECK(sups[2] / sups[1] < 0.62);

  // Very expensive distortion: the report hugs the anchor.
  const SampledFunction rho_big = separating_rho(m, 1e4);
  for (double t : {0.3, 0.7})
    CHECK(std::abs(rho_big(t) - t) < 0.02);
}

TEST_CASE("communication cost: babbling is free, affine matches closed form") {
  const ModelSpec m = benchmark(0.25);
  CHECK(communication_cost(ReceiverRule::constant(0.0), m) ==
        doctest::Approx(0.0).epsilon(1e-12));

  const GaussParams gp{1.0, 1.0, 1.0, 1.0, 0.25};
  const LinearEquilibrium eq = equilibrium(gp);
  const GaussWelfare w = welfare(gp, eq.alpha);
  const ReceiverRule rule = ReceiverRule::affine(eq.alpha,
                                                 eq.action_intercept);
  CHECK(std::abs(communication_cost(rule, m) - w.expected_distortion_cost) <
        1e-4);
}

TEST_CASE("small-cost solutions stay informative") {
  // Strictly increasing b0, shrinking cost: receiver welfare beats babbling
  // by a stable margin (no convergence to babbling as c drops).
  ModelSpec m;
  m.prior = PriorSpec::uniform({0.0, 1.0});
  m.payoffs = PayoffSpec::quadratic(0.1);
  m.anchor = AnchorSpec::affine_gaussian(0.0, 1.0, 0.25);
  const double babbling_WR = -1.0 / 24.0;
  for (double c : {0.5, 0.1, 0.02}) {
    m.cost = CostSpec::quadratic(c);
    // Message window sized to the separating report range at this cost,
    // leaving ~2.5 noise deviations of genuine endpoint pooling.
    const double spread = std::sqrt(2.0 * 0.1 / c);
    m.message_space =
        MessageSpace::compact({-0.625, 1.0 + spread + 0.625});
    const BvpSolution sol = solve_bvp(m);
    const ReceiverRule rule = sol.rule.rule();
    const double K = dominance_bound(m);
    // Receiver welfare by nested quadrature over states and anchors.
    double WR = 0.0;
    const Grid gth = Grid::gauss_legendre(m.theta_support(), 48);
    for (std::size_t i = 0; i < gth.size(); ++i) {
      const double th = gth.nodes[i];
      const double b0 = m.anchor.b0(th);
      const Grid gb = Grid::gauss_legendre({b0 - 2.0, b0 + 2.0}, 48);
      double inner = 0.0;
      for (std::size_t j = 0; j < gb.size(); ++j) {
        const double b = gb.nodes[j];
        const double r = best_report_foc(rule, m, th, b, K);
        inner += m.payoffs.receiver().value(rule(r), th) *
                 m.anchor.density(b, th) * gb.weights[j];
      }
      WR += m.prior.density(th) * inner * gth.weights[i];
    }
    CHECK(WR > babbling_WR + 0.01);
  }
}
