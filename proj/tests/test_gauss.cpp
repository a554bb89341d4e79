#include <doctest.h>

#include <cmath>

#include "anchored/gauss.hpp"
#include "oracles.hpp"

using namespace anchored;

TEST_CASE("solve_alpha: golden-ratio point and limits") {
  // (1,1,1,1): the root equation collapses to alpha^2 + alpha - 1 = 0.
  const GaussParams p{1.0, 1.0, 1.0, 1.0, 0.0};
  const double alpha = solve_alpha(p);
  CHECK(std::abs(alpha - oracles::quadratic_formula_root()) < 1e-12);

  // alpha strictly decreasing in c, down to the anchor-regression slope
  // beta st^2 / (sigma^2 + beta^2 st^2) in the limit.
  double prev = alpha;
  for (double c : {10.0, 1e3, 1e6}) {
    GaussParams q = p;
    q.c = c;
    const double a = solve_alpha(q);
    CHECK(a < prev);
    prev = a;
  }
  CHECK(prev == doctest::Approx(0.5).epsilon(1e-3));

  // sigma -> 0 with beta = 1: alpha -> 1 (posterior variance -> 0).
  GaussParams s = p;
  s.sigma = 1e-9;
  CHECK(solve_alpha(s) == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(solve_alpha({1.0, 0.0, 1.0, 1.0, 0.0}), InvalidBranch);
}

TEST_CASE("equilibrium identity on 1000 random draws") {
  RngStream rng(99, 0);
  for (int i = 0; i < 1000; ++i) {
    auto draw = [&] { return std::pow(10.0, rng.uniform(-1.0, 1.0)); };
    GaussParams p;
    p.sigma_theta = draw();
    p.beta = draw();
    p.sigma = draw();
    p.c = draw();
    const double alpha = solve_alpha(p);
    CHECK(alpha > 0.0);
    CHECK(alpha < 1.0 / p.beta);
    const double scale = p.sigma_theta * p.sigma_theta * (1.0 + p.c);
    CHECK(std::abs(alpha_identity_residual(p, alpha)) <= 1e-9 * scale);
  }
}

TEST_CASE("equilibrium: coefficients at the benchmark point") {
  const GaussParams p{1.0, 1.0, 1.0, 1.0, 0.0};
  const LinearEquilibrium eq = equilibrium(p);
  CHECK(eq.alpha == doctest::Approx(0.6180339887).epsilon(1e-9));
  CHECK(eq.action_intercept == doctest::Approx(0.0));
  CHECK(eq.report_theta_coef == doctest::Approx(1.1708203932).epsilon(1e-9));
  CHECK(eq.report_noise_coef ==
        doctest::Approx(1.0 / (1.0 + eq.alpha * eq.alpha)).epsilon(1e-12));

  // a(E[r]) equals the prior mean regardless of d: bias is undone.
  for (double d : {0.0, 0.4, 2.0}) {
    GaussParams q = p;
    q.d = d;
    const LinearEquilibrium e2 = equilibrium(q);
    const double mean_r = e2.report_const;  // E[theta] = E[x] = 0
    CHECK(e2.action(mean_r) == doctest::Approx(0.0).epsilon(1e-12));
  }

  // c -> infinity: the report converges to the anchor.
  GaussParams big = p;
  big.c = 1e9;
  const LinearEquilibrium e3 = equilibrium(big);
  CHECK(e3.report_noise_coef == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(e3.report_theta_coef == doctest::Approx(p.beta).epsilon(1e-4));
}

TEST_CASE("posterior variance: value and limits") {
  const GaussParams p{1.0, 1.0, 1.0, 1.0, 0.0};
  const double alpha = solve_alpha(p);
  CHECK(posterior_variance(p, alpha) ==
        doctest::Approx(0.2763932023).epsilon(1e-9));

  GaussParams small_c = p;
  small_c.c = 1e-8;
  CHECK(posterior_variance(small_c, solve_alpha(small_c)) < 1e-7);

  GaussParams no_noise = p;
  no_noise.sigma = 1e-12;
  CHECK(posterior_variance(no_noise, solve_alpha(no_noise)) < 1e-9);
}

TEST_CASE("welfare: two closed forms agree; benchmark values") {
  RngStream rng(7, 1);
  for (int i = 0; i < 200; ++i) {
    GaussParams p;
    p.sigma_theta = std::pow(10.0, rng.uniform(-1.0, 1.0));
    p.beta = std::pow(10.0, rng.uniform(-1.0, 1.0));
    p.sigma = std::pow(10.0, rng.uniform(-1.0, 1.0));
    p.c = std::pow(10.0, rng.uniform(-1.0, 1.0));
    p.d = rng.uniform(0.0, 2.0);
    const double alpha = solve_alpha(p);
    const GaussWelfare w = welfare(p, alpha);
    const double st2 = p.sigma_theta * p.sigma_theta;
    const double decomposition = -0.5 * (1.0 - p.beta * alpha) * st2 -
                                 0.5 * p.d * p.d -
                                 p.d * p.d * alpha * alpha / (2.0 * p.c);
    CHECK(std::abs(w.W_S - decomposition) <= 1e-10 * (1.0 + std::abs(w.W_S)));
    CHECK(w.W_R == doctest::Approx(-0.5 * w.posterior_var));
  }

  const GaussParams p{1.0, 1.0, 1.0, 1.0, 0.25};
  const double alpha = solve_alpha(p);
  const GaussWelfare w = welfare(p, alpha);
  CHECK(w.W_R == doctest::Approx(-0.1381966011).epsilon(1e-9));
  CHECK(w.mean_inflation == doctest::Approx(0.1545084972).epsilon(1e-9));

  // d = 0: distortion cost reduces to alpha^2 Var / (2c).
  const GaussWelfare w0 = welfare({1.0, 1.0, 1.0, 1.0, 0.0}, alpha);
  CHECK(w0.expected_distortion_cost ==
        doctest::Approx(alpha * alpha * w0.posterior_var / 2.0));
}

TEST_CASE("misalignment thresholds") {
  const GaussParams p{1.0, 1.0, 1.0, 1.0, 0.0};
  auto [d_low, d_high] = misalignment_thresholds(p);
  CHECK(d_low == doctest::Approx(0.4538841337).epsilon(1e-6));
  CHECK(d_high == doctest::Approx(0.8994536472).epsilon(1e-6));
  CHECK(d_low < d_high);

  // Ratio identity from the threshold formulas.
  const double alpha = solve_alpha(p);
  const double ratio = 2.0 * alpha * (1.0 - p.beta * alpha) /
                       (2.0 * alpha + p.beta * (p.c - alpha * alpha));
  CHECK(d_low * d_low / (d_high * d_high) == doctest::Approx(ratio));
  CHECK(ratio < 1.0);

  // beta -> 0: both thresholds vanish.
  GaussParams tiny = p;
  tiny.beta = 1e-8;
  auto [lo2, hi2] = misalignment_thresholds(tiny);
  CHECK(lo2 < 1e-3);
  CHECK(hi2 < 1e-3);
}

TEST_CASE("threshold d_low matches the sign flip of dW_S/dc") {
  const GaussParams base{1.0, 1.0, 1.0, 1.0, 0.0};
  auto [d_low, d_high] = misalignment_thresholds(base);
  auto ws_of_c = [&](double c, double d) {
    GaussParams p = base;
    p.c = c;
    p.d = d;
    return welfare(p, solve_alpha(p)).W_S;
  };
  const double h = 1e-5;
  for (double frac : {0.5, 0.9}) {
    const double d = frac * d_low;
    CHECK(oracles::central_diff([&](double c) { return ws_of_c(c, d); }, 1.0,
                                h) < 0.0);
  }
  for (double d : {0.5 * (d_low + d_high), 1.2 * d_high}) {
    CHECK(oracles::central_diff([&](double c) { return ws_of_c(c, d); }, 1.0,
                                h) > 0.0);
  }
}

TEST_CASE("alpha, variance, W_R independent of d") {
  const GaussParams base{1.3, 0.8, 0.6, 2.0, 0.0};
  const double a0 = solve_alpha(base);
  for (double d : {0.1, 1.0, 7.0}) {
    GaussParams p = base;
    p.d = d;
    CHECK(solve_alpha(p) == a0);  // exact: d does not enter the root
    CHECK(posterior_variance(p, a0) == posterior_variance(base, a0));
  }
}

TEST_CASE("uninformative family: babbling, frontier optimum, divergence") {
  auto [eq0, w0] = uninformative_family(1.0, 1.0, 0.25, 0.0);
  CHECK(w0.posterior_var == doctest::Approx(1.0));
  CHECK(w0.W_S == doctest::Approx(-0.5 - 0.03125));
  CHECK(eq0.alpha == 0.0);

  const double root3 = oracles::sqrt_newton(3.0);
  auto [eq1, w1] = uninformative_family(1.0, 1.0, 0.25, root3);
  CHECK(w1.posterior_var == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w1.W_R == doctest::Approx(-0.125).epsilon(1e-12));

  // alpha -> infinity: receiver toward full information, sender diverges.
  auto [eq2, w2] = uninformative_family(1.0, 1.0, 0.25, 1e4);
  CHECK(w2.posterior_var < 1e-7);
  CHECK(w2.W_R > -1e-7);
  CHECK(w2.W_S < -1e5);

  // Sender never beats babbling within the informative family.
  for (double a : {0.3, 1.0, 2.0, 5.0}) {
    auto [eq, w] = uninformative_family(1.0, 1.0, 0.25, a);
    CHECK(w.W_S <= -0.5 - 0.03125);
  }
}

TEST_CASE("pareto frontier: argmax at sqrt(3), W_R increasing") {
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(4.0 * i / 400.0);
  const ParetoFrontier f = pareto_frontier(1.0, 1.0, 0.25, grid);
  const double root3 = oracles::sqrt_newton(3.0);
  CHECK(std::abs(f.argmax_alpha_continuous - root3) < 1e-12);
  CHECK(std::abs(f.argmax_alpha_grid - root3) < 0.011);
  for (std::size_t i = 1; i < f.points.size(); ++i)
    CHECK(f.points[i].W_R > f.points[i - 1].W_R);

  // d -> 0: the optimum runs off to full revelation.
  const ParetoFrontier g = pareto_frontier(1.0, 1.0, 1e-6, grid);
  CHECK(g.argmax_alpha_continuous > 100.0);
}

TEST_CASE("comparative statics signs on a small lattice") {
  const double h = 1e-5;
  for (double st : {0.7, 1.4}) {
    for (double beta : {0.5, 1.5}) {
      for (double sig : {0.6, 1.2}) {
        for (double c : {0.8, 2.0}) {
          const GaussParams p{st, beta, sig, c, 0.0};
          auto alpha_of = [&](double st2, double b2, double s2, double c2) {
            return solve_alpha({st2, b2, s2, c2, 0.0});
          };
          CHECK(oracles::central_diff(
                    [&](double x) { return alpha_of(st, beta, sig, x); }, c,
                    h) < 0.0);
          CHECK(oracles::central_diff(
                    [&](double x) { return alpha_of(st, beta, x, c); }, sig,
                    h) < 0.0);
          CHECK(oracles::central_diff(
                    [&](double x) { return x * alpha_of(st, x, sig, c); },
                    beta, h) > 0.0);
          auto var_of = [&](double s2, double c2) {
            GaussParams q{st, beta, s2, c2, 0.0};
            return posterior_variance(q, solve_alpha(q));
          };
          CHECK(oracles::central_diff(
                    [&](double x) { return var_of(sig, x); }, c, h) > 0.0);
          CHECK(oracles::central_diff(
                    [&](double x) { return var_of(x, c); }, sig, h) > 0.0);
        }
      }
    }
  }
}
