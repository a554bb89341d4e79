#include <doctest.h>

#include <cmath>

#include "anchored/cheap_talk.hpp"
#include "anchored/gauss.hpp"
#include "oracles.hpp"

using namespace anchored;

namespace {

ModelSpec uniform_quadratic(double d) {
  ModelSpec m;
  m.prior = PriorSpec::uniform({0.0, 1.0});
  m.payoffs = PayoffSpec::quadratic(d);
  m.cost = CostSpec::quadratic(1.0);
  m.anchor = AnchorSpec::affine_gaussian(0.0, 1.0, 1.0);
  return m;
}

ModelSpec gaussian_quadratic(double d, double trunc = 8.0) {
  return gaussian_quadratic_model({1.0, 1.0, 1.0, 1.0, d}, trunc);
}

double indifference_residual(const ModelSpec& m, const Partition& p) {
  double worst = 0.0;
  for (int j = 1; j < p.n_cells; ++j) {
    const double t = p.cutoffs[j];
    const double target = t + m.payoffs.bias() * m.payoffs.delta_hat(t);
    const double left = cell_action(m, p.cell(j - 1));
    const double right = cell_action(m, p.cell(j));
    worst = std::max(worst, std::abs(0.5 * (left + right) - target));
  }
  return worst;
}

}  // namespace

TEST_CASE("uniform-quadratic closed form: cutoffs and widths") {
  const Partition p = cs_partition_uniform_quadratic(0.05, 3);
  CHECK(p.cutoffs[0] == doctest::Approx(0.0));
  CHECK(p.cutoffs[1] == doctest::Approx(0.13333333333).epsilon(1e-9));
  CHECK(p.cutoffs[2] == doctest::Approx(0.46666666667).epsilon(1e-9));
  CHECK(p.cutoffs[3] == doctest::Approx(1.0));
  // Adjacent-cell indifference within 1e-12.
  CHECK(indifference_residual(uniform_quadratic(0.05), p) <= 1e-12);
  // Widths grow arithmetically by 4d.
  for (int j = 2; j <= 3; ++j) {
    const double w_prev = p.cutoffs[j - 1] - p.cutoffs[j - 2];
    const double w = p.cutoffs[j] - p.cutoffs[j - 1];
    CHECK(w - w_prev == doctest::Approx(0.2).epsilon(1e-9));
  }

  const Partition bab = cs_partition_uniform_quadratic(0.05, 1);
  CHECK(bab.cutoffs == std::vector<double>{0.0, 1.0});

  CHECK_THROWS_AS(cs_partition_uniform_quadratic(0.05, 4),
                  InfeasiblePartition);
}

TEST_CASE("general shooting reproduces the closed form") {
  for (double d : {0.02, 0.05, 0.11}) {
    for (int N = 2; N <= 4; ++N) {
      if (!cs_uniform_quadratic_feasible(d, N)) continue;
      const Partition exact = cs_partition_uniform_quadratic(d, N);
      const Partition got =
          solve_partition_general(uniform_quadratic(d), N);
      REQUIRE(got.n_cells == N);
      for (int j = 0; j <= N; ++j)
        CHECK(std::abs(got.cutoffs[j] - exact.cutoffs[j]) < 1e-8);
    }
  }
}

TEST_CASE("max feasible N matches the closed-form bound") {
  for (double d : {0.2, 0.05, 0.02, 0.008}) {
    int closed_form = 1;
    while (cs_uniform_quadratic_feasible(d, closed_form + 1)) ++closed_form;
    CHECK(max_feasible_cells(uniform_quadratic(d)) == closed_form);
  }
}

TEST_CASE("receiver welfare weakly increases with N") {
  const ModelSpec m = uniform_quadratic(0.01);
  const int n_max = max_feasible_cells(m);
  double prev = -1e300;
  for (int N = 1; N <= n_max; ++N) {
    const Partition p = solve_partition_general(m, N);
    const PartitionWelfare w = partition_welfare(m, p);
    CHECK(w.W_R >= prev - 1e-12);
    prev = w.W_R;
  }
}

TEST_CASE("boundary indifference holds exactly for solved partitions") {
  const ModelSpec m = uniform_quadratic(0.03);
  const Partition p = solve_partition_general(m, 3);
  CHECK(indifference_residual(m, p) <= 1e-8);
  const ModelSpec g = gaussian_quadratic(0.25);
  const Partition pg = solve_partition_general(g, 3);
  CHECK(indifference_residual(g, pg) <= 1e-8);
}

TEST_CASE("two-label gaussian threshold") {
  const double t = two_label_threshold_gaussian(0.5);
  CHECK(std::abs(t - (-1.28)) < 0.01);
  // Residual at the root.
  const auto [pdf, cdf] = normal_pdf_cdf(t);
  const double mid = 0.5 * (-pdf / cdf + pdf / (1.0 - cdf));
  CHECK(std::abs(t + 0.5 - mid) < 1e-10);
  // Small d: symmetric split.
  CHECK(std::abs(two_label_threshold_gaussian(1e-9)) < 1e-6);
  // The general shooting solver lands on the same cutoff.
  const Partition p2 = solve_partition_general(gaussian_quadratic(0.5), 2);
  CHECK(p2.cutoffs[1] == doctest::Approx(t).epsilon(1e-5));
}

TEST_CASE("partition welfare: babbling and informative") {
  const ModelSpec m = uniform_quadratic(0.05);
  const PartitionWelfare bab =
      partition_welfare(m, solve_partition_general(m, 1));
  CHECK(bab.W_R == doctest::Approx(-1.0 / 24.0).epsilon(1e-10));
  CHECK(bab.cells.size() == 1);
  CHECK(bab.cells[0].mass == doctest::Approx(1.0));

  const PartitionWelfare info =
      partition_welfare(m, solve_partition_general(m, 3));
  CHECK(info.W_R > bab.W_R);
  double mass = 0.0;
  for (const auto& c : info.cells) mass += c.mass;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("small-d receiver loss approaches d/6") {
  for (double d : {0.02, 0.005}) {
    const ModelSpec m = uniform_quadratic(d);
    const int N = max_feasible_cells(m);
    const PartitionWelfare w =
        partition_welfare(m, solve_partition_general(m, N));
    CHECK(std::abs(-w.W_R - d / 6.0) < 0.03 * d / 6.0);
  }
}

TEST_CASE("y profile: uniform closed form and gaussian cross-check") {
  const YProfile yu = y_profile(uniform_quadratic(0.01));
  for (double t : {0.1, 0.5, 0.9})
    CHECK(yu.Y(t) == doctest::Approx(8.0 * t).epsilon(1e-8));
  CHECK(yu.ode_vs_integral_gap < 1e-8);
  CHECK(yu.Y(0.0) == doctest::Approx(0.0));

  // Zero misalignment: Y vanishes identically.
  ModelSpec zero = uniform_quadratic(0.01);
  zero.payoffs = PayoffSpec::quadratic_delta(
      0.01, [](double) { return 0.0; }, [](double) { return 0.0; });
  const YProfile y0 = y_profile(zero);
  CHECK(std::abs(y0.Y(0.7)) < 1e-12);

  // Leading cheap-talk loss: (d/24) * integral of g * kappa * Y = d/6.
  const double lead = quadrature([&](double t) { return yu.Y(t); },
                                 {0.0, 1.0}, 64) / 24.0;
  CHECK(lead == doctest::Approx(1.0 / 6.0).epsilon(1e-10));

  const YProfile yg = y_profile(gaussian_quadratic(0.01));
  CHECK(yg.ode_vs_integral_gap < 1e-7);
  CHECK(yg.Y(yg.Y.nodes().front()) == doctest::Approx(0.0));
}

TEST_CASE("squared widths converge to d*Y along shrinking d") {
  const auto rows_u = width_convergence_check(
      uniform_quadratic(0.01), {0.02, 0.005, 0.00125});
  REQUIRE(rows_u.size() == 3);
  CHECK(rows_u[0].max_ratio > rows_u[1].max_ratio);
  CHECK(rows_u[1].max_ratio > rows_u[2].max_ratio);

  const auto rows_g = width_convergence_check(
      gaussian_quadratic(0.02, 4.0), {0.08, 0.02, 0.005},
      Interval{-3.2, 0.0});
  REQUIRE(rows_g.size() == 3);
  CHECK(rows_g[0].max_ratio > rows_g[1].max_ratio);
  CHECK(rows_g[1].max_ratio > rows_g[2].max_ratio);
}
