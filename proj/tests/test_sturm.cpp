#include <doctest.h>

#include <cmath>

#include "anchored/sturm.hpp"
#include "oracles.hpp"

using namespace anchored;

TEST_CASE("eigen_first: Ornstein-Uhlenbeck spectrum") {
  // q = standard normal on [-8, 8]: lambda_1 = 1, lambda_2 = 2.
  const SLProblem p = SLProblem::from_density(
      [](double x) { return normal_pdf(x); }, {-8.0, 8.0}, 2001);
  const EigenResult e = eigen_first(p);
  CHECK(std::abs(e.lambda1 - 1.0) < 1e-3);
  CHECK(std::abs(e.lambda2 - 2.0) < 5e-3);
  CHECK(e.lambda2 - e.lambda1 > 0.5);  // simple, well separated
  CHECK(e.v1.strictly_increasing());
}

TEST_CASE("eigen_first: Neumann Laplacian on [0, pi]") {
  const SLProblem p = SLProblem::from_density(
      [](double) { return 1.0 / M_PI; }, {0.0, M_PI}, 2001);
  const EigenResult e = eigen_first(p);
  CHECK(std::abs(e.lambda1 - 1.0) < 1e-3);
  // v1 proportional to cos(x); compare after matching sign and scale.
  const auto& xs = e.v1.nodes();
  const double scale = e.v1.values()[0] / std::cos(xs[0]);
  for (std::size_t i = 0; i < xs.size(); i += 100)
    CHECK(std::abs(e.v1.values()[i] - scale * std::cos(xs[i])) <
          1e-3 * std::abs(scale));
}

TEST_CASE("eigen_first: grid halving converges at second order") {
  std::vector<double> errs;
  for (int n : {251, 501, 1001, 2001}) {
    const SLProblem p = SLProblem::from_density(
        [](double x) { return normal_pdf(x); }, {-8.0, 8.0}, n);
    errs.push_back(std::abs(eigen_first(p).lambda1 - 1.0));
  }
  // Halving the step shrinks the eigenvalue error by at least the scheme's
  // second-order guarantee (the symmetric stencil superconverges here).
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    CHECK(order > 1.8);
  }
}

namespace {

ModelSpec uninformative_model(double sigma_theta, double sigma, double d) {
  ModelSpec m;
  m.prior = PriorSpec::gaussian(0.0, sigma_theta);
  m.payoffs = PayoffSpec::quadratic(d);
  m.cost = CostSpec::quadratic(1.0);
  m.anchor = AnchorSpec::affine_gaussian(0.0, 0.0, sigma);
  return m;
}

}  // namespace

TEST_CASE("babbling action") {
  CHECK(std::abs(babbling_action(uninformative_model(1.0, 1.0, 0.3))) < 1e-9);

  ModelSpec quartic;
  quartic.prior = PriorSpec::uniform({0.0, 1.0});
  PayoffSide side;
  side.value = [](double a, double th) {
    const double e = a - th;
    return -e * e * e * e;
  };
  quartic.payoffs = PayoffSpec::general(side, side);
  CHECK(babbling_action(quartic) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("critical cost matches the knife edge for three sigmas") {
  for (double sigma : {0.5, 1.0, 2.0}) {
    const double st = 1.3;
    const Calibration cal =
        critical_cost(uninformative_model(st, sigma, 0.4));
    CHECK(std::abs(cal.A_cov - st * st) < 1e-8);
    CHECK(std::abs(cal.H_curv - 1.0) < 1e-10);
    const double knife = st * st / (sigma * sigma);
    CHECK(std::abs(cal.c_star - knife) / knife < 0.01);
    CHECK(cal.gap > 0.0);
    CHECK(cal.v1.strictly_increasing());
  }
}

TEST_CASE("alignment violation when the sender ignores the state") {
  ModelSpec m = uninformative_model(1.0, 1.0, 0.0);
  PayoffSide recv;
  recv.value = [](double a, double th) {
    return -0.5 * (a - th) * (a - th);
  };
  PayoffSide send;
  send.value = [](double a, double) { return -0.5 * (a - 0.3) * (a - 0.3); };
  m.payoffs = PayoffSpec::general(recv, send);
  CHECK_THROWS_AS(critical_cost(m), AlignmentViolation);
}

TEST_CASE("bifurcation kernel: dimension one exactly at c*") {
  const ModelSpec m = uninformative_model(1.0, 1.0, 0.4);
  const Calibration cal = critical_cost(m, 801);
  const KernelProbe at = bifurcation_kernel(m, cal.c_star, 801);
  CHECK(at.dimension == 1);
  for (double f : {0.9, 1.1}) {
    const KernelProbe off = bifurcation_kernel(m, f * cal.c_star, 801);
    CHECK(off.dimension == 0);
    CHECK(at.smallest_magnitude < 1e-3 * off.smallest_magnitude);
  }
}

TEST_CASE("small sigma sweep: variance falls, costs accounted") {
  const auto rows = small_sigma_sweep(1.0, 0.25, {0.8, 0.4, 0.2, 0.1});
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].posterior_var < rows[i - 1].posterior_var);
    CHECK(rows[i].c > rows[i - 1].c);  // knife edge: c = st^2 / sigma^2
  }
  // alpha fixed, variance to zero as alpha grows without bound.
  const auto big = small_sigma_sweep(1.0, 0.25, {1.0}, 1e4);
  CHECK(big[0].posterior_var < 1e-7);

  // d = 0: no bias component; reporting cost pays for the transmitted
  // variance exactly.
  const auto zero = small_sigma_sweep(1.0, 0.0, {0.8, 0.4, 0.2});
  for (const auto& r : zero) {
    CHECK(r.bias_cost_part == 0.0);
    CHECK(r.reporting_cost ==
          doctest::Approx((1.0 - r.posterior_var) / 2.0).epsilon(1e-12));
  }
}
