#include <doctest.h>

#include <cmath>

#include "anchored/gauss.hpp"
#include "anchored/io.hpp"
#include "anchored/model.hpp"
#include "oracles.hpp"

using namespace anchored;

namespace {

ModelSpec default_gauss() {
  return gaussian_quadratic_model({1.0, 1.0, 1.0, 1.0, 0.25});
}

}  // namespace

TEST_CASE("priors: mass, score, conditional means") {
  const PriorSpec u = PriorSpec::uniform({0.0, 1.0});
  CHECK(u.density(0.5) == doctest::Approx(1.0));
  CHECK(u.cdf(0.25) == doctest::Approx(0.25));
  CHECK(u.log_density_slope(0.3) == 0.0);
  CHECK(u.conditional_mean({0.2, 0.6}) == doctest::Approx(0.4));

  const PriorSpec g = PriorSpec::gaussian(0.0, 1.0);
  CHECK(quadrature([&](double t) { return g.density(t); }, g.support(), 512) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(g.log_density_slope(1.3) == doctest::Approx(-1.3));
  // Truncated-normal mean vs direct quadrature.
  const double m1 = g.conditional_mean({-0.5, 1.5});
  const double num = quadrature([&](double t) { return t * g.density(t); },
                                {-0.5, 1.5}, 128);
  const double den = quadrature([&](double t) { return g.density(t); },
                                {-0.5, 1.5}, 128);
  CHECK(m1 == doctest::Approx(num / den).epsilon(1e-9));

  const PriorSpec cell = g.truncate({0.0, 2.0});
  CHECK(quadrature([&](double t) { return cell.density(t); }, {0.0, 2.0},
                   256) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ideal actions: quadratic family and quartic receiver") {
  const ModelSpec m = default_gauss();
  for (double th : {-2.0, 0.0, 1.3}) {
    CHECK(ideal_action_receiver(m, th) == doctest::Approx(th).epsilon(1e-10));
    CHECK(ideal_action_sender(m, th) ==
          doctest::Approx(th + 0.25).epsilon(1e-10));
    CHECK(ideal_action_receiver_slope(m, th) == doctest::Approx(1.0));
  }

  // d = 0: exact alignment.
  ModelSpec aligned = m;
  aligned.payoffs = PayoffSpec::quadratic(0.0);
  const IdealActions ia = ideal_actions(aligned, 33);
  for (std::size_t i = 0; i < ia.receiver.size(); ++i)
    CHECK(ia.receiver.values()[i] ==
          doctest::Approx(ia.sender.values()[i]).epsilon(1e-10));

  // General quartic receiver payoff: symmetric minimum at theta.
  PayoffSide quartic;
  quartic.value = [](double a, double th) {
    const double e = a - th;
    return -e * e * e * e;
  };
  ModelSpec q;
  q.prior = PriorSpec::uniform({0.0, 1.0});
  q.payoffs = PayoffSpec::general(quartic, quartic);
  CHECK(ideal_action_receiver(q, 0.3) == doctest::Approx(0.3).epsilon(1e-5));
}

TEST_CASE("ideal actions increase in the state") {
  const IdealActions ia = ideal_actions(default_gauss(), 65);
  CHECK(ia.receiver.strictly_increasing());
  CHECK(ia.sender.strictly_increasing());
}

TEST_CASE("cost shapes: psi inverts phi' on [-10, 10]") {
  for (const CostSpec& c :
       {CostSpec::quadratic(1.0), CostSpec::quadratic(2.5),
        CostSpec::power(1.0, 4.0), CostSpec::power(0.5, 3.0)}) {
    for (int i = 0; i <= 40; ++i) {
      const double u = -10.0 + 0.5 * i;
      CHECK(std::abs(c.psi(c.phi_prime(u)) - u) <= 1e-10 * (1.0 + std::abs(u)));
    }
  }
  // psi' is the reciprocal curvature at the preimage.
  const CostSpec p4 = CostSpec::power(1.0, 4.0);
  const double y = p4.phi_prime(1.7);
  CHECK(p4.psi_prime(y) == doctest::Approx(1.0 / p4.phi_second(1.7)));
}

TEST_CASE("anchor: affine b0 slope equals beta, gaussian density") {
  const AnchorSpec a = AnchorSpec::affine_gaussian(0.5, 2.0, 0.7);
  CHECK(a.b0(1.0) == doctest::Approx(2.5));
  CHECK(a.b0_prime(-3.0) == 2.0);
  CHECK(a.density(0.5, 0.0) ==
        doctest::Approx(normal_pdf(0.0) / 0.7).epsilon(1e-12));
  CHECK(a.noise_score(1.2) == doctest::Approx(-1.2));
}

TEST_CASE("validate: benchmark passes, quartic cost fails curvature") {
  const ValidationReport ok = validate(default_gauss());
  CHECK(ok.all_pass());

  ModelSpec bad = default_gauss();
  bad.cost = CostSpec::power(1.0, 4.0);  // phi''(0) = 0
  const ValidationReport rep = validate(bad);
  CHECK_FALSE(rep.all_pass());
  const CheckResult* cur = rep.find("cost_curvature");
  REQUIRE(cur != nullptr);
  CHECK_FALSE(cur->pass);

  // Tabulated prior with an interior zero fails positivity.
  std::vector<double> xs{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> fs{1.0, 1.0, 0.0, 1.0, 1.0};
  ModelSpec zeroed = default_gauss();
  zeroed.prior = PriorSpec::tabulated(SampledFunction(xs, fs));
  const ValidationReport rep2 = validate(zeroed);
  const CheckResult* pos = rep2.find("prior_positive");
  REQUIRE(pos != nullptr);
  CHECK_FALSE(pos->pass);
}

TEST_CASE("model json round trip and overrides") {
  const ModelSpec m = default_gauss();
  const std::string text = model_to_json_text(m);
  const ModelSpec back = model_from_json_text(text);
  CHECK(back.prior.gaussian_sd() == doctest::Approx(1.0));
  CHECK(back.payoffs.bias() == doctest::Approx(0.25));
  CHECK(back.cost.c() == doctest::Approx(1.0));
  CHECK(back.anchor.beta() == doctest::Approx(1.0));
  CHECK(back.message_space.whole_line);

  const ModelSpec tweaked = model_from_json_text_with_overrides(
      text, {{"cost.c", "2.0"}, {"anchor.sigma", "0.5"}});
  CHECK(tweaked.cost.c() == doctest::Approx(2.0));
  CHECK(tweaked.anchor.sigma() == doctest::Approx(0.5));
}

TEST_CASE("truncate_states renormalizes the cell prior") {
  const ModelSpec m = default_gauss();
  const ModelSpec cell = m.truncate_states({-1.0, 0.5});
  CHECK(quadrature([&](double t) { return cell.prior.density(t); },
                   {-1.0, 0.5}, 256) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cell.theta_support().lo == doctest::Approx(-1.0));
  CHECK(cell.theta_support().hi == doctest::Approx(0.5));
}
