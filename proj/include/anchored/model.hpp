#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anchored/numerics.hpp"

namespace anchored {

// Prior over the state. Gaussian supports are truncated (default +-8 sd) so
// every integral runs over a compact interval; the truncated tail mass is
// below 1e-15 and is folded into the normalizer.
class PriorSpec {
 public:
  enum class Kind { Uniform, Gaussian, Tabulated };

  static PriorSpec uniform(const Interval& support);
  static PriorSpec gaussian(double mean, double sd, double trunc_sds = 8.0);
  static PriorSpec tabulated(SampledFunction density);

  Kind kind() const { return kind_; }
  const Interval& support() const { return support_; }
  double density(double theta) const;
  double log_density_slope(double theta) const;  // score f'/f
  double cdf(double theta) const;
  double mean() const;
  double gaussian_mean() const { return mean_; }
  double gaussian_sd() const { return sd_; }
  double mass(const Interval& cell) const;
  double conditional_mean(const Interval& cell) const;

  // Restriction to a cell, renormalized; used by hybrid continuations.
  PriorSpec truncate(const Interval& cell) const;

 private:
  PriorSpec() = default;
  void normalize();

  Kind kind_{Kind::Uniform};
  Interval support_{0.0, 1.0};
  double mean_{0.0}, sd_{1.0};
  SampledFunction table_;
  double norm_{1.0};  // density = raw / norm_ on support
};

// One side's action payoff with the first/second partials the solvers need.
struct PayoffSide {
  std::function<double(double a, double theta)> value;
  std::function<double(double a, double theta)> d_a;    // U_1
  std::function<double(double a, double theta)> d_aa;   // U_11
  std::function<double(double a, double theta)> d_ath;  // U_12
};

class PayoffSpec {
 public:
  // U^R = -kappa_R (a-theta)^2/2, U^S = -kappa_S (a-theta-d*delta_hat)^2/2.
  static PayoffSpec quadratic(double d, double kappa_R = 1.0,
                              double kappa_S = 1.0);
  static PayoffSpec quadratic_delta(double d, Fn1 delta_hat,
                                    Fn1 delta_hat_prime, double kappa_R = 1.0,
                                    double kappa_S = 1.0);
  // Analytic partials optional: missing ones fall back to central
  // differences with step 1e-6*(1+|a|).
  static PayoffSpec general(PayoffSide receiver, PayoffSide sender);

  const PayoffSide& receiver() const { return receiver_; }
  const PayoffSide& sender() const { return sender_; }
  bool quadratic_family() const { return quadratic_; }
  double bias() const { return d_; }
  double delta_hat(double theta) const { return delta_hat_(theta); }
  double delta_hat_prime(double theta) const { return delta_hat_prime_(theta); }
  double kappa_R() const { return kappa_R_; }
  double kappa_S() const { return kappa_S_; }

  // Re-centered copy used by hybrid sweeps that vary the bias.
  PayoffSpec with_bias(double d) const;

 private:
  PayoffSide receiver_, sender_;
  bool quadratic_{false};
  double d_{0.0}, kappa_R_{1.0}, kappa_S_{1.0};
  Fn1 delta_hat_ = [](double) { return 1.0; };
  Fn1 delta_hat_prime_ = [](double) { return 0.0; };
};

// Reporting cost D(r,b) = c*phi(r-b).
class CostSpec {
 public:
  enum class Shape { Quadratic, Power, General };

  static CostSpec quadratic(double c);
  static CostSpec power(double c, double p);  // phi = |u|^p / p, p > 2
  static CostSpec general(double c, Fn1 phi, Fn1 phi_prime, Fn1 phi_second,
                          Fn1 psi);

  Shape shape() const { return shape_; }
  double c() const { return c_; }
  double phi(double u) const;
  double phi_prime(double u) const;
  double phi_second(double u) const;
  double psi(double y) const;        // (phi')^{-1}
  double psi_prime(double y) const;  // 1 / phi''(psi(y))
  double phi_second_at_zero() const { return phi_second(0.0); }

  CostSpec with_scale(double c) const;

 private:
  Shape shape_{Shape::Quadratic};
  double c_{1.0}, p_{4.0};
  Fn1 phi_, phi_prime_, phi_second_, psi_;
};

// Additive anchor b = b0(theta) + sigma * x.
class AnchorSpec {
 public:
  static AnchorSpec affine_gaussian(double beta0, double beta, double sigma);
  static AnchorSpec tabulated_b0(SampledFunction b0, double sigma);
  static AnchorSpec affine_noise(double beta0, double beta, double sigma,
                                 SampledFunction noise_density);

  double b0(double theta) const;
  double b0_prime(double theta) const;
  double beta() const { return beta_; }
  double beta0() const { return beta0_; }
  double sigma() const { return sigma_; }
  bool gaussian_noise() const { return gaussian_noise_; }

  double noise_pdf(double x) const;
  double noise_cdf(double x) const;
  double noise_score(double x) const;  // h'/h
  // Conditional anchor density q(b | theta).
  double density(double b, double theta) const;

  AnchorSpec with_sigma(double sigma) const;

 private:
  bool affine_{true};
  double beta0_{0.0}, beta_{1.0}, sigma_{1.0};
  SampledFunction b0_table_;
  bool gaussian_noise_{true};
  SampledFunction noise_table_;
  SampledFunction noise_cum_;
};

struct MessageSpace {
  bool whole_line{true};
  Interval interval{-1.0, 1.0};

  static MessageSpace real_line() { return {true, {-1.0, 1.0}}; }
  static MessageSpace compact(const Interval& iv) { return {false, iv}; }
};

struct ModelSpec {
  PriorSpec prior = PriorSpec::uniform({0.0, 1.0});
  PayoffSpec payoffs = PayoffSpec::quadratic(0.0);
  CostSpec cost = CostSpec::quadratic(1.0);
  AnchorSpec anchor = AnchorSpec::affine_gaussian(0.0, 1.0, 1.0);
  MessageSpace message_space = MessageSpace::real_line();

  Interval theta_support() const { return prior.support(); }
  // [a^R(lo), a^R(hi)]; finite by receiver concavity.
  Interval action_band() const;
  ModelSpec truncate_states(const Interval& cell) const;
};

struct IdealActions {
  SampledFunction receiver;  // a^R(theta)
  SampledFunction sender;    // a^S(theta)
};

IdealActions ideal_actions(const ModelSpec& model, int n_nodes = 257);
// Receiver FOC solved at a single state.
double ideal_action_receiver(const ModelSpec& model, double theta);
double ideal_action_sender(const ModelSpec& model, double theta);
// (a^R)'(theta) from the implicit function theorem.
double ideal_action_receiver_slope(const ModelSpec& model, double theta);

struct CheckResult {
  std::string name;
  bool pass{false};
  double witness{0.0};  // grid point of the first failure, if any
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  const CheckResult* find(const std::string& name) const;
};

ValidationReport validate(const ModelSpec& model, int grid_nodes = 257);

}  // namespace anchored
