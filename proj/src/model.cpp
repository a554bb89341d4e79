#include "anchored/model.hpp"

#include <algorithm>
#include <cmath>

namespace anchored {

// ---------------------------------------------------------------------------
// PriorSpec

PriorSpec PriorSpec::uniform(const Interval& support) {
  support.require_valid("PriorSpec::uniform");
  PriorSpec p;
  p.kind_ = Kind::Uniform;
  p.support_ = support;
  p.norm_ = support.width();
  return p;
}

PriorSpec PriorSpec::gaussian(double mean, double sd, double trunc_sds) {
  if (!(sd > 0.0)) throw InvalidSpec("gaussian prior needs sd > 0");
  PriorSpec p;
  p.kind_ = Kind::Gaussian;
  p.mean_ = mean;
  p.sd_ = sd;
  p.support_ = {mean - trunc_sds * sd, mean + trunc_sds * sd};
  p.normalize();
  return p;
}

PriorSpec PriorSpec::tabulated(SampledFunction density) {
  PriorSpec p;
  p.kind_ = Kind::Tabulated;
  p.table_ = std::move(density);
  p.support_ = p.table_.domain();
  p.normalize();
  return p;
}

void PriorSpec::normalize() {
  norm_ = 1.0;
  norm_ = quadrature([this](double t) { return density(t); }, support_, 512);
  if (!(norm_ > 0.0)) throw InvalidSpec("prior density integrates to <= 0");
}

double PriorSpec::density(double theta) const {
  if (!support_.contains(theta)) return 0.0;
  switch (kind_) {
    case Kind::Uniform:
      return 1.0 / norm_;
    case Kind::Gaussian:
      return normal_pdf((theta - mean_) / sd_) / (sd_ * norm_);
    case Kind::Tabulated:
      return table_(theta) / norm_;
  }
  return 0.0;
}

double PriorSpec::log_density_slope(double theta) const {
  switch (kind_) {
    case Kind::Uniform:
      return 0.0;
    case Kind::Gaussian:
      return -(theta - mean_) / (sd_ * sd_);
    case Kind::Tabulated: {
      const double f = table_(theta);
      if (!(f > 0.0)) throw InvalidSpec("tabulated prior not positive");
      return table_.derivative(theta) / f;
    }
  }
  return 0.0;
}

double PriorSpec::cdf(double theta) const {
  if (theta <= support_.lo) return 0.0;
  if (theta >= support_.hi) return 1.0;
  switch (kind_) {
    case Kind::Uniform:
      return (theta - support_.lo) / support_.width();
    case Kind::Gaussian: {
      const double lo = normal_cdf((support_.lo - mean_) / sd_);
      const double hi = normal_cdf((support_.hi - mean_) / sd_);
      return (normal_cdf((theta - mean_) / sd_) - lo) / (hi - lo);
    }
    case Kind::Tabulated:
      return quadrature([this](double t) { return density(t); },
                        Interval{support_.lo, theta}, 256);
  }
  return 0.0;
}

double PriorSpec::mean() const {
  return quadrature([this](double t) { return t * density(t); }, support_,
                    512);
}

double PriorSpec::mass(const Interval& cell) const {
  return cdf(cell.hi) - cdf(cell.lo);
}

double PriorSpec::conditional_mean(const Interval& cell) const {
  const Interval clip{std::max(cell.lo, support_.lo),
                      std::min(cell.hi, support_.hi)};
  clip.require_valid("PriorSpec::conditional_mean");
  switch (kind_) {
    case Kind::Uniform:
      return clip.mid();
    case Kind::Gaussian: {
      const double a = (clip.lo - mean_) / sd_, b = (clip.hi - mean_) / sd_;
      const double z = normal_cdf(b) - normal_cdf(a);
      if (z > 1e-14)
        return mean_ + sd_ * (normal_pdf(a) - normal_pdf(b)) / z;
      // Deep-tail cell: fall through to quadrature on the clipped cell.
      [[fallthrough]];
    }
    case Kind::Tabulated: {
      const double m =
          quadrature([this](double t) { return density(t); }, clip, 64);
      const double tm =
          quadrature([this](double t) { return t * density(t); }, clip, 64);
      if (!(m > 0.0)) return clip.mid();
      return tm / m;
    }
  }
  return clip.mid();
}

PriorSpec PriorSpec::truncate(const Interval& cell) const {
  cell.require_valid("PriorSpec::truncate");
  Interval clipped{std::max(cell.lo, support_.lo),
                   std::min(cell.hi, support_.hi)};
  clipped.require_valid("PriorSpec::truncate (empty cell)");
  PriorSpec p = *this;
  p.support_ = clipped;
  p.norm_ = 1.0;
  switch (kind_) {
    case Kind::Uniform:
      p.norm_ = clipped.width();
      break;
    case Kind::Gaussian:
    case Kind::Tabulated:
      p.normalize();
      break;
  }
  return p;
}

// ---------------------------------------------------------------------------
// PayoffSpec

namespace {

PayoffSide quadratic_side(double kappa, Fn1 target) {
  PayoffSide s;
  s.value = [kappa, target](double a, double th) {
    const double e = a - target(th);
    return -0.5 * kappa * e * e;
  };
  s.d_a = [kappa, target](double a, double th) {
    return -kappa * (a - target(th));
  };
  s.d_aa = [kappa](double, double) { return -kappa; };
  s.d_ath = [kappa, target](double, double th) {
    const double h = 1e-6 * (1.0 + std::abs(th));
    return kappa * (target(th + h) - target(th - h)) / (2.0 * h);
  };
  return s;
}

void fill_missing_partials(PayoffSide& s) {
  if (!s.value) throw InvalidSpec("payoff side needs a value function");
  auto v = s.value;
  if (!s.d_a) {
    s.d_a = [v](double a, double th) {
      const double h = 1e-6 * (1.0 + std::abs(a));
      return (v(a + h, th) - v(a - h, th)) / (2.0 * h);
    };
  }
  auto da = s.d_a;
  if (!s.d_aa) {
    s.d_aa = [da](double a, double th) {
      const double h = 1e-6 * (1.0 + std::abs(a));
      return (da(a + h, th) - da(a - h, th)) / (2.0 * h);
    };
  }
  if (!s.d_ath) {
    s.d_ath = [da](double a, double th) {
      const double h = 1e-6 * (1.0 + std::abs(th));
      return (da(a, th + h) - da(a, th - h)) / (2.0 * h);
    };
  }
}

}  // namespace

PayoffSpec PayoffSpec::quadratic(double d, double kappa_R, double kappa_S) {
  return quadratic_delta(
      d, [](double) { return 1.0; }, [](double) { return 0.0; }, kappa_R,
      kappa_S);
}

PayoffSpec PayoffSpec::quadratic_delta(double d, Fn1 delta_hat,
                                       Fn1 delta_hat_prime, double kappa_R,
                                       double kappa_S) {
  PayoffSpec p;
  p.quadratic_ = true;
  p.d_ = d;
  p.kappa_R_ = kappa_R;
  p.kappa_S_ = kappa_S;
  p.delta_hat_ = delta_hat;
  p.delta_hat_prime_ = delta_hat_prime;
  p.receiver_ = quadratic_side(kappa_R, [](double th) { return th; });
  p.sender_ = quadratic_side(
      kappa_S, [d, delta_hat](double th) { return th + d * delta_hat(th); });
  // Exact cross-partials, no finite differences for the canonical family.
  p.receiver_.d_ath = [kappa_R](double, double) { return kappa_R; };
  p.sender_.d_ath = [kappa_S, d, delta_hat_prime](double, double th) {
    return kappa_S * (1.0 + d * delta_hat_prime(th));
  };
  return p;
}

PayoffSpec PayoffSpec::general(PayoffSide receiver, PayoffSide sender) {
  PayoffSpec p;
  p.receiver_ = std::move(receiver);
  p.sender_ = std::move(sender);
  fill_missing_partials(p.receiver_);
  fill_missing_partials(p.sender_);
  return p;
}

PayoffSpec PayoffSpec::with_bias(double d) const {
  if (!quadratic_)
    throw InvalidSpec("with_bias is only defined for the quadratic family");
  return quadratic_delta(d, delta_hat_, delta_hat_prime_, kappa_R_, kappa_S_);
}

// ---------------------------------------------------------------------------
// CostSpec

CostSpec CostSpec::quadratic(double c) {
  if (!(c > 0.0)) throw InvalidSpec("cost scale must be positive");
  CostSpec s;
  s.shape_ = Shape::Quadratic;
  s.c_ = c;
  return s;
}

CostSpec CostSpec::power(double c, double p) {
  if (!(c > 0.0)) throw InvalidSpec("cost scale must be positive");
  if (!(p > 2.0)) throw InvalidSpec("power cost needs p > 2");
  CostSpec s;
  s.shape_ = Shape::Power;
  s.c_ = c;
  s.p_ = p;
  return s;
}

CostSpec CostSpec::general(double c, Fn1 phi, Fn1 phi_prime, Fn1 phi_second,
                           Fn1 psi) {
  if (!(c > 0.0)) throw InvalidSpec("cost scale must be positive");
  CostSpec s;
  s.shape_ = Shape::General;
  s.c_ = c;
  s.phi_ = std::move(phi);
  s.phi_prime_ = std::move(phi_prime);
  s.phi_second_ = std::move(phi_second);
  s.psi_ = std::move(psi);
  return s;
}

double CostSpec::phi(double u) const {
  switch (shape_) {
    case Shape::Quadratic:
      return 0.5 * u * u;
    case Shape::Power:
      return std::pow(std::abs(u), p_) / p_;
    case Shape::General:
      return phi_(u);
  }
  return 0.0;
}

double CostSpec::phi_prime(double u) const {
  switch (shape_) {
    case Shape::Quadratic:
      return u;
    case Shape::Power:
      return std::copysign(std::pow(std::abs(u), p_ - 1.0), u);
    case Shape::General:
      return phi_prime_(u);
  }
  return 0.0;
}

double CostSpec::phi_second(double u) const {
  switch (shape_) {
    case Shape::Quadratic:
      return 1.0;
    case Shape::Power:
      return (p_ - 1.0) * std::pow(std::abs(u), p_ - 2.0);
    case Shape::General:
      return phi_second_(u);
  }
  return 0.0;
}

double CostSpec::psi(double y) const {
  switch (shape_) {
    case Shape::Quadratic:
      return y;
    case Shape::Power:
      return std::copysign(std::pow(std::abs(y), 1.0 / (p_ - 1.0)), y);
    case Shape::General:
      return psi_(y);
  }
  return 0.0;
}

double CostSpec::psi_prime(double y) const {
  if (shape_ == Shape::Quadratic) return 1.0;
  const double k = phi_second(psi(y));
  if (!(k > 0.0))
    throw InvalidSpec("phi'' vanishes where psi' is needed");
  return 1.0 / k;
}

CostSpec CostSpec::with_scale(double c) const {
  CostSpec s = *this;
  if (!(c > 0.0)) throw InvalidSpec("cost scale must be positive");
  s.c_ = c;
  return s;
}

// ---------------------------------------------------------------------------
// AnchorSpec

AnchorSpec AnchorSpec::affine_gaussian(double beta0, double beta,
                                       double sigma) {
  if (!(sigma > 0.0)) throw InvalidSpec("anchor sigma must be positive");
  AnchorSpec a;
  a.beta0_ = beta0;
  a.beta_ = beta;
  a.sigma_ = sigma;
  return a;
}

AnchorSpec AnchorSpec::tabulated_b0(SampledFunction b0, double sigma) {
  if (!(sigma > 0.0)) throw InvalidSpec("anchor sigma must be positive");
  AnchorSpec a;
  a.affine_ = false;
  a.b0_table_ = std::move(b0);
  a.sigma_ = sigma;
  return a;
}

AnchorSpec AnchorSpec::affine_noise(double beta0, double beta, double sigma,
                                    SampledFunction noise_density) {
  AnchorSpec a = affine_gaussian(beta0, beta, sigma);
  a.gaussian_noise_ = false;
  a.noise_table_ = std::move(noise_density);
  // Normalize the table and precompute its CDF.
  const auto& nd = a.noise_table_;
  const double mass = quadrature([&nd](double x) { return nd(x); },
                                 nd.domain(), 1024);
  std::vector<double> xs = nd.nodes(), cs(xs.size(), 0.0), vs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vs[i] = nd(xs[i]) / mass;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    cs[i] = cs[i - 1] +
            quadrature([&nd, mass](double x) { return nd(x) / mass; },
                       Interval{xs[i - 1], xs[i]}, 16);
  }
  a.noise_table_ = SampledFunction(xs, vs);
  a.noise_cum_ = SampledFunction(std::move(xs), std::move(cs));
  return a;
}

double AnchorSpec::b0(double theta) const {
  return affine_ ? beta0_ + beta_ * theta : b0_table_(theta);
}

double AnchorSpec::b0_prime(double theta) const {
  return affine_ ? beta_ : b0_table_.derivative(theta);
}

double AnchorSpec::noise_pdf(double x) const {
  if (gaussian_noise_) return normal_pdf(x);
  return noise_table_.domain().contains(x) ? noise_table_(x) : 0.0;
}

double AnchorSpec::noise_cdf(double x) const {
  if (gaussian_noise_) return normal_cdf(x);
  const Interval dom = noise_cum_.domain();
  if (x <= dom.lo) return 0.0;
  if (x >= dom.hi) return 1.0;
  return noise_cum_(x);
}

double AnchorSpec::noise_score(double x) const {
  if (gaussian_noise_) return -x;
  const double h = noise_table_(x);
  if (!(h > 0.0)) throw InvalidSpec("noise density not positive at point");
  return noise_table_.derivative(x) / h;
}

double AnchorSpec::density(double b, double theta) const {
  return noise_pdf((b - b0(theta)) / sigma_) / sigma_;
}

AnchorSpec AnchorSpec::with_sigma(double sigma) const {
  AnchorSpec a = *this;
  if (!(sigma > 0.0)) throw InvalidSpec("anchor sigma must be positive");
  a.sigma_ = sigma;
  return a;
}

// ---------------------------------------------------------------------------
// ModelSpec operations

namespace {

double solve_foc(const PayoffSide& side, double theta, const Interval& hint) {
  // Expand around the hint until the FOC changes sign.
  double lo = hint.lo, hi = hint.hi;
  double flo = side.d_a(lo, theta), fhi = side.d_a(hi, theta);
  for (int k = 0; k < 60 && (flo > 0.0) == (fhi > 0.0); ++k) {
    const double w = hi - lo;
    lo -= w;
    hi += w;
    flo = side.d_a(lo, theta);
    fhi = side.d_a(hi, theta);
  }
  if ((flo > 0.0) == (fhi > 0.0))
    throw IllConditionedPayoff("FOC root not bracketed at theta=" +
                               std::to_string(theta));
  return find_root([&](double a) { return side.d_a(a, theta); },
                   Interval{lo, hi}, 1e-13);
}

}  // namespace

double ideal_action_receiver(const ModelSpec& model, double theta) {
  const Interval sup = model.theta_support();
  return solve_foc(model.payoffs.receiver(), theta,
                   {theta - 0.5 * sup.width() - 1.0,
                    theta + 0.5 * sup.width() + 1.0});
}

double ideal_action_sender(const ModelSpec& model, double theta) {
  const Interval sup = model.theta_support();
  return solve_foc(model.payoffs.sender(), theta,
                   {theta - 0.5 * sup.width() - 1.0,
                    theta + 0.5 * sup.width() + 1.0});
}

double ideal_action_receiver_slope(const ModelSpec& model, double theta) {
  const double a = ideal_action_receiver(model, theta);
  const auto& r = model.payoffs.receiver();
  return -r.d_ath(a, theta) / r.d_aa(a, theta);
}

IdealActions ideal_actions(const ModelSpec& model, int n_nodes) {
  const Interval sup = model.theta_support();
  std::vector<double> th(n_nodes), ar(n_nodes), as(n_nodes);
  const double h = sup.width() / (n_nodes - 1);
  for (int i = 0; i < n_nodes; ++i) {
    th[i] = (i + 1 == n_nodes) ? sup.hi : sup.lo + i * h;
    ar[i] = ideal_action_receiver(model, th[i]);
    as[i] = ideal_action_sender(model, th[i]);
  }
  return {SampledFunction(th, ar), SampledFunction(std::move(th), as)};
}

Interval ModelSpec::action_band() const {
  const Interval sup = theta_support();
  return {ideal_action_receiver(*this, sup.lo),
          ideal_action_receiver(*this, sup.hi)};
}

ModelSpec ModelSpec::truncate_states(const Interval& cell) const {
  ModelSpec m = *this;
  m.prior = prior.truncate(cell);
  return m;
}

// ---------------------------------------------------------------------------
// validate

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

CheckResult grid_check(const std::string& name, const std::vector<double>& xs,
                       const std::function<bool(double)>& ok,
                       const std::string& detail) {
  for (double x : xs)
    if (!ok(x)) return {name, false, x, detail};
  return {name, true, 0.0, detail};
}

}  // namespace

ValidationReport validate(const ModelSpec& model, int grid_nodes) {
  ValidationReport rep;
  const Interval sup = model.theta_support();
  std::vector<double> th(grid_nodes);
  for (int i = 0; i < grid_nodes; ++i)
    th[i] = sup.lo + sup.width() * i / (grid_nodes - 1);

  // Prior: strictly positive density integrating to one.
  rep.checks.push_back(grid_check(
      "prior_positive", th,
      [&](double t) { return model.prior.density(t) > 0.0; },
      "f > 0 on the support"));
  {
    const double mass = quadrature(
        [&](double t) { return model.prior.density(t); }, sup, 1024);
    rep.checks.push_back({"prior_mass", std::abs(mass - 1.0) <= 1e-8, mass,
                          "density integrates to 1 within 1e-8"});
  }

  // Payoff curvature and single crossing on the action band x state grid.
  Interval band{0.0, 1.0};
  bool band_ok = true;
  try {
    band = model.action_band();
  } catch (const SolverError&) {
    band_ok = false;
  }
  rep.checks.push_back(
      {"action_band", band_ok && band.lo < band.hi,
       band_ok ? band.lo : 0.0, "a^R(lo) < a^R(hi) computable and finite"});
  if (band_ok) {
    const double pad = 0.1 * (band.hi - band.lo) + 1e-3;
    std::vector<double> as(17);
    for (int i = 0; i < 17; ++i)
      as[i] = band.lo - pad + (band.hi - band.lo + 2 * pad) * i / 16.0;
    auto both = [&](const char* nm, const PayoffSide& s, double sign_aa,
                    double sign_ath) {
      bool ok = true;
      double wit = 0.0;
      for (double t : th) {
        for (double a : as) {
          if (!(sign_aa * s.d_aa(a, t) >= 1e-12) ||
              !(sign_ath * s.d_ath(a, t) >= 1e-12)) {
            ok = false;
            wit = t;
            break;
          }
        }
        if (!ok) break;
      }
      rep.checks.push_back({nm, ok, wit,
                            "U_11 <= -eta < 0 and U_12 >= gamma > 0 on grid"});
    };
    both("receiver_concavity", model.payoffs.receiver(), -1.0, 1.0);
    both("sender_concavity", model.payoffs.sender(), -1.0, 1.0);
  }

  // Cost: phi(0)=0, phi'(0)=0, curvature within [kappa_lo, kappa_hi],
  // psi inverts phi' on a test grid.
  {
    const auto& c = model.cost;
    rep.checks.push_back({"cost_at_zero",
                          std::abs(c.phi(0.0)) < 1e-14 &&
                              std::abs(c.phi_prime(0.0)) < 1e-14,
                          0.0, "phi(0)=0 and phi'(0)=0"});
    std::vector<double> us(41);
    for (int i = 0; i < 41; ++i) us[i] = -10.0 + 0.5 * i;
    rep.checks.push_back(grid_check(
        "cost_curvature", us,
        [&](double u) {
          const double k = c.phi_second(u);
          return k >= 1e-8 && k <= 1e8;
        },
        "phi'' in [kappa_lo, kappa_hi], kappa_lo > 0"));
    rep.checks.push_back(grid_check(
        "cost_psi_inverse", us,
        [&](double u) {
          return std::abs(c.psi(c.phi_prime(u)) - u) <=
                 1e-10 * (1.0 + std::abs(u));
        },
        "psi(phi'(u)) = u within 1e-10 on [-10,10]"));
  }

  // Anchor: b0 strictly increasing where beta > 0; noise positive and
  // log-concave (non-increasing score).
  {
    const auto& an = model.anchor;
    if (an.beta() != 0.0) {
      rep.checks.push_back(grid_check(
          "anchor_b0_increasing", th,
          [&](double t) { return an.b0_prime(t) > 0.0; },
          "b0' > 0 on the state grid"));
    } else {
      rep.checks.push_back({"anchor_b0_increasing", true, 0.0,
                            "uninformative anchor (beta = 0), not required"});
    }
    std::vector<double> xs(33);
    for (int i = 0; i < 33; ++i) xs[i] = -4.0 + 0.25 * i;
    rep.checks.push_back(grid_check(
        "noise_positive", xs,
        [&](double x) { return an.noise_pdf(x) > 0.0; },
        "noise density > 0 on +-4"));
    bool logconcave = true;
    double wit = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      if (an.noise_score(xs[i + 1]) > an.noise_score(xs[i]) + 1e-9) {
        logconcave = false;
        wit = xs[i + 1];
        break;
      }
    }
    rep.checks.push_back({"noise_log_concave", logconcave, wit,
                          "noise score non-increasing on the grid"});
  }

  return rep;
}

}  // namespace anchored
