#include "anchored/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace anchored {

// ---------------------------------------------------------------------------
// ActionRule

ActionRule::ActionRule(std::vector<double> report_nodes,
                       std::vector<double> a_values,
                       std::vector<double> a_prime_values,
                       std::vector<double> a_second_values) {
  a_ = SampledFunction(report_nodes, std::move(a_values));
  ap_ = SampledFunction(report_nodes, std::move(a_prime_values));
  if (!a_second_values.empty())
    app_ = SampledFunction(std::move(report_nodes),
                           std::move(a_second_values));
}

ReceiverRule ActionRule::rule() const {
  ReceiverRule r;
  r.a = [f = a_](double x) { return f(x); };
  r.a_prime = [f = ap_](double x) { return f(x); };
  if (app_)
    r.a_second = [f = *app_](double x) { return f(x); };
  else
    r.a_second = [f = ap_](double x) { return f.derivative(x); };
  r.compact = true;
  r.domain = a_.domain();
  return r;
}

void ActionRule::require_valid(double consistency_tol) const {
  if (!a_.strictly_increasing())
    throw RegularityViolation("action rule values not strictly increasing");
  for (double p : ap_.values())
    if (!(p > 0.0))
      throw RegularityViolation("action rule slope not strictly positive");
  // a' must integrate back to the increments of a.
  const auto& x = a_.nodes();
  const auto& v = a_.values();
  const double scale = std::abs(v.back() - v.front()) + 1e-12;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double inc =
        quadrature([this](double r) { return ap_(r); },
                   Interval{x[i], x[i + 1]}, 8);
    if (std::abs(inc - (v[i + 1] - v[i])) > consistency_tol * scale)
      throw RegularityViolation("a' inconsistent with increments of a");
  }
}

// ---------------------------------------------------------------------------
// Inverse-anchor map and ODE coefficients

double inverse_anchor(double r, double theta, double a_val, double a_prime,
                      const ModelSpec& model) {
  const double us1 = model.payoffs.sender().d_a(a_val, theta);
  const double arg = us1 * a_prime / model.cost.c();
  const double psi = model.cost.psi(arg);
  if (!std::isfinite(psi))
    throw NoInducingAnchor("psi argument outside range at r=" +
                           std::to_string(r));
  return r - psi;
}

double inverse_anchor_jacobian(double r, double theta, double a_val,
                               double a_prime, double a_second,
                               const ModelSpec& model) {
  (void)r;
  const auto& send = model.payoffs.sender();
  const double c = model.cost.c();
  const double us1 = send.d_a(a_val, theta);
  const double s = us1 * a_prime / c;
  const double psip = model.cost.psi_prime(s);
  return 1.0 - psip / c *
                   (send.d_aa(a_val, theta) * a_prime * a_prime +
                    us1 * a_second);
}

namespace {

// States whose rationalizing anchor lies within n_sig noise deviations of
// the systematic anchor; the likelihood is negligible elsewhere and a fixed
// support-wide rule cannot resolve the spike when sigma is small.
Interval likelihood_window(const ModelSpec& model, double r, double a_val,
                           double p, double n_sig = 10.0) {
  const Interval sup = model.theta_support();
  const auto& send = model.payoffs.sender();
  const double c = model.cost.c();
  auto z = [&](double th) {
    const double ba = r - model.cost.psi(send.d_a(a_val, th) * p / c);
    return (ba - model.anchor.b0(th)) / model.anchor.sigma();
  };
  const double zlo = z(sup.lo), zhi = z(sup.hi);
  // z decreases in theta (single crossing plus increasing b0).
  if (zlo <= zhi) return sup;  // degenerate direction; integrate everything
  if (zlo < -n_sig || zhi > n_sig) return {sup.lo, sup.lo};  // empty
  double th_lo = sup.lo, th_hi = sup.hi;
  try {
    if (zlo > n_sig)
      th_lo = find_root([&](double th) { return z(th) - n_sig; }, sup, 1e-10);
    if (zhi < -n_sig)
      th_hi = find_root([&](double th) { return z(th) + n_sig; }, sup, 1e-10);
  } catch (const SolverError&) {
    return sup;
  }
  if (!(th_lo < th_hi)) return {sup.lo, sup.lo};
  return {th_lo, th_hi};
}

}  // namespace

OdeCoefficients ode_coefficients(double r, double a_val, double p,
                                 const ModelSpec& model, int n_theta,
                                 double stiffness_floor) {
  const auto& recv = model.payoffs.receiver();
  const auto& send = model.payoffs.sender();
  const double c = model.cost.c();
  const Interval window = likelihood_window(model, r, a_val, p);
  OdeCoefficients out;
  if (!(window.width() > 0.0)) return out;  // no states rationalize r
  const Grid g = Grid::gauss_legendre(window, n_theta);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double th = g.nodes[i];
    const double us1 = send.d_a(a_val, th);
    const double s = us1 * p / c;
    const double ba = r - model.cost.psi(s);
    const double w =
        model.prior.density(th) * model.anchor.density(ba, th) * g.weights[i];
    if (!(w > 0.0)) continue;
    const double ur1 = recv.d_a(a_val, th);
    const double psip = model.cost.psi_prime(s);
    out.A += ur1 * w * psip / c * us1;
    out.B += ur1 * w * (1.0 - psip / c * send.d_aa(a_val, th) * p * p);
    out.weight += w;
  }
  if (out.weight > 0.0 && std::abs(out.A / out.weight) < stiffness_floor)
    out.stiff = true;
  return out;
}

SampledFunction posterior_density(double r, const ActionRule& rule,
                                  const ModelSpec& model, int n_theta,
                                  bool spline_curvature) {
  const double a_val = rule(r);
  const double p = rule.slope(r);
  const double app =
      spline_curvature ? rule.curvature_spline(r) : rule.curvature(r);
  const Interval sup = model.theta_support();
  std::vector<double> th(n_theta), w(n_theta);
  const double h = sup.width() / (n_theta - 1);
  for (int i = 0; i < n_theta; ++i) {
    th[i] = (i + 1 == n_theta) ? sup.hi : sup.lo + i * h;
    const double ba = inverse_anchor(r, th[i], a_val, p, model);
    const double jac = inverse_anchor_jacobian(r, th[i], a_val, p, app, model);
    if (!(jac > 0.0))
      throw RegularityViolation("nonpositive inverse-anchor Jacobian at r=" +
                                std::to_string(r) +
                                ", theta=" + std::to_string(th[i]));
    w[i] = model.prior.density(th[i]) * model.anchor.density(ba, th[i]) * jac;
  }
  // C2 spline representation; normalized by its exact segment integrals so
  // any downstream quadrature sees unit mass.
  SampledFunction raw = SampledFunction::cubic_spline(th, w);
  double mass = 0.0;
  for (int i = 0; i + 1 < n_theta; ++i)
    mass += quadrature([&raw](double t) { return raw(t); },
                       Interval{th[i], th[i + 1]}, 4);
  if (!(mass > 0.0)) throw RegularityViolation("posterior mass vanished");
  for (auto& e : w) e /= mass;
  return SampledFunction::cubic_spline(std::move(th), std::move(w));
}

// ---------------------------------------------------------------------------
// Boundary equations

namespace {

double boundary_b_minus(const ModelSpec& model, double endpoint, double u,
                        double p, double theta) {
  const double us1 = model.payoffs.sender().d_a(u, theta);
  return endpoint - model.cost.psi(us1 * p / model.cost.c());
}

}  // namespace

double boundary_F_minus(const ModelSpec& model, double u, double p,
                        int n_theta) {
  if (model.message_space.whole_line)
    throw InvalidSpec("boundary equations need a compact message space");
  const double m_lo = model.message_space.interval.lo;
  const auto& recv = model.payoffs.receiver();
  // The pooled-mass factor H dies above the z = -12 crossing; integrating
  // past it just wastes nodes when sigma is small.
  const Interval sup = model.theta_support();
  auto z_of = [&](double th) {
    const double b = boundary_b_minus(model, m_lo, u, p, th);
    return (b - model.anchor.b0(th)) / model.anchor.sigma();
  };
  Interval span = sup;
  if (z_of(sup.lo) > z_of(sup.hi) && z_of(sup.hi) < -12.0 &&
      z_of(sup.lo) > -12.0) {
    try {
      span.hi = find_root([&](double th) { return z_of(th) + 12.0; }, sup,
                          1e-10);
    } catch (const SolverError&) {
      span = sup;
    }
  }
  if (!(span.width() > 0.0)) span = sup;
  return quadrature(
      [&](double th) {
        const double b = boundary_b_minus(model, m_lo, u, p, th);
        const double z = (b - model.anchor.b0(th)) / model.anchor.sigma();
        return recv.d_a(u, th) * model.prior.density(th) *
               model.anchor.noise_cdf(z);
      },
      span, n_theta);
}

double boundary_F_plus(const ModelSpec& model, double v, double p,
                       int n_theta) {
  if (model.message_space.whole_line)
    throw InvalidSpec("boundary equations need a compact message space");
  const double m_hi = model.message_space.interval.hi;
  const auto& recv = model.payoffs.receiver();
  const Interval sup = model.theta_support();
  auto z_of = [&](double th) {
    const double b = boundary_b_minus(model, m_hi, v, p, th);
    return (b - model.anchor.b0(th)) / model.anchor.sigma();
  };
  Interval span = sup;
  if (z_of(sup.lo) > z_of(sup.hi) && z_of(sup.lo) > 12.0 &&
      z_of(sup.hi) < 12.0) {
    try {
      span.lo = find_root([&](double th) { return z_of(th) - 12.0; }, sup,
                          1e-10);
    } catch (const SolverError&) {
      span = sup;
    }
  }
  if (!(span.width() > 0.0)) span = sup;
  return quadrature(
      [&](double th) {
        const double b = boundary_b_minus(model, m_hi, v, p, th);
        const double z = (b - model.anchor.b0(th)) / model.anchor.sigma();
        return recv.d_a(v, th) * model.prior.density(th) *
               (1.0 - model.anchor.noise_cdf(z));
      },
      span, n_theta);
}

namespace {

Interval padded_action_band(const ModelSpec& model) {
  const Interval band = model.action_band();
  const double pad = 1e-7 * (1.0 + band.width());
  return {band.lo - pad, band.hi + pad};
}

}  // namespace

double boundary_u_star(const ModelSpec& model, double p) {
  const Interval band = padded_action_band(model);
  return find_root(
      [&](double u) { return boundary_F_minus(model, u, p); }, band, 1e-12);
}

double boundary_v_star(const ModelSpec& model, double p) {
  const Interval band = padded_action_band(model);
  return find_root(
      [&](double v) { return boundary_F_plus(model, v, p); }, band, 1e-12);
}

std::pair<double, double> endpoint_pooling_masses(const ActionRule& rule,
                                                  const ModelSpec& model,
                                                  int n_theta) {
  const Interval M = rule.domain();
  const double u = rule(M.lo), pu = rule.slope(M.lo);
  const double v = rule(M.hi), pv = rule.slope(M.hi);
  const double lo_mass = quadrature(
      [&](double th) {
        const double b = boundary_b_minus(model, M.lo, u, pu, th);
        const double z = (b - model.anchor.b0(th)) / model.anchor.sigma();
        return model.prior.density(th) * model.anchor.noise_cdf(z);
      },
      model.theta_support(), n_theta);
  const double hi_mass = quadrature(
      [&](double th) {
        const double b = boundary_b_minus(model, M.hi, v, pv, th);
        const double z = (b - model.anchor.b0(th)) / model.anchor.sigma();
        return model.prior.density(th) * (1.0 - model.anchor.noise_cdf(z));
      },
      model.theta_support(), n_theta);
  return {lo_mass, hi_mass};
}

// ---------------------------------------------------------------------------
// Shooting solver

namespace {

// A shot either reaches the far endpoint (Ok: residual = F_plus there) or
// leaves the admissible strip first; escapes carry the residual sign their
// direction implies (high actions drive F_plus negative).
enum class ShotStatus { Ok, EscapeUp, EscapeDown, Invalid };

struct ShotPath {
  ShotStatus status{ShotStatus::Invalid};
  double residual{0.0};
  int stiff_steps{0};
  std::vector<double> r, a, p, app;

  bool ok() const { return status == ShotStatus::Ok; }
  double classify_sign() const {
    switch (status) {
      case ShotStatus::Ok:
        return residual > 0.0 ? 1.0 : -1.0;
      case ShotStatus::EscapeUp:
        return -1.0;
      case ShotStatus::EscapeDown:
        return 1.0;
      case ShotStatus::Invalid:
        return 0.0;
    }
    return 0.0;
  }
};

ShotPath integrate_shot(const ModelSpec& model, double p0,
                        const BvpOptions& opts) {
  ShotPath path;
  const Interval M = model.message_space.interval;
  const Interval band = model.action_band();
  const double band_pad = 0.25 * band.width() + 1e-6;
  double a = 0.0;
  try {
    a = boundary_u_star(model, p0);
  } catch (const SolverError&) {
    return path;
  }
  double p = p0;
  const int n = opts.report_steps;
  const double h = M.width() / n;
  path.r.reserve(n + 1);
  path.a.reserve(n + 1);
  path.p.reserve(n + 1);
  path.app.reserve(n + 1);

  auto rhs = [&](double r, double av, double pv, bool& stiff) {
    const OdeCoefficients co = ode_coefficients(r, av, pv, model,
                                                opts.theta_nodes,
                                                opts.stiffness_floor);
    stiff = co.stiff;
    if (co.stiff || !(co.weight > 0.0)) return 0.0;  // flagged, flat step
    return co.B / co.A;
  };

  bool stiff0 = false;
  path.r.push_back(M.lo);
  path.a.push_back(a);
  path.p.push_back(p);
  path.app.push_back(rhs(M.lo, a, p, stiff0));
  if (stiff0) ++path.stiff_steps;

  for (int i = 0; i < n; ++i) {
    const double r0 = M.lo + i * h;
    bool stiff = false;
    // RK4 on (a, p); substep once when the step is flagged stiff.
    auto step = [&](double r_in, double a_in, double p_in, double hh,
                    double& a_out, double& p_out) {
      bool st = false;
      const double k1a = p_in, k1p = rhs(r_in, a_in, p_in, st);
      stiff |= st;
      const double k2a = p_in + 0.5 * hh * k1p;
      const double k2p =
          rhs(r_in + 0.5 * hh, a_in + 0.5 * hh * k1a, k2a, st);
      stiff |= st;
      const double k3a = p_in + 0.5 * hh * k2p;
      const double k3p =
          rhs(r_in + 0.5 * hh, a_in + 0.5 * hh * k2a, k3a, st);
      stiff |= st;
      const double k4a = p_in + hh * k3p;
      const double k4p = rhs(r_in + hh, a_in + hh * k3a, k4a, st);
      stiff |= st;
      a_out = a_in + hh / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
      p_out = p_in + hh / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    };
    double a1, p1;
    step(r0, a, p, h, a1, p1);
    if (stiff) {
      ++path.stiff_steps;
      double am, pm;
      step(r0, a, p, 0.5 * h, am, pm);
      step(r0 + 0.5 * h, am, pm, 0.5 * h, a1, p1);
    }
    a = a1;
    p = p1;
    if (!std::isfinite(a) || !std::isfinite(p) || a > band.hi + band_pad) {
      path.status = ShotStatus::EscapeUp;
      return path;
    }
    if (!(p > 0.0) || a < band.lo - band_pad) {
      path.status = ShotStatus::EscapeDown;
      return path;
    }
    bool st_end = false;
    path.r.push_back(r0 + h);
    path.a.push_back(a);
    path.p.push_back(p);
    path.app.push_back(rhs(r0 + h, a, p, st_end));
  }
  path.status = ShotStatus::Ok;
  path.residual = boundary_F_plus(model, a, p);
  return path;
}

double boundary_scale(const ModelSpec& model) {
  const Interval band = model.action_band();
  const auto& recv = model.payoffs.receiver();
  return quadrature(
      [&](double th) {
        return std::abs(recv.d_a(band.lo, th)) * model.prior.density(th);
      },
      model.theta_support(), 128);
}

ActionRule path_to_rule(const ShotPath& path) {
  return ActionRule(path.r, path.a, path.p, path.app);
}

// Receiver optimum against the anchor likelihood of the report itself: the
// slaved branch the interior ODE relaxes to, used to seed the relaxation.
double slaved_action(const ModelSpec& model, double r) {
  const Interval sup = model.theta_support();
  const auto& an = model.anchor;
  auto z = [&](double th) { return (r - an.b0(th)) / an.sigma(); };
  Interval window = sup;
  if (z(sup.lo) > z(sup.hi)) {
    if (z(sup.lo) < -10.0 || z(sup.hi) > 10.0) {
      window = z(sup.hi) > 10.0 ? Interval{sup.hi - 1e-6 * sup.width(), sup.hi}
                                : Interval{sup.lo, sup.lo + 1e-6 * sup.width()};
    } else {
      try {
        double lo = sup.lo, hi = sup.hi;
        if (z(sup.lo) > 10.0)
          lo = find_root([&](double th) { return z(th) - 10.0; }, sup, 1e-10);
        if (z(sup.hi) < -10.0)
          hi = find_root([&](double th) { return z(th) + 10.0; }, sup, 1e-10);
        if (lo < hi) window = {lo, hi};
      } catch (const SolverError&) {
      }
    }
  }
  const auto& recv = model.payoffs.receiver();
  if (model.payoffs.quadratic_family()) {
    double w = 0.0, tw = 0.0;
    const Grid g = Grid::gauss_legendre(window, 64);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double th = g.nodes[i];
      const double wt =
          model.prior.density(th) * an.density(r, th) * g.weights[i];
      w += wt;
      tw += th * wt;
    }
    return w > 0.0 ? tw / w : window.mid();
  }
  auto foc = [&](double a_try) {
    return quadrature(
        [&](double th) {
          return recv.d_a(a_try, th) * model.prior.density(th) *
                 an.density(r, th);
        },
        window, 64);
  };
  const Interval band = model.action_band();
  try {
    return find_root(foc, Interval{band.lo - 1e-9, band.hi + 1e-9}, 1e-12);
  } catch (const SolverError&) {
    return window.mid();
  }
}

// Damped Newton on the finite-difference collocation of a'' = G(r, a, a')
// with the pooled-tail boundary equations. Forward shooting cannot place
// the far boundary layer once the interior locks onto the slaved branch,
// and plain relaxation needs prohibitive damping when the slaving is stiff;
// the tridiagonal Newton handles both. Seeded from a shot or the slaved
// branch.
struct CollocationResult {
  bool converged{false};
  double residual_norm{0.0};
  int iterations{0};
  std::vector<double> r, a, p, app;
};

CollocationResult newton_collocation(const ModelSpec& model,
                                     const BvpOptions& opts,
                                     const std::vector<double>& r,
                                     std::vector<double> a) {
  const Interval M = model.message_space.interval;
  const Interval band = model.action_band();
  const int n = static_cast<int>(r.size());
  const double h = r[1] - r[0];
  const double scale = 1.0 + band.width();
  const double p_floor = 1e-12 * scale / M.width();

  auto G_of = [&](double rr, double aa, double pp) {
    const OdeCoefficients co =
        ode_coefficients(rr, aa, std::max(pp, p_floor), model,
                         opts.theta_nodes, opts.stiffness_floor);
    if (co.stiff || !(co.weight > 0.0)) return 0.0;
    return co.B / co.A;
  };

  auto residual = [&](const std::vector<double>& av, std::vector<double>& R,
                      std::vector<double>* G_vals = nullptr) {
    const double p0 = std::max((av[1] - av[0]) / h, p_floor);
    const double pn = std::max((av[n - 1] - av[n - 2]) / h, p_floor);
    R[0] = av[0] - boundary_u_star(model, p0);
    R[n - 1] = av[n - 1] - boundary_v_star(model, pn);
    for (int i = 1; i + 1 < n; ++i) {
      const double p = (av[i + 1] - av[i - 1]) / (2.0 * h);
      const double g = G_of(r[i], av[i], p);
      if (G_vals) (*G_vals)[i] = g;
      R[i] = (av[i + 1] - 2.0 * av[i] + av[i - 1]) - h * h * g;
    }
  };

  std::vector<double> R(n), Gv(n, 0.0);
  CollocationResult out;
  out.r = r;
  const bool dbg = std::getenv("ANCHORED_DEBUG") != nullptr;
  double norm = 1e300;
  for (int it = 0; it < 40; ++it) {
    residual(a, R, &Gv);
    norm = 0.0;
    for (double v : R) norm = std::max(norm, std::abs(v));
    out.iterations = it;
    if (dbg) std::fprintf(stderr, "[newton] it=%d norm=%.3g\n", it, norm);
    if (norm < 1e-11 * scale) break;

    // Tridiagonal Jacobian by local finite differences.
    std::vector<double> dl(n, 0.0), dd(n, 0.0), du(n, 0.0), rhs(n);
    const double da = 1e-6 * scale;
    {
      const double p0 = std::max((a[1] - a[0]) / h, p_floor);
      const double uprime =
          (boundary_u_star(model, p0 + 1e-6) -
           boundary_u_star(model, p0)) / 1e-6;
      dd[0] = 1.0 + uprime / h;
      du[0] = -uprime / h;
      const double pn = std::max((a[n - 1] - a[n - 2]) / h, p_floor);
      const double vprime =
          (boundary_v_star(model, pn + 1e-6) -
           boundary_v_star(model, pn)) / 1e-6;
      dd[n - 1] = 1.0 - vprime / h;
      dl[n - 1] = vprime / h;
    }
    for (int i = 1; i + 1 < n; ++i) {
      const double p = (a[i + 1] - a[i - 1]) / (2.0 * h);
      const double Ga = (G_of(r[i], a[i] + da, p) - Gv[i]) / da;
      const double dp = 1e-6 * (1.0 + std::abs(p));
      const double Gp = (G_of(r[i], a[i], p + dp) - Gv[i]) / dp;
      dl[i] = 1.0 + 0.5 * h * Gp;
      dd[i] = -2.0 - h * h * Ga;
      du[i] = 1.0 - 0.5 * h * Gp;
    }
    for (int i = 0; i < n; ++i) rhs[i] = -R[i];
    // Thomas solve for the Newton step.
    std::vector<double> cprime(n, 0.0);
    cprime[0] = du[0] / dd[0];
    rhs[0] /= dd[0];
    for (int i = 1; i < n; ++i) {
      const double m = dd[i] - dl[i] * cprime[i - 1];
      if (std::abs(m) < 1e-300) return out;  // singular; give up
      if (i + 1 < n) cprime[i] = du[i] / m;
      rhs[i] = (rhs[i] - dl[i] * rhs[i - 1]) / m;
    }
    for (int i = n - 1; i-- > 0;) rhs[i] -= cprime[i] * rhs[i + 1];

    // Backtracking line search on the residual norm, with a band clamp.
    double t = 1.0;
    bool improved = false;
    std::vector<double> trial(n), Rt(n);
    for (int ls = 0; ls < 8; ++ls, t *= 0.5) {
      for (int i = 0; i < n; ++i) {
        trial[i] = a[i] + t * rhs[i];
        trial[i] = std::min(std::max(trial[i], band.lo - 1e-6),
                            band.hi + 1e-6);
      }
      residual(trial, Rt);
      double nt = 0.0;
      for (double v : Rt) nt = std::max(nt, std::abs(v));
      if (nt < norm * (1.0 - 1e-4 * t) || nt < 1e-11 * scale) {
        a.swap(trial);
        improved = true;
        break;
      }
    }
    if (!improved) {
      if (dbg) std::fprintf(stderr, "[newton] line search stalled\n");
      break;
    }
  }
  residual(a, R, &Gv);
  norm = 0.0;
  for (double v : R) norm = std::max(norm, std::abs(v));
  out.residual_norm = norm / scale;
  out.converged = norm < 1e-9 * scale;

  // Assemble the return path with slopes from central differences.
  out.a = a;
  out.p.assign(n, 0.0);
  out.app.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (i == 0)
      out.p[i] = (a[1] - a[0]) / h;
    else if (i + 1 == n)
      out.p[i] = (a[n - 1] - a[n - 2]) / h;
    else
      out.p[i] = (a[i + 1] - a[i - 1]) / (2.0 * h);
    out.p[i] = std::max(out.p[i], p_floor);
  }
  for (int i = 1; i + 1 < n; ++i) out.app[i] = Gv[i];
  out.app[0] = out.app[1];
  out.app[n - 1] = out.app[n - 2];
  return out;
}

// Damped iteration of the Green-operator form of the boundary problem,
// retained as the last-resort fallback.
BvpSolution picard_fallback(const ModelSpec& model, const BvpOptions& opts,
                            const ShotPath* seed = nullptr) {
  const Interval M = model.message_space.interval;
  const Interval band = model.action_band();
  const int n = 385;
  std::vector<double> r(n), a(n), p(n), app(n, 0.0);
  const double h = M.width() / (n - 1);
  const double slope0 = band.width() / M.width();
  const double p_floor = 1e-9 * slope0;
  for (int i = 0; i < n; ++i)
    r[i] = (i + 1 == n) ? M.hi : M.lo + i * h;
  if (seed && seed->r.size() >= 2) {
    const SampledFunction sa(seed->r, seed->a);
    const SampledFunction sp(seed->r, seed->p);
    for (int i = 0; i < n; ++i) {
      a[i] = sa(r[i]);
      p[i] = std::max(sp(r[i]), p_floor);
    }
  } else {
    // Seed with the slaved branch, monotonized.
    for (int i = 0; i < n; ++i) a[i] = slaved_action(model, r[i]);
    for (int i = 1; i < n; ++i)
      a[i] = std::max(a[i], a[i - 1] + p_floor * h);
    const SampledFunction sa(r, a);
    for (int i = 0; i < n; ++i)
      p[i] = std::max(sa.derivative(r[i]), p_floor);
  }
  const double rhs_cap = 200.0 * slope0 / M.width() *
                         std::max(1.0, M.width());
  double damping = opts.picard_damping;
  double drift = 1e300, drift_prev = 1e300;
  int calm_streak = 0;
  const double tol = 1e-9 * (1.0 + band.width());
  int it = 0;
  for (; it < opts.picard_max_iter && drift > tol; ++it) {
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) {
      const OdeCoefficients co =
          ode_coefficients(r[i], a[i], std::max(p[i], p_floor), model,
                           opts.theta_nodes, opts.stiffness_floor);
      double g = (co.stiff || !(co.weight > 0.0)) ? 0.0 : co.B / co.A;
      if (g > rhs_cap) g = rhs_cap;
      if (g < -rhs_cap) g = -rhs_cap;
      rhs[i] = g;
      app[i] = g;
    }
    const double u = boundary_u_star(model, std::max(p.front(), p_floor));
    const double v = boundary_v_star(model, std::max(p.back(), p_floor));
    // Green integral of the rhs via prefix sums of the two kernel halves:
    // (m_hi - x)/|M| * int_lo^x (s-m_lo) g + (x - m_lo)/|M| * int_x^hi
    // (m_hi - s) g, trapezoid on the shared grid.
    std::vector<double> left(n, 0.0), right(n, 0.0);
    for (int i = 1; i < n; ++i) {
      left[i] = left[i - 1] +
                0.5 * h * ((r[i - 1] - M.lo) * rhs[i - 1] +
                           (r[i] - M.lo) * rhs[i]);
    }
    for (int i = n - 2; i >= 0; --i) {
      right[i] = right[i + 1] +
                 0.5 * h * ((M.hi - r[i + 1]) * rhs[i + 1] +
                            (M.hi - r[i]) * rhs[i]);
    }
    std::vector<double> anew(n);
    for (int i = 0; i < n; ++i) {
      const double integral =
          ((M.hi - r[i]) * left[i] + (r[i] - M.lo) * right[i]) / M.width();
      const double lin = u + (r[i] - M.lo) / M.width() * (v - u);
      // Receiver best replies live in the action band; project the iterate
      // back before it can run away through a dead report zone.
      anew[i] = std::min(std::max(lin - integral, band.lo - 1e-9),
                         band.hi + 1e-9);
    }
    drift = 0.0;
    for (int i = 0; i < n; ++i) {
      const double mixed = (1.0 - damping) * a[i] + damping * anew[i];
      drift = std::max(drift, std::abs(mixed - a[i]));
      a[i] = mixed;
    }
    if (drift > drift_prev) {
      damping = std::max(0.02, 0.5 * damping);
      calm_streak = 0;
    } else if (++calm_streak >= 8) {
      damping = std::min(opts.picard_damping, 1.3 * damping);
      calm_streak = 0;
    }
    drift_prev = drift;
    SampledFunction af(r, a);
    for (int i = 0; i < n; ++i)
      p[i] = std::max(af.derivative(r[i]), p_floor);
  }
  // Monotonize against roundoff-flat stretches before building the rule.
  for (int i = 1; i < n; ++i)
    a[i] = std::max(a[i], a[i - 1] + 1e-13 * (1.0 + band.width()));
  BvpSolution sol;
  sol.rule = ActionRule(r, a, p, app);
  sol.telemetry.used_picard = true;
  const double scan_scale = boundary_scale(model) + 1e-300;
  sol.telemetry.boundary_residual =
      std::max(std::abs(boundary_F_plus(model, a.back(), p.back())),
               std::abs(boundary_F_minus(model, a.front(), p.front()))) /
      scan_scale;
  if (drift > 1e4 * tol)
    throw NoRegularEquilibrium(
        "Green-operator iteration did not settle (drift " +
        std::to_string(drift) + ")");
  return sol;
}

}  // namespace

BvpSolution solve_bvp(const ModelSpec& model, const BvpOptions& opts) {
  if (model.message_space.whole_line)
    throw InvalidSpec("solve_bvp needs a compact message space; use "
                      "solve_expanding for the whole line");
  const Interval M = model.message_space.interval;
  const Interval band = model.action_band();
  const double scale = boundary_scale(model) + 1e-300;
  const double p_ref = band.width() / M.width();

  // Coarse slope scan; any classification flip is a candidate bracket.
  std::vector<double> ps, signs, residuals;
  std::vector<bool> survived;
  ShotPath best_scan_shot;
  double best_scan_residual = 1e300;
  const int npts = opts.slope_scan_points;
  for (int i = 0; i < npts; ++i) {
    const double t = static_cast<double>(i) / (npts - 1);
    const double p0 = p_ref * opts.slope_scan_lo *
                      std::pow(opts.slope_scan_hi / opts.slope_scan_lo, t);
    const ShotPath path = integrate_shot(model, p0, opts);
    if (path.status == ShotStatus::Invalid) continue;
    ps.push_back(p0);
    signs.push_back(path.classify_sign());
    survived.push_back(path.ok());
    residuals.push_back(path.ok() ? path.residual : 0.0);
    if (path.ok() && std::abs(path.residual) < best_scan_residual) {
      best_scan_residual = std::abs(path.residual);
      best_scan_shot = path;
    }
  }
  std::vector<std::pair<double, double>> brackets;
  for (std::size_t i = 0; i + 1 < ps.size(); ++i)
    if (signs[i] != signs[i + 1]) brackets.emplace_back(ps[i], ps[i + 1]);

  double scan_scale = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (survived[i]) scan_scale = std::max(scan_scale, std::abs(residuals[i]));
  if (scan_scale == 0.0) scan_scale = scale;

  // Collocation grid shared by every Newton polish.
  const int n_col = 385;
  std::vector<double> r_col(n_col);
  for (int i = 0; i < n_col; ++i)
    r_col[i] = (i + 1 == n_col) ? M.hi : M.lo + M.width() * i / (n_col - 1);
  auto polish = [&](const std::vector<double>& seed_r,
                    const std::vector<double>& seed_a,
                    BvpSolution& sol) -> bool {
    std::vector<double> a0(n_col);
    const SampledFunction sa(seed_r, seed_a);
    const Interval span{seed_r.front(), seed_r.back()};
    for (int i = 0; i < n_col; ++i) a0[i] = sa(span.clamp(r_col[i]));
    // A garbled boundary layer in a shot seed must not hand Newton negative
    // slopes.
    for (int i = 1; i < n_col; ++i) a0[i] = std::max(a0[i], a0[i - 1]);
    const CollocationResult res =
        newton_collocation(model, opts, r_col, std::move(a0));
    if (!res.converged) return false;
    std::vector<double> a_mono = res.a;
    const double bump = 1e-13 * (1.0 + model.action_band().width());
    for (int i = 1; i < n_col; ++i)
      a_mono[i] = std::max(a_mono[i], a_mono[i - 1] + bump);
    sol.rule = ActionRule(r_col, a_mono, res.p, res.app);
    sol.telemetry.boundary_residual = res.residual_norm;
    sol.telemetry.communication_cost =
        communication_cost(sol.rule.rule(), model);
    return true;
  };

  std::vector<BvpSolution> roots;
  for (auto [plo, phi] : brackets) {
    // Drill by sign bisection until both endpoints survive to the far
    // boundary, then hand the genuine residual to the root finder.
    double slo = 0.0, shi = 0.0;
    bool ok_lo = false, ok_hi = false;
    for (int k = 0; k < 80 && !(ok_lo && ok_hi); ++k) {
      const ShotPath lo_path = integrate_shot(model, plo, opts);
      const ShotPath hi_path = integrate_shot(model, phi, opts);
      ok_lo = lo_path.ok();
      ok_hi = hi_path.ok();
      slo = lo_path.classify_sign();
      shi = hi_path.classify_sign();
      if (ok_lo && ok_hi) break;
      const double mid = 0.5 * (plo + phi);
      const ShotPath mid_path = integrate_shot(model, mid, opts);
      if (mid_path.status == ShotStatus::Invalid) break;
      if (mid_path.classify_sign() == slo)
        plo = mid;
      else
        phi = mid;
      if (phi - plo < 1e-13 * (1.0 + phi)) break;
    }
    if (!(ok_lo && ok_hi) || slo == shi) continue;
    double p_root;
    try {
      p_root = find_root(
          [&](double p0) {
            const ShotPath path = integrate_shot(model, p0, opts);
            if (!path.ok())
              return path.classify_sign() * 10.0 * scan_scale;
            return path.residual;
          },
          Interval{plo, phi}, opts.boundary_tol * scan_scale);
    } catch (const SolverError&) {
      continue;
    }
    const ShotPath path = integrate_shot(model, p_root, opts);
    if (!path.ok()) continue;
    // The shot pins the bracket; the Newton polish repairs the boundary
    // layers the marching integration cannot resolve.
    BvpSolution sol;
    if (!polish(path.r, path.a, sol)) continue;
    sol.telemetry.stiff_steps = path.stiff_steps;
    roots.push_back(std::move(sol));
  }

  BvpSolution best;
  if (roots.empty()) {
    std::size_t n_collapsed = 0, n_valid = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ++n_valid;
      if (!survived[i] && signs[i] > 0.0) ++n_collapsed;
    }
    bool solved = false;
    if (best_scan_shot.ok()) {
      solved = polish(best_scan_shot.r, best_scan_shot.a, best);
      if (solved)
        best.telemetry.stiff_steps = best_scan_shot.stiff_steps;
    }
    if (!solved) {
      // Newton from the slaved branch, the attractor of the interior ODE.
      std::vector<double> sr = r_col, sa0(n_col);
      for (int i = 0; i < n_col; ++i)
        sa0[i] = slaved_action(model, r_col[i]);
      for (int i = 1; i < n_col; ++i)
        sa0[i] = std::max(sa0[i], sa0[i - 1] + 1e-12);
      solved = polish(sr, sa0, best);
    }
    if (solved) {
    } else if (n_valid > 0 && n_collapsed >= (4 * n_valid) / 5 &&
               [&] {
                 // Babbling must also be interior-consistent: the Bayes
                 // residual of a flat rule at the prior-optimal action
                 // vanishes only when the anchor carries no information.
                 double a0_try;
                 try {
                   a0_try = find_root(
                       [&](double a_try) {
                         return quadrature(
                             [&](double th) {
                               return model.payoffs.receiver().d_a(a_try,
                                                                   th) *
                                      model.prior.density(th);
                             },
                             model.theta_support(), 256);
                       },
                       Interval{band.lo - 1e-9, band.hi + 1e-9}, 1e-12);
                 } catch (const SolverError&) {
                   return false;
                 }
                 const double eps_p = 1e-9 * (1.0 + band.width());
                 double worst = 0.0;
                 for (int i = 1; i <= 8; ++i) {
                   const double r = M.lo + M.width() * i / 9.0;
                   const OdeCoefficients co = ode_coefficients(
                       r, a0_try, eps_p, model, opts.theta_nodes,
                       opts.stiffness_floor);
                   if (co.weight > 0.0)
                     worst = std::max(worst,
                                      std::abs(co.B / co.weight));
                 }
                 return worst < 1e-3 * (1.0 + band.width());
               }()) {
      // Every shot's slope decays through zero and flat-at-babbling is
      // Bayes-consistent: the regular branch is degenerate here.
      double a0;
      try {
        // Prior-optimal action: root of E[U^R_1(a, theta)].
        a0 = find_root(
            [&](double a_try) {
              return quadrature(
                  [&](double th) {
                    return model.payoffs.receiver().d_a(a_try, th) *
                           model.prior.density(th);
                  },
                  model.theta_support(), 256);
            },
            Interval{band.lo - 1e-9, band.hi + 1e-9}, 1e-12);
      } catch (const SolverError&) {
        a0 = 0.5 * (band.lo + band.hi);
      }
      const int n = 65;
      std::vector<double> r(n), a(n), p(n), app(n, 0.0);
      const double eps = 1e-9 * (1.0 + band.width());
      for (int i = 0; i < n; ++i) {
        r[i] = M.lo + M.width() * i / (n - 1);
        a[i] = a0 + eps * (r[i] - M.mid());
        p[i] = eps;
      }
      best.rule = ActionRule(r, a, p, app);
      best.telemetry.boundary_residual =
          std::abs(boundary_F_plus(model, a0, eps)) / scale;
      best.telemetry.communication_cost = 0.0;
      best.telemetry.candidate_roots = 0;
    } else if (opts.allow_picard_fallback) {
      best = picard_fallback(model, opts, nullptr);
      best.telemetry.communication_cost =
          communication_cost(best.rule.rule(), model);
    } else {
      throw NoRegularEquilibrium("no admissible slope bracket on the scan");
    }
  } else {
    // Least-cost selection among the bracketed roots.
    std::size_t pick = 0;
    for (std::size_t i = 1; i < roots.size(); ++i)
      if (roots[i].telemetry.communication_cost <
          roots[pick].telemetry.communication_cost)
        pick = i;
    best = std::move(roots[pick]);
    best.telemetry.candidate_roots = static_cast<int>(roots.size());
  }

  double worst = 0.0;
  const Interval Mi = best.rule.domain();
  for (int i = 1; i <= 32; ++i) {
    const double r = Mi.lo + Mi.width() * i / 33.0;
    worst = std::max(worst, bayes_residual(best.rule, model, r));
  }
  best.telemetry.bayes_residual_max = worst;
  return best;
}

ExpandingSolution solve_expanding(const ModelSpec& model,
                                  const std::vector<double>& half_widths,
                                  const BvpOptions& opts) {
  ExpandingSolution out;
  out.half_widths = half_widths;
  for (double L : half_widths) {
    ModelSpec m = model;
    m.message_space = MessageSpace::compact({-L, L});
    out.solutions.push_back(solve_bvp(m, opts));
  }
  if (out.solutions.size() >= 2) {
    const double core = 0.5 * half_widths.front();
    const auto& last = out.solutions[out.solutions.size() - 1].rule;
    const auto& prev = out.solutions[out.solutions.size() - 2].rule;
    double drift = 0.0;
    for (int i = 0; i <= 32; ++i) {
      const double r = -core + 2.0 * core * i / 32.0;
      drift = std::max(drift, std::abs(last(r) - prev(r)));
    }
    out.central_drift = drift;
  }
  return out;
}

double bayes_residual(const ActionRule& rule, const ModelSpec& model, double r,
                      int n_theta) {
  const double a_val = rule(r);
  const double p = rule.slope(r);
  const double app = rule.curvature_spline(r);
  const auto& recv = model.payoffs.receiver();
  double num = 0.0, den = 0.0;
  const Interval window = likelihood_window(model, r, a_val, p);
  if (!(window.width() > 0.0))
    return std::numeric_limits<double>::infinity();
  const Grid g = Grid::gauss_legendre(window, n_theta);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double th = g.nodes[i];
    const double ba = inverse_anchor(r, th, a_val, p, model);
    const double jac = inverse_anchor_jacobian(r, th, a_val, p, app, model);
    const double w = model.prior.density(th) *
                     model.anchor.density(ba, th) * std::max(jac, 0.0) *
                     g.weights[i];
    num += recv.d_a(a_val, th) * w;
    den += w;
  }
  if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
  return std::abs(num) / den;
}

// ---------------------------------------------------------------------------
// Cost floor and the deterministic separating rule

CostFloorObjects cost_floor(const ModelSpec& model, int n_nodes) {
  const Interval sup = model.theta_support();
  const auto& send = model.payoffs.sender();
  auto T_at = [&](double th) {
    const double ar = ideal_action_receiver(model, th);
    return send.d_a(ar, th) * ideal_action_receiver_slope(model, th);
  };
  std::vector<double> th(n_nodes), tv(n_nodes), gv(n_nodes, 0.0);
  const double h = sup.width() / (n_nodes - 1);
  for (int i = 0; i < n_nodes; ++i) {
    th[i] = (i + 1 == n_nodes) ? sup.hi : sup.lo + i * h;
    tv[i] = T_at(th[i]);
  }
  for (int i = 1; i < n_nodes; ++i)
    gv[i] = gv[i - 1] + quadrature(T_at, Interval{th[i - 1], th[i]}, 8);

  CostFloorObjects out;
  out.T = SampledFunction(th, tv);
  out.Gamma = SampledFunction(th, gv);
  out.expected_Gamma = quadrature(
      [&](double t) { return out.Gamma(t) * model.prior.density(t); }, sup,
      512);
  const double fubini = quadrature(
      [&](double u) { return (1.0 - model.prior.cdf(u)) * T_at(u); }, sup,
      512);
  out.fubini_residual = std::abs(out.expected_Gamma - fubini);
  return out;
}

SampledFunction separating_rho(const ModelSpec& model, double c, int steps) {
  const Interval sup = model.theta_support();
  const CostFloorObjects floor = cost_floor(model, 401);
  for (double t : floor.T.values())
    if (!(t > 0.0))
      throw AssumptionViolation("T(theta) must be positive for the "
                                "separating rule");
  const CostSpec cost = model.cost.with_scale(c);
  auto rhs = [&](double r, double th) {
    const double u = r - model.anchor.b0(std::min(th, sup.hi));
    return c * cost.phi_prime(u) / floor.T(std::min(th, sup.hi));
  };
  // Range estimate from c*phi(rho - b0) <= Gamma.
  const double gmax = floor.Gamma(sup.hi);
  double dmax = 1.0;
  while (c * cost.phi(dmax) < gmax && dmax < 1e9) dmax *= 2.0;
  const double r0 = model.anchor.b0(sup.lo);
  const double r_cap = model.anchor.b0(sup.hi) + 2.0 * dmax + 1.0;
  const double h = (r_cap - r0) / steps;

  std::vector<double> rs{r0}, ths{sup.lo};
  double r = r0, th = sup.lo;
  // The inverse form is non-singular but becomes stiff when c is large;
  // substep so the local Lipschitz rate stays resolved.
  auto rk4_step = [&](double r_in, double th_in, double hh) {
    const double k1 = rhs(r_in, th_in);
    const double k2 = rhs(r_in + 0.5 * hh, th_in + 0.5 * hh * k1);
    const double k3 = rhs(r_in + 0.5 * hh, th_in + 0.5 * hh * k2);
    const double k4 = rhs(r_in + hh, th_in + hh * k3);
    return th_in + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  };
  auto advance = [&](double r_in, double th_in, double hh) {
    const double u = r_in - model.anchor.b0(std::min(th_in, sup.hi));
    const double lam = c * cost.phi_second(u) *
                       std::abs(model.anchor.b0_prime(
                           std::min(th_in, sup.hi))) /
                       floor.T(std::min(th_in, sup.hi));
    const int nsub =
        std::min(20000, std::max(1, static_cast<int>(hh * lam / 0.2) + 1));
    double rr = r_in, tt = th_in;
    const double hs = hh / nsub;
    for (int k = 0; k < nsub; ++k) {
      tt = rk4_step(rr, tt, hs);
      rr += hs;
    }
    return tt;
  };
  for (int i = 0; i < steps * 4 && th < sup.hi; ++i) {
    double th_next = advance(r, th, h);
    double r_next = r + h;
    if (th_next >= sup.hi) {
      // Final partial step: land exactly on the upper state by bisection.
      double lo = 0.0, hi = h;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (advance(r, th, mid) < sup.hi)
          lo = mid;
        else
          hi = mid;
      }
      r_next = r + hi;
      th_next = sup.hi;
    }
    r = r_next;
    th = th_next;
    if (th > ths.back() + 1e-14 * (1.0 + std::abs(th))) {
      rs.push_back(r);
      ths.push_back(th);
    }
  }
  if (th < sup.hi)
    throw AssumptionViolation("separating rule did not reach the top state");
  // Invert (r, theta) samples into rho(theta).
  return SampledFunction(std::move(ths), std::move(rs));
}

SampledFunction separating_cost_profile(const ModelSpec& model, double c,
                                        int steps) {
  const SampledFunction rho = separating_rho(model, c, steps);
  const CostSpec cost = model.cost.with_scale(c);
  std::vector<double> th = rho.nodes(), y(th.size());
  for (std::size_t i = 0; i < th.size(); ++i)
    y[i] = c * cost.phi(rho.values()[i] - model.anchor.b0(th[i]));
  return SampledFunction(std::move(th), std::move(y));
}

// ---------------------------------------------------------------------------
// Sender best responses and the communication-cost functional

double dominance_bound(const ModelSpec& model) {
  const Interval band = model.action_band();
  const Interval sup = model.theta_support();
  const auto& send = model.payoffs.sender();
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i <= 16; ++i) {
    for (int j = 0; j <= 16; ++j) {
      const double a = band.lo + band.width() * i / 16.0;
      const double t = sup.lo + sup.width() * j / 16.0;
      const double v = send.value(a, t);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  double kappa_floor = 1e300;
  for (int i = 0; i <= 40; ++i)
    kappa_floor =
        std::min(kappa_floor, model.cost.phi_second(-10.0 + 0.5 * i));
  kappa_floor = std::max(kappa_floor, 1e-8);
  const double range = std::max(hi - lo, 1e-12);
  return std::sqrt(2.0 * range / (model.cost.c() * kappa_floor)) + 1e-6;
}

double best_report_foc(const ReceiverRule& rule, const ModelSpec& model,
                       double theta, double b, double K) {
  const auto& send = model.payoffs.sender();
  const double c = model.cost.c();
  double lo = b - K, hi = b + K;
  if (rule.compact) {
    lo = std::max(lo, rule.domain.lo);
    hi = std::min(hi, rule.domain.hi);
    if (!(lo < hi)) return rule.domain.clamp(b);
  }
  auto deriv = [&](double r) {
    return send.d_a(rule(r), theta) * rule.slope(r) -
           c * model.cost.phi_prime(r - b);
  };
  const double dlo = deriv(lo), dhi = deriv(hi);
  if (dlo <= 0.0 && dhi <= 0.0) return lo;
  if (dlo >= 0.0 && dhi >= 0.0) return hi;
  if (dlo > 0.0 && dhi < 0.0)
    return find_root(deriv, Interval{lo, hi}, 1e-10);
  // Derivative shape inconsistent with strict concavity: fall back to a
  // golden-section search of the objective itself.
  return golden_max(
      [&](double r) {
        return send.value(rule(r), theta) - c * model.cost.phi(r - b);
      },
      Interval{lo, hi}, 1e-10);
}

double communication_cost(const ReceiverRule& rule, const ModelSpec& model,
                          int n_theta, int n_b) {
  const double K = dominance_bound(model);
  const double c = model.cost.c();
  const Grid gth = Grid::gauss_legendre(model.theta_support(), n_theta);
  double total = 0.0;
  for (std::size_t i = 0; i < gth.size(); ++i) {
    const double th = gth.nodes[i];
    const double fw = model.prior.density(th) * gth.weights[i];
    const double b0 = model.anchor.b0(th);
    const double s = model.anchor.sigma();
    const Grid gb = Grid::gauss_legendre({b0 - 8.0 * s, b0 + 8.0 * s}, n_b);
    double inner = 0.0;
    for (std::size_t j = 0; j < gb.size(); ++j) {
      const double b = gb.nodes[j];
      const double r = best_report_foc(rule, model, th, b, K);
      inner += model.anchor.density(b, th) * c * model.cost.phi(r - b) *
               gb.weights[j];
    }
    total += fw * inner;
  }
  return total;
}

}  // namespace anchored
