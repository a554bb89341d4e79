#include "anchored/sturm.hpp"

#include <algorithm>
#include <cmath>

namespace anchored {

SLProblem SLProblem::from_density(const Fn1& density, const Interval& iv,
                                  int n_nodes) {
  SLProblem p;
  p.grid = Grid::uniform(iv, n_nodes);
  std::vector<double> qv(p.grid.size());
  for (std::size_t i = 0; i < p.grid.size(); ++i)
    qv[i] = density(p.grid.nodes[i]);
  p.q = SampledFunction(p.grid.nodes, std::move(qv));
  p.require_valid();
  return p;
}

void SLProblem::require_valid() const {
  for (double v : q.values())
    if (!(v > 0.0)) throw InvalidSpec("SL density must be positive on grid");
}

namespace {

// Symmetric tridiagonal C = B^{-1/2} A B^{-1/2} for the Neumann pair
// A v = lambda B v (A = stiffness with q at half nodes, B = lumped mass).
struct Tridiag {
  std::vector<double> diag, off;  // off[i] couples i and i+1
  std::size_t n() const { return diag.size(); }
};

Tridiag assemble(const SLProblem& p, std::vector<double>& bmass) {
  const auto& x = p.grid.nodes;
  const auto& qv = p.q.values();
  const std::size_t n = x.size();
  const double h = x[1] - x[0];
  std::vector<double> qhalf(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    qhalf[i] = 0.5 * (qv[i] + qv[i + 1]);

  bmass.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 * h : h;
    bmass[i] = qv[i] * w;
  }

  Tridiag C;
  C.diag.assign(n, 0.0);
  C.off.assign(n - 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double a_ii = 0.0;
    if (i > 0) a_ii += qhalf[i - 1] / h;
    if (i + 1 < n) a_ii += qhalf[i] / h;
    C.diag[i] = a_ii / bmass[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    C.off[i] = -(qhalf[i] / h) / std::sqrt(bmass[i] * bmass[i + 1]);
  return C;
}

void thomas_solve(const Tridiag& C, double shift, std::vector<double>& rhs) {
  const std::size_t n = C.n();
  std::vector<double> c(n - 1), dpr(n);
  dpr[0] = C.diag[0] - shift;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    c[i] = C.off[i] / dpr[i];
    dpr[i + 1] = C.diag[i + 1] - shift - C.off[i] * c[i];
  }
  for (std::size_t i = 1; i < n; ++i) rhs[i] -= c[i - 1] * rhs[i - 1];
  rhs[n - 1] /= dpr[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    rhs[i] = rhs[i] / dpr[i] - c[i] * rhs[i + 1];
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(std::vector<double>& y, double alpha, const std::vector<double>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double rayleigh(const Tridiag& C, const std::vector<double>& v) {
  const std::size_t n = C.n();
  double num = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double cv = C.diag[i] * v[i];
    if (i > 0) cv += C.off[i - 1] * v[i - 1];
    if (i + 1 < n) cv += C.off[i] * v[i + 1];
    num += v[i] * cv;
  }
  return num / dot(v, v);
}

// Smallest eigenpair orthogonal to the supplied (already orthonormal)
// deflation vectors, by shift-inverted power iteration.
std::pair<double, std::vector<double>> deflated_smallest(
    const Tridiag& C, const std::vector<std::vector<double>>& deflate,
    int max_iter, int* iterations_out = nullptr) {
  const std::size_t n = C.n();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = static_cast<double>(i) / n - 0.5;  // odd-ish start, hits v1
  auto project = [&](std::vector<double>& y) {
    for (const auto& w : deflate) axpy(y, -dot(w, y), w);
  };
  project(v);
  double nv = std::sqrt(dot(v, v));
  for (auto& e : v) e /= nv;

  const double scale = *std::max_element(C.diag.begin(), C.diag.end());
  const double shift = -1e-8 * scale;
  double lambda = rayleigh(C, v);
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<double> y = v;
    thomas_solve(C, shift, y);
    project(y);
    const double ny = std::sqrt(dot(y, y));
    if (!(ny > 0.0)) throw SpectralFailure("inverse iteration collapsed");
    for (auto& e : y) e /= ny;
    const double l_new = rayleigh(C, y);
    const double drift = std::abs(l_new - lambda);
    v.swap(y);
    lambda = l_new;
    if (drift <= 1e-14 * std::max(1.0, std::abs(l_new)) && it > 4) break;
  }
  if (iterations_out) *iterations_out = it;
  return {lambda, v};
}

}  // namespace

EigenResult eigen_first(const SLProblem& problem) {
  problem.require_valid();
  std::vector<double> bmass;
  const Tridiag C = assemble(problem, bmass);
  const std::size_t n = C.n();

  // Constant mode in the symmetrized coordinates: w0 ~ B^{1/2} 1.
  std::vector<double> w0(n);
  for (std::size_t i = 0; i < n; ++i) w0[i] = std::sqrt(bmass[i]);
  const double nw = std::sqrt(dot(w0, w0));
  for (auto& e : w0) e /= nw;

  EigenResult res;
  auto [l1, y1] = deflated_smallest(C, {w0}, 400, &res.iterations);
  auto [l2, y2] = deflated_smallest(C, {w0, y1}, 400);
  res.lambda1 = l1;
  res.lambda2 = l2;

  // Back to v = B^{-1/2} y, normalized in L^2(q), oriented increasing.
  std::vector<double> v(n);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = y1[i] / std::sqrt(bmass[i]);
    norm2 += v[i] * v[i] * bmass[i];
  }
  double s = (v.back() > v.front()) ? 1.0 : -1.0;
  for (auto& e : v) e *= s / std::sqrt(norm2);
  res.v1 = SampledFunction(problem.grid.nodes, std::move(v));
  return res;
}

double babbling_action(const ModelSpec& model) {
  const auto& recv = model.payoffs.receiver();
  const Interval sup = model.theta_support();
  auto expected_foc = [&](double a) {
    return quadrature(
        [&](double t) { return recv.d_a(a, t) * model.prior.density(t); },
        sup, 256);
  };
  const Interval band = model.action_band();
  return find_root(expected_foc, Interval{band.lo - 1e-9, band.hi + 1e-9},
                   1e-13);
}

namespace {

SLProblem anchor_marginal_problem(const ModelSpec& model, int grid_nodes) {
  const auto& an = model.anchor;
  // Uninformative anchor: the marginal of b is the scaled noise density
  // centered at the constant b0.
  const double mu = an.b0(model.theta_support().mid());
  const double s = an.sigma();
  const Interval iv{mu - 8.0 * s, mu + 8.0 * s};
  return SLProblem::from_density(
      [&an, mu, s](double b) { return an.noise_pdf((b - mu) / s) / s; }, iv,
      grid_nodes);
}

}  // namespace

Calibration critical_cost(const ModelSpec& model, int grid_nodes) {
  if (model.anchor.beta() != 0.0)
    throw InvalidSpec("critical_cost expects an uninformative anchor "
                      "(beta = 0)");
  Calibration cal;
  cal.a0 = babbling_action(model);
  const auto& recv = model.payoffs.receiver();
  const auto& send = model.payoffs.sender();
  const Interval sup = model.theta_support();
  auto ex = [&](const Fn1& g) {
    return quadrature([&](double t) { return g(t) * model.prior.density(t); },
                      sup, 512);
  };
  // E[U^R_1] = 0 at a0, so the raw product is the covariance.
  cal.A_cov = ex([&](double t) {
    return recv.d_a(cal.a0, t) * send.d_a(cal.a0, t);
  });
  cal.H_curv = -ex([&](double t) { return recv.d_aa(cal.a0, t); });
  if (!(cal.A_cov > 0.0))
    throw AlignmentViolation("Cov(U^R_1, U^S_1) at the babbling action is "
                             "not positive");
  if (!(cal.H_curv > 0.0))
    throw AssumptionViolation("E[-U^R_11] at the babbling action is not "
                              "positive");
  const SLProblem prob = anchor_marginal_problem(model, grid_nodes);
  const EigenResult eig = eigen_first(prob);
  cal.lambda1 = eig.lambda1;
  cal.gap = eig.lambda2 - eig.lambda1;
  cal.v1 = eig.v1;
  cal.c_star =
      cal.A_cov * cal.lambda1 / (cal.H_curv * model.cost.phi_second_at_zero());
  return cal;
}

KernelProbe bifurcation_kernel(const ModelSpec& model, double c_trial,
                               int grid_nodes) {
  const Calibration cal = critical_cost(model, grid_nodes);
  const SLProblem prob = anchor_marginal_problem(model, grid_nodes);
  const EigenResult eig = eigen_first(prob);
  const double phi2 = model.cost.phi_second_at_zero();
  const std::vector<double> lambdas{0.0, eig.lambda1, eig.lambda2};
  KernelProbe probe;
  probe.smallest_magnitude = 1e300;
  const double scale = cal.A_cov * std::max(1.0, eig.lambda2);
  for (double l : lambdas) {
    const double m = std::abs(cal.A_cov * l - c_trial * phi2 * cal.H_curv);
    probe.smallest_magnitude = std::min(probe.smallest_magnitude, m);
    if (m < 1e-9 * scale) ++probe.dimension;
  }
  return probe;
}

std::vector<SigmaSweepRow> small_sigma_sweep(
    double sigma_theta, double d, const std::vector<double>& sigma_sequence,
    double alpha_at_first) {
  if (sigma_sequence.empty())
    throw InvalidSpec("sigma sequence must be nonempty");
  std::vector<SigmaSweepRow> rows;
  const double s0 = sigma_sequence.front();
  for (double s : sigma_sequence) {
    SigmaSweepRow row;
    row.sigma = s;
    row.c = sigma_theta * sigma_theta / (s * s);
    row.alpha = alpha_at_first * (s0 / s) * (s0 / s);
    auto [eq, w] = uninformative_family(sigma_theta, row.c, d, row.alpha);
    row.posterior_var = w.posterior_var;
    row.W_R = w.W_R;
    row.reporting_cost = w.expected_distortion_cost;
    row.bias_cost_part = d * d * row.alpha * row.alpha / (2.0 * row.c);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace anchored
