#include "anchored/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace anchored {

void Interval::require_valid(const char* who) const {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidSpec(std::string(who) + " requires lo < hi, got [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre

void gauss_legendre_reference(int n, std::vector<double>& nodes,
                              std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev estimate, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;  // kill the -0.0 from symmetry
}

namespace {

const std::pair<const std::vector<double>&, const std::vector<double>&>
reference_rule(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>>
      cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<double> x, w;
    gauss_legendre_reference(n, x, w);
    it = cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first;
  }
  return {it->second.first, it->second.second};
}

constexpr int kPanelNodes = 16;

}  // namespace

Grid Grid::gauss_legendre(const Interval& iv, int n) {
  iv.require_valid("Grid::gauss_legendre");
  if (n < 2) throw InvalidSpec("gauss_legendre grid needs n >= 2");
  const int per_panel = std::min(n, kPanelNodes);
  const int panels = (n + per_panel - 1) / per_panel;
  auto [xr, wr] = reference_rule(per_panel);
  Grid g;
  g.covered = iv;
  g.nodes.reserve(static_cast<std::size_t>(panels) * per_panel);
  g.weights.reserve(g.nodes.capacity());
  const double h = iv.width() / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = iv.lo + p * h;
    const double c = a + 0.5 * h, s = 0.5 * h;
    for (int i = 0; i < per_panel; ++i) {
      g.nodes.push_back(c + s * xr[i]);
      g.weights.push_back(s * wr[i]);
    }
  }
  return g;
}

Grid Grid::uniform(const Interval& iv, int n) {
  iv.require_valid("Grid::uniform");
  if (n < 2) throw InvalidSpec("uniform grid needs n >= 2");
  Grid g;
  g.covered = iv;
  g.nodes.resize(n);
  g.weights.assign(n, iv.width() / (n - 1));
  const double h = iv.width() / (n - 1);
  for (int i = 0; i < n; ++i) g.nodes[i] = iv.lo + i * h;
  g.nodes.back() = iv.hi;
  g.weights.front() *= 0.5;
  g.weights.back() *= 0.5;
  return g;
}

void Grid::require_valid() const {
  if (nodes.size() != weights.size() || nodes.size() < 2)
    throw InvalidSpec("grid nodes/weights size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i + 1 < nodes.size() && !(nodes[i] < nodes[i + 1]))
      throw InvalidSpec("grid nodes not strictly increasing");
    if (!(weights[i] > 0.0)) throw InvalidSpec("grid weight not positive");
    sum += weights[i];
  }
  const double len = covered.width();
  if (std::abs(sum - len) > 1e-11 * std::max(1.0, len))
    throw InvalidSpec("grid weights do not sum to interval length");
}

double quadrature(const Fn1& f, const Grid& grid) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const double v = f(grid.nodes[i]);
    if (!std::isfinite(v))
      throw NonFiniteIntegrand("f(" + std::to_string(grid.nodes[i]) +
                               ") is not finite");
    acc += grid.weights[i] * v;
  }
  return acc;
}

double quadrature(const Fn1& f, const Interval& iv, int n) {
  return quadrature(f, Grid::gauss_legendre(iv, n));
}

double quadrature_adaptive(const Fn1& f, const Interval& iv, double rel_tol,
                           int n_start, int n_max) {
  double prev = quadrature(f, iv, n_start);
  for (int n = 2 * n_start; n <= n_max; n *= 2) {
    const double cur = quadrature(f, iv, n);
    if (std::abs(cur - prev) <= rel_tol * (1.0 + std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

// ---------------------------------------------------------------------------
// Root finding

double find_root(const Fn1& f, Interval bracket, double tol) {
  bracket.require_valid("find_root");
  double a = bracket.lo, b = bracket.hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw NoSignChange("f has the same sign at both bracket endpoints");
  double width_two_ago = b - a;
  for (int iter = 0; iter < 200; ++iter) {
    // Secant proposal, clipped into the bracket; forced bisection when the
    // bracket stops contracting (secant stagnates on lopsided functions).
    double x = b - fb * (b - a) / (fb - fa);
    const double lo = a + 0.25 * tol, hi = b - 0.25 * tol;
    const bool stagnant = (iter >= 2) && (b - a) > 0.5 * width_two_ago;
    if (stagnant || !(x > lo && x < hi) || !std::isfinite(x))
      x = 0.5 * (a + b);
    if (iter % 2 == 0) width_two_ago = b - a;
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (fa > 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    if (std::abs(fx) <= tol || (b - a) <= tol) {
      // Tie toward the lower endpoint of the final bracket.
      return std::abs(fa) <= std::abs(fb) ? a : b;
    }
  }
  return 0.5 * (a + b);
}

double golden_max(const Fn1& f, Interval bracket, double tol) {
  bracket.require_valid("golden_max");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = bracket.lo, b = bracket.hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// Normal distribution

double normal_pdf(double x) {
  static const double kInvSqrt2Pi = 0.3989422804014326779399461;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

std::pair<double, double> normal_pdf_cdf(double x) {
  return {normal_pdf(x), normal_cdf(x)};
}

// ---------------------------------------------------------------------------
// RNG

namespace {
inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

RngStream::RngStream(std::uint64_t seed_, std::uint64_t stream_id_)
    : seed(seed_), stream_id(stream_id_) {
  // Decorrelate (seed, stream_id) pairs before use.
  std::uint64_t s = seed_;
  std::uint64_t a = splitmix64(s);
  s ^= stream_id_ * 0xda942042e4dd58b5ULL;
  std::uint64_t b = splitmix64(s);
  state_ = a ^ (b + 0x9e3779b97f4a7c15ULL);
  for (int i = 0; i < 2; ++i) splitmix64(state_);
}

std::uint64_t RngStream::next_u64() { return splitmix64(state_); }

double RngStream::uniform01() {
  // 53 random bits in (0,1); never exactly 0.
  return ((next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double RngStream::uniform(double a, double b) {
  return a + (b - a) * uniform01();
}

double RngStream::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::pair<double, double> RngStream::normal_antithetic() {
  const double z = normal();
  return {z, -z};
}

// ---------------------------------------------------------------------------
// SampledFunction

SampledFunction::SampledFunction(std::vector<double> nodes,
                                 std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  if (nodes_.size() != values_.size() || nodes_.size() < 2)
    throw InvalidSpec("SampledFunction needs matching nodes/values, >= 2");
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
    if (!(nodes_[i] < nodes_[i + 1]))
      throw InvalidSpec("SampledFunction nodes must strictly increase");
  build_slopes();
}

SampledFunction::SampledFunction(std::vector<double> nodes,
                                 std::vector<double> values,
                                 std::vector<double> derivative_values)
    : SampledFunction(std::move(nodes), std::move(values)) {
  if (derivative_values.size() != nodes_.size())
    throw InvalidSpec("derivative_values length mismatch");
  slopes_ = std::move(derivative_values);
  slopes_supplied_ = true;
}

SampledFunction SampledFunction::sample(const Fn1& f, const Interval& iv,
                                        int n) {
  iv.require_valid("SampledFunction::sample");
  std::vector<double> x(n), y(n);
  const double h = iv.width() / (n - 1);
  for (int i = 0; i < n; ++i) {
    x[i] = (i + 1 == n) ? iv.hi : iv.lo + i * h;
    y[i] = f(x[i]);
  }
  return SampledFunction(std::move(x), std::move(y));
}

SampledFunction SampledFunction::cubic_spline(std::vector<double> nodes,
                                              std::vector<double> values) {
  SampledFunction f(std::move(nodes), std::move(values));
  const auto& x = f.nodes_;
  const auto& y = f.values_;
  const std::size_t n = x.size();
  if (n == 2) return f;
  // Tridiagonal system for the knot derivatives of the natural spline.
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  std::vector<double> diag(n), upper(n - 1), rhs(n);
  diag[0] = 2.0;
  upper[0] = 1.0;
  rhs[0] = 3.0 * d[0];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    upper[i] = h[i - 1];
    rhs[i] = 3.0 * (h[i] * d[i - 1] + h[i - 1] * d[i]);
  }
  diag[n - 1] = 2.0;
  rhs[n - 1] = 3.0 * d[n - 2];
  // Thomas solve; the lower diagonal is h[i] for interior rows, 1 at the end.
  std::vector<double> c(n - 1);
  c[0] = upper[0] / diag[0];
  rhs[0] /= diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double lower = (i + 1 == n) ? 1.0 : h[i];
    const double m = diag[i] - lower * c[i - 1];
    if (i + 1 < n) c[i] = upper[i] / m;
    rhs[i] = (rhs[i] - lower * rhs[i - 1]) / m;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  f.slopes_ = std::move(rhs);
  f.slopes_supplied_ = true;
  return f;
}

void SampledFunction::build_slopes() {
  const std::size_t n = nodes_.size();
  std::vector<double> d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    d[i] = (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
  slopes_.assign(n, 0.0);
  // Three-point endpoint slopes with the usual shape limiter.
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0))
      return 3.0 * d0;
    return m;
  };
  if (n == 2) {
    slopes_[0] = slopes_[1] = d[0];
  } else {
    slopes_[0] = end_slope(nodes_[1] - nodes_[0], nodes_[2] - nodes_[1],
                           d[0], d[1]);
    slopes_[n - 1] =
        end_slope(nodes_[n - 1] - nodes_[n - 2], nodes_[n - 2] - nodes_[n - 3],
                  d[n - 2], d[n - 3]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      slopes_[i] = 0.0;  // local extremum of the data
    } else {
      // Fritsch-Carlson weighted harmonic mean keeps monotone data monotone.
      const double w1 = 2.0 * (nodes_[i + 1] - nodes_[i]) +
                        (nodes_[i] - nodes_[i - 1]);
      const double w2 = (nodes_[i + 1] - nodes_[i]) +
                        2.0 * (nodes_[i] - nodes_[i - 1]);
      slopes_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
}

std::size_t SampledFunction::segment(double x) const {
  if (x <= nodes_.front()) return 0;
  if (x >= nodes_[nodes_.size() - 2]) return nodes_.size() - 2;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

double SampledFunction::operator()(double x) const {
  const std::size_t i = segment(x);
  const double h = nodes_[i + 1] - nodes_[i];
  const double t = (x - nodes_[i]) / h;
  const double y0 = values_[i], y1 = values_[i + 1];
  const double m0 = slopes_[i] * h, m1 = slopes_[i + 1] * h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 +
         (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
}

double SampledFunction::derivative(double x) const {
  const std::size_t i = segment(x);
  const double h = nodes_[i + 1] - nodes_[i];
  const double t = (x - nodes_[i]) / h;
  const double y0 = values_[i], y1 = values_[i + 1];
  const double m0 = slopes_[i] * h, m1 = slopes_[i + 1] * h;
  const double t2 = t * t;
  const double dy = (6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 +
                    (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1;
  return dy / h;
}

bool SampledFunction::strictly_increasing() const {
  for (std::size_t i = 0; i + 1 < values_.size(); ++i)
    if (!(values_[i] < values_[i + 1])) return false;
  return true;
}

double SampledFunction::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double SampledFunction::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> rk4_path(
    const std::function<double(double, double)>& f, double x0, double y0,
    double x1, int steps) {
  std::vector<std::pair<double, double>> out;
  out.reserve(steps + 1);
  out.emplace_back(x0, y0);
  const double h = (x1 - x0) / steps;
  double x = x0, y = y0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(x, y);
    const double k2 = f(x + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(x + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(x + h, y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    x = x0 + (i + 1) * h;
    out.emplace_back(x, y);
  }
  return out;
}

}  // namespace anchored
