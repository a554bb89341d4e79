#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "anchored/errors.hpp"

namespace anchored {

using Fn1 = std::function<double(double)>;

struct Interval {
  double lo{0.0};
  double hi{1.0};

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
  void require_valid(const char* who = "Interval") const;
};

// Quadrature grid: strictly increasing nodes, positive weights that sum to
// the interval length.
struct Grid {
  std::vector<double> nodes;
  std::vector<double> weights;
  Interval covered{0.0, 1.0};  // the interval the weights integrate over

  std::size_t size() const { return nodes.size(); }
  Interval span() const { return covered; }

  // Composite Gauss-Legendre: panels of up to 16 nodes covering `iv`,
  // `n` total nodes (rounded up to a whole number of panels).
  static Grid gauss_legendre(const Interval& iv, int n);
  // Equally spaced nodes with trapezoid weights (finite-difference grids).
  static Grid uniform(const Interval& iv, int n);

  void require_valid() const;
};

// Raw Gauss-Legendre rule on [-1,1]; exposed for reuse and tested against
// polynomial exactness.
void gauss_legendre_reference(int n, std::vector<double>& nodes,
                              std::vector<double>& weights);

double quadrature(const Fn1& f, const Interval& iv, int n);
double quadrature(const Fn1& f, const Grid& grid);
// Panel-doubling until successive estimates agree to rel_tol.
double quadrature_adaptive(const Fn1& f, const Interval& iv,
                           double rel_tol = 1e-10, int n_start = 32,
                           int n_max = 1 << 16);

// Hybrid secant/bisection with a maintained bracket. Requires a sign change;
// ties broken toward the lower endpoint.
double find_root(const Fn1& f, Interval bracket, double tol = 1e-12);

// Golden-section maximizer of a unimodal function.
double golden_max(const Fn1& f, Interval bracket, double tol = 1e-10);

double normal_pdf(double x);
double normal_cdf(double x);
std::pair<double, double> normal_pdf_cdf(double x);

// Counter-free splitmix64 stream: identical (seed, stream_id) reproduce the
// same sequence, and distinct streams are independent of draw order.
struct RngStream {
  std::uint64_t seed{0};
  std::uint64_t stream_id{0};

  RngStream() = default;
  RngStream(std::uint64_t seed_, std::uint64_t stream_id_);

  std::uint64_t next_u64();
  double uniform01();                    // in (0,1)
  double uniform(double a, double b);
  double normal();                       // standard normal, Box-Muller
  std::pair<double, double> normal_antithetic();  // (z, -z)

 private:
  std::uint64_t state_{0};
};

// Function sampled on a grid; evaluation by monotone (Fritsch-Carlson)
// cubic interpolation so strictly increasing data stay strictly increasing.
class SampledFunction {
 public:
  SampledFunction() = default;
  SampledFunction(std::vector<double> nodes, std::vector<double> values);
  SampledFunction(std::vector<double> nodes, std::vector<double> values,
                  std::vector<double> derivative_values);
  static SampledFunction sample(const Fn1& f, const Interval& iv, int n);
  // C2 natural cubic spline through the same data; preferred for smooth
  // densities where quadrature accuracy matters more than shape preservation.
  static SampledFunction cubic_spline(std::vector<double> nodes,
                                      std::vector<double> values);

  double operator()(double x) const;
  double derivative(double x) const;
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& derivative_values() const { return slopes_; }
  Interval domain() const { return {nodes_.front(), nodes_.back()}; }
  std::size_t size() const { return nodes_.size(); }

  bool strictly_increasing() const;
  double min_value() const;
  double max_value() const;

 private:
  std::size_t segment(double x) const;
  void build_slopes();

  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  bool slopes_supplied_{false};
};

// Classic fixed-step RK4 for y' = f(x, y), returning samples at each step.
std::vector<std::pair<double, double>> rk4_path(
    const std::function<double(double, double)>& f, double x0, double y0,
    double x1, int steps);

}  // namespace anchored
