#pragma once

#include "anchored/numerics.hpp"

namespace anchored {

// Receiver action rule as callables, the common currency between the
// closed-form, BVP, and hybrid solvers and the verification harness.
struct ReceiverRule {
  Fn1 a;
  Fn1 a_prime;
  Fn1 a_second;  // optional; defaults to 0 when absent
  bool compact{false};
  Interval domain{-1.0, 1.0};  // meaningful when compact

  double operator()(double r) const { return a(r); }
  double slope(double r) const { return a_prime(r); }
  double curvature(double r) const { return a_second ? a_second(r) : 0.0; }

  static ReceiverRule affine(double alpha, double intercept) {
    ReceiverRule r;
    r.a = [alpha, intercept](double x) { return alpha * x + intercept; };
    r.a_prime = [alpha](double) { return alpha; };
    r.a_second = [](double) { return 0.0; };
    return r;
  }

  static ReceiverRule constant(double a0) { return affine(0.0, a0); }
};

}  // namespace anchored
