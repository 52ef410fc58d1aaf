#pragma once

#include <functional>
#include <span>
#include <vector>

namespace collide1d {

struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  // Densities below this are treated as negligible when choosing cut points.
  double tail_cut = 1e-16;
  unsigned max_depth = 18;
  // Reported error may exceed the requested tolerance by this factor before
  // the integral is declared non-convergent.
  double failure_slack = 1e3;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (21 point) on [a, b]; either end may be infinite.
double integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg = {});

/// Sum of integrals over consecutive breakpoints. Breakpoints need not be
/// sorted or unique; the first and last may be infinite.
double integrate_pieces(const Integrand& f, std::vector<double> breakpoints,
                        const QuadratureConfig& cfg = {});

/// Integral over the whole real line, split at `center + scale * k` for a
/// fixed set of k plus any extra breakpoints.
double integrate_line(const Integrand& f, double center, double scale,
                      std::span<const double> extra_breaks = {},
                      const QuadratureConfig& cfg = {});

/// Integral over the real line of g(w) |w|^{-alpha} for alpha in (0, 1).
/// On [-1, 1] the substitution u = |w|^{1-alpha} removes the singularity.
double integrate_singular_weight(const Integrand& g, double alpha, double scale = 1.0,
                                 std::span<const double> extra_breaks = {},
                                 const QuadratureConfig& cfg = {});

}  // namespace collide1d
