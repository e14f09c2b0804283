#pragma once

#include <functional>

namespace pdmdirac {

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Globally adaptive 7/15-point Gauss-Kronrod on a finite interval. Stops once
/// the summed error estimate is below abs_tol or the subdivision budget runs
/// out (converged = false; value then holds the partial estimate).
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                    int max_subdivisions = 4000);

}  // namespace pdmdirac
