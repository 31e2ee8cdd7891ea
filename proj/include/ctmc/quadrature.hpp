#pragma once

#include <functional>

namespace ctmc {

struct QuadratureTolerance {
    double absolute = 1e-10;
    double relative = 1e-8;
};

/// Adaptive integral of f over [a, b]; b may be +infinity and a may be
/// -infinity. Integrable endpoint singularities are handled by falling back
/// to a double-exponential rule when Gauss-Kronrod does not meet the
/// tolerance. Throws NumericalError naming the interval on failure.
double integrate(const std::function<double(double)>& f, double a, double b,
                 QuadratureTolerance tol = {});

/// Upper incomplete gamma function Gamma(a, x) for any real a and x > 0.
double upper_incomplete_gamma(double a, double x);

}  // namespace ctmc
