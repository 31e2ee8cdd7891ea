#include "ctmc/quadrature.hpp"

#include "ctmc/error.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace ctmc {

namespace {

bool acceptable(double err, double l1, QuadratureTolerance tol) {
    return std::isfinite(err) && err <= std::max(tol.absolute, tol.relative * l1);
}

[[noreturn]] void fail(double a, double b, double err) {
    std::ostringstream os;
    os << "quadrature failed on [" << a << ", " << b << "] (error estimate " << err << ")";
    throw NumericalError(os.str());
}

double finite_interval(const std::function<double(double)>& f, double a, double b,
                       QuadratureTolerance tol) {
    double err = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, 12, tol.relative, &err, &l1);
    if (acceptable(err, l1, tol)) return value;

    // Endpoint singularities (|y|^-s near a jump size of zero).
    boost::math::quadrature::tanh_sinh<double> ts;
    double ts_err = 0.0;
    double ts_l1 = 0.0;
    const double ts_value = ts.integrate(f, a, b, tol.relative, &ts_err, &ts_l1);
    if (acceptable(ts_err, ts_l1, tol)) return ts_value;
    fail(a, b, std::min(err, ts_err));
}

double half_line(const std::function<double(double)>& f, double a, QuadratureTolerance tol) {
    // Integrate a finite piece first so that a singularity at `a` is not
    // handed to the half-line rule.
    const double split = a + 1.0;
    const double head = finite_interval(f, a, split, tol);
    boost::math::quadrature::exp_sinh<double> es;
    double err = 0.0;
    double l1 = 0.0;
    const double tail = es.integrate([&](double t) { return f(split + t); }, 0.0,
                                     std::numeric_limits<double>::infinity(), tol.relative,
                                     &err, &l1);
    if (!acceptable(err, l1, tol)) fail(split, std::numeric_limits<double>::infinity(), err);
    return head + tail;
}

}  // namespace

static double integrate_checked(const std::function<double(double)>& f, double a, double b,
                         QuadratureTolerance tol);

double integrate(const std::function<double(double)>& f, double a, double b,
                 QuadratureTolerance tol) {
    try {
        return integrate_checked(f, a, b, tol);
    } catch (const NumericalError&) {
        throw;
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << "quadrature failed on [" << a << ", " << b << "]: " << e.what();
        throw NumericalError(os.str());
    }
}

static double integrate_checked(const std::function<double(double)>& f, double a, double b,
                         QuadratureTolerance tol) {
    if (!(a < b)) {
        if (a == b) return 0.0;
        return -integrate_checked(f, b, a, tol);
    }
    const bool lo_inf = std::isinf(a);
    const bool hi_inf = std::isinf(b);
    if (lo_inf && hi_inf) {
        return integrate_checked(f, a, 0.0, tol) + integrate_checked(f, 0.0, b, tol);
    }
    if (hi_inf) return half_line(f, a, tol);
    if (lo_inf) return half_line([&](double t) { return f(-t); }, -b, tol);
    return finite_interval(f, a, b, tol);
}

double upper_incomplete_gamma(double a, double x) {
    if (!(x > 0.0)) throw ValidationError("upper_incomplete_gamma needs x > 0");
    if (a > 0.0) return boost::math::tgamma(a, x);
    if (a == 0.0) return boost::math::expint(1, x);
    // Gamma(a, x) = (Gamma(a + 1, x) - x^a e^{-x}) / a
    return (upper_incomplete_gamma(a + 1.0, x) - std::pow(x, a) * std::exp(-x)) / a;
}

}  // namespace ctmc
