#include "ctmc/model.hpp"

#include "ctmc/error.hpp"
#include "ctmc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ctmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
    if (!ok) throw ValidationError(what);
}

std::vector<double> sample_levels(double lower, double upper) {
    std::vector<double> xs;
    if (!(lower > 0.0)) lower = std::isfinite(upper) ? upper * 1e-2 : 1.0;
    if (!std::isfinite(upper)) upper = lower * 10.0;
    for (int k = 0; k < 5; ++k) xs.push_back(lower + (upper - lower) * k / 4.0);
    return xs;
}

// Power-law exponent s of g(x, y) ~ |y|^-s as y -> 0 on one side; 0 when the
// density stays bounded and -inf when it vanishes near zero.
double probe_exponent(const JumpDensity& j, double x, double sign) {
    const double near = j.density(x, sign * 1e-8);
    const double far = j.density(x, sign * 1e-6);
    if (!(far > 0.0) || !(near > 0.0)) return -kInf;
    return std::log(near / far) / std::log(100.0);
}

}  // namespace

std::string to_string(JumpCase c) {
    switch (c) {
        case JumpCase::O: return "O";
        case JumpCase::I: return "I";
        case JumpCase::II: return "II";
        default: return "unclassified";
    }
}

double JumpDensity::cell_moment(double x, double a, double b, int p) const {
    require(p >= 0 && p <= 2, "cell_moment supports p in {0, 1, 2}");
    a = std::max(a, -1.0);
    if (!(a < b)) return 0.0;
    auto f = [&](double y) {
        const double g = density(x, y);
        return p == 0 ? g : std::pow(std::abs(y), p) * g;
    };
    if (a < 0.0 && b > 0.0) return integrate(f, a, 0.0) + integrate(f, 0.0, b);
    return integrate(f, a, b);
}

void JumpDensity::cell_masses(double x, std::span<const double> edges,
                              std::span<double> out) const {
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) out[j] = cell_moment(x, edges[j], edges[j + 1], 0);
}

double JumpDensity::second_moment(double x) const {
    return cell_moment(x, -1.0, 0.0, 2) + cell_moment(x, 0.0, kInf, 2);
}

std::optional<CaseInfo> JumpDensity::declared_case(double, double) const { return std::nullopt; }

double ModelSpec::local_variance(double x) const {
    if (!sigma) return 0.0;
    const double s = sigma(x) * x;
    return std::isfinite(s) ? s * s : 0.0;
}

ModelSpec gbm(double sigma0, double r, double d) {
    require(sigma0 > 0.0, "gbm: sigma0 must be positive");
    ModelSpec m;
    m.name = "gbm";
    m.gamma = r - d;
    m.sigma = [sigma0](double) { return sigma0; };
    return m;
}

ModelSpec local_vol(double sigma0, double beta, double reference, double r, double d) {
    require(sigma0 >= 0.0 && reference > 0.0, "local_vol: need sigma0 >= 0 and reference > 0");
    ModelSpec m;
    m.name = "localvol";
    m.gamma = r - d;
    m.sigma = [=](double x) { return sigma0 * std::pow(x / reference, beta); };
    return m;
}

double kou_zeta(double p, double eta1, double eta2) {
    return p * eta1 / (eta1 - 1.0) + (1.0 - p) * eta2 / (eta2 + 1.0) - 1.0;
}

ModelSpec kou_local_levy(const KouLocalLevyParams& p) {
    require(p.eta1 > 2.0, "kou_local: eta1 must exceed 2 (finite second jump moment)");
    require(p.eta2 > 0.0, "kou_local: eta2 must be positive");
    require(p.p >= 0.0 && p.p <= 1.0, "kou_local: p must lie in [0, 1]");
    require(p.lambda >= 0.0, "kou_local: lambda must be nonnegative");
    require(p.S0 > 0.0 && p.sigma0 >= 0.0, "kou_local: need S0 > 0 and sigma0 >= 0");
    ModelSpec m;
    m.name = "kou_local";
    m.gamma = p.r - p.d;
    const double s0 = p.S0, sig = p.sigma0, beta = p.beta;
    m.sigma = [=](double x) { return sig * std::pow(x / s0, beta); };
    if (p.lambda > 0.0) {
        m.jumps = std::make_shared<KouJumps>(p.lambda, p.p, p.eta1, p.eta2, p.S0, p.beta);
    }
    return m;
}

ModelSpec cgmy(const CgmyParams& p) {
    require(p.C >= 0.0 && p.G >= 0.0, "cgmy: need C >= 0 and G >= 0");
    require(p.M > 2.0, "cgmy: M must exceed 2 (finite second relative-jump moment)");
    require(p.Y < 2.0, "cgmy: Y must be below 2");
    require(p.sigma_extra >= 0.0, "cgmy: sigma_extra must be nonnegative");
    ModelSpec m;
    m.name = "cgmy";
    m.gamma = p.r - p.d;
    const double s = p.sigma_extra;
    m.sigma = [s](double) { return s; };
    if (p.C > 0.0) m.jumps = std::make_shared<CgmyJumps>(p.C, p.G, p.M, p.Y);
    return m;
}

// ---------------------------------------------------------------------------
// Kou

KouJumps::KouJumps(double lambda, double p, double eta1, double eta2, double S0, double beta)
    : lambda_(lambda), p_(p), eta1_(eta1), eta2_(eta2), S0_(S0), beta_(beta) {}

double KouJumps::scale(double x) const { return lambda_ * std::pow(x / S0_, beta_); }

double KouJumps::density(double x, double y) const {
    if (y <= -1.0 || y == 0.0) return 0.0;
    const double base = y > 0.0 ? p_ * eta1_ * std::pow(1.0 + y, -1.0 - eta1_)
                                : (1.0 - p_) * eta2_ * std::pow(1.0 + y, eta2_ - 1.0);
    return scale(x) * base;
}

double KouJumps::up_primitive(double y) const {
    return std::isinf(y) ? 0.0 : p_ * std::pow(1.0 + y, -eta1_);
}

double KouJumps::down_primitive(double y) const {
    return y <= -1.0 ? 0.0 : (1.0 - p_) * std::pow(1.0 + y, eta2_);
}

double KouJumps::cell_moment(double x, double a, double b, int p) const {
    if (p != 0) return JumpDensity::cell_moment(x, a, b, p);
    a = std::max(a, -1.0);
    if (!(a < b)) return 0.0;
    double mass = 0.0;
    if (a < 0.0) mass += down_primitive(std::min(b, 0.0)) - down_primitive(a);
    if (b > 0.0) mass += up_primitive(std::max(a, 0.0)) - up_primitive(b);
    return scale(x) * mass;
}

void KouJumps::cell_masses(double x, std::span<const double> edges, std::span<double> out) const {
    const double s = scale(x);
    // Cumulative mass below each edge (per unit scale), continuous at zero.
    const double below_zero = 1.0 - p_;
    auto cumulative = [&](double y) {
        if (y <= 0.0) return down_primitive(std::max(y, -1.0));
        return below_zero + (p_ - up_primitive(y));
    };
    double prev = cumulative(edges[0]);
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
        const double next = cumulative(edges[j + 1]);
        // Differencing the cumulative loses digits for far upper cells; use the
        // tail primitive there instead.
        if (edges[j] >= 0.0) {
            out[j] = s * (up_primitive(edges[j]) - up_primitive(edges[j + 1]));
        } else {
            out[j] = s * (next - prev);
        }
        prev = next;
    }
}

double KouJumps::second_moment(double x) const {
    return scale(x) * 2.0 *
           (p_ / ((eta1_ - 1.0) * (eta1_ - 2.0)) + (1.0 - p_) / ((eta2_ + 1.0) * (eta2_ + 2.0)));
}

std::optional<CaseInfo> KouJumps::declared_case(double, double) const {
    return CaseInfo{JumpCase::O, std::nullopt};
}

// ---------------------------------------------------------------------------
// CGMY

CgmyJumps::CgmyJumps(double C, double G, double M, double Y) : C_(C), G_(G), M_(M), Y_(Y) {
    const bool integer_y = Y == std::round(Y);
    if (!integer_y) {
        // (e^z - 1)^2 k(z) integrates to gamma functions term by term.
        second_moment_ = C * std::tgamma(-Y) *
                         (std::pow(M - 2.0, Y) - 2.0 * std::pow(M - 1.0, Y) + std::pow(M, Y) +
                          std::pow(G + 2.0, Y) - 2.0 * std::pow(G + 1.0, Y) + std::pow(G, Y));
        return;
    }
    auto weighted = [this](double z) {
        const double rate = z < 0.0 ? G_ : M_;
        const double az = std::abs(z);
        // (e^z - 1)^2 e^{-rate |z|} without overflow for large z
        const double e = z > 0.0 ? -std::expm1(-z) : std::expm1(z);
        const double growth = z > 0.0 ? std::exp((2.0 - rate) * az) : std::exp(-rate * az);
        if (az == 0.0) return 0.0;
        return C_ * e * e * growth / std::pow(az, Y_ + 1.0);
    };
    second_moment_ = integrate(weighted, -kInf, 0.0) + integrate(weighted, 0.0, kInf);
}

double CgmyJumps::log_density(double z) const {
    if (z == 0.0) return 0.0;
    const double az = std::abs(z);
    const double rate = z < 0.0 ? G_ : M_;
    return C_ * std::exp(-rate * az) / std::pow(az, Y_ + 1.0);
}

double CgmyJumps::density(double, double y) const {
    if (y <= -1.0 || y == 0.0) return 0.0;
    return log_density(std::log1p(y)) / (1.0 + y);
}

double CgmyJumps::tail_above(double z) const {
    if (std::isinf(z)) return 0.0;
    return C_ * std::pow(M_, Y_) * upper_incomplete_gamma(-Y_, M_ * z);
}

double CgmyJumps::tail_below(double z) const {
    if (std::isinf(z)) return 0.0;
    const double w = -z;
    if (G_ > 0.0) return C_ * std::pow(G_, Y_) * upper_incomplete_gamma(-Y_, G_ * w);
    if (Y_ > 0.0) return C_ * std::pow(w, -Y_) / Y_;
    return kInf;
}

double CgmyJumps::log_mass(double z_lo, double z_hi) const {
    if (!(z_lo < z_hi)) return 0.0;
    if (z_lo >= 0.0) return tail_above(z_lo) - tail_above(z_hi);
    if (z_hi <= 0.0) return tail_below(z_hi) - tail_below(z_lo);
    if (Y_ >= 0.0) return kInf;
    return (tail_below(0.0) - tail_below(z_lo)) + (tail_above(0.0) - tail_above(z_hi));
}

double CgmyJumps::cell_moment(double x, double a, double b, int p) const {
    a = std::max(a, -1.0);
    if (!(a < b)) return 0.0;
    const double z_lo = a <= -1.0 ? -kInf : std::log1p(a);
    const double z_hi = std::isinf(b) ? kInf : std::log1p(b);
    if (p == 0 && (z_lo >= 0.0 || z_hi <= 0.0)) return log_mass(z_lo, z_hi);
    (void)x;
    auto f = [&](double z) {
        if (z == 0.0) return 0.0;
        const double az = std::abs(z);
        const double rate = z < 0.0 ? G_ : M_;
        // |e^z - 1|^p k(z) in log form so that large z cannot overflow
        const double log_w = z > 0.0 ? az + std::log(-std::expm1(-az)) : std::log(-std::expm1(z));
        return C_ * std::exp(p * log_w - rate * az - (Y_ + 1.0) * std::log(az));
    };
    // Near z = 0 the integrand behaves like |z|^(p - Y - 1); z = u^m with
    // m = 1 / (p - Y) turns that into a bounded function of u.
    auto from_zero = [&](double sign, double len) {
        if (!(p > Y_)) throw NumericalError("CGMY moment of order " + std::to_string(p) + " diverges at zero");
        const double m = 1.0 / (p - Y_);
        if (std::isinf(len)) {
            const double head = integrate([&](double u) { return m * std::pow(u, m - 1.0) * f(sign * std::pow(u, m)); },
                                          0.0, 1.0);
            return head + integrate([&](double z) { return f(sign * z); }, 1.0, kInf);
        }
        return integrate([&](double u) { return m * std::pow(u, m - 1.0) * f(sign * std::pow(u, m)); }, 0.0,
                         std::pow(len, 1.0 / m));
    };
    if (z_lo < 0.0 && z_hi > 0.0) return from_zero(-1.0, -z_lo) + from_zero(1.0, z_hi);
    if (z_hi == 0.0) return from_zero(-1.0, -z_lo);
    if (z_lo == 0.0) return from_zero(1.0, z_hi);
    return integrate(f, z_lo, z_hi);
}

void CgmyJumps::cell_masses(double, std::span<const double> edges, std::span<double> out) const {
    // One incomplete-gamma evaluation per edge.
    std::vector<double> tail(edges.size());
    std::vector<double> z(edges.size());
    for (std::size_t j = 0; j < edges.size(); ++j) {
        z[j] = edges[j] <= -1.0 ? -kInf : (std::isinf(edges[j]) ? kInf : std::log1p(edges[j]));
        if (z[j] > 0.0) tail[j] = tail_above(z[j]);
        else if (z[j] < 0.0) tail[j] = tail_below(z[j]);
        else tail[j] = kInf;
    }
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
        if (z[j] >= 0.0) out[j] = tail[j] - tail[j + 1];
        else if (z[j + 1] <= 0.0) out[j] = tail[j + 1] - tail[j];
        else out[j] = log_mass(z[j], z[j + 1]);
    }
}

std::optional<CaseInfo> CgmyJumps::declared_case(double lower, double upper) const {
    if (Y_ < 1.0) return CaseInfo{JumpCase::O, std::nullopt};
    CaseInfo info;
    info.kind = Y_ == 1.0 ? JumpCase::I : JumpCase::II;
    info.stable = sample_stable_shape(*this, lower, upper, Y_, Y_);
    return info;
}

// ---------------------------------------------------------------------------

StableShape sample_stable_shape(const JumpDensity& j, double lower, double upper,
                                double alpha_plus, double alpha_minus) {
    StableShape s;
    s.alpha_plus = alpha_plus;
    s.alpha_minus = alpha_minus;
    s.kappa_lo_plus = s.kappa_lo_minus = kInf;
    for (double x : sample_levels(lower, upper)) {
        for (int k = 0; k <= 60; ++k) {
            const double y = 1e-6 * std::pow(0.5 / 1e-6, k / 60.0);
            const double up = j.density(x, y) * std::pow(y, 1.0 + alpha_plus);
            const double dn = j.density(x, -y) * std::pow(y, 1.0 + alpha_minus);
            s.kappa_hi_plus = std::max(s.kappa_hi_plus, up);
            s.kappa_lo_plus = std::min(s.kappa_lo_plus, up);
            s.kappa_hi_minus = std::max(s.kappa_hi_minus, dn);
            s.kappa_lo_minus = std::min(s.kappa_lo_minus, dn);
        }
    }
    return s;
}

CaseInfo classify_case(const ModelSpec& m, double lower, double upper) {
    if (!m.has_jumps()) return CaseInfo{JumpCase::O, std::nullopt};
    if (auto declared = m.jumps->declared_case(lower, upper)) return *declared;

    double s_plus = -kInf;
    double s_minus = -kInf;
    for (double x : sample_levels(lower, upper)) {
        s_plus = std::max(s_plus, probe_exponent(*m.jumps, x, 1.0));
        s_minus = std::max(s_minus, probe_exponent(*m.jumps, x, -1.0));
    }
    const double alpha = std::max(s_plus, s_minus) - 1.0;
    constexpr double slack = 0.05;
    if (alpha < 1.0 - slack) return CaseInfo{JumpCase::O, std::nullopt};
    if (alpha >= 2.0) return CaseInfo{JumpCase::Unclassified, std::nullopt};

    // Stable-type: both sides must carry the singularity.
    const double ap = s_plus - 1.0;
    const double am = s_minus - 1.0;
    if (ap <= 0.0 || am <= 0.0) return CaseInfo{JumpCase::Unclassified, std::nullopt};
    auto snap = [&](double a) { return std::abs(a - 1.0) <= slack ? 1.0 : a; };
    CaseInfo info;
    const double a_plus = snap(ap);
    const double a_minus = snap(am);
    if (a_plus == 1.0 || a_minus == 1.0) info.kind = JumpCase::I;
    else if (a_plus > 1.0 && a_minus > 1.0) info.kind = JumpCase::II;
    else return CaseInfo{JumpCase::Unclassified, std::nullopt};
    info.stable = sample_stable_shape(*m.jumps, lower, upper, a_plus, a_minus);
    return info;
}

double error_form(JumpCase c, double h) {
    if (c == JumpCase::I) return -h * std::log(h);
    return h;
}

}  // namespace ctmc
