#include "ctmc/matexp.hpp"

#include "ctmc/error.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace ctmc {

namespace {

// Higham (2005) backward-error thresholds for degrees 3, 5, 7, 9, 13.
constexpr std::array<double, 5> kTheta = {1.495585217958292e-2, 2.539398330063230e-1,
                                          9.504178996162932e-1, 2.097847961257068e0,
                                          5.371920351148152e0};
constexpr std::array<int, 5> kDegree = {3, 5, 7, 9, 13};

constexpr std::array<double, 14> kB13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

std::vector<double> pade_coefficients(int m) {
    switch (m) {
        case 3: return {120.0, 60.0, 12.0, 1.0};
        case 5: return {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
        case 7: return {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
        case 9:
            return {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                    2162160.0,     110880.0,     3960.0,       90.0,        1.0};
        default: return {kB13.begin(), kB13.end()};
    }
}

// Diagonal Pade approximant r_m(A) ~ exp(A). Written to keep at most about
// seven n x n temporaries alive, which matters for n in the thousands.
Eigen::MatrixXd pade(const Eigen::MatrixXd& a, int m) {
    const auto n = a.rows();
    const auto b = pade_coefficients(m);
    Eigen::MatrixXd u(n, n);
    Eigen::MatrixXd v(n, n);
    {
        Eigen::MatrixXd a2(n, n);
        a2.noalias() = a * a;
        Eigen::MatrixXd odd(n, n);
        if (m == 13) {
            Eigen::MatrixXd a4(n, n);
            a4.noalias() = a2 * a2;
            Eigen::MatrixXd a6(n, n);
            a6.noalias() = a4 * a2;
            Eigen::MatrixXd inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
            odd.noalias() = a6 * inner;
            odd += b[7] * a6 + b[5] * a4 + b[3] * a2;
            odd.diagonal().array() += b[1];
            inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
            v.noalias() = a6 * inner;
            v += b[6] * a6 + b[4] * a4 + b[2] * a2;
            v.diagonal().array() += b[0];
        } else {
            Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
            odd = b[1] * power;
            v = b[0] * power;
            Eigen::MatrixXd next(n, n);
            for (int k = 2; k <= m; k += 2) {
                next.noalias() = power * a2;
                power.swap(next);
                odd += b[k + 1] * power;
                v += b[k] * power;
            }
        }
        u.noalias() = a * odd;
    }
    // p = v + u overwrites v, q = v - u overwrites u.
    v += u;
    u = v - 2.0 * u;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(u);
    u.resize(0, 0);
    return lu.solve(v);
}

struct Scaled {
    int degree = 13;
    int squarings = 0;
};

Scaled choose_scaling(const Eigen::MatrixXd& a) {
    if (!a.allFinite()) throw ValidationError("matrix exponential of a matrix with non-finite entries");
    // Any subordinate norm bounds the backward error; take the smaller one.
    const double norm = std::min(a.cwiseAbs().colwise().sum().maxCoeff(), a.cwiseAbs().rowwise().sum().maxCoeff());
    for (std::size_t k = 0; k + 1 < kTheta.size(); ++k) {
        if (norm <= kTheta[k]) return {kDegree[k], 0};
    }
    Scaled s;
    if (norm > kTheta.back()) {
        s.squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta.back())));
    }
    return s;
}

void normalize_rows(Eigen::MatrixXd& p) { p.array().colwise() /= p.rowwise().sum().array(); }

void square(Eigen::MatrixXd& r, int times, bool stochastic) {
    if (times <= 0) return;
    Eigen::MatrixXd tmp(r.rows(), r.cols());
    for (int k = 0; k < times; ++k) {
        tmp.noalias() = r * r;
        r.swap(tmp);
        if (stochastic) normalize_rows(r);
    }
}

// Nonnegative off-diagonals and nonpositive row sums, up to roundoff.
bool is_subgenerator(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return false;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double scale = std::max(a.row(i).cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (i != j && a(i, j) < -1e-12 * scale) return false;
        }
        if (a.row(i).sum() > 1e-10 * scale) return false;
    }
    return true;
}

// Conservative generator with one extra absorbing state collecting the row
// deficits. Its exponential is stochastic, and squaring can hold it there;
// exp(A) is the leading block.
Eigen::MatrixXd with_cemetery(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + 1, n + 1);
    out.topLeftCorner(n, n) = a;
    out.col(n).head(n) = (-a.rowwise().sum()).cwiseMax(0.0);
    return out;
}

}  // namespace

std::string to_string(ExpmMethod m) {
    switch (m) {
        case ExpmMethod::pade: return "pade";
        case ExpmMethod::uniformization: return "uniformization";
        default: return "auto";
    }
}

ExpmMethod parse_expm_method(const std::string& s) {
    if (s == "pade") return ExpmMethod::pade;
    if (s == "uniformization") return ExpmMethod::uniformization;
    if (s == "auto") return ExpmMethod::automatic;
    throw ValidationError("unknown expm method '" + s + "' (expected pade|uniformization|auto)");
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw ValidationError("expm needs a square matrix");
    if (!a.allFinite()) throw ValidationError("matrix exponential of a matrix with non-finite entries");
    const bool generator = is_subgenerator(a);
    const Eigen::MatrixXd aug = generator ? with_cemetery(a) : Eigen::MatrixXd();
    const Eigen::MatrixXd& m = generator ? aug : a;
    const Scaled s = choose_scaling(m);
    Eigen::MatrixXd r = pade(m * std::ldexp(1.0, -s.squarings), s.degree);
    if (generator) normalize_rows(r);
    square(r, s.squarings, generator);
    if (generator) return r.topLeftCorner(a.rows(), a.cols());
    return r;
}

Eigen::MatrixXd pade_action(const Eigen::MatrixXd& a, double t, const Eigen::MatrixXd& v) {
    if (t == 0.0) return v;
    if (!a.allFinite()) throw ValidationError("matrix exponential of a matrix with non-finite entries");
    const bool generator = t > 0.0 && is_subgenerator(a);
    const Eigen::MatrixXd ta = generator ? with_cemetery(t * a) : Eigen::MatrixXd(t * a);
    const Scaled s = choose_scaling(ta);
    Eigen::MatrixXd r = pade(ta * std::ldexp(1.0, -s.squarings), s.degree);
    if (generator) normalize_rows(r);

    // Applying r to the block costs 2 n^2 c flops, a squaring 2 n^3: stop
    // squaring once the remaining 2^j applications cost about one product.
    const double n = static_cast<double>(a.rows());
    const double cols = static_cast<double>(std::max<Eigen::Index>(v.cols(), 1));
    const int affordable = static_cast<int>(std::floor(std::log2(std::max(1.0, n / cols))));
    const int applied = std::min(s.squarings, affordable);
    square(r, s.squarings - applied, generator);

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(ta.rows(), v.cols());
    w.topRows(v.rows()) = v;
    Eigen::MatrixXd next(w.rows(), w.cols());
    const long reps = 1L << applied;
    for (long k = 0; k < reps; ++k) {
        next.noalias() = r * w;
        w.swap(next);
    }
    return w.topRows(v.rows());
}

std::optional<Eigen::MatrixXd> uniformization_action(const Eigen::MatrixXd& a, double t,
                                                     const Eigen::MatrixXd& v, const ExpmConfig& cfg) {
    if (!a.allFinite()) throw ValidationError("matrix exponential of a matrix with non-finite entries");
    if (t == 0.0) return v;
    const double q = a.diagonal().cwiseAbs().maxCoeff();
    if (q == 0.0) {
        // Diagonal zero and off-diagonals nonnegative: only the zero matrix
        // qualifies when rows are (sub)conservative.
        if (a.cwiseAbs().maxCoeff() == 0.0) return v;
        return std::nullopt;
    }
    const double lambda = q * t;
    Eigen::MatrixXd p = a / q;
    p.diagonal().array() += 1.0;
    Eigen::MatrixXd next(v.rows(), v.cols());

    // Poisson(lambda) weights by the ratio recursion outward from the mode,
    // normalised by their sum so that they add up to one to roundoff.
    const auto mode = static_cast<std::size_t>(std::floor(lambda));
    if (mode > cfg.max_terms) return std::nullopt;
    std::vector<double> w(mode + 1);
    w[mode] = 1.0;
    double total = 1.0;
    for (std::size_t k = mode; k > 0; --k) {
        w[k - 1] = w[k] * static_cast<double>(k) / lambda;
        total += w[k - 1];
    }
    for (std::size_t k = mode + 1;; ++k) {
        if (k > cfg.max_terms) return std::nullopt;
        const double wk = w.back() * lambda / static_cast<double>(k);
        w.push_back(wk);
        total += wk;
        // Tail beyond k is bounded by a geometric series once k exceeds lambda.
        const double kk = static_cast<double>(k) + 1.0;
        if (kk > lambda + 1.0 && wk * kk / (kk - lambda) <= cfg.tol * total) break;
    }

    Eigen::MatrixXd term = v;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(v.rows(), v.cols());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double wk = w[k] / total;
        if (wk > 0.0) sum += wk * term;
        if (k + 1 == w.size()) break;
        next.noalias() = p * term;
        term.swap(next);
    }
    return sum;
}

ActionResult expm_action(const Eigen::MatrixXd& a, double t, const Eigen::MatrixXd& v,
                         const ExpmConfig& cfg) {
    if (t < 0.0) throw ValidationError("expm_action needs t >= 0");
    if (a.rows() != a.cols() || a.cols() != v.rows()) throw ValidationError("expm_action: dimension mismatch");
    if (!a.allFinite()) throw ValidationError("matrix exponential of a matrix with non-finite entries");

    ActionResult out;
    ExpmMethod method = cfg.method;
    if (method == ExpmMethod::automatic) {
        const double qt = a.rows() == 0 ? 0.0 : a.diagonal().cwiseAbs().maxCoeff() * t;
        method = (v.cols() <= 3 && qt <= 1e4) ? ExpmMethod::uniformization : ExpmMethod::pade;
    }
    if (method == ExpmMethod::uniformization) {
        if (auto u = uniformization_action(a, t, v, cfg)) {
            out.values = std::move(*u);
            out.method = ExpmMethod::uniformization;
            return out;
        }
        out.warning = "uniformization series exceeded max_terms; fell back to Pade";
    }
    out.values = pade_action(a, t, v);
    out.method = ExpmMethod::pade;
    return out;
}

Eigen::VectorXd expm_action(const GeneratorMatrix& lambda, double t, const Eigen::VectorXd& phi,
                            const ExpmConfig& cfg, std::string* warning) {
    ActionResult r = expm_action(lambda.entries, t, phi, cfg);
    if (warning && r.warning) *warning = *r.warning;
    return r.values.col(0);
}

Eigen::VectorXd expm_product_action(std::span<const ScheduleFactor> schedule, const Eigen::VectorXd& phi,
                                    const ExpmConfig& cfg, std::string* warning) {
    Eigen::VectorXd w = phi;
    for (auto it = schedule.rbegin(); it != schedule.rend(); ++it) {
        if (!it->generator) throw ValidationError("schedule factor without a generator");
        if (it->duration < 0.0) throw ValidationError("schedule durations must be nonnegative");
        if (it->generator->entries.cols() != w.size()) throw ValidationError("schedule: dimension mismatch");
        w = expm_action(*it->generator, it->duration, w, cfg, warning);
    }
    return w;
}

}  // namespace ctmc
