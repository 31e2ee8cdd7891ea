#include "ctmc/oracle.hpp"

#include "ctmc/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <random>

namespace ctmc {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double black_scholes_call(double S0, double K, double sigma, double r, double d, double T) {
    const double sd = sigma * std::sqrt(T);
    const double d1 = (std::log(S0 / K) + (r - d + 0.5 * sigma * sigma) * T) / sd;
    return S0 * std::exp(-d * T) * norm_cdf(d1) - K * std::exp(-r * T) * norm_cdf(d1 - sd);
}

double black_scholes_put(double S0, double K, double sigma, double r, double d, double T) {
    return black_scholes_call(S0, K, sigma, r, d, T) - S0 * std::exp(-d * T) + K * std::exp(-r * T);
}

SeriesResult gbm_double_barrier_analytic(double sigma0, double r, double d, double S0, double K, double lower,
                                         double upper, double T, int n_terms) {
    if (n_terms < 1) throw ValidationError("n_terms must be >= 1");
    if (!(sigma0 > 0.0) || !(T > 0.0)) throw ValidationError("sigma0 and T must be positive");
    if (!(lower > 0.0 && lower < S0 && S0 < upper)) throw ValidationError("need 0 < lower < S0 < upper");
    if (!(K < upper)) throw ValidationError("strike must lie below the upper barrier");

    const double b = r - d;
    const double sd = sigma0 * std::sqrt(T);
    const double mu = 2.0 * b / (sigma0 * sigma0) + 1.0;
    const double shift = (b + 0.5 * sigma0 * sigma0) * T;
    const double ll = std::log(lower);
    const double lu = std::log(upper);
    const double ls = std::log(S0);
    const double lk = std::log(std::max(K, lower));

    auto term = [&](int n) {
        const double nn = static_cast<double>(n);
        // log of S u^{2n} / l^{2n} and of l^{2n+2} / (S u^{2n})
        const double a = ls + 2.0 * nn * (lu - ll);
        const double c = 2.0 * (nn + 1.0) * ll - ls - 2.0 * nn * lu;
        const double d1 = (a - lk + shift) / sd;
        const double d2 = (a - lu + shift) / sd;
        const double d3 = (c - lk + shift) / sd;
        const double d4 = (c - lu + shift) / sd;
        const double log_w1 = nn * (lu - ll);                     // log(u^n / l^n)
        const double log_w3 = (nn + 1.0) * ll - nn * lu - ls;     // log(l^{n+1} / (u^n S))
        const double stock = std::exp(mu * log_w1) * (norm_cdf(d1) - norm_cdf(d2)) -
                             std::exp(mu * log_w3) * (norm_cdf(d3) - norm_cdf(d4));
        const double cash = std::exp((mu - 2.0) * log_w1) * (norm_cdf(d1 - sd) - norm_cdf(d2 - sd)) -
                            std::exp((mu - 2.0) * log_w3) * (norm_cdf(d3 - sd) - norm_cdf(d4 - sd));
        return S0 * std::exp(-d * T) * stock - K * std::exp(-r * T) * cash;
    };

    SeriesResult out;
    double sum = term(0);
    for (int n = 1; n <= n_terms; ++n) {
        const double plus = term(n);
        const double minus = term(-n);
        sum += plus + minus;
        if (n == n_terms) out.last_term = std::abs(plus) + std::abs(minus);
    }
    out.price = sum;
    out.converged = out.last_term <= 1e-12;
    return out;
}

Eigen::VectorXd tiny_chain_exit_oracle(const GeneratorMatrix& stopped, double t, const Eigen::VectorXd& phi,
                                       int doublings) {
    if (stopped.kind != GeneratorKind::stopped) throw ValidationError("tiny-chain oracle needs a stopped generator");
    const auto n = static_cast<Eigen::Index>(stopped.size());
    if (n > 6) throw ValidationError("tiny-chain oracle is limited to 6 states");
    if (phi.size() != n) throw ValidationError("tiny-chain oracle: dimension mismatch");
    if (doublings < 0 || doublings > 40) throw ValidationError("tiny-chain oracle: doublings out of range");
    if (t == 0.0) return phi;

    const double dt = std::ldexp(t, -doublings);
    const double r = stopped.discount;
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!stopped.continuation[static_cast<std::size_t>(i)]) continue;
        Eigen::RowVectorXd row = dt * stopped.entries.row(i);
        row(i) += dt * r;  // Lambda_0 = Lambda_r + r on continuation rows
        row(i) += 1.0;
        m.row(i) = std::exp(-r * dt) * row;
    }
    for (int k = 0; k < doublings; ++k) m = (m * m).eval();
    return m * phi;
}

McResult mc_price(const McModel& model, const BarrierContract& c, const McConfig& cfg) {
    c.validate();
    if (cfg.paths < 1 || cfg.steps < 1) throw ValidationError("mc_price needs paths >= 1 and steps >= 1");
    const auto& p = model.params;
    if (cfg.scheme == McScheme::exact_gbm && (p.lambda != 0.0 || p.beta != 0.0)) {
        throw ValidationError("exact GBM stepping needs lambda = 0 and beta = 0");
    }
    if (!model.rates.empty()) {
        double total = 0.0;
        for (const auto& s : model.rates) total += s.duration;
        if (std::abs(total - c.maturity) > 1e-12) throw ValidationError("rate schedule must span the maturity");
    }

    const int n = std::max(1, static_cast<int>(std::ceil(cfg.steps * c.maturity)));
    const double dt = c.maturity / n;
    const double sq = std::sqrt(dt);
    const double zeta = p.lambda > 0.0 ? kou_zeta(p.p, p.eta1, p.eta2) : 0.0;

    // Short rate and accumulated discount exponent at the end of each step.
    std::vector<double> rate(n);
    std::vector<double> integral(n + 1, 0.0);
    for (int k = 0; k < n; ++k) {
        const double mid = (k + 0.5) * dt;
        double rk = p.r;
        if (!model.rates.empty()) {
            double acc = 0.0;
            rk = model.rates.back().rate;
            for (const auto& s : model.rates) {
                acc += s.duration;
                if (mid < acc) {
                    rk = s.rate;
                    break;
                }
            }
        }
        rate[k] = rk;
        integral[k + 1] = integral[k] + rk * dt;
    }

    const Barriers b = c.barriers();
    PayoffSpec unit{PayoffType::unit};
    const PayoffSpec& g = c.kind == ContractKind::no_touch ? unit : c.payoff;
    const PayoffSpec& h = c.kind == ContractKind::one_touch ? unit : c.rebate;

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::int64_t path = 0; path < cfg.paths; ++path) {
        double s = c.spot;
        int hit = b.continues(s) ? -1 : 0;
        double hit_level = s;
        for (int k = 0; k < n; ++k) {
            if (cfg.scheme == McScheme::exact_gbm) {
                s *= std::exp((rate[k] - p.d - 0.5 * p.sigma0 * p.sigma0) * dt + p.sigma0 * sq * normal(rng));
            } else if (s > 0.0) {
                const double scale = std::pow(s / p.S0, p.beta);
                const double vol = p.sigma0 * scale;
                const double intensity = p.lambda * scale;
                double x = std::log(s) + (rate[k] - p.d - intensity * zeta - 0.5 * vol * vol) * dt + vol * sq * normal(rng);
                if (intensity > 0.0) {
                    std::poisson_distribution<int> jumps(intensity * dt);
                    for (int j = jumps(rng); j > 0; --j) {
                        const double e = -std::log(1.0 - uniform(rng));
                        x += uniform(rng) < p.p ? e / p.eta1 : -e / p.eta2;
                    }
                }
                s = std::exp(x);
            }
            if (hit < 0 && !b.continues(s)) {
                hit = k + 1;
                hit_level = s;
            }
        }
        const double df = std::exp(-integral[n]);
        const bool alive = hit < 0;
        double v = 0.0;
        switch (c.kind) {
            case ContractKind::knock_out:
            case ContractKind::no_touch: v = alive ? df * g(s) : 0.0; break;
            case ContractKind::knock_in: v = alive ? 0.0 : df * g(s); break;
            case ContractKind::european: v = df * g(s); break;
            case ContractKind::rebate:
            case ContractKind::one_touch: v = alive ? 0.0 : std::exp(-integral[hit]) * h(hit_level); break;
            default: v = alive ? df * g(s) : std::exp(-integral[hit]) * h(hit_level); break;
        }
        sum += v;
        sum_sq += v * v;
    }
    const double m = static_cast<double>(cfg.paths);
    McResult out;
    out.price = sum / m;
    const double var = cfg.paths > 1 ? std::max(0.0, (sum_sq - m * out.price * out.price) / (m - 1.0)) : 0.0;
    out.stderr_ = std::sqrt(var / m);
    out.steps = n;
    return out;
}

}  // namespace ctmc
