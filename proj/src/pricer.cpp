#include "ctmc/pricer.hpp"

#include "ctmc/error.hpp"

#include <algorithm>
#include <cmath>

namespace ctmc {

std::string to_string(ContractKind k) {
    switch (k) {
        case ContractKind::knock_out: return "knock_out";
        case ContractKind::knock_in: return "knock_in";
        case ContractKind::rebate: return "rebate";
        case ContractKind::no_touch: return "no_touch";
        case ContractKind::one_touch: return "one_touch";
        case ContractKind::european: return "european";
        default: return "stopped_general";
    }
}

ContractKind parse_contract_kind(const std::string& s) {
    for (auto k : {ContractKind::knock_out, ContractKind::knock_in, ContractKind::rebate, ContractKind::no_touch,
                   ContractKind::one_touch, ContractKind::european, ContractKind::stopped_general}) {
        if (to_string(k) == s) return k;
    }
    throw ValidationError("unknown contract kind '" + s + "'");
}

std::string to_string(PayoffType t) {
    switch (t) {
        case PayoffType::call: return "call";
        case PayoffType::put: return "put";
        case PayoffType::unit: return "unit";
        case PayoffType::zero: return "zero";
        case PayoffType::constant: return "constant";
        default: return "linear";
    }
}

PayoffType parse_payoff_type(const std::string& s) {
    for (auto t : {PayoffType::call, PayoffType::put, PayoffType::unit, PayoffType::zero, PayoffType::constant,
                   PayoffType::linear}) {
        if (to_string(t) == s) return t;
    }
    throw ValidationError("unknown payoff type '" + s + "'");
}

double PayoffSpec::operator()(double x) const {
    switch (type) {
        case PayoffType::call: return std::max(x - strike, 0.0);
        case PayoffType::put: return std::max(strike - x, 0.0);
        case PayoffType::unit: return 1.0;
        case PayoffType::zero: return 0.0;
        case PayoffType::constant: return amount;
        default: return amount * x;
    }
}

void BarrierContract::validate() const {
    if (!(lower >= 0.0)) throw ValidationError("contract.lower must be >= 0");
    if (!(upper > lower)) throw ValidationError("contract.upper must exceed contract.lower");
    if (!(maturity > 0.0) || !std::isfinite(maturity)) throw ValidationError("contract.maturity must be > 0");
    if (!(rate >= 0.0)) throw ValidationError("contract.rate must be >= 0");
    if (!(dividend >= 0.0)) throw ValidationError("contract.dividend must be >= 0");
    if (!(spot > 0.0) || !std::isfinite(spot)) throw ValidationError("contract.spot must be positive");
    for (const PayoffSpec* f : {&payoff, &rebate}) {
        if (f->type == PayoffType::constant || f->type == PayoffType::linear) {
            if (!(f->amount >= 0.0)) throw ValidationError("payoff amounts must be nonnegative");
        }
        if ((f->type == PayoffType::call || f->type == PayoffType::put) && !(f->strike >= 0.0)) {
            throw ValidationError("strike must be nonnegative");
        }
    }
}

Eigen::VectorXd payoff_vector(const PayoffSpec& f, const Grid& grid) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) v(static_cast<Eigen::Index>(i)) = f(grid[i]);
    return v;
}

Greeks greeks(std::span<const double> values, const Grid& grid, double spot) {
    Greeks out;
    const auto idx = grid.find(spot);
    if (!idx || grid.size() < 2) return out;
    const std::size_t i = *idx;
    if (i == 0) {
        out.delta = (values[1] - values[0]) / (grid[1] - grid[0]);
        return out;
    }
    if (i + 1 == grid.size()) {
        out.delta = (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
        return out;
    }
    const double hm = grid[i] - grid[i - 1];
    const double hp = grid[i + 1] - grid[i];
    const double fm = values[i - 1];
    const double f0 = values[i];
    const double fp = values[i + 1];
    out.delta = (hm * hm * (fp - f0) + hp * hp * (f0 - fm)) / (hm * hp * (hm + hp));
    out.gamma = 2.0 * ((fp - f0) / hp - (f0 - fm) / hm) / (hm + hp);
    return out;
}

namespace {

void finish(PriceSurface& s, const Grid& grid, double spot) {
    for (double v : s.values) {
        if (!std::isfinite(v)) throw NumericalError("non-finite price on the grid");
    }
    if (auto idx = grid.find(spot)) {
        s.spot_price = s.values[*idx];
    } else if (spot < grid.front() || spot > grid.back()) {
        throw ValidationError("spot lies outside the grid");
    } else {
        const auto pts = grid.points();
        const auto it = std::upper_bound(pts.begin(), pts.end(), spot);
        const std::size_t j = static_cast<std::size_t>(it - pts.begin());
        const double w = (spot - grid[j - 1]) / (grid[j] - grid[j - 1]);
        s.spot_price = (1.0 - w) * s.values[j - 1] + w * s.values[j];
        s.spot_interpolated = true;
        s.warnings.push_back("spot is not a grid node; value linearly interpolated (approximate)");
    }
    const Greeks g = greeks(s.values, grid, spot);
    s.delta = g.delta;
    s.gamma = g.gamma;
}

void check_full(const GeneratorMatrix& full, const Grid& grid) {
    if (full.kind != GeneratorKind::full || full.size() != grid.size()) {
        throw ValidationError("pricer needs the full generator of the grid");
    }
}

void note(PriceSurface& s, const std::string* w) {
    if (w && !w->empty()) s.warnings.push_back(*w);
}

void spot_warning(PriceSurface& s, const BarrierContract& c) {
    if (!c.barriers().continues(c.spot)) s.warnings.push_back("spot outside (lower, upper): contract already knocked");
}

Eigen::MatrixXd killed_action(const GeneratorMatrix& full, const Grid& grid, const Barriers& b, double t,
                              const Eigen::MatrixXd& psi_full, const ExpmConfig& cfg, std::string& warning) {
    const GeneratorMatrix killed = restrict_killed(full, grid, b);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(psi_full.rows(), psi_full.cols());
    if (killed.size() == 0) return out;
    Eigen::MatrixXd psi(static_cast<Eigen::Index>(killed.size()), psi_full.cols());
    for (std::size_t k = 0; k < killed.size(); ++k) {
        psi.row(static_cast<Eigen::Index>(k)) = psi_full.row(static_cast<Eigen::Index>(killed.states[k]));
    }
    ActionResult r = expm_action(killed.entries, t, psi, cfg);
    if (r.warning) warning = *r.warning;
    for (std::size_t k = 0; k < killed.size(); ++k) {
        out.row(static_cast<Eigen::Index>(killed.states[k])) = r.values.row(static_cast<Eigen::Index>(k));
    }
    return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

const PayoffSpec& terminal_payoff(const BarrierContract& c, PayoffSpec& scratch) {
    if (c.kind == ContractKind::no_touch) {
        scratch = PayoffSpec{PayoffType::unit};
        return scratch;
    }
    return c.payoff;
}

const PayoffSpec& touch_payoff(const BarrierContract& c, PayoffSpec& scratch) {
    if (c.kind == ContractKind::one_touch) {
        scratch = PayoffSpec{PayoffType::unit};
        return scratch;
    }
    return c.rebate;
}

// phi for the stopped chain: h on A, g on the continuation set. Either leg
// may be switched off.
Eigen::VectorXd stopped_payoff(const Grid& grid, const Barriers& b, const PayoffSpec* g, const PayoffSpec* h) {
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool alive = b.continues(grid[i]);
        if (alive && g) phi(static_cast<Eigen::Index>(i)) = (*g)(grid[i]);
        if (!alive && h) phi(static_cast<Eigen::Index>(i)) = (*h)(grid[i]);
    }
    return phi;
}

PriceSurface stopped_price(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                           const Eigen::VectorXd& phi, const ExpmConfig& cfg) {
    const GeneratorMatrix stopped = restrict_stopped(full, grid, c.barriers(), c.rate);
    std::string warning;
    PriceSurface s;
    s.values = to_std(expm_action(stopped, c.maturity, phi, cfg, &warning));
    note(s, &warning);
    finish(s, grid, c.spot);
    return s;
}

}  // namespace

std::vector<PriceSurface> price_knockout_batch(const GeneratorMatrix& full, const Grid& grid,
                                               std::span<const BarrierContract> contracts,
                                               const ExpmConfig& cfg) {
    check_full(full, grid);
    if (contracts.empty()) return {};
    const BarrierContract& c0 = contracts.front();
    Eigen::MatrixXd psi(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(contracts.size()));
    for (std::size_t j = 0; j < contracts.size(); ++j) {
        const BarrierContract& c = contracts[j];
        c.validate();
        if (c.lower != c0.lower || c.upper != c0.upper || c.maturity != c0.maturity || c.rate != c0.rate) {
            throw ValidationError("batched knock-out contracts must share barriers, maturity and rate");
        }
        PayoffSpec scratch;
        psi.col(static_cast<Eigen::Index>(j)) = payoff_vector(terminal_payoff(c, scratch), grid);
    }
    std::string warning;
    Eigen::MatrixXd v = killed_action(full, grid, c0.barriers(), c0.maturity, psi, cfg, warning);
    v *= std::exp(-c0.rate * c0.maturity);

    std::vector<PriceSurface> out(contracts.size());
    for (std::size_t j = 0; j < contracts.size(); ++j) {
        out[j].values = to_std(v.col(static_cast<Eigen::Index>(j)));
        note(out[j], &warning);
        spot_warning(out[j], contracts[j]);
        finish(out[j], grid, contracts[j].spot);
    }
    return out;
}

PriceSurface price_knockout(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                            const ExpmConfig& cfg) {
    return std::move(price_knockout_batch(full, grid, std::span(&c, 1), cfg).front());
}

PriceSurface price_rebate(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                          const ExpmConfig& cfg) {
    check_full(full, grid);
    c.validate();
    PayoffSpec scratch;
    const Eigen::VectorXd xi = stopped_payoff(grid, c.barriers(), nullptr, &touch_payoff(c, scratch));
    return stopped_price(full, grid, c, xi, cfg);
}

PriceSurface price_stopped_general(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                                   const ExpmConfig& cfg) {
    check_full(full, grid);
    c.validate();
    const Eigen::VectorXd phi = stopped_payoff(grid, c.barriers(), &c.payoff, &c.rebate);
    return stopped_price(full, grid, c, phi, cfg);
}

PriceSurface price_european(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                            const ExpmConfig& cfg) {
    check_full(full, grid);
    c.validate();
    std::string warning;
    PriceSurface s;
    const Eigen::VectorXd v = expm_action(full, c.maturity, payoff_vector(c.payoff, grid), cfg, &warning);
    s.values = to_std(std::exp(-c.rate * c.maturity) * v);
    note(s, &warning);
    finish(s, grid, c.spot);
    return s;
}

PriceSurface price_knockin(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                           const ExpmConfig& cfg) {
    check_full(full, grid);
    c.validate();
    const Eigen::VectorXd phi = payoff_vector(c.payoff, grid);
    std::string w_full;
    std::string w_killed;
    const Eigen::VectorXd all = expm_action(full, c.maturity, phi, cfg, &w_full);
    const Eigen::MatrixXd alive = killed_action(full, grid, c.barriers(), c.maturity, phi, cfg, w_killed);
    PriceSurface s;
    s.values = to_std(std::exp(-c.rate * c.maturity) * (all - alive.col(0)));
    note(s, &w_full);
    note(s, &w_killed);
    finish(s, grid, c.spot);
    return s;
}

PriceSurface price(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c, const ExpmConfig& cfg) {
    switch (c.kind) {
        case ContractKind::knock_out:
        case ContractKind::no_touch: return price_knockout(full, grid, c, cfg);
        case ContractKind::knock_in: return price_knockin(full, grid, c, cfg);
        case ContractKind::rebate:
        case ContractKind::one_touch: return price_rebate(full, grid, c, cfg);
        case ContractKind::european: return price_european(full, grid, c, cfg);
        default: return price_stopped_general(full, grid, c, cfg);
    }
}

PriceSurface price_schedule(std::span<const ScheduleSegment> schedule, const Grid& grid, const BarrierContract& c,
                            const ExpmConfig& cfg) {
    c.validate();
    if (schedule.empty()) throw ValidationError("schedule needs at least one segment");
    double total = 0.0;
    double integrated_rate = 0.0;
    for (const auto& seg : schedule) {
        if (!(seg.duration > 0.0)) throw ValidationError("schedule durations must be positive");
        if (!(seg.rate >= 0.0)) throw ValidationError("schedule rates must be >= 0");
        if (!seg.full) throw ValidationError("schedule segment without a generator");
        check_full(*seg.full, grid);
        total += seg.duration;
        integrated_rate += seg.rate * seg.duration;
    }
    if (std::abs(total - c.maturity) > 1e-12) {
        throw ValidationError("schedule durations add up to " + std::to_string(total) + ", maturity is " +
                              std::to_string(c.maturity));
    }

    const Barriers b = c.barriers();
    std::vector<GeneratorMatrix> mats;
    mats.reserve(schedule.size());
    std::vector<ScheduleFactor> factors;
    factors.reserve(schedule.size());
    auto run = [&](const Eigen::VectorXd& phi) {
        for (std::size_t i = 0; i < schedule.size(); ++i) factors.push_back({schedule[i].duration, &mats[i]});
        std::string warning;
        Eigen::VectorXd v = expm_product_action(factors, phi, cfg, &warning);
        return std::make_pair(v, warning);
    };

    PriceSurface s;
    PayoffSpec scratch;
    switch (c.kind) {
        case ContractKind::knock_out:
        case ContractKind::no_touch:
        case ContractKind::knock_in: {
            for (const auto& seg : schedule) mats.push_back(restrict_killed(*seg.full, grid, b));
            const Eigen::VectorXd phi = payoff_vector(terminal_payoff(c, scratch), grid);
            Eigen::VectorXd alive = Eigen::VectorXd::Zero(phi.size());
            if (!mats.front().states.empty()) {
                Eigen::VectorXd psi(static_cast<Eigen::Index>(mats.front().size()));
                for (std::size_t k = 0; k < mats.front().size(); ++k) {
                    psi(static_cast<Eigen::Index>(k)) = phi(static_cast<Eigen::Index>(mats.front().states[k]));
                }
                auto [v, w] = run(psi);
                if (!w.empty()) s.warnings.push_back(w);
                for (std::size_t k = 0; k < mats.front().size(); ++k) {
                    alive(static_cast<Eigen::Index>(mats.front().states[k])) = v(static_cast<Eigen::Index>(k));
                }
            }
            Eigen::VectorXd value = alive;
            if (c.kind == ContractKind::knock_in) {
                mats.clear();
                factors.clear();
                for (const auto& seg : schedule) mats.push_back(*seg.full);
                auto [all, w] = run(phi);
                if (!w.empty()) s.warnings.push_back(w);
                value = all - alive;
            }
            s.values = to_std(std::exp(-integrated_rate) * value);
            if (c.kind != ContractKind::knock_in) spot_warning(s, c);
            break;
        }
        case ContractKind::european: {
            for (const auto& seg : schedule) mats.push_back(*seg.full);
            auto [v, w] = run(payoff_vector(c.payoff, grid));
            if (!w.empty()) s.warnings.push_back(w);
            s.values = to_std(std::exp(-integrated_rate) * v);
            break;
        }
        default: {
            for (const auto& seg : schedule) mats.push_back(restrict_stopped(*seg.full, grid, b, seg.rate));
            const PayoffSpec* g = nullptr;
            const PayoffSpec* h = nullptr;
            if (c.kind == ContractKind::stopped_general) {
                g = &c.payoff;
                h = &c.rebate;
            } else {
                h = &touch_payoff(c, scratch);
            }
            auto [v, w] = run(stopped_payoff(grid, b, g, h));
            if (!w.empty()) s.warnings.push_back(w);
            s.values = to_std(v);
            break;
        }
    }
    finish(s, grid, c.spot);
    return s;
}

}  // namespace ctmc
