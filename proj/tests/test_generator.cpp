#include <doctest.h>

#include "ctmc/generator.hpp"
#include "ctmc/grid.hpp"
#include "ctmc/model.hpp"

#include <cmath>
#include <random>

using namespace ctmc;

namespace {

struct Case {
    ModelSpec model;
    Grid grid;
    Barriers barriers;
};

Case random_case(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double spot = 50.0 + 100.0 * u(rng);
    const double lower = spot * (0.6 + 0.3 * u(rng));
    const double upper = spot * (1.1 + 0.5 * u(rng));
    const double r = 0.1 * u(rng);
    const double d = 0.05 * u(rng);
    ModelSpec m;
    switch (rng() % 4) {
        case 0: m = gbm(0.1 + 0.4 * u(rng), r, d); break;
        case 1: m = local_vol(0.1 + 0.3 * u(rng), -1.5 * u(rng), spot, r, d); break;
        case 2: {
            KouLocalLevyParams k;
            k.S0 = spot;
            k.sigma0 = 0.1 + 0.2 * u(rng);
            k.lambda = 5.0 * u(rng);
            k.p = u(rng);
            k.eta1 = 3.0 + 50.0 * u(rng);
            k.eta2 = 1.0 + 30.0 * u(rng);
            k.beta = -2.0 * u(rng);
            k.r = r;
            k.d = d;
            m = kou_local_levy(k);
            break;
        }
        default: {
            CgmyParams c;
            c.C = 0.2 + u(rng);
            c.G = 5.0 + 10.0 * u(rng);
            c.M = 5.0 + 10.0 * u(rng);
            c.Y = 0.2 + 1.5 * u(rng);
            c.r = r;
            c.d = d;
            c.sigma_extra = 0.2 * u(rng);
            m = cgmy(c);
        }
    }
    GridParams p;
    const int n = 2 * (20 + static_cast<int>(rng() % 40));
    p.counts = {n, n, n};
    p.densities = {spot, spot / 50, spot / 10, spot / 10, spot / 50, spot};
    p.x_min = 0.2 * spot * u(rng) + 0.05 * spot;
    p.x_max = spot * (3.0 + 3.0 * u(rng));
    p.spot = spot;
    p.lower = lower;
    p.upper = upper;
    return {m, build_grid(p), {lower, upper}};
}

// Drift residual relative to the size of the terms that make up the drift.
double relative_drift_residual(const GeneratorBuild& b, const Grid& g, double gamma, std::size_t i) {
    const auto& a = b.generator.entries;
    double drift = 0.0;
    double scale = std::abs(gamma * g[i]);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double t = a(i, j) * (g[j] - g[i]);
        drift += t;
        scale += std::abs(t);
    }
    return std::abs(drift - gamma * g[i]) / scale;
}

}  // namespace

TEST_CASE("moment-matching generators satisfy the generator invariants on random configs") {
    std::mt19937_64 rng(2024);
    int clamped_configs = 0;
    for (int trial = 0; trial < 100; ++trial) {
        CAPTURE(trial);
        const Case c = random_case(rng);
        const GeneratorBuild b = build_mm(c.model, c.grid);
        const auto& a = b.generator.entries;
        const std::size_t n = c.grid.size();
        REQUIRE(static_cast<std::size_t>(a.rows()) == n);
        CHECK(validate(b.generator).ok());
        CHECK(a.row(0).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.row(n - 1).cwiseAbs().maxCoeff() == 0.0);
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) CHECK(a(i, j) >= 0.0);
            }
            CHECK(std::abs(a.row(i).sum()) <= 1e-10 * std::abs(a(i, i)));
            if (!b.clamped[i]) worst = std::max(worst, relative_drift_residual(b, c.grid, c.model.gamma, i));
        }
        CHECK(worst < 1e-9);
        if (b.clamped_count > 0) ++clamped_configs;

        const auto diag = validate(b, c.grid, c.model, c.barriers);
        CHECK(diag.ok());
        CHECK(diag.mesh == doctest::Approx(c.grid.mesh()));
    }
    MESSAGE("configs with clamped rows: " << clamped_configs);
}

TEST_CASE("second moments are matched at unclamped nodes") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Case c = random_case(rng);
        const GeneratorBuild b = build_mm(c.model, c.grid);
        const auto& a = b.generator.entries;
        for (std::size_t i = 1; i + 1 < c.grid.size(); ++i) {
            if (b.clamped[i]) continue;
            const double x = c.grid[i];
            double m2 = 0.0;
            for (std::size_t j = 0; j < c.grid.size(); ++j) m2 += a(i, j) * (c.grid[j] - x) * (c.grid[j] - x);
            double target = c.model.local_variance(x);
            if (c.model.has_jumps()) target += x * x * c.model.jumps->second_moment(x);
            CHECK(m2 == doctest::Approx(target).epsilon(1e-8));
        }
    }
}

TEST_CASE("pure-jump CGMY on a fine grid takes the clamp path") {
    CgmyParams c;
    c.C = 1;
    c.G = 9;
    c.M = 8;
    c.Y = 0.5;
    c.r = 0.03;
    const auto m = cgmy(c);
    GridParams p;
    p.counts = {100, 200, 100};
    p.densities = {1750, 1750, 17500, 17500, 1750, 1750};
    p.x_min = 350;
    p.x_max = 17500;
    p.spot = 3500;
    p.lower = 2800;
    p.upper = 4200;
    const Grid g = build_grid(p);
    const auto b = build_mm(m, g);
    CHECK(b.clamped_count > 0);
    CHECK(validate(b.generator).ok());
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        if (b.clamped[i]) CHECK(relative_drift_residual(b, g, m.gamma, i) < 1e-9);
    }
}

TEST_CASE("killed and stopped restrictions") {
    std::mt19937_64 rng(99);
    const Case c = random_case(rng);
    const auto b = build_mm(c.model, c.grid);
    const double r = 0.04;
    const auto killed = restrict_killed(b.generator, c.grid, c.barriers);
    const auto stopped = restrict_stopped(b.generator, c.grid, c.barriers, r);
    CHECK(killed.kind == GeneratorKind::killed);
    CHECK(killed.size() == c.grid.count_between(c.barriers.lower, c.barriers.upper));
    for (std::size_t i = 0; i < killed.size(); ++i) {
        for (std::size_t j = 0; j < killed.size(); ++j) {
            CHECK(killed.entries(i, j) == b.generator.entries(killed.states[i], killed.states[j]));
        }
    }
    CHECK(validate(killed).ok());
    CHECK(validate(stopped).ok());
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        const double sum = stopped.entries.row(i).sum();
        if (c.barriers.continues(c.grid[i])) {
            CHECK(sum == doctest::Approx(-r).epsilon(1e-9).scale(1.0));
        } else {
            CHECK(stopped.entries.row(i).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("validate flags broken matrices") {
    GeneratorMatrix g;
    g.entries = Eigen::MatrixXd::Zero(3, 3);
    g.grid_size = 3;
    g.entries(1, 0) = 1.0;
    g.entries(1, 1) = -0.5;
    g.entries(1, 2) = -0.2;
    const auto d = validate(g);
    CHECK_FALSE(d.ok());
    CHECK(d.violations.size() == 2);
}

TEST_CASE("finite-difference builder yields valid generators") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        CAPTURE(trial);
        const Case c = random_case(rng);
        FdOptions o;
        o.range = c.barriers;
        const auto b = build_fd(c.model, c.grid, o);
        CHECK(validate(b.generator).ok());
    }
}
