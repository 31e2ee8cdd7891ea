#include <doctest.h>

#include "ctmc/error.hpp"
#include "ctmc/generator.hpp"
#include "ctmc/grid.hpp"
#include "ctmc/model.hpp"
#include "ctmc/oracle.hpp"
#include "ctmc/pricer.hpp"

#include <cmath>

using namespace ctmc;

namespace {

Grid table1_grid(int total, double lower, double upper) {
    GridParams p;
    p.counts = {1, 1, 1};
    p.densities = {100, 1, 10, 10, 1, 100};
    p.x_min = 0.2;
    p.x_max = 10;
    p.spot = 2;
    p.lower = lower;
    p.upper = upper;
    return build_grid(p.with_total_points(total));
}

BarrierContract ko_call(double r) {
    BarrierContract c;
    c.kind = ContractKind::knock_out;
    c.lower = 1.5;
    c.upper = 3.0;
    c.maturity = 1.0;
    c.rate = r;
    c.spot = 2.0;
    c.payoff = {PayoffType::call, 2.0};
    return c;
}

}  // namespace

TEST_CASE("knock-out plus knock-in equals the European claim") {
    const Grid g = table1_grid(200, 1.5, 3.0);
    const auto full = build_mm(gbm(0.5, 0.05, 0.0), g).generator;
    auto c = ko_call(0.05);
    const auto ko = price(full, g, c);
    c.kind = ContractKind::knock_in;
    const auto ki = price(full, g, c);
    c.kind = ContractKind::european;
    const auto eu = price(full, g, c);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(ko.values[i] + ki.values[i] - eu.values[i]) <= 1e-12 * std::max(1.0, eu.values[i]));
    }
    CHECK(ko.spot_price > 0.0);
    CHECK(ko.spot_price < eu.spot_price);
}

TEST_CASE("no-touch plus one-touch is one without discounting") {
    const Grid g = table1_grid(200, 1.5, 3.0);
    const auto full = build_mm(gbm(0.3, 0.0, 0.0), g).generator;
    auto c = ko_call(0.0);
    c.kind = ContractKind::no_touch;
    const auto nt = price(full, g, c);
    c.kind = ContractKind::one_touch;
    const auto ot = price(full, g, c);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (c.barriers().continues(g[i])) CHECK(std::abs(nt.values[i] + ot.values[i] - 1.0) <= 1e-12);
    }
    CHECK(nt.spot_price > 0.0);
    CHECK(nt.spot_price < 1.0);
}

TEST_CASE("general stopped claim decomposes into knock-out and rebate") {
    const Grid g = table1_grid(200, 1.5, 3.0);
    const auto full = build_mm(gbm(0.4, 0.03, 0.01), g).generator;
    auto c = ko_call(0.03);
    c.rebate = {PayoffType::linear, 0.0, 0.1};
    const auto ko = price_knockout(full, g, c);
    const auto rb = price_rebate(full, g, c);
    const auto gen = price_stopped_general(full, g, c);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (c.barriers().continues(g[i])) CHECK(gen.values[i] == doctest::Approx(ko.values[i] + rb.values[i]).epsilon(1e-10));
    }
    CHECK(rb.spot_price > 0.0);
}

TEST_CASE("European prices and greeks approach Black-Scholes") {
    GridParams p;
    p.counts = {400, 0, 0};
    p.densities = {5, 5, 1, 1, 1, 1};
    p.x_min = 1;
    p.x_max = 400;
    p.spot = 100;
    const Grid g = build_grid(p);
    const auto full = build_mm(gbm(0.25, 0.05, 0.02), g).generator;
    BarrierContract c;
    c.kind = ContractKind::european;
    c.maturity = 0.5;
    c.rate = 0.05;
    c.dividend = 0.02;
    c.spot = 100;
    c.payoff = {PayoffType::call, 100};
    const auto s = price(full, g, c);
    CHECK(s.spot_price == doctest::Approx(black_scholes_call(100, 100, 0.25, 0.05, 0.02, 0.5)).epsilon(1e-3));
    REQUIRE(s.delta);
    const double d1 = (std::log(1.0) + (0.05 - 0.02 + 0.5 * 0.0625) * 0.5) / (0.25 * std::sqrt(0.5));
    const double bs_delta = std::exp(-0.02 * 0.5) * 0.5 * std::erfc(-d1 / std::sqrt(2.0));
    CHECK(std::abs(*s.delta - bs_delta) < 1e-3);

    c.payoff = {PayoffType::put, 100};
    const auto put = price(full, g, c);
    const double parity = s.spot_price - put.spot_price - (100 * std::exp(-0.02 * 0.5) - 100 * std::exp(-0.05 * 0.5));
    CHECK(std::abs(parity) < 1e-3);
}

TEST_CASE("knock-out prices respect bounds") {
    const Grid g = table1_grid(400, 1.5, 3.0);
    const auto full = build_mm(gbm(0.5, 0.05, 0.0), g).generator;
    auto c = ko_call(0.05);
    c.kind = ContractKind::no_touch;
    const auto nt = price(full, g, c);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(nt.values[i] >= -1e-14);
        CHECK(nt.values[i] <= 1.0);
        if (!c.barriers().continues(g[i])) CHECK(nt.values[i] == 0.0);
    }
    // A wider corridor survives longer.
    const Grid wide = table1_grid(400, 1.2, 3.5);
    const auto wfull = build_mm(gbm(0.5, 0.05, 0.0), wide).generator;
    auto cw = c;
    cw.lower = 1.2;
    cw.upper = 3.5;
    CHECK(price(wfull, wide, cw).spot_price > nt.spot_price);
}

TEST_CASE("identical schedule segments reproduce the homogeneous price") {
    const Grid g = table1_grid(200, 1.5, 3.0);
    const auto full = build_mm(gbm(0.5, 0.05, 0.0), g).generator;
    for (auto kind : {ContractKind::knock_out, ContractKind::knock_in, ContractKind::one_touch}) {
        auto c = ko_call(0.05);
        c.kind = kind;
        const auto ref = price(full, g, c);
        const ScheduleSegment s[] = {{0.25, &full, 0.05}, {0.35, &full, 0.05}, {0.4, &full, 0.05}};
        const auto sch = price_schedule(s, g, c);
        CHECK(std::abs(sch.spot_price - ref.spot_price) < 1e-10);
    }
    const ScheduleSegment short_s[] = {{0.5, &full, 0.05}};
    CHECK_THROWS_AS(price_schedule(short_s, g, ko_call(0.05)), ValidationError);
}

TEST_CASE("rate schedule agrees with Monte Carlo") {
    GridParams p;
    p.counts = {1, 1, 1};
    p.densities = {100, 1, 10, 10, 1, 100};
    p.x_min = 0.2;
    p.x_max = 10;
    p.spot = 2;
    p.lower = 1.5;
    p.upper = 2.5;
    const Grid g = build_grid(p.with_total_points(800));
    const auto a = build_mm(gbm(0.2, 0.02, 0.0), g).generator;
    const auto b = build_mm(gbm(0.2, 0.08, 0.0), g).generator;
    BarrierContract c;
    c.lower = 1.5;
    c.upper = 2.5;
    c.spot = 2;
    c.payoff = {PayoffType::call, 2.0};
    c.rebate = {PayoffType::unit};
    const ScheduleSegment s[] = {{0.5, &a, 0.02}, {0.5, &b, 0.08}};
    const double ko = price_schedule(s, g, c).spot_price;
    c.kind = ContractKind::one_touch;
    const double ot = price_schedule(s, g, c).spot_price;

    // Regression values, cross-checked below against simulation.
    CHECK(ko == doctest::Approx(0.0455098238).epsilon(1e-8));
    CHECK(ot == doctest::Approx(0.4159296178).epsilon(1e-8));

    McModel m;
    m.params.S0 = 2;
    m.params.sigma0 = 0.2;
    m.rates = {{0.5, 0.02}, {0.5, 0.08}};
    McConfig cfg;
    cfg.paths = 40000;
    cfg.steps = 500;
    cfg.scheme = McScheme::exact_gbm;
    // Shift the barriers inward so that discrete monitoring mimics continuous.
    const double shift = std::exp(0.5826 * 0.2 * std::sqrt(1.0 / cfg.steps));
    BarrierContract cm = c;
    cm.lower = 1.5 * shift;
    cm.upper = 2.5 / shift;
    cm.kind = ContractKind::knock_out;
    const auto mko = mc_price(m, cm, cfg);
    CHECK(std::abs(mko.price - ko) < 4 * mko.stderr_ + 5e-4);
    cm.kind = ContractKind::one_touch;
    const auto mot = mc_price(m, cm, cfg);
    CHECK(std::abs(mot.price - ot) < 4 * mot.stderr_ + 5e-3);
}

TEST_CASE("greeks on a nonuniform grid are exact for quadratics") {
    const Grid g({0.0, 1.0, 1.5, 3.0, 4.0});
    std::vector<double> v;
    for (double x : g.points()) v.push_back(2 * x * x - x + 1);
    const auto gk = greeks(v, g, 1.5);
    REQUIRE(gk.delta);
    REQUIRE(gk.gamma);
    CHECK(*gk.delta == doctest::Approx(4 * 1.5 - 1));
    CHECK(*gk.gamma == doctest::Approx(4.0));
    CHECK_FALSE(greeks(v, g, 1.2).delta);
}

TEST_CASE("off-grid spots are interpolated and flagged") {
    const Grid g = table1_grid(200, 1.5, 3.0);
    const auto full = build_mm(gbm(0.5, 0.05, 0.0), g).generator;
    auto c = ko_call(0.05);
    c.spot = 2.01;
    const auto s = price(full, g, c);
    CHECK(s.spot_interpolated);
    CHECK_FALSE(s.delta);
    c.spot = 2.0;
    CHECK_FALSE(price(full, g, c).spot_interpolated);
}

TEST_CASE("contract validation") {
    auto c = ko_call(0.05);
    c.upper = 1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = ko_call(0.05);
    c.maturity = -1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK(parse_contract_kind("one_touch") == ContractKind::one_touch);
    CHECK_THROWS_AS(parse_payoff_type("digital"), ValidationError);
}
