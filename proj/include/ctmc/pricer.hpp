#pragma once

#include "ctmc/generator.hpp"
#include "ctmc/grid.hpp"
#include "ctmc/matexp.hpp"

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ctmc {

enum class ContractKind { knock_out, knock_in, rebate, no_touch, one_touch, european, stopped_general };

std::string to_string(ContractKind k);
ContractKind parse_contract_kind(const std::string& s);

enum class PayoffType { call, put, unit, zero, constant, linear };

std::string to_string(PayoffType t);
PayoffType parse_payoff_type(const std::string& s);

/// Node-wise payoff: (x-K)+, (K-x)+, 1, 0, amount, or amount * x.
struct PayoffSpec {
    PayoffType type = PayoffType::zero;
    double strike = 0.0;
    double amount = 1.0;

    double operator()(double x) const;
};

/// g(S_T) paid at T if the price stayed in (lower, upper), h(S_tau) paid at
/// the first entry time tau into [0, lower] U [upper, inf).
struct BarrierContract {
    ContractKind kind = ContractKind::knock_out;
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    double maturity = 1.0;
    double rate = 0.0;
    double dividend = 0.0;
    double spot = 1.0;
    PayoffSpec payoff;
    PayoffSpec rebate;

    Barriers barriers() const { return {lower, upper}; }
    /// Throws ValidationError on broken invariants.
    void validate() const;
};

struct PriceSurface {
    std::vector<double> values;  // one per grid node
    double spot_price = 0.0;
    std::optional<double> delta;
    std::optional<double> gamma;
    bool spot_interpolated = false;
    BuildDiagnostics diagnostics;
    std::vector<std::string> warnings;
};

/// The pricing functions take the full generator of the chain on `grid`;
/// killed and stopped restrictions are derived from the contract barriers.

PriceSurface price_knockout(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                            const ExpmConfig& cfg = {});

/// Several knock-out claims sharing barriers, maturity and rate, priced with
/// one block action of the killed exponential.
std::vector<PriceSurface> price_knockout_batch(const GeneratorMatrix& full, const Grid& grid,
                                               std::span<const BarrierContract> contracts,
                                               const ExpmConfig& cfg = {});

PriceSurface price_rebate(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                          const ExpmConfig& cfg = {});

PriceSurface price_stopped_general(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                                   const ExpmConfig& cfg = {});

PriceSurface price_knockin(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                           const ExpmConfig& cfg = {});

PriceSurface price_european(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                            const ExpmConfig& cfg = {});

/// Dispatches on c.kind. no_touch is a knock-out with unit payoff and
/// one_touch a rebate with unit rebate.
PriceSurface price(const GeneratorMatrix& full, const Grid& grid, const BarrierContract& c,
                   const ExpmConfig& cfg = {});

/// Piecewise-homogeneous dynamics: segment i lasts `duration` under
/// generator `full` with short rate `rate`. Segments are in calendar order.
struct ScheduleSegment {
    double duration = 0.0;
    const GeneratorMatrix* full = nullptr;
    double rate = 0.0;
};

/// Durations must be positive and add up to c.maturity within 1e-12.
/// c.rate is ignored in favour of the segment rates.
PriceSurface price_schedule(std::span<const ScheduleSegment> schedule, const Grid& grid,
                            const BarrierContract& c, const ExpmConfig& cfg = {});

struct Greeks {
    std::optional<double> delta;
    std::optional<double> gamma;
};

/// Three-point differences on the nonuniform grid at the node equal to spot.
/// One-sided delta and no gamma at a boundary node; nothing off the grid.
Greeks greeks(std::span<const double> values, const Grid& grid, double spot);

/// Payoff vector g(x_i) over all grid nodes.
Eigen::VectorXd payoff_vector(const PayoffSpec& f, const Grid& grid);

}  // namespace ctmc
