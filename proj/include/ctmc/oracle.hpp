#pragma once

#include "ctmc/generator.hpp"
#include "ctmc/model.hpp"
#include "ctmc/pricer.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace ctmc {

struct SeriesResult {
    double price = 0.0;
    double last_term = 0.0;  // magnitude of the outermost (n = +-n_terms) contributions
    bool converged = true;   // last_term <= 1e-12
};

/// Continuously monitored double knock-out call under GBM with flat barriers,
/// by the image-expansion series summed over n = -n_terms..n_terms.
SeriesResult gbm_double_barrier_analytic(double sigma0, double r, double d, double S0, double K, double lower,
                                         double upper, double T, int n_terms = 10);

double black_scholes_call(double S0, double K, double sigma, double r, double d, double T);
double black_scholes_put(double S0, double K, double sigma, double r, double d, double T);

/// Discretely monitored limit behind the stopped-chain formula: with
/// dt = t / 2^doublings, computes M^(2^doublings) phi where
/// M = I - Ibar + e^{-r dt} (Ibar + dt * Lambda_0) and Ibar marks continuation
/// states. Needs a stopped generator with at most 6 states.
Eigen::VectorXd tiny_chain_exit_oracle(const GeneratorMatrix& stopped, double t, const Eigen::VectorXd& phi,
                                       int doublings = 20);

enum class McScheme { euler_log, exact_gbm };

struct McConfig {
    std::int64_t paths = 100000;
    int steps = 252;  // per year
    std::uint64_t seed = 42;
    McScheme scheme = McScheme::euler_log;
};

struct RateSegment {
    double duration = 0.0;
    double rate = 0.0;
};

/// Models the Monte Carlo pricer understands: GBM is the lambda = 0,
/// beta = 0 case of the local Levy model.
struct McModel {
    KouLocalLevyParams params;
    std::vector<RateSegment> rates;  // optional; overrides params.r
};

struct McResult {
    double price = 0.0;
    double stderr_ = 0.0;
    int steps = 0;  // monitoring dates actually used
};

/// Discretely monitored Monte Carlo price of the contract. Barrier checks
/// happen at every time step; touch payments are discounted from the step at
/// which the barrier is first seen crossed.
McResult mc_price(const McModel& model, const BarrierContract& c, const McConfig& cfg);

}  // namespace ctmc
