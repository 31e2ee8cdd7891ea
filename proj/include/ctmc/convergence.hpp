#pragma once

#include "ctmc/generator.hpp"
#include "ctmc/grid.hpp"
#include "ctmc/model.hpp"

#include <json.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ctmc {

struct ConvergenceReference {
    double value = 0.0;
    std::string provenance;       // where the number comes from
    bool self_reference = false;  // produced by this algorithm at a larger N
};

struct ConvergenceReport {
    std::vector<int> sizes;
    std::vector<double> prices;
    std::vector<double> errors;
    std::vector<double> seconds;
    std::optional<double> slope;  // unset when fewer than two errors clear the noise floor
    int fitted_points = 0;
    ConvergenceReference reference;
    std::string predicted;  // textual error bound, empty when unavailable
};

/// Prices `task(N)` for each size, then fits log|error| against log N by
/// ordinary least squares, skipping errors below `noise_floor`.
/// Needs at least three strictly increasing sizes.
ConvergenceReport run_study(const std::function<double(int)>& task, const std::vector<int>& sizes,
                            const ConvergenceReference& reference, double noise_floor = 1e-11);

struct PredictedBound {
    JumpCase kind = JumpCase::O;
    double h = 0.0;   // grid mesh
    double eh = 0.0;  // E(h)
    double k = 0.0;   // tail mass
    std::string text;
};

/// C1 E(h) + C2 k for the model on this grid, or nullopt when the jump
/// regime cannot be classified.
std::optional<PredictedBound> predicted_bound(const ModelSpec& m, const Grid& g, const Barriers& b);

/// Least-squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_csv(const ConvergenceReport& r, std::ostream& os);
nlohmann::ordered_json to_json(const ConvergenceReport& r);

}  // namespace ctmc
