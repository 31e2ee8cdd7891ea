#pragma once

#include "ctmc/grid.hpp"
#include "ctmc/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ctmc {

enum class GeneratorKind { full, killed, stopped };

std::string to_string(GeneratorKind k);

/// Knock-out set A = [0, lower] U [upper, inf); the continuation set is the
/// open interval (lower, upper).
struct Barriers {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();

    bool continues(double x) const { return x > lower && x < upper; }
};

/// Dense intensity matrix of a chain on (a subset of) a grid.
///   full    - N x N generator with absorbing boundary rows
///   killed  - continuation block, rows/columns indexed by `states`
///   stopped - N x N, knock-out rows zero, continuation diagonal shifted by -discount
struct GeneratorMatrix {
    Eigen::MatrixXd entries;
    GeneratorKind kind = GeneratorKind::full;
    double discount = 0.0;
    std::vector<std::size_t> states;  // grid index of each row
    std::vector<char> continuation;   // per row; stopped kind only
    std::size_t grid_size = 0;

    std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

/// Output of a builder: the full generator plus per-row clamp flags.
struct GeneratorBuild {
    GeneratorMatrix generator;
    std::vector<char> clamped;
    int clamped_count = 0;
};

struct BuildDiagnostics {
    double tail_mass = 0.0;
    double mesh = 0.0;
    int clamped_count = 0;
    JumpCase jump_case = JumpCase::O;
    double martingale_residual = 0.0;
    double max_state = 0.0;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

enum class CellRule { midpoint };

/// Jump part of the moment-matching builder: cell masses of the jump density
/// over the midpoint partition of relative jump sizes. Zero boundary rows.
Eigen::MatrixXd build_jump_mm(const ModelSpec& m, const Grid& g, CellRule rule = CellRule::midpoint);

struct DiffusionPart {
    Eigen::MatrixXd matrix;
    std::vector<char> clamped;
    int clamped_count = 0;
};

/// Tri-diagonal part that makes the total generator match the local drift
/// gamma x and the local second moment of the model at every interior node.
DiffusionPart build_diffusion_mm(const ModelSpec& m, const Grid& g, const Eigen::MatrixXd& jump);

/// Moment-matching generator Lambda = Lambda_D + Lambda_J.
GeneratorBuild build_mm(const ModelSpec& m, const Grid& g);

struct FdOptions {
    // Window multipliers d+/d- for infinite-variation jumps; default
    // 2 * kappa_hi / kappa_lo per side.
    std::optional<double> d_plus;
    std::optional<double> d_minus;
    // Price range used to classify the jump density; defaults to the grid.
    std::optional<Barriers> range;
};

/// Upwind finite-difference generator with the jump discretisation chosen by
/// the density's regime (finite-variation form for case O, second-moment
/// window form for cases I and II).
GeneratorBuild build_fd(const ModelSpec& m, const Grid& g, const FdOptions& opts = {});

/// Window constant c(alpha, h) of the infinite-variation form.
double fd_window_constant(double alpha, double h);

/// Continuation block of a full generator.
GeneratorMatrix restrict_killed(const GeneratorMatrix& full, const Grid& g, const Barriers& b);

/// Stopped-and-discounted generator.
GeneratorMatrix restrict_stopped(const GeneratorMatrix& full, const Grid& g, const Barriers& b, double r);

/// Structural invariants of the matrix's kind. Never throws; violations are
/// reported in the result.
BuildDiagnostics validate(const GeneratorMatrix& lambda);

/// Invariants plus tail mass, mesh, martingale residual and regime.
BuildDiagnostics validate(const GeneratorBuild& build, const Grid& g, const ModelSpec& m,
                          const Barriers& b);

/// Tail mass of the jump measure beyond the second and next-to-last grid
/// points, maximised over nodes in [lower, upper].
double tail_mass(const ModelSpec& m, const Grid& g, const Barriers& b);

}  // namespace ctmc
