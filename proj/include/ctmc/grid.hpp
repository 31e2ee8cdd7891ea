#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace ctmc {

/// Parameters of one sinh-stretched subgrid: M points on [lower, upper],
/// clustered around `center`. Smaller densities concentrate points harder.
struct SubgridParams {
    double lower = 0.0;
    double center = 0.0;
    double upper = 0.0;
    int points = 0;             // even, >= 4
    double lower_density = 1.0; // > 0
    double upper_density = 1.0; // > 0
};

/// Returns `points` strictly increasing levels with the first equal to
/// `lower`, the (points/2)-th equal to `center` and the last equal to `upper`.
/// Throws ValidationError on odd/small point counts or unordered anchors.
std::vector<double> generate_subgrid(const SubgridParams& p);

inline constexpr double kNoUpperBarrier = std::numeric_limits<double>::infinity();

/// Three-region grid description. Region i uses counts[i] points and the
/// density pair (densities[2i], densities[2i+1]). A lower barrier of 0 and/or
/// an infinite upper barrier switch to the single-barrier (two-region) or
/// barrier-free (one-region) layout; unused counts/densities are ignored.
struct GridParams {
    std::array<int, 3> counts{};
    std::array<double, 6> densities{1, 1, 1, 1, 1, 1};
    double x_min = 0.0;
    double x_max = 0.0;
    double spot = 0.0;
    double lower = 0.0;
    double upper = kNoUpperBarrier;
    // Level (typically a strike) moved onto the nearest non-anchor node so
    // that a payoff kink sits on the grid.
    std::optional<double> snap;

    bool has_lower() const { return lower > 0.0; }
    bool has_upper() const { return upper < kNoUpperBarrier; }
    int region_count() const;

    /// Copy with the region counts rescaled so that they add up to `total`
    /// (each count even, outer regions equal). `total` must be even.
    GridParams with_total_points(int total) const;
};

/// Strictly increasing state space. Index 0 and size()-1 form the boundary.
class Grid {
public:
    explicit Grid(std::vector<double> points);

    std::span<const double> points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }

    bool is_boundary(std::size_t i) const { return i == 0 || i + 1 == points_.size(); }

    /// Largest spacing between neighbouring points.
    double mesh() const { return mesh_; }

    /// Index of a node equal to `x` (bitwise), if any.
    std::optional<std::size_t> find(double x) const;

    /// Number of nodes strictly inside (lower, upper).
    std::size_t count_between(double lower, double upper) const;

    /// One-column CSV with header `x`.
    void write_csv(std::ostream& os) const;

private:
    std::vector<double> points_;
    double mesh_ = 0.0;
};

/// Concatenates the regional subgrids anchored at the barriers and the spot.
/// Dispatches to single_barrier_grid when a barrier is absent.
Grid build_grid(const GridParams& p);

/// Two-region grid anchored at the spot and the single finite barrier, or a
/// single region around the spot when neither barrier is present.
Grid single_barrier_grid(const GridParams& p);

/// Sorts, then removes points closer than 1e-12 (relative) to their
/// predecessor.
std::vector<double> merge_points(std::vector<double> points);

/// Moves the node nearest to `level` onto it, leaving `anchors` in place.
/// No-op when `level` is already a node, lies outside the grid, or both
/// neighbouring nodes are anchors.
void snap_to_level(std::vector<double>& points, double level, std::span<const double> anchors);

}  // namespace ctmc
