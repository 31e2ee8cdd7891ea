#include "ctmc/grid.hpp"

#include "ctmc/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace ctmc {

namespace {

constexpr double kMergeTolerance = 1e-12;

int even_round(double x) {
    return 2 * static_cast<int>(std::lround(x / 2.0));
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

}  // namespace

std::vector<double> generate_subgrid(const SubgridParams& p) {
    require(p.points >= 4 && p.points % 2 == 0,
            "subgrid point count must be even and >= 4, got " + std::to_string(p.points));
    require(p.lower < p.center && p.center < p.upper,
            "subgrid anchors must satisfy lower < center < upper");
    require(p.lower_density > 0.0 && p.upper_density > 0.0,
            "subgrid density parameters must be positive");

    const int half = p.points / 2;
    const double c1 = std::asinh((p.lower - p.center) / p.lower_density);
    const double c2 = std::asinh((p.upper - p.center) / p.upper_density);

    std::vector<double> x(static_cast<std::size_t>(p.points));
    for (int k = 1; k <= half; ++k) {
        const double frac = 1.0 - static_cast<double>(k - 1) / static_cast<double>(half - 1);
        x[k - 1] = p.center + p.lower_density * std::sinh(c1 * frac);
    }
    for (int k = 1; k <= half; ++k) {
        x[k - 1 + half] = p.center + p.upper_density * std::sinh(c2 * 2.0 * k / p.points);
    }
    // The sinh round trip reproduces the endpoints only to roundoff; pin them
    // so that shared endpoints of adjacent subgrids coincide bitwise.
    x.front() = p.lower;
    x.back() = p.upper;
    x[half - 1] = p.center;

    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) {
            throw NumericalError("subgrid is not strictly increasing; density parameters too extreme");
        }
    }
    return x;
}

int GridParams::region_count() const {
    return (has_lower() ? 1 : 0) + (has_upper() ? 1 : 0) + 1;
}

GridParams GridParams::with_total_points(int total) const {
    require(total % 2 == 0, "total grid size must be even");
    GridParams out = *this;
    const int regions = region_count();
    // Current counts act as proportions when all are set; otherwise split evenly.
    double weight_sum = 0.0;
    bool weighted = true;
    for (int i = 0; i < regions; ++i) {
        weighted = weighted && counts[i] > 0;
        weight_sum += counts[i];
    }
    out.counts = {0, 0, 0};
    // The middle region (the last one for fewer regions) takes the rounding slack.
    const int slack = regions == 3 ? 1 : regions - 1;
    int used = 0;
    for (int i = 0; i < regions; ++i) {
        if (i == slack) continue;
        const double share = weighted ? counts[i] / weight_sum : 1.0 / regions;
        out.counts[i] = std::max(4, even_round(total * share));
        used += out.counts[i];
    }
    out.counts[slack] = total - used;
    for (int i = 0; i < regions; ++i) {
        require(out.counts[i] >= 4, "total grid size too small for the region layout");
    }
    return out;
}

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
    require(points_.size() >= 3, "a grid needs at least three points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        require(std::isfinite(points_[i]), "grid points must be finite");
        if (i > 0) {
            require(points_[i] > points_[i - 1], "grid points must be strictly increasing");
            mesh_ = std::max(mesh_, points_[i] - points_[i - 1]);
        }
    }
}

std::optional<std::size_t> Grid::find(double x) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), x);
    if (it != points_.end() && *it == x) return static_cast<std::size_t>(it - points_.begin());
    return std::nullopt;
}

std::size_t Grid::count_between(double lower, double upper) const {
    return static_cast<std::size_t>(std::count_if(points_.begin(), points_.end(),
                                                  [&](double x) { return x > lower && x < upper; }));
}

void Grid::write_csv(std::ostream& os) const {
    os << "x\n" << std::setprecision(17);
    for (double x : points_) os << x << '\n';
}

std::vector<double> merge_points(std::vector<double> points) {
    std::sort(points.begin(), points.end());
    std::vector<double> out;
    out.reserve(points.size());
    for (double x : points) {
        if (!out.empty()) {
            const double prev = out.back();
            const double scale = std::max(std::abs(x), std::abs(prev));
            if (x - prev <= kMergeTolerance * scale) continue;
        }
        out.push_back(x);
    }
    return out;
}

void snap_to_level(std::vector<double>& points, double level, std::span<const double> anchors) {
    if (points.size() < 3 || !(level > points.front() && level < points.back())) return;
    const auto it = std::lower_bound(points.begin(), points.end(), level);
    if (*it == level) return;
    const auto hi = static_cast<std::size_t>(it - points.begin());
    const std::size_t lo = hi - 1;
    auto movable = [&](std::size_t i) {
        if (i == 0 || i + 1 == points.size()) return false;
        return std::find(anchors.begin(), anchors.end(), points[i]) == anchors.end();
    };
    const bool lo_ok = movable(lo);
    const bool hi_ok = movable(hi);
    if (!lo_ok && !hi_ok) return;
    std::size_t pick = lo_ok ? lo : hi;
    if (lo_ok && hi_ok && points[hi] - level < level - points[lo]) pick = hi;
    points[pick] = level;
}

namespace {

void append(std::vector<double>& dst, const SubgridParams& p) {
    auto sub = generate_subgrid(p);
    dst.insert(dst.end(), sub.begin(), sub.end());
}

void check_common(const GridParams& p) {
    require(std::isfinite(p.x_min) && std::isfinite(p.x_max) && p.x_min >= 0.0,
            "grid range must be finite and nonnegative");
    require(p.spot > p.lower && p.spot < p.upper, "spot must lie strictly between the barriers");
    require(!p.has_lower() || p.x_min < p.lower, "x_min must lie below the lower barrier");
    require(!p.has_upper() || p.x_max > p.upper, "x_max must lie above the upper barrier");
    require(p.x_min < p.spot && p.spot < p.x_max, "spot must lie inside (x_min, x_max)");
    for (double d : p.densities) require(d > 0.0, "density parameters must be positive");
}

void check_interior(const Grid& g, const GridParams& p) {
    if (p.has_lower() || p.has_upper()) {
        require(g.count_between(p.lower, p.upper) >= 4,
                "grid has fewer than 4 points strictly between the barriers");
    }
}

}  // namespace

Grid build_grid(const GridParams& p) {
    if (!(p.has_lower() && p.has_upper())) return single_barrier_grid(p);
    check_common(p);

    const double b1 = 0.5 * (p.spot + p.lower);
    const double b2 = 0.5 * (p.upper + p.spot);
    const auto& d = p.densities;
    std::vector<double> pts;
    append(pts, {p.x_min, p.lower, b1, p.counts[0], d[0], d[1]});
    append(pts, {b1, p.spot, b2, p.counts[1], d[2], d[3]});
    append(pts, {b2, p.upper, p.x_max, p.counts[2], d[4], d[5]});

    pts = merge_points(std::move(pts));
    if (p.snap) {
        const double anchors[] = {p.lower, b1, p.spot, b2, p.upper};
        snap_to_level(pts, *p.snap, anchors);
    }
    Grid g(std::move(pts));
    check_interior(g, p);
    return g;
}

Grid single_barrier_grid(const GridParams& p) {
    require(!(p.has_lower() && p.has_upper()), "single_barrier_grid needs at most one barrier");
    check_common(p);

    const auto& d = p.densities;
    std::vector<double> pts;
    std::vector<double> anchors{p.spot};
    if (p.has_upper()) {
        const double mid = 0.5 * (p.spot + p.upper);
        anchors.insert(anchors.end(), {mid, p.upper});
        append(pts, {p.x_min, p.spot, mid, p.counts[0], d[0], d[1]});
        append(pts, {mid, p.upper, p.x_max, p.counts[1], d[2], d[3]});
    } else if (p.has_lower()) {
        const double mid = 0.5 * (p.lower + p.spot);
        anchors.insert(anchors.end(), {p.lower, mid});
        append(pts, {p.x_min, p.lower, mid, p.counts[0], d[0], d[1]});
        append(pts, {mid, p.spot, p.x_max, p.counts[1], d[2], d[3]});
    } else {
        append(pts, {p.x_min, p.spot, p.x_max, p.counts[0], d[0], d[1]});
    }

    pts = merge_points(std::move(pts));
    if (p.snap) snap_to_level(pts, *p.snap, anchors);
    Grid g(std::move(pts));
    check_interior(g, p);
    return g;
}

}  // namespace ctmc
