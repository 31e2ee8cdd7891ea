#include "ctmc/generator.hpp"

#include "ctmc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ctmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GeneratorMatrix make_full(Eigen::MatrixXd entries) {
    GeneratorMatrix out;
    const auto n = static_cast<std::size_t>(entries.rows());
    out.entries = std::move(entries);
    out.kind = GeneratorKind::full;
    out.grid_size = n;
    out.states.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.states[i] = i;
    return out;
}

// Sets the diagonal so that each row sums to zero.
void close_rows(Eigen::MatrixXd& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        a(i, i) = 0.0;
        a(i, i) = -a.row(i).sum();
    }
}

double row_scale(const Eigen::MatrixXd& a, Eigen::Index i) {
    return std::max(a.row(i).cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
}

std::string describe_row(const char* what, std::size_t row, double value) {
    std::ostringstream os;
    os << what << " at row " << row << " (" << value << ")";
    return os.str();
}

}  // namespace

std::string to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::full: return "full";
        case GeneratorKind::killed: return "killed";
        default: return "stopped";
    }
}

Eigen::MatrixXd build_jump_mm(const ModelSpec& m, const Grid& g, CellRule) {
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd jump = Eigen::MatrixXd::Zero(n, n);
    if (!m.has_jumps()) return jump;

    const auto pts = g.points();
    std::vector<double> edges(g.size() + 1);
    std::vector<double> mass(g.size());
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double x = pts[i];
        // Relative jump sizes y_j = x_j / x - 1; cells split at midpoints.
        edges.front() = -1.0;
        edges.back() = kInf;
        for (std::size_t j = 1; j < g.size(); ++j) {
            edges[j] = 0.5 * ((pts[j - 1] + pts[j]) / x) - 1.0;
        }
        m.jumps->cell_masses(x, edges, mass);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;  // the cell around y = 0 is a no-op jump
            const double v = mass[j];
            if (!std::isfinite(v) || v < 0.0) {
                std::ostringstream os;
                os << "jump cell mass failed at x=" << x << " on [" << edges[j] << ", "
                   << edges[j + 1] << "] (" << v << ")";
                throw NumericalError(os.str());
            }
            jump(i, j) = v;
        }
    }
    close_rows(jump);
    return jump;
}

DiffusionPart build_diffusion_mm(const ModelSpec& m, const Grid& g, const Eigen::MatrixXd& jump) {
    const auto n = static_cast<Eigen::Index>(g.size());
    DiffusionPart out;
    out.matrix = Eigen::MatrixXd::Zero(n, n);
    out.clamped.assign(g.size(), 0);
    const auto pts = g.points();

    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double x = pts[i];
        double jump_drift = 0.0;
        double jump_var = 0.0;
        if (m.has_jumps()) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                const double dz = pts[j] - x;
                jump_drift += jump(i, j) * dz;
                jump_var += jump(i, j) * dz * dz;
            }
        }
        const double drift = m.gamma * x - jump_drift;
        double variance = m.local_variance(x) - jump_var;
        if (m.has_jumps()) variance += x * x * m.jumps->second_moment(x);

        const double dm = x - pts[i - 1];
        const double dp = pts[i + 1] - x;
        double down = (variance - drift * dp) / (dm * (dm + dp));
        double up = (variance + drift * dm) / (dp * (dm + dp));

        const double floor_down = -jump(i, i - 1);
        const double floor_up = -jump(i, i + 1);
        bool clamped = false;
        if (down < floor_down) {
            // Keep the drift equation, give up the variance equation locally.
            down = floor_down;
            up = (drift + down * dm) / dp;
            clamped = true;
        }
        if (up < floor_up) {
            up = floor_up;
            down = (up * dp - drift) / dm;
            clamped = true;
            if (down < floor_down) down = floor_down;
        }
        if (clamped) {
            out.clamped[i] = 1;
            ++out.clamped_count;
        }
        out.matrix(i, i - 1) = down;
        out.matrix(i, i + 1) = up;
        out.matrix(i, i) = -(down + up);
    }
    return out;
}

GeneratorBuild build_mm(const ModelSpec& m, const Grid& g) {
    Eigen::MatrixXd jump = build_jump_mm(m, g);
    DiffusionPart diffusion = build_diffusion_mm(m, g, jump);
    jump += diffusion.matrix;
    // Re-close rows: the tri-diagonal clamp can leave a 1-ulp imbalance.
    close_rows(jump);
    for (Eigen::Index i = 0; i < jump.rows(); ++i) {
        for (Eigen::Index j = 0; j < jump.cols(); ++j) {
            if (i != j && jump(i, j) < 0.0) jump(i, j) = 0.0;
        }
    }
    close_rows(jump);
    GeneratorBuild out;
    out.generator = make_full(std::move(jump));
    out.clamped = std::move(diffusion.clamped);
    out.clamped_count = diffusion.clamped_count;
    return out;
}

double fd_window_constant(double alpha, double h) {
    if (alpha == 1.0) return -std::log(h);
    if (alpha > 1.0 && alpha < 2.0) return (2.0 - alpha) / (alpha - 1.0);
    throw ValidationError("window constant needs alpha in [1, 2)");
}

GeneratorBuild build_fd(const ModelSpec& m, const Grid& g, const FdOptions& opts) {
    const auto n = static_cast<Eigen::Index>(g.size());
    const auto pts = g.points();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    GeneratorBuild out;
    out.clamped.assign(g.size(), 0);

    CaseInfo regime{JumpCase::O, std::nullopt};
    double c_plus = 0.0;
    double c_minus = 0.0;
    if (m.has_jumps()) {
        const Barriers range = opts.range.value_or(Barriers{pts[1], pts[g.size() - 2]});
        regime = classify_case(m, std::max(range.lower, pts[1]), std::min(range.upper, pts[g.size() - 2]));
        if (regime.kind == JumpCase::Unclassified) {
            throw ValidationError("fd builder: jump density matches none of the regimes O, I, II");
        }
        if (regime.kind != JumpCase::O) {
            if (!regime.stable) throw ValidationError("fd builder: stable-type parameters missing");
            const auto& s = *regime.stable;
            if (!(s.kappa_lo_plus > 0.0) || !(s.kappa_lo_minus > 0.0)) {
                throw ValidationError("fd builder: stable-type lower bounds must be positive");
            }
            const double d_plus = opts.d_plus.value_or(2.0 * s.kappa_hi_plus / s.kappa_lo_plus);
            const double d_minus = opts.d_minus.value_or(2.0 * s.kappa_hi_minus / s.kappa_lo_minus);
            c_plus = d_plus * fd_window_constant(s.alpha_plus, g.mesh());
            c_minus = d_minus * fd_window_constant(s.alpha_minus, g.mesh());
        }
    }

    auto cell = [&](Eigen::Index i, Eigen::Index k) -> std::pair<double, double> {
        const double x = pts[i];
        if (k > i) {
            const double hi = (k + 1 == n) ? kInf : pts[k] / x - 1.0;
            return {pts[k - 1] / x - 1.0, hi};
        }
        const double lo = (k == 0) ? -1.0 : pts[k] / x - 1.0;
        return {lo, pts[k + 1] / x - 1.0};
    };

    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double x = pts[i];
        const double dm = x - pts[i - 1];
        const double dp = pts[i + 1] - x;
        double down = 0.0;
        double up = 0.0;

        const double s2 = m.local_variance(x);
        down += s2 / (dm * (dm + dp));
        up += s2 / (dp * (dm + dp));
        const double drift = m.gamma * x;
        if (drift > 0.0) up += drift / dp;
        else down += -drift / dm;

        if (m.has_jumps()) {
            const auto& jd = *m.jumps;
            Eigen::Index win_lo = i;
            Eigen::Index win_hi = i;
            if (regime.kind != JumpCase::O) {
                win_hi = n - 1;
                for (Eigen::Index j = i + 1; j < n; ++j) {
                    if (pts[j] >= x + c_plus * g.mesh()) { win_hi = j; break; }
                }
                win_lo = 0;
                for (Eigen::Index j = i - 1; j >= 0; --j) {
                    if (pts[j] <= x - c_minus * g.mesh()) { win_lo = j; break; }
                }
            }

            double alpha = 0.0;  // signed first moment of the small-jump cells
            double window_m = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (k == i) continue;
                if (regime.kind != JumpCase::O && k >= win_lo && k <= win_hi) continue;
                const auto [lo, hi] = cell(i, k);
                const double dz = pts[k] - x;
                if (pts[k] > 2.0 * x) {
                    a(i, k) += jd.cell_moment(x, lo, hi, 0);
                    down += x * jd.cell_moment(x, lo, hi, 1) / dm;
                } else if (regime.kind == JumpCase::O) {
                    const double c1 = jd.cell_moment(x, lo, hi, 1);
                    a(i, k) += x / std::abs(dz) * c1;
                    alpha += (dz > 0.0 ? c1 : -c1);
                } else {
                    const double w = (x / dz) * (x / dz) * jd.cell_moment(x, lo, hi, 2);
                    a(i, k) += w;
                    window_m += w * dz;
                }
            }
            if (regime.kind == JumpCase::O) {
                if (alpha >= 0.0) down += x * alpha / dm;
                else up += -x * alpha / dp;
            } else {
                const double lo = pts[win_lo] / x - 1.0;
                const double hi = pts[win_hi] / x - 1.0;
                const double c_ii = jd.cell_moment(x, lo, 0.0, 2) + jd.cell_moment(x, 0.0, hi, 2);
                down += (c_ii * x * x + window_m * dp) / (dm * (dm + dp));
                up += (c_ii * x * x - window_m * dm) / (dp * (dm + dp));
            }
        }
        a(i, i - 1) += down;
        a(i, i + 1) += up;

        bool clamped = false;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k != i && a(i, k) < 0.0) {
                a(i, k) = 0.0;
                clamped = true;
            }
        }
        if (clamped) {
            out.clamped[i] = 1;
            ++out.clamped_count;
        }
    }
    close_rows(a);
    out.generator = make_full(std::move(a));
    return out;
}

GeneratorMatrix restrict_killed(const GeneratorMatrix& full, const Grid& g, const Barriers& b) {
    if (full.kind != GeneratorKind::full) throw ValidationError("restrict_killed expects a full generator");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (b.continues(g[i])) keep.push_back(i);
    }
    if (keep.empty()) throw ValidationError("continuation set between the barriers is empty");

    GeneratorMatrix out;
    out.kind = GeneratorKind::killed;
    out.grid_size = g.size();
    const auto m = static_cast<Eigen::Index>(keep.size());
    out.entries.resize(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) {
            out.entries(r, c) = full.entries(static_cast<Eigen::Index>(keep[r]),
                                             static_cast<Eigen::Index>(keep[c]));
        }
    }
    out.states = std::move(keep);
    return out;
}

GeneratorMatrix restrict_stopped(const GeneratorMatrix& full, const Grid& g, const Barriers& b, double r) {
    if (full.kind != GeneratorKind::full) throw ValidationError("restrict_stopped expects a full generator");
    if (r < 0.0) throw ValidationError("discount rate must be nonnegative");
    GeneratorMatrix out = full;
    out.kind = GeneratorKind::stopped;
    out.discount = r;
    out.continuation.assign(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (b.continues(g[i])) {
            out.continuation[i] = 1;
            out.entries(row, row) -= r;
        } else {
            out.entries.row(row).setZero();
        }
    }
    return out;
}

BuildDiagnostics validate(const GeneratorMatrix& lambda) {
    BuildDiagnostics d;
    const auto& a = lambda.entries;
    if (!a.allFinite()) {
        d.violations.push_back("non-finite entries");
        return d;
    }
    constexpr double tol = 1e-10;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const auto row = static_cast<std::size_t>(i);
        const double scale = row_scale(a, i);
        const double sum = a.row(i).sum();
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (i != j && a(i, j) < -1e-12 * scale) {
                d.violations.push_back(describe_row("negative off-diagonal", row, a(i, j)));
                break;
            }
        }
        const bool zero_row = a.row(i).cwiseAbs().maxCoeff() == 0.0;
        switch (lambda.kind) {
            case GeneratorKind::full: {
                const std::size_t s = lambda.states.empty() ? row : lambda.states[row];
                const bool boundary = s == 0 || s + 1 == lambda.grid_size;
                if (boundary && !zero_row) d.violations.push_back(describe_row("non-absorbing boundary row", row, sum));
                if (std::abs(sum) > tol * scale) d.violations.push_back(describe_row("row sum not zero", row, sum));
                break;
            }
            case GeneratorKind::killed:
                if (sum > tol * scale) d.violations.push_back(describe_row("positive row sum", row, sum));
                break;
            case GeneratorKind::stopped: {
                const bool cont = row < lambda.continuation.size() && lambda.continuation[row];
                if (!cont && !zero_row) d.violations.push_back(describe_row("knock-out row not zero", row, sum));
                if (cont && std::abs(sum + lambda.discount) > tol * std::max(scale, 1.0)) {
                    d.violations.push_back(describe_row("row sum differs from -r", row, sum));
                }
                break;
            }
        }
    }
    return d;
}

double tail_mass(const ModelSpec& m, const Grid& g, const Barriers& b) {
    if (!m.has_jumps()) return 0.0;
    const std::size_t n = g.size();
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double x = g[k];
        if (x < b.lower || x > b.upper) continue;
        const double lo = g[1] / x - 1.0;
        const double hi = g[n - 2] / x - 1.0;
        if (!(lo < 0.0 && hi > 0.0)) continue;
        const double mass = m.jumps->cell_moment(x, -1.0, lo, 0) + m.jumps->cell_moment(x, hi, kInf, 0);
        worst = std::max(worst, mass);
    }
    return worst;
}

BuildDiagnostics validate(const GeneratorBuild& build, const Grid& g, const ModelSpec& m,
                          const Barriers& b) {
    BuildDiagnostics d = validate(build.generator);
    d.mesh = g.mesh();
    d.clamped_count = build.clamped_count;
    d.max_state = g.back();
    const std::size_t n = g.size();
    const double lo = std::max(b.lower, g[1]);
    const double hi = std::min(b.upper, g[n - 2]);
    d.jump_case = classify_case(m, lo, hi).kind;
    d.tail_mass = tail_mass(m, g, b);

    const auto& a = build.generator.entries;
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(g.points().data(), static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!build.clamped.empty() && build.clamped[i]) continue;
        const auto row = static_cast<Eigen::Index>(i);
        const double drift = a.row(row).dot((x.array() - x[row]).matrix());
        d.martingale_residual = std::max(d.martingale_residual, std::abs(drift - m.gamma * x[row]));
    }
    return d;
}

}  // namespace ctmc
