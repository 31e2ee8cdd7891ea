#include "ctmc/convergence.hpp"

#include "ctmc/error.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace ctmc {

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("ols_slope needs two or more points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw ValidationError("ols_slope: all abscissae equal");
    return sxy / sxx;
}

ConvergenceReport run_study(const std::function<double(int)>& task, const std::vector<int>& sizes,
                            const ConvergenceReference& reference, double noise_floor) {
    if (sizes.size() < 3) throw ValidationError("a convergence study needs at least 3 sizes");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] <= 0) throw ValidationError("grid sizes must be positive");
        if (i > 0 && sizes[i] <= sizes[i - 1]) throw ValidationError("grid sizes must be strictly increasing");
    }
    if (!std::isfinite(reference.value)) throw ValidationError("reference value must be finite");

    ConvergenceReport r;
    r.sizes = sizes;
    r.reference = reference;
    std::vector<double> lx;
    std::vector<double> ly;
    for (int n : sizes) {
        const auto t0 = std::chrono::steady_clock::now();
        const double p = task(n);
        const auto t1 = std::chrono::steady_clock::now();
        const double err = std::abs(p - reference.value);
        r.prices.push_back(p);
        r.errors.push_back(err);
        r.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
        if (err >= noise_floor) {
            lx.push_back(std::log(static_cast<double>(n)));
            ly.push_back(std::log(err));
        }
    }
    r.fitted_points = static_cast<int>(lx.size());
    if (lx.size() >= 2) r.slope = ols_slope(lx, ly);
    return r;
}

std::optional<PredictedBound> predicted_bound(const ModelSpec& m, const Grid& g, const Barriers& b) {
    PredictedBound out;
    out.h = g.mesh();
    if (m.has_jumps()) {
        const CaseInfo info = classify_case(m, b.lower > 0.0 ? b.lower : g.front(),
                                            std::isfinite(b.upper) ? b.upper : g.back());
        if (info.kind == JumpCase::Unclassified) return std::nullopt;
        out.kind = info.kind;
        out.k = tail_mass(m, g, b);
    }
    out.eh = error_form(out.kind, out.h);
    std::ostringstream os;
    os << std::setprecision(4) << "C1*E(h) + C2*k, case " << to_string(out.kind) << ": E(h) = "
       << (out.kind == JumpCase::I ? "-h log h" : "h") << " = " << out.eh << " (h = " << out.h << "), k = " << out.k;
    out.text = os.str();
    return out;
}

void write_csv(const ConvergenceReport& r, std::ostream& os) {
    os << "N,price,error,seconds\n" << std::setprecision(12);
    for (std::size_t i = 0; i < r.sizes.size(); ++i) {
        os << r.sizes[i] << ',' << r.prices[i] << ',' << r.errors[i] << ',' << r.seconds[i] << '\n';
    }
}

nlohmann::ordered_json to_json(const ConvergenceReport& r) {
    nlohmann::ordered_json j;
    j["sizes"] = r.sizes;
    j["prices"] = r.prices;
    j["errors"] = r.errors;
    j["seconds"] = r.seconds;
    j["slope"] = r.slope ? nlohmann::ordered_json(*r.slope) : nlohmann::ordered_json(nullptr);
    j["fitted_points"] = r.fitted_points;
    j["reference"] = {{"value", r.reference.value},
                      {"provenance", r.reference.provenance},
                      {"self_reference", r.reference.self_reference}};
    j["predicted"] = r.predicted;
    return j;
}

}  // namespace ctmc
