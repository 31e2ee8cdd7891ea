#include "ctmc/job.hpp"

#include "ctmc/error.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

namespace ctmc {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string to_string(ModelType t) {
    switch (t) {
        case ModelType::gbm: return "gbm";
        case ModelType::localvol: return "localvol";
        case ModelType::kou_local: return "kou_local";
        default: return "cgmy";
    }
}

std::string to_string(BuilderKind b) { return b == BuilderKind::mm ? "mm" : "fd"; }

std::string to_string(OutputMode o) {
    switch (o) {
        case OutputMode::json: return "json";
        case OutputMode::csv: return "csv";
        default: return "both";
    }
}

BuilderKind parse_builder(const std::string& s) {
    if (s == "mm") return BuilderKind::mm;
    if (s == "fd") return BuilderKind::fd;
    throw ValidationError("unknown builder '" + s + "' (expected mm|fd)");
}

double round9(double x) {
    if (!std::isfinite(x)) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return std::strtod(buf, nullptr);
}

ModelSpec ModelConfig::build(double rate, double dividend, double spot) const {
    const double ref = reference.value_or(spot);
    switch (type) {
        case ModelType::gbm: return gbm(sigma0, rate, dividend);
        case ModelType::localvol: return local_vol(sigma0, beta, ref, rate, dividend);
        case ModelType::kou_local:
            return kou_local_levy({ref, sigma0, lambda, p, eta1, eta2, beta, rate, dividend});
        default: return ctmc::cgmy({C, G, M, Y, rate, dividend, sigma_extra});
    }
}

GridParams JobConfig::grid_params() const {
    GridParams g = grid;
    g.spot = contract.spot;
    g.lower = contract.lower;
    g.upper = contract.upper;
    const auto kind = contract.payoff.type;
    if (snap_strike && (kind == PayoffType::call || kind == PayoffType::put)) g.snap = contract.payoff.strike;
    if (total_points) g = g.with_total_points(*total_points);
    return g;
}

namespace {

// Strict object reader: every key must be consumed, errors carry the path.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_ + ": expected an object");
    }

    bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }

    double number(const std::string& k, double fallback) {
        seen_.insert(k);
        if (!has(k)) return fallback;
        return as_number(j_.at(k), where(k));
    }

    std::optional<double> maybe_number(const std::string& k) {
        seen_.insert(k);
        if (!has(k)) return std::nullopt;
        return as_number(j_.at(k), where(k));
    }

    int integer(const std::string& k, int fallback) {
        seen_.insert(k);
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_number_integer()) throw ValidationError(where(k) + ": expected an integer");
        return v.get<int>();
    }

    std::string string(const std::string& k, const std::string& fallback) {
        seen_.insert(k);
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_string()) throw ValidationError(where(k) + ": expected a string");
        return v.get<std::string>();
    }

    bool boolean(const std::string& k, bool fallback) {
        seen_.insert(k);
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_boolean()) throw ValidationError(where(k) + ": expected true or false");
        return v.get<bool>();
    }

    const json* child(const std::string& k) {
        seen_.insert(k);
        return has(k) ? &j_.at(k) : nullptr;
    }

    std::string where(const std::string& k) const { return path_ + "." + k; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ValidationError(where(it.key()) + ": unknown field");
        }
    }

    static double as_number(const json& v, const std::string& at) {
        if (v.is_number()) return v.get<double>();
        if (v.is_string() && (v == "inf" || v == "Infinity")) return std::numeric_limits<double>::infinity();
        throw ValidationError(at + ": expected a number");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
auto field(const std::string& at, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        if (msg.rfind(at, 0) == 0) throw;
        throw ValidationError(at + ": " + msg);
    }
}

PayoffSpec parse_payoff(const json& j, const std::string& at) {
    Reader r(j, at);
    PayoffSpec p;
    p.type = field(r.where("type"), [&] { return parse_payoff_type(r.string("type", "zero")); });
    p.strike = r.number("strike", 0.0);
    p.amount = r.number("amount", 1.0);
    r.finish();
    return p;
}

ojson payoff_json(const PayoffSpec& p) {
    ojson j;
    j["type"] = to_string(p.type);
    if (p.type == PayoffType::call || p.type == PayoffType::put) j["strike"] = p.strike;
    if (p.type == PayoffType::constant || p.type == PayoffType::linear) j["amount"] = p.amount;
    return j;
}

ojson number_or_inf(double x) {
    if (std::isinf(x)) return ojson(nullptr);
    return ojson(x);
}

}  // namespace

JobConfig parse_job(const json& j) {
    Reader top(j, "$");
    JobConfig c;

    const json* m = top.child("model");
    if (!m) throw ValidationError("$.model: required");
    {
        Reader r(*m, "$.model");
        const std::string type = r.string("type", "");
        if (type == "gbm") c.model.type = ModelType::gbm;
        else if (type == "localvol") c.model.type = ModelType::localvol;
        else if (type == "kou_local") c.model.type = ModelType::kou_local;
        else if (type == "cgmy") c.model.type = ModelType::cgmy;
        else throw ValidationError("$.model.type: expected gbm|localvol|kou_local|cgmy, got '" + type + "'");
        auto& mc = c.model;
        mc.sigma0 = r.number("sigma0", mc.type == ModelType::cgmy ? 0.0 : mc.sigma0);
        mc.beta = r.number("beta", mc.beta);
        mc.reference = r.maybe_number("reference");
        mc.lambda = r.number("lambda", mc.lambda);
        mc.p = r.number("p", mc.p);
        mc.eta1 = r.number("eta1", mc.eta1);
        mc.eta2 = r.number("eta2", mc.eta2);
        mc.C = r.number("C", mc.C);
        mc.G = r.number("G", mc.G);
        mc.M = r.number("M", mc.M);
        mc.Y = r.number("Y", mc.Y);
        mc.sigma_extra = r.number("sigma_extra", mc.sigma_extra);
        r.finish();
    }

    const json* ct = top.child("contract");
    if (!ct) throw ValidationError("$.contract: required");
    {
        Reader r(*ct, "$.contract");
        auto& k = c.contract;
        k.kind = field(r.where("kind"), [&] { return parse_contract_kind(r.string("kind", "knock_out")); });
        k.lower = r.number("lower", 0.0);
        k.upper = r.number("upper", std::numeric_limits<double>::infinity());
        k.maturity = r.number("maturity", 1.0);
        k.rate = r.number("rate", 0.0);
        k.dividend = r.number("dividend", 0.0);
        const auto spot = r.maybe_number("spot");
        if (!spot) throw ValidationError("$.contract.spot: required");
        k.spot = *spot;
        if (const json* p = r.child("payoff")) k.payoff = parse_payoff(*p, "$.contract.payoff");
        if (const json* p = r.child("rebate")) k.rebate = parse_payoff(*p, "$.contract.rebate");
        r.finish();
        field("$.contract", [&] {
            k.validate();
            return 0;
        });
        if (!k.barriers().continues(k.spot) && k.kind != ContractKind::european) {
            throw ValidationError("$.contract.spot: must lie strictly between lower and upper");
        }
    }

    const json* g = top.child("grid");
    if (!g) throw ValidationError("$.grid: required");
    {
        Reader r(*g, "$.grid");
        auto& gp = c.grid;
        if (r.has("N")) c.total_points = r.integer("N", 0);
        if (const json* counts = r.child("counts")) {
            if (!counts->is_array() || counts->size() < 1 || counts->size() > 3) {
                throw ValidationError("$.grid.counts: expected an array of 1 to 3 integers");
            }
            for (std::size_t i = 0; i < counts->size(); ++i) {
                if (!(*counts)[i].is_number_integer()) throw ValidationError("$.grid.counts: expected integers");
                gp.counts[i] = (*counts)[i].get<int>();
            }
        } else if (!c.total_points) {
            throw ValidationError("$.grid: needs N or counts");
        } else {
            gp.counts = {2, 2, 2};
        }
        if (const json* d = r.child("densities")) {
            if (!d->is_array() || d->size() < 2 || d->size() > 6 || d->size() % 2) {
                throw ValidationError("$.grid.densities: expected 2, 4 or 6 numbers");
            }
            for (std::size_t i = 0; i < d->size(); ++i) {
                gp.densities[i] = Reader::as_number((*d)[i], "$.grid.densities");
            }
        }
        const auto lo = r.maybe_number("x_min");
        const auto hi = r.maybe_number("x_max");
        if (!lo) throw ValidationError("$.grid.x_min: required");
        if (!hi) throw ValidationError("$.grid.x_max: required");
        gp.x_min = *lo;
        gp.x_max = *hi;
        c.snap_strike = r.boolean("snap_strike", true);
        r.finish();
    }

    c.builder = field("$.builder", [&] { return parse_builder(top.string("builder", "mm")); });

    if (const json* e = top.child("expm")) {
        Reader r(*e, "$.expm");
        c.expm.method = field(r.where("method"), [&] { return parse_expm_method(r.string("method", "auto")); });
        c.expm.tol = r.number("tol", c.expm.tol);
        c.expm.max_terms = static_cast<std::size_t>(r.integer("max_terms", static_cast<int>(c.expm.max_terms)));
        r.finish();
        if (!(c.expm.tol > 0.0)) throw ValidationError("$.expm.tol: must be positive");
    }

    if (const json* s = top.child("schedule")) {
        if (!s->is_array()) throw ValidationError("$.schedule: expected an array");
        for (std::size_t i = 0; i < s->size(); ++i) {
            Reader r((*s)[i], "$.schedule[" + std::to_string(i) + "]");
            ScheduleEntry e;
            e.duration = r.number("duration", 0.0);
            e.rate = r.maybe_number("rate");
            e.sigma0 = r.maybe_number("sigma0");
            r.finish();
            c.schedule.push_back(e);
        }
    }

    const std::string out = top.string("output", "json");
    if (out == "json") c.output = OutputMode::json;
    else if (out == "csv") c.output = OutputMode::csv;
    else if (out == "both") c.output = OutputMode::both;
    else throw ValidationError("$.output: expected json|csv|both");
    c.out_path = top.string("out_path", c.out_path);

    if (const json* s = top.child("sizes")) {
        if (!s->is_array()) throw ValidationError("$.sizes: expected an array of integers");
        for (const auto& v : *s) {
            if (!v.is_number_integer()) throw ValidationError("$.sizes: expected integers");
            c.sizes.push_back(v.get<int>());
        }
    }
    if (const json* ref = top.child("reference")) {
        Reader r(*ref, "$.reference");
        c.reference.value = r.maybe_number("value");
        c.reference.provenance = r.string("provenance", "");
        if (r.has("self_size")) c.reference.self_size = r.integer("self_size", 0);
        r.finish();
    }
    top.finish();
    return c;
}

JobConfig parse_job_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
    return parse_job(j);
}

ojson to_json(const JobConfig& c) {
    ojson j;
    ojson m;
    const auto& mc = c.model;
    m["type"] = to_string(mc.type);
    switch (mc.type) {
        case ModelType::gbm: m["sigma0"] = mc.sigma0; break;
        case ModelType::localvol:
            m["sigma0"] = mc.sigma0;
            m["beta"] = mc.beta;
            if (mc.reference) m["reference"] = *mc.reference;
            break;
        case ModelType::kou_local:
            m["sigma0"] = mc.sigma0;
            m["beta"] = mc.beta;
            if (mc.reference) m["reference"] = *mc.reference;
            m["lambda"] = mc.lambda;
            m["p"] = mc.p;
            m["eta1"] = mc.eta1;
            m["eta2"] = mc.eta2;
            break;
        case ModelType::cgmy:
            m["C"] = mc.C;
            m["G"] = mc.G;
            m["M"] = mc.M;
            m["Y"] = mc.Y;
            if (mc.sigma_extra != 0.0) m["sigma_extra"] = mc.sigma_extra;
            break;
    }
    j["model"] = m;

    ojson g;
    if (c.total_points) g["N"] = *c.total_points;
    g["counts"] = c.grid.counts;
    g["x_min"] = c.grid.x_min;
    g["x_max"] = c.grid.x_max;
    g["densities"] = c.grid.densities;
    g["snap_strike"] = c.snap_strike;
    j["grid"] = g;

    ojson k;
    k["kind"] = to_string(c.contract.kind);
    k["lower"] = c.contract.lower;
    k["upper"] = number_or_inf(c.contract.upper);
    k["maturity"] = c.contract.maturity;
    k["rate"] = c.contract.rate;
    k["dividend"] = c.contract.dividend;
    k["spot"] = c.contract.spot;
    k["payoff"] = payoff_json(c.contract.payoff);
    k["rebate"] = payoff_json(c.contract.rebate);
    j["contract"] = k;

    j["builder"] = to_string(c.builder);
    j["expm"] = {{"method", to_string(c.expm.method)}, {"tol", c.expm.tol}, {"max_terms", c.expm.max_terms}};
    if (!c.schedule.empty()) {
        ojson s = ojson::array();
        for (const auto& e : c.schedule) {
            ojson x;
            x["duration"] = e.duration;
            if (e.rate) x["rate"] = *e.rate;
            if (e.sigma0) x["sigma0"] = *e.sigma0;
            s.push_back(x);
        }
        j["schedule"] = s;
    }
    j["output"] = to_string(c.output);
    j["out_path"] = c.out_path;
    if (!c.sizes.empty()) j["sizes"] = c.sizes;
    if (c.reference.value || c.reference.self_size) {
        ojson r;
        if (c.reference.value) r["value"] = *c.reference.value;
        if (!c.reference.provenance.empty()) r["provenance"] = c.reference.provenance;
        if (c.reference.self_size) r["self_size"] = *c.reference.self_size;
        j["reference"] = r;
    }
    return j;
}

GeneratorBuild build_generator(const JobConfig& job, const ModelSpec& m, const Grid& g) {
    if (job.builder == BuilderKind::fd) {
        FdOptions opts;
        opts.range = job.contract.barriers();
        return build_fd(m, g, opts);
    }
    return build_mm(m, g);
}

JobResult run_price(const JobConfig& job) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid grid = build_grid(job.grid_params());
    const auto& k = job.contract;
    const ModelSpec model = job.model.build(k.rate, k.dividend, k.spot);
    const Barriers barriers = k.barriers();

    JobResult out;
    out.grid.assign(grid.points().begin(), grid.points().end());
    if (job.schedule.empty()) {
        const GeneratorBuild build = build_generator(job, model, grid);
        BuildDiagnostics diag = validate(build, grid, model, barriers);
        if (!diag.ok()) throw NumericalError("generator failed validation: " + diag.violations.front());
        out.surface = price(build.generator, grid, k, job.expm);
        out.surface.diagnostics = std::move(diag);
    } else {
        std::vector<GeneratorBuild> builds;
        builds.reserve(job.schedule.size());
        for (const auto& e : job.schedule) {
            ModelConfig mc = job.model;
            if (e.sigma0) mc.sigma0 = *e.sigma0;
            const ModelSpec seg_model = mc.build(e.rate.value_or(k.rate), k.dividend, k.spot);
            builds.push_back(build_generator(job, seg_model, grid));
            const BuildDiagnostics d = validate(builds.back(), grid, seg_model, barriers);
            if (!d.ok()) throw NumericalError("schedule generator failed validation: " + d.violations.front());
        }
        std::vector<ScheduleSegment> segs;
        for (std::size_t i = 0; i < builds.size(); ++i) {
            segs.push_back({job.schedule[i].duration, &builds[i].generator, job.schedule[i].rate.value_or(k.rate)});
        }
        out.surface = price_schedule(segs, grid, k, job.expm);
        out.surface.diagnostics = validate(builds.front(), grid, model, barriers);
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

double price_at(const JobConfig& job, int n) {
    JobConfig j = job;
    j.total_points = n;
    return run_price(j).surface.spot_price;
}

ConvergenceReport run_convergence(const JobConfig& job) {
    ConvergenceReference ref;
    if (job.reference.value) {
        ref.value = *job.reference.value;
        ref.provenance = job.reference.provenance.empty() ? "supplied" : job.reference.provenance;
    } else if (job.reference.self_size) {
        ref.value = price_at(job, *job.reference.self_size);
        ref.provenance = "self-reference at N=" + std::to_string(*job.reference.self_size);
        ref.self_reference = true;
    } else {
        throw ValidationError("$.reference: convergence needs a value or a self_size");
    }
    ConvergenceReport r = run_study([&](int n) { return price_at(job, n); }, job.sizes, ref);

    JobConfig last = job;
    last.total_points = job.sizes.back();
    const Grid g = build_grid(last.grid_params());
    const ModelSpec m = job.model.build(job.contract.rate, job.contract.dividend, job.contract.spot);
    if (auto b = predicted_bound(m, g, job.contract.barriers())) r.predicted = b->text;
    return r;
}

ojson result_json(const JobConfig& job, const JobResult& r) {
    ojson j;
    j["config"] = to_json(job);
    j["spot_price"] = round9(r.surface.spot_price);
    j["delta"] = r.surface.delta ? ojson(round9(*r.surface.delta)) : ojson(nullptr);
    j["gamma"] = r.surface.gamma ? ojson(round9(*r.surface.gamma)) : ojson(nullptr);
    j["spot_interpolated"] = r.surface.spot_interpolated;
    j["grid_size"] = r.grid.size();
    const auto& d = r.surface.diagnostics;
    j["diagnostics"] = {{"tail_mass", d.tail_mass},
                        {"mesh", d.mesh},
                        {"clamped_count", d.clamped_count},
                        {"jump_case", to_string(d.jump_case)},
                        {"martingale_residual", d.martingale_residual},
                        {"max_state", d.max_state},
                        {"violations", d.violations}};
    j["warnings"] = r.surface.warnings;
    j["seconds"] = r.seconds;
    return j;
}

void write_surface_csv(const JobResult& r, std::ostream& os) {
    os << "x,value\n" << std::setprecision(9);
    for (std::size_t i = 0; i < r.grid.size(); ++i) os << r.grid[i] << ',' << r.surface.values[i] << '\n';
}

// ---- presets -------------------------------------------------------------

namespace {

JobConfig table1(double sigma, double r, double K, double lower, double upper) {
    JobConfig c;
    c.model.type = ModelType::gbm;
    c.model.sigma0 = sigma;
    c.contract.kind = ContractKind::knock_out;
    c.contract.lower = lower;
    c.contract.upper = upper;
    c.contract.maturity = 1.0;
    c.contract.rate = r;
    c.contract.spot = 2.0;
    c.contract.payoff = {PayoffType::call, K};
    c.grid.x_min = 0.2;
    c.grid.x_max = 10.0;
    c.grid.densities = {100, 1, 10, 10, 1, 100};
    c.total_points = 200;
    return c;
}

// Table 1 layout rescaled to a spot of s: same relative range, densities
// scaled with the price level.
void scaled_grid(JobConfig& c, double s) {
    const double f = s / 2.0;
    c.grid.x_min = 0.1 * s;
    c.grid.x_max = 5.0 * s;
    c.grid.densities = {100 * f, 1 * f, 10 * f, 10 * f, 1 * f, 100 * f};
}

JobConfig kou(double beta, double lambda, int n) {
    JobConfig c;
    c.model.type = ModelType::kou_local;
    c.model.sigma0 = 0.2;
    c.model.beta = beta;
    c.model.reference = 100.0;
    c.model.lambda = lambda;
    c.model.p = 0.3;
    c.model.eta1 = 1.0 / 0.02;
    c.model.eta2 = 1.0 / 0.04;
    c.contract.kind = ContractKind::knock_in;
    c.contract.upper = 120.0;
    c.contract.maturity = 1.0;
    c.contract.rate = 0.05;
    c.contract.spot = 100.0;
    c.contract.payoff = {PayoffType::call, 100.0};
    c.grid.x_min = 0.0;
    c.grid.x_max = 300.0;
    c.grid.densities = {50, 500, 50, 5000, 1, 1};
    c.total_points = n;
    return c;
}

}  // namespace

JobConfig table2_job(double spot_percent, bool no_touch) {
    JobConfig c;
    c.model.type = ModelType::cgmy;
    c.model.sigma0 = 0.0;
    c.model.C = 1.0;
    c.model.G = 9.0;
    c.model.M = 8.0;
    c.model.Y = 0.5;
    c.contract.kind = no_touch ? ContractKind::no_touch : ContractKind::knock_out;
    c.contract.lower = 2800.0;
    c.contract.upper = 4200.0;
    c.contract.maturity = 0.1;
    c.contract.rate = 0.03;
    c.contract.spot = 3500.0 * spot_percent / 100.0;
    c.contract.payoff = no_touch ? PayoffSpec{PayoffType::unit} : PayoffSpec{PayoffType::put, 3500.0};
    scaled_grid(c, 3500.0);
    // Outer regions only receive jumps; cluster them at the barriers where
    // the jump mass lands instead of spreading them evenly to the far ends.
    c.grid.densities[0] = c.grid.densities[1];
    c.grid.densities[5] = c.grid.densities[4];
    c.total_points = 800;
    return c;
}

std::vector<std::string> preset_names() {
    return {"t1c1",      "t1c2",      "t1c3",       "fig3",      "t2",        "fig5_put",    "fig5_dnt",
            "t3_b0_l3",  "t3_b0_l001", "t3_bm1_l3", "t3_bm1_l001", "t3_bm3_l3", "t3_bm3_l001", "fig6"};
}

JobConfig preset(const std::string& name) {
    if (name == "t1c1") return table1(0.2, 0.02, 2.0, 1.5, 2.5);
    if (name == "t1c2") return table1(0.5, 0.05, 2.0, 1.5, 3.0);
    if (name == "t1c3") return table1(0.5, 0.05, 1.75, 1.0, 3.0);
    if (name == "fig3") {
        JobConfig c = table1(0.25, 0.1, 100.0, 90.0, 140.0);
        c.contract.spot = 95.0;
        scaled_grid(c, 95.0);
        c.total_points = 3000;
        c.sizes = {100, 200, 400, 800, 1600};
        c.reference.value = 1.4583798;
        c.reference.provenance = "published N=3000 value";
        return c;
    }
    if (name == "t2") return table2_job(100.0, false);
    if (name == "fig5_put" || name == "fig5_dnt") {
        JobConfig c = table2_job(100.0, name == "fig5_dnt");
        c.sizes = {200, 400, 800, 1600, 3200};
        c.reference.value = name == "fig5_put" ? 78.752 : 0.9508;
        c.reference.provenance = "published N=6400 self-reference";
        return c;
    }
    if (name == "t3_b0_l3") return kou(0.0, 3.0, 800);
    if (name == "t3_b0_l001") return kou(0.0, 0.01, 800);
    if (name == "t3_bm1_l3") return kou(-1.0, 3.0, 800);
    if (name == "t3_bm1_l001") return kou(-1.0, 0.01, 800);
    if (name == "t3_bm3_l3") return kou(-3.0, 3.0, 800);
    if (name == "t3_bm3_l001") return kou(-3.0, 0.01, 800);
    if (name == "fig6") {
        JobConfig c = kou(-1.0, 3.0, 1200);
        c.sizes = {200, 400, 800, 1600};
        c.reference.value = 9.768837;
        c.reference.provenance = "published N=5000 value";
        return c;
    }
    throw ValidationError("unknown preset '" + name + "'");
}

// ---- table reproduction --------------------------------------------------

double ReproRow::diff() const { return std::abs(computed - published); }

bool ReproRow::ok() const {
    const double d = diff();
    return relative ? d <= tolerance * std::abs(published) : d <= tolerance;
}

std::vector<ReproRow> reproduce(const std::string& table) {
    std::vector<ReproRow> rows;
    auto timed = [](const JobConfig& job) {
        const JobResult r = run_price(job);
        return std::make_pair(r.surface.spot_price, r.seconds);
    };
    if (table == "t1") {
        const std::pair<const char*, double> cols[] = {{"t1c1", 0.041082}, {"t1c2", 0.017856}, {"t1c3", 0.076165}};
        for (const auto& [name, value] : cols) {
            const auto [p, s] = timed(preset(name));
            rows.push_back({name, value, p, 2e-5, false, s});
        }
    } else if (table == "t2") {
        const double spots[] = {82, 85, 88, 91, 94, 97, 100, 101, 104, 107, 110, 113, 116, 119};
        const double put[] = {301.07, 370.38, 341.78, 280.41, 208.30, 137.24, 78.74,
                              64.53,  37.18,  22.84,  14.65,  9.64,   6.32,   3.54};
        const double dnt[] = {0.5757, 0.8004, 0.8880, 0.9280, 0.9465, 0.9529, 0.9507,
                              0.9483, 0.9352, 0.9113, 0.8709, 0.8019, 0.6767, 0.4049};
        for (std::size_t i = 0; i < std::size(spots); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            const JobConfig jp = table2_job(spots[i], false);
            const JobConfig jd = table2_job(spots[i], true);
            const Grid grid = build_grid(jp.grid_params());
            const ModelSpec m = jp.model.build(jp.contract.rate, jp.contract.dividend, jp.contract.spot);
            const GeneratorBuild b = build_generator(jp, m, grid);
            const BarrierContract cs[] = {jp.contract, jd.contract};
            const auto surfaces = price_knockout_batch(b.generator, grid, cs, jp.expm);
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const std::string tag = std::to_string(static_cast<int>(spots[i]));
            rows.push_back({"t2_put_" + tag, put[i], surfaces[0].spot_price, 1.5e-3, true, s});
            rows.push_back({"t2_dnt_" + tag, dnt[i], surfaces[1].spot_price, 2e-3, false, s});
        }
    } else if (table == "t3") {
        const std::pair<const char*, double> cells[] = {{"t3_b0_l3", 10.0530},  {"t3_b0_l001", 9.2771},
                                                        {"t3_bm1_l3", 9.7688},  {"t3_bm1_l001", 8.9575},
                                                        {"t3_bm3_l3", 9.0187},  {"t3_bm3_l001", 8.0858}};
        for (const auto& [name, value] : cells) {
            const auto [p, s] = timed(preset(name));
            rows.push_back({name, value, p, 5e-4, false, s});
        }
    } else {
        throw ValidationError("unknown table '" + table + "' (expected t1|t2|t3)");
    }
    return rows;
}

void write_repro_csv(const std::vector<ReproRow>& rows, std::ostream& os) {
    os << "config,published,computed,abs_diff,tolerance,ok\n" << std::setprecision(9);
    for (const auto& r : rows) {
        const double tol = r.relative ? r.tolerance * std::abs(r.published) : r.tolerance;
        os << r.label << ',' << r.published << ',' << round9(r.computed) << ',' << r.diff() << ',' << tol << ','
           << (r.ok() ? "true" : "false") << '\n';
    }
}

}  // namespace ctmc
