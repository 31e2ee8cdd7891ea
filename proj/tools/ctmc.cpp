// ctmc: price barrier options with continuous-time Markov chain approximations.
//
// Exit codes: 0 success, 1 reproduction outside tolerance,
//             2 invalid input, 3 numerical failure.

#include "ctmc/error.hpp"
#include "ctmc/job.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

ctmc::JobConfig load(const std::string& config, const std::string& preset) {
    if (!preset.empty()) return ctmc::preset(preset);
    if (config.empty()) throw ctmc::ValidationError("need --config PATH or --preset NAME");
    std::ifstream in(config);
    if (!in) throw ctmc::ValidationError("cannot open config '" + config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ctmc::parse_job_text(ss.str());
}

std::vector<int> parse_sizes(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ctmc::ValidationError("--sizes: '" + item + "' is not an integer");
        }
    }
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ctmc::ValidationError("cannot write '" + path + "'");
    return os;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Barrier option pricing via continuous-time Markov chain approximation"};
    app.require_subcommand(1);

    std::string config;
    std::string preset;
    std::string out;
    std::string builder;
    std::string expm;
    std::string sizes;
    std::string table;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "Job file (JSON)");
        sub->add_option("--preset", preset, "Built-in job instead of --config");
        sub->add_option("--out", out, "Output path prefix (overrides out_path)");
        sub->add_option("--builder", builder, "Generator builder")->check(CLI::IsMember({"mm", "fd"}));
        sub->add_option("--expm", expm, "Matrix exponential method")
            ->check(CLI::IsMember({"pade", "uniformization", "auto"}));
    };

    auto* price = app.add_subcommand("price", "Price one contract and write its surface");
    add_common(price);
    auto* converge = app.add_subcommand("converge", "Run a convergence study over grid sizes");
    add_common(converge);
    converge->add_option("--sizes", sizes, "Comma-separated grid sizes, e.g. 200,400,800");
    auto* repro = app.add_subcommand("reproduce", "Reproduce a published table with built-in presets");
    repro->add_option("table", table, "t1, t2 or t3")->required()->check(CLI::IsMember({"t1", "t2", "t3"}));
    repro->add_option("--out", out, "CSV path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*repro) {
            const auto rows = ctmc::reproduce(table);
            bool ok = true;
            for (const auto& r : rows) ok = ok && r.ok();
            if (out.empty()) {
                ctmc::write_repro_csv(rows, std::cout);
            } else {
                auto os = open_out(out);
                ctmc::write_repro_csv(rows, os);
            }
            return ok ? 0 : 1;
        }

        ctmc::JobConfig job = load(config, preset);
        if (!builder.empty()) job.builder = ctmc::parse_builder(builder);
        if (!expm.empty()) job.expm.method = ctmc::parse_expm_method(expm);
        if (!out.empty()) job.out_path = out;

        if (*price) {
            const ctmc::JobResult r = ctmc::run_price(job);
            const auto j = ctmc::result_json(job, r);
            if (job.output != ctmc::OutputMode::csv) {
                auto os = open_out(job.out_path + ".json");
                os << j.dump(2) << '\n';
            }
            if (job.output != ctmc::OutputMode::json) {
                auto os = open_out(job.out_path + ".csv");
                ctmc::write_surface_csv(r, os);
            }
            std::cout << j["spot_price"].dump() << '\n';
            for (const auto& w : r.surface.warnings) std::cerr << "warning: " << w << '\n';
            return 0;
        }

        if (!sizes.empty()) job.sizes = parse_sizes(sizes);
        const ctmc::ConvergenceReport rep = ctmc::run_convergence(job);
        {
            auto os = open_out(job.out_path + "_convergence.csv");
            ctmc::write_csv(rep, os);
        }
        auto j = ctmc::to_json(rep);
        j["config"] = ctmc::to_json(job);
        {
            auto os = open_out(job.out_path + "_convergence.json");
            os << j.dump(2) << '\n';
        }
        std::cout << "slope " << (rep.slope ? std::to_string(*rep.slope) : std::string("undefined")) << '\n';
        return 0;
    } catch (const ctmc::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ctmc::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    }
}
