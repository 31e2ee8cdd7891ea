#pragma once

#include "ctmc/convergence.hpp"
#include "ctmc/generator.hpp"
#include "ctmc/grid.hpp"
#include "ctmc/matexp.hpp"
#include "ctmc/model.hpp"
#include "ctmc/pricer.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace ctmc {

enum class ModelType { gbm, localvol, kou_local, cgmy };
enum class BuilderKind { mm, fd };
enum class OutputMode { json, csv, both };

std::string to_string(ModelType t);
std::string to_string(BuilderKind b);
std::string to_string(OutputMode o);
BuilderKind parse_builder(const std::string& s);

/// Model parameters as they appear in a job file. Rates and dividends come
/// from the contract so that drift and discounting cannot disagree.
struct ModelConfig {
    ModelType type = ModelType::gbm;
    double sigma0 = 0.2;
    double beta = 0.0;
    std::optional<double> reference;  // localvol / kou_local level; defaults to the spot
    double lambda = 0.0;
    double p = 0.5;
    double eta1 = 50.0;
    double eta2 = 25.0;
    double C = 1.0;
    double G = 1.0;
    double M = 3.0;
    double Y = 0.5;
    double sigma_extra = 0.0;

    ModelSpec build(double rate, double dividend, double spot) const;
};

/// One leg of a piecewise-constant schedule; unset fields inherit the job's.
struct ScheduleEntry {
    double duration = 0.0;
    std::optional<double> rate;
    std::optional<double> sigma0;
};

struct ReferenceConfig {
    std::optional<double> value;
    std::string provenance;
    std::optional<int> self_size;  // price at this N and use it as the reference
};

struct JobConfig {
    ModelConfig model;
    GridParams grid;                // spot and barriers are copied from the contract
    std::optional<int> total_points;  // rescales grid.counts when set
    bool snap_strike = true;          // put the call/put strike on a node
    BarrierContract contract;
    BuilderKind builder = BuilderKind::mm;
    ExpmConfig expm;
    std::vector<ScheduleEntry> schedule;
    OutputMode output = OutputMode::json;
    std::string out_path = "ctmc_out";
    std::vector<int> sizes;  // convergence sizes
    ReferenceConfig reference;

    /// Grid parameters with spot, barriers and total point count applied.
    GridParams grid_params() const;
};

/// Parses and validates a job description. Throws ValidationError naming the
/// offending field.
JobConfig parse_job(const nlohmann::json& j);
JobConfig parse_job_text(const std::string& text);
nlohmann::ordered_json to_json(const JobConfig& c);

struct JobResult {
    std::vector<double> grid;
    PriceSurface surface;
    double seconds = 0.0;
};

/// grid -> model -> generator -> pricer for one job.
JobResult run_price(const JobConfig& job);

/// Full generator for a job's model on a grid (honouring the builder choice).
GeneratorBuild build_generator(const JobConfig& job, const ModelSpec& m, const Grid& g);

/// Spot price of the job at total grid size N.
double price_at(const JobConfig& job, int n);

ConvergenceReport run_convergence(const JobConfig& job);

nlohmann::ordered_json result_json(const JobConfig& job, const JobResult& r);
void write_surface_csv(const JobResult& r, std::ostream& os);

/// Rounds to 9 significant digits for reporting.
double round9(double x);

/// Named built-in jobs: t1c1..t1c3, fig3, t2 (spot 100%), fig5_put, fig5_dnt,
/// t3_b0_l3, t3_b0_l001, t3_bm1_l3, t3_bm1_l001, t3_bm3_l3, t3_bm3_l001, fig6.
JobConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct ReproRow {
    std::string label;
    double published = 0.0;
    double computed = 0.0;
    double tolerance = 0.0;
    bool relative = false;
    double seconds = 0.0;

    double diff() const;
    bool ok() const;
};

/// Reproduces every entry of table t1, t2 or t3 with the built-in presets.
std::vector<ReproRow> reproduce(const std::string& table);
void write_repro_csv(const std::vector<ReproRow>& rows, std::ostream& os);

/// Table 2 job for a spot given in percent of 3500.
JobConfig table2_job(double spot_percent, bool no_touch);

}  // namespace ctmc
