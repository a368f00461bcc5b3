#pragma once

#include "agmcts/domains.hpp"
#include "agmcts/solver.hpp"

#include <json.hpp>

#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace agmcts {

struct ExperimentConfig {
    std::string domain = "mountaincar-mdp";
    std::string solver = "agmcts";
    int n_sims = 0;  // 0: the solver default
    std::vector<double> budget_multipliers{0.1, 0.17782794100389229, 0.31622776601683794,
                                           0.56234132519034907, 1.0};
    std::uint64_t seed_base = 0;
    int seeds = 10;
    int inference_particles = 0;  // 0: domain default
    int workers = 0;              // 0: AGMCTS_WORKERS or the hardware thread count
    nlohmann::json solver_config = nlohmann::json::object();

    void validate() const;
    // Solver defaults for (domain, solver) with the overrides applied.
    SolverConfig resolved_solver_config() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);
nlohmann::json solver_config_to_json(const SolverConfig& c);
// Overwrites the fields named in `j`; unknown keys raise ConfigError.
void apply_solver_overrides(SolverConfig& c, const nlohmann::json& j);
// Sets a dotted path ("solver_config.k_opt") to a parsed scalar value.
void set_dotted(nlohmann::json& j, const std::string& path, const std::string& value);

struct ResultRow {
    std::string domain;
    std::string solver;
    int n_sims = 0;
    std::uint64_t seed = 0;
    double discounted_return = 0.0;
    int steps = 0;
    double wall_seconds = 0.0;
    SolverStats stats;
    std::string error;
    std::vector<Action> actions;  // not serialized
};

struct EpisodeOptions {
    int inference_particles = 0;
    bool record_actions = false;
    // Verify the tree after every search; a violation ends the episode with
    // an error row.
    bool check_invariants = false;
};

ResultRow run_episode(const ProblemModel& model, SolverKind solver, const SolverConfig& cfg,
                      std::uint64_t seed, const EpisodeOptions& opt = {});

std::string csv_header();
std::string csv_row(const ResultRow& r);
std::vector<ResultRow> read_csv(std::istream& in);

int default_workers();

using RowKey = std::tuple<std::string, std::string, int, std::uint64_t>;

// Budgets x seeds, rows written in a fixed order as they complete. Keys in
// `skip` are not rerun.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, std::ostream* out,
                                 const std::set<RowKey>& skip = {});

struct SummaryRow {
    std::string domain;
    std::string solver;
    int n_sims = 0;
    int n = 0;
    double mean = 0.0;
    double sem = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_table(const std::vector<SummaryRow>& rows);

struct CeParam {
    std::string name;
    double lo;
    double hi;
    double mean;
    double sd;
};

struct CeOptions {
    int samples = 150;
    int elites = 30;
    int iterations = 10;
    double alpha_mu = 0.8;
    double alpha_sigma = 0.5;
    bool full_covariance = false;
    int max_redraws = 1000;
    std::uint64_t seed = 0;
};

struct CeIteration {
    std::vector<double> mean;
    std::vector<double> elite_mean_params;
    double elite_mean_value;
};

struct CeResult {
    std::vector<double> best;
    double best_value = kNegInf;
    std::vector<CeIteration> history;
};

// Maximizes `objective`; a throwing objective scores -inf.
CeResult ce_optimize(const std::vector<CeParam>& params,
                     const std::function<double(const std::vector<double>&)>& objective,
                     const CeOptions& opt);

}  // namespace agmcts
