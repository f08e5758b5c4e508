#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqdra/control.hpp"
#include "seqdra/graph.hpp"
#include "seqdra/metrics.hpp"
#include "seqdra/scoring.hpp"
#include "seqdra/selection.hpp"

namespace seqdra {

/// Invalid or inconsistent configuration; `where` is a JSON pointer or a
/// "line L, column C" parse position.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
    [[nodiscard]] const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

struct NetworkSpec {
    std::string type = "watts_strogatz";  ///< watts_strogatz | barabasi_albert | erdos_renyi | community | edge_list
    std::size_t n = 100;
    std::size_t m = 4;
    double p = 0.05;
    std::optional<double> mean_degree;  ///< erdos_renyi alternative to p
    std::vector<std::size_t> level_sizes{4, 3, 100};
    std::vector<double> level_probs{0.1, 0.005, 0.0005};
    std::filesystem::path path;
    std::uint64_t seed = 1;
};

Graph build_network(const NetworkSpec& spec);

struct ExperimentConfig {
    nlohmann::json raw;
    std::string digest;  ///< 16 hex digits of the canonical config

    NetworkSpec network;
    EpidemicParams epidemic;
    std::optional<double> initial_fraction;  ///< unset: full infection
    std::vector<NodeId> initial_infected;
    std::vector<StrategyConfig> strategies;
    std::vector<ScorerKind> scorers{ScorerKind::lrie};
    std::vector<double> alphas{1.0};
    SamplingMode sampling = SamplingMode::uniform;
    TimeAxis axis = TimeAxis::clock;
    double horizon = 10.0;
    std::size_t max_events = 10'000'000;
    std::size_t seeds = 200;
    std::uint64_t base_seed = 1;
    std::size_t threads = 1;
    std::filesystem::path out_dir = "out";
    bool write_runs = true;
    std::size_t curve_points = 512;
    std::vector<std::size_t> score_rounds;  ///< rounds of seed 0 whose scores go to scores.csv

    PlanOptions plan;
    std::optional<std::filesystem::path> plan_path;

    std::optional<std::filesystem::path> cutoff_path;
    std::size_t cutoff_replicas = 1000;
    std::uint64_t cutoff_seed = 1;

    std::vector<double> regress_alphas{1.0, 0.5, 0.4, 0.2};
    std::vector<StrategyConfig> regress_strategies;
    ErrorMeasure regress_error = ErrorMeasure::trajectory;

    std::vector<std::string> sweep_types{"ER", "SF", "SW"};
    std::vector<double> sweep_mean_degrees{2.0, 10.0};
    std::vector<double> sweep_alphas{0.1, 0.2, 0.4, 0.6, 0.8, 1.0};

    /// Per-seed RunOptions for one (strategy, scorer, alpha) arm.
    [[nodiscard]] RunOptions run_options(const StrategyConfig& s, ScorerKind k, double alpha) const;
};

/// Parses and validates a configuration. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Digest of the canonical (sorted-key) JSON dump.
std::string config_digest(const nlohmann::json& j);

/// Seed of replicate r; shared by every arm so arms see common random numbers.
std::uint64_t replicate_seed(std::uint64_t base, std::size_t r);

/// Grid of sample sizes covered by an automatically built cutoff table.
std::vector<std::size_t> cutoff_n_grid(std::size_t n_max);

/// Shared inputs prepared once per graph: plan, LRSR table and cutoff table
/// are built only when some arm needs them.
RunContext prepare_context(const Graph& g, const ExperimentConfig& cfg,
                           const std::vector<StrategyConfig>& strategies,
                           const std::vector<ScorerKind>& scorers, const std::vector<double>& alphas);

/// Runs jobs 0..count-1 on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job);

struct ArmSummary {
    std::string arm;
    std::string strategy;
    ScorerKind scorer = ScorerKind::lrie;
    double alpha = 1.0;
    std::vector<double> auc;            ///< per seed
    std::vector<double> mean_epsilon;   ///< per seed, mean eps_k over rounds
    std::vector<double> curve;          ///< mean infected fraction on the grid
    std::vector<ScoreSnapshot> scores;  ///< seed 0 only
};

struct RunSummary {
    std::vector<ArmSummary> arms;
    std::vector<double> grid;
};

/// `run`: every (strategy x scorer x alpha x seed) simulation.
RunSummary cmd_run(const ExperimentConfig& cfg);

/// `regress`: paired online/offline runs per strategy, one fit per alpha.
std::vector<RegressionFit> cmd_regress(const ExperimentConfig& cfg);

/// `cutoff-table`
CutoffTable cmd_cutoff_table(const ExperimentConfig& cfg, std::size_t n_max);

struct SweepRow {
    std::string type;
    double mean_degree = 0.0;
    double alpha = 0.0;
    SampleStats auc;
};

/// `sweep-alpha`: CCM* AUC per (network type, mean degree, alpha).
std::vector<SweepRow> cmd_sweep_alpha(const ExperimentConfig& cfg);

/// Writes `# digest=<hex>` followed by the CSV body.
void write_with_digest(const std::filesystem::path& path, const std::string& digest,
                       const std::function<void(std::ostream&)>& body);

}  // namespace seqdra
