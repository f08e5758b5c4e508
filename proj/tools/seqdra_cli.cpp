#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "seqdra/experiment.hpp"
#include "seqdra/scoring.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Common {
    std::string config;
    std::optional<std::size_t> seeds;
    std::optional<std::string> out;
    std::optional<std::size_t> threads;
};

seqdra::ExperimentConfig load(const Common& c) {
    std::ifstream in(c.config);
    if (!in) throw seqdra::ConfigError(c.config, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    // Parse once for position-accurate syntax errors, then apply overrides.
    auto j = seqdra::parse_config_text(ss.str()).raw;
    if (c.seeds) j["seeds"] = *c.seeds;
    if (c.out) j["output"] = *c.out;
    if (c.threads) j["threads"] = *c.threads;
    return seqdra::parse_config(j);
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "experiment config (JSON)")->required();
    cmd->add_option("--seeds", c.seeds, "number of seeds per arm");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--threads", c.threads, "worker threads");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential resource allocation for SIS epidemics on networks"};
    app.require_subcommand(1);

    Common common;
    auto* run = app.add_subcommand("run", "simulate every strategy/scorer/alpha arm over all seeds");
    add_common(run, common);
    auto* regress = app.add_subcommand("regress", "paired online/offline runs and per-alpha regression fits");
    add_common(regress, common);
    auto* cutoff = app.add_subcommand("cutoff-table", "Monte Carlo table of optimal CCM cutoffs");
    add_common(cutoff, common);
    std::size_t n_max = 50;
    cutoff->add_option("--n-max", n_max, "largest sample size in the table")->check(CLI::PositiveNumber);
    auto* sweep = app.add_subcommand("sweep-alpha", "CCM* AUC across sampling ratios and network types");
    add_common(sweep, common);
    auto* gen = app.add_subcommand("gen-graph", "write the configured network as an edge list");
    add_common(gen, common);
    auto* plan = app.add_subcommand("plan", "optimize an MCM priority plan for the configured network");
    add_common(plan, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }

    try {
        const auto cfg = load(common);
        if (run->parsed()) {
            const auto sum = seqdra::cmd_run(cfg);
            for (const auto& arm : sum.arms) {
                const auto s = seqdra::summarize(arm.auc);
                std::cout << fmt::format("{:<32} AUC {:.4f} +- {:.4f}\n", arm.arm, s.mean, s.se);
            }
        } else if (regress->parsed()) {
            for (const auto& f : seqdra::cmd_regress(cfg))
                std::cout << fmt::format("alpha={} c1={:.4f} c2={:.4f} R2={:.4f}{}\n", f.alpha, f.c1, f.c2, f.r2,
                                         f.degenerate ? " (degenerate)" : "");
        } else if (cutoff->parsed()) {
            const auto t = seqdra::cmd_cutoff_table(cfg, n_max);
            std::cout << fmt::format("{} cells\n", t.size());
        } else if (sweep->parsed()) {
            for (const auto& r : seqdra::cmd_sweep_alpha(cfg))
                std::cout << fmt::format("{} k={} alpha={} AUC {:.4f} +- {:.4f}\n", r.type, r.mean_degree, r.alpha,
                                         r.auc.mean, r.auc.se);
        } else if (gen->parsed()) {
            const auto g = seqdra::build_network(cfg.network);
            seqdra::write_with_digest(cfg.out_dir / "graph.csv", cfg.digest, [&](std::ostream& out) {
                out << "u,v\n";
                for (const auto& [u, v] : g.edges()) out << u << ',' << v << '\n';
            });
            std::cout << fmt::format("N={} E={}\n", g.node_count(), g.edge_count());
        } else if (plan->parsed()) {
            const auto g = seqdra::build_network(cfg.network);
            const auto p = seqdra::optimize_plan(g, cfg.plan);
            const auto path = cfg.plan_path.value_or(cfg.out_dir / "plan.txt");
            seqdra::write_with_digest(path, cfg.digest, [&](std::ostream& out) { seqdra::write_plan(p, out); });
            std::cout << fmt::format("maxcut={}\n", p.maxcut);
        }
    } catch (const seqdra::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return 0;
}
