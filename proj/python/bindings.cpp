#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "seqdra/control.hpp"
#include "seqdra/experiment.hpp"
#include "seqdra/graph.hpp"
#include "seqdra/meanfield.hpp"
#include "seqdra/metrics.hpp"
#include "seqdra/selection.hpp"

namespace py = pybind11;
using namespace seqdra;

namespace {

using Pairs = std::vector<std::pair<NodeId, double>>;

std::vector<Candidate> to_candidates(const Pairs& xs) {
    std::vector<Candidate> out;
    out.reserve(xs.size());
    for (const auto& [node, score] : xs) out.push_back({node, score});
    return out;
}

Pairs to_pairs(const std::vector<Candidate>& xs) {
    Pairs out;
    out.reserve(xs.size());
    for (const auto& c : xs) out.emplace_back(c.node, c.score);
    return out;
}

WsspInstance instance(std::size_t budget, const Pairs& pre, const Pairs& candidates) {
    WsspInstance inst;
    inst.budget = budget;
    inst.preselection = to_candidates(pre);
    inst.candidates = to_candidates(candidates);
    inst.validate();
    return inst;
}

py::dict decisions_dict(const WsspInstance& inst, Decisions d, bool leftovers) {
    if (leftovers) assign_leftovers(inst, d);
    py::dict out;
    out["accepted"] = std::vector<bool>(d.accepted.begin(), d.accepted.end());
    out["holders"] = to_pairs(d.holders);
    out["evictions"] = d.evictions;
    out["cost"] = compute_cost(inst, d.holders);
    return out;
}

TimeAxis parse_axis(const std::string& s) {
    if (s == "clock") return TimeAxis::clock;
    if (s == "rounds") return TimeAxis::rounds;
    throw py::value_error("time axis must be 'clock' or 'rounds'");
}

py::dict simulate_py(const Graph& g, const std::string& strategy, const std::string& scorer, double alpha,
                     double beta, double delta, double rho, std::size_t budget, const std::string& axis,
                     double horizon, std::uint64_t seed, std::size_t cutoff_replicas) {
    ExperimentConfig cfg;
    cfg.epidemic = EpidemicParams{beta, delta, rho, budget};
    cfg.axis = parse_axis(axis);
    cfg.horizon = horizon;
    cfg.cutoff_replicas = cutoff_replicas;
    cfg.out_dir.clear();
    const auto s = StrategyConfig::parse(strategy);
    const auto k = parse_scorer_kind(scorer);
    RunContext ctx;
    {
        py::gil_scoped_release release;
        ctx = prepare_context(g, cfg, {s}, {k}, {alpha});
    }
    const auto opt = cfg.run_options(s, k, alpha);
    RunRecord rec;
    {
        py::gil_scoped_release release;
        rec = simulate(ctx, opt, seed);
    }
    std::vector<std::size_t> eps;
    for (const auto& r : rec.rounds) eps.push_back(r.epsilon);
    py::dict out;
    out["times"] = rec.times;
    out["infected"] = rec.infected;
    out["epsilon"] = eps;
    out["extinction"] = rec.extinction;
    out["end_time"] = rec.end_time;
    out["auc"] = auc_infection(rec, horizon, opt.axis);
    return out;
}

py::list run_config(const std::string& text) {
    const auto cfg = parse_config_text(text);
    RunSummary sum;
    {
        py::gil_scoped_release release;
        sum = cmd_run(cfg);
    }
    py::list out;
    for (const auto& a : sum.arms) {
        py::dict d;
        d["arm"] = a.arm;
        d["strategy"] = a.strategy;
        d["scorer"] = std::string(to_string(a.scorer));
        d["alpha"] = a.alpha;
        d["auc"] = a.auc;
        d["mean_epsilon"] = a.mean_epsilon;
        out.append(d);
    }
    return out;
}

py::list regress_config(const std::string& text) {
    const auto cfg = parse_config_text(text);
    std::vector<RegressionFit> fits;
    {
        py::gil_scoped_release release;
        fits = cmd_regress(cfg);
    }
    py::list out;
    for (const auto& f : fits) {
        py::dict d;
        d["alpha"] = f.alpha;
        d["c1"] = f.c1;
        d["c2"] = f.c2;
        d["r2"] = f.r2;
        d["degenerate"] = f.degenerate;
        py::list pts;
        for (const auto& p : f.points) pts.append(py::make_tuple(p.strategy, p.error_auc, p.infected_gap));
        d["points"] = pts;
        out.append(d);
    }
    return out;
}

py::list sweep_config(const std::string& text) {
    const auto cfg = parse_config_text(text);
    std::vector<SweepRow> rows;
    {
        py::gil_scoped_release release;
        rows = cmd_sweep_alpha(cfg);
    }
    py::list out;
    for (const auto& r : rows) {
        py::dict d;
        d["type"] = r.type;
        d["mean_degree"] = r.mean_degree;
        d["alpha"] = r.alpha;
        d["auc_mean"] = r.auc.mean;
        d["auc_se"] = r.auc.se;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_seqdra, m) {
    m.doc() = "Sequential resource allocation for SIS epidemics on networks";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Graph>(m, "Graph")
        .def(py::init([](std::size_t n, const std::vector<Edge>& edges) { return Graph(n, edges); }),
             py::arg("n"), py::arg("edges"))
        .def_property_readonly("node_count", &Graph::node_count)
        .def_property_readonly("edge_count", &Graph::edge_count)
        .def_property_readonly("mean_degree", &Graph::mean_degree)
        .def("edges", &Graph::edges)
        .def("neighbors", [](const Graph& g, NodeId i) {
            if (i < 0 || static_cast<std::size_t>(i) >= g.node_count()) throw py::index_error();
            const auto s = g.neighbors(i);
            return std::vector<NodeId>(s.begin(), s.end());
        });

    m.def("watts_strogatz", &generate_watts_strogatz, py::arg("n"), py::arg("m"), py::arg("p"), py::arg("seed"));
    m.def("barabasi_albert", &generate_barabasi_albert, py::arg("n"), py::arg("m"), py::arg("seed"));
    m.def("erdos_renyi", &generate_erdos_renyi, py::arg("n"), py::arg("p"), py::arg("seed"));
    m.def("community",
          [](const std::vector<std::size_t>& sizes, const std::vector<double>& probs, std::uint64_t seed) {
              return generate_community(sizes, probs, seed);
          },
          py::arg("level_sizes"), py::arg("level_probs"), py::arg("seed"));
    m.def("load_edge_list", [](const std::string& path) { return load_edge_list(path); }, py::arg("path"));

    m.def("simulate", &simulate_py, py::arg("graph"), py::arg("strategy") = "SDRA-CCM*",
          py::arg("scorer") = "LRIE", py::arg("alpha") = 1.0, py::arg("beta") = 3.0, py::arg("delta") = 0.0,
          py::arg("rho") = 125.0, py::arg("budget") = 5, py::arg("axis") = "clock", py::arg("horizon") = 10.0,
          py::arg("seed") = 1, py::arg("cutoff_replicas") = 1000,
          "Runs one controlled SIS trajectory and returns its record as a dict.");

    m.def("offline_select",
          [](std::size_t budget, const Pairs& pre, const Pairs& candidates) {
              return to_pairs(offline_select(instance(budget, pre, candidates)));
          },
          py::arg("budget"), py::arg("preselection"), py::arg("candidates"));
    m.def("ccm",
          [](std::size_t budget, const Pairs& pre, const Pairs& candidates, std::size_t cutoff, bool leftovers) {
              const auto inst = instance(budget, pre, candidates);
              return decisions_dict(inst, run_ccm(inst, cutoff), leftovers);
          },
          py::arg("budget"), py::arg("preselection"), py::arg("candidates"), py::arg("cutoff"),
          py::arg("leftovers") = true);
    m.def("hiring_above_mean",
          [](std::size_t budget, const Pairs& pre, const Pairs& candidates, bool leftovers) {
              const auto inst = instance(budget, pre, candidates);
              return decisions_dict(inst, run_hiring_above_mean(inst), leftovers);
          },
          py::arg("budget"), py::arg("preselection"), py::arg("candidates"), py::arg("leftovers") = true);
    m.def("hiring_above_median",
          [](std::size_t budget, const Pairs& pre, const Pairs& candidates, bool leftovers) {
              const auto inst = instance(budget, pre, candidates);
              return decisions_dict(inst, run_hiring_above_median(inst), leftovers);
          },
          py::arg("budget"), py::arg("preselection"), py::arg("candidates"), py::arg("leftovers") = true);

    m.def("integrate_moments",
          [](double beta, double delta, double rho, double budget, double mean_degree, double nodes, double m1,
             double m2, const std::string& closure, double horizon, double output_dt) {
              const auto tr = integrate_moments(MomentParams{beta, delta, rho, budget, mean_degree, nodes},
                                                MomentState{m1, m2}, parse_closure(closure), horizon, output_dt);
              py::dict out;
              out["t"] = tr.t;
              out["m1"] = tr.m1;
              out["m2"] = tr.m2;
              return out;
          },
          py::arg("beta"), py::arg("delta"), py::arg("rho"), py::arg("budget"), py::arg("mean_degree"),
          py::arg("nodes"), py::arg("m1"), py::arg("m2"), py::arg("closure") = "normal", py::arg("horizon") = 10.0,
          py::arg("output_dt") = 0.01);

    m.def("run", &run_config, py::arg("config_json"), "Runs every arm of a JSON experiment config.");
    m.def("sweep_alpha", &sweep_config, py::arg("config_json"), "CCM* AUC across sampling ratios and network types.");
    m.def("regress", &regress_config, py::arg("config_json"), "Per-alpha error regressions for a JSON config.");
}
