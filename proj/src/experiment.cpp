#include "seqdra/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "seqdra/rng.hpp"

namespace seqdra {

using nlohmann::json;

namespace {

std::string ptr(const std::string& base, const std::string& key) { return base + "/" + key; }

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ConfigError(where.empty() ? "/" : where, "expected an object");
    for (const auto& [k, v] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ConfigError(ptr(where, k), "unknown key");
    }
}

double get_number(const json& j, const std::string& where, std::string_view what) {
    if (!j.is_number()) throw ConfigError(where, fmt::format("expected a number ({})", what));
    return j.get<double>();
}

std::uint64_t get_uint(const json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
        throw ConfigError(where, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where, "expected a string");
    return j.get<std::string>();
}

template <class T, class F>
std::vector<T> get_list(const json& j, const std::string& where, F&& each) {
    if (!j.is_array() || j.empty()) throw ConfigError(where, "expected a non-empty array");
    std::vector<T> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(each(j[k], where + "/" + std::to_string(k)));
    return out;
}

StrategyConfig get_strategy(const json& j, const std::string& where) {
    try {
        return StrategyConfig::parse(get_string(j, where));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, e.what());
    }
}

ScorerKind get_scorer(const json& j, const std::string& where) {
    try {
        return parse_scorer_kind(get_string(j, where));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, e.what());
    }
}

double get_alpha(const json& j, const std::string& where) {
    const double a = get_number(j, where, "alpha");
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError(where, "alpha must be in [0, 1]");
    return a;
}

NetworkSpec parse_network(const json& j) {
    const std::string w = "/network";
    check_keys(j, w, {"type", "n", "m", "p", "mean_degree", "level_sizes", "level_probs", "path", "seed"});
    NetworkSpec s;
    if (j.contains("type")) s.type = get_string(j["type"], ptr(w, "type"));
    static const std::set<std::string> types{"watts_strogatz", "barabasi_albert", "erdos_renyi", "community",
                                             "edge_list"};
    if (!types.count(s.type)) throw ConfigError(ptr(w, "type"), "unknown network type '" + s.type + "'");
    if (j.contains("n")) s.n = get_uint(j["n"], ptr(w, "n"));
    if (j.contains("m")) s.m = get_uint(j["m"], ptr(w, "m"));
    if (j.contains("p")) {
        s.p = get_number(j["p"], ptr(w, "p"), "probability");
        if (!(s.p >= 0.0 && s.p <= 1.0)) throw ConfigError(ptr(w, "p"), "probability must be in [0, 1]");
    }
    if (j.contains("mean_degree")) {
        s.mean_degree = get_number(j["mean_degree"], ptr(w, "mean_degree"), "mean degree");
        if (!(*s.mean_degree > 0.0)) throw ConfigError(ptr(w, "mean_degree"), "must be > 0");
    }
    if (j.contains("level_sizes"))
        s.level_sizes = get_list<std::size_t>(j["level_sizes"], ptr(w, "level_sizes"),
                                              [](const json& x, const std::string& p) { return get_uint(x, p); });
    if (j.contains("level_probs"))
        s.level_probs = get_list<double>(j["level_probs"], ptr(w, "level_probs"), [](const json& x, const std::string& p) {
            return get_number(x, p, "probability");
        });
    if (j.contains("path")) s.path = get_string(j["path"], ptr(w, "path"));
    if (j.contains("seed")) s.seed = get_uint(j["seed"], ptr(w, "seed"));

    if (s.type == "edge_list" && s.path.empty()) throw ConfigError(ptr(w, "path"), "edge_list needs a path");
    if (s.type == "watts_strogatz" && (s.m % 2 != 0 || s.m >= s.n))
        throw ConfigError(ptr(w, "m"), "watts_strogatz needs an even m < n");
    if (s.type == "barabasi_albert" && (s.m == 0 || s.m >= s.n))
        throw ConfigError(ptr(w, "m"), "barabasi_albert needs 0 < m < n");
    if (s.type == "community" && s.level_sizes.size() != s.level_probs.size())
        throw ConfigError(ptr(w, "level_probs"), "one probability per level expected");
    if (s.type != "edge_list" && s.type != "community" && s.n < 2) throw ConfigError(ptr(w, "n"), "need n >= 2");
    return s;
}

EpidemicParams parse_epidemic(const json& j) {
    const std::string w = "/epidemic";
    check_keys(j, w, {"beta", "delta", "rho", "budget"});
    EpidemicParams p;
    if (j.contains("beta")) p.beta = get_number(j["beta"], ptr(w, "beta"), "rate");
    if (j.contains("delta")) p.delta = get_number(j["delta"], ptr(w, "delta"), "rate");
    if (j.contains("rho")) p.rho = get_number(j["rho"], ptr(w, "rho"), "rate");
    if (j.contains("budget")) p.budget = get_uint(j["budget"], ptr(w, "budget"));
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(w, e.what());
    }
    return p;
}

std::string hex16(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string sanitize(std::string s) {
    for (char& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_')) c = '_';
    return s;
}


const std::vector<StrategyConfig>& default_regress_strategies() {
    static const std::vector<StrategyConfig> v{
        StrategyConfig::parse("SDRA-CCM*"), StrategyConfig::parse("SDRA-CCM-sqrt"),
        StrategyConfig::parse("SDRA-CCM-e"), StrategyConfig::parse("SDRA-MEAN"),
        StrategyConfig::parse("SDRA-MEDIAN")};
    return v;
}

std::string arm_label(const StrategyConfig& s, ScorerKind k, double alpha) {
    return fmt::format("{}/{}/a={}", s.label(), to_string(k), alpha);
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t base, std::size_t r) {
    return Rng(base).stream(fmt::format("replicate-{}", r)).seed();
}

std::string config_digest(const json& j) {
    json canon = j;
    if (canon.is_object()) {
        // Execution-only settings do not change results.
        canon.erase("threads");
        canon.erase("output");
    }
    return hex16(fnv1a64(canon.dump()));
}

Graph build_network(const NetworkSpec& s) {
    if (s.type == "watts_strogatz") return generate_watts_strogatz(s.n, s.m, s.p, s.seed);
    if (s.type == "barabasi_albert") return generate_barabasi_albert(s.n, s.m, s.seed);
    if (s.type == "erdos_renyi") {
        const double p = s.mean_degree ? *s.mean_degree / static_cast<double>(s.n - 1) : s.p;
        return generate_erdos_renyi(s.n, std::min(1.0, p), s.seed);
    }
    if (s.type == "community") return generate_community(s.level_sizes, s.level_probs, s.seed);
    if (s.type == "edge_list") return load_edge_list(s.path);
    throw std::invalid_argument("unknown network type " + s.type);
}

ExperimentConfig parse_config(const json& j) {
    check_keys(j, "",
               {"network", "epidemic", "initial_infection", "strategies", "scorers", "alphas", "sampling",
                "time_axis", "horizon", "max_events", "seeds", "seed", "threads", "output", "write_runs",
                "curve_points", "score_rounds", "plan", "cutoff_table", "regress", "sweep"});
    ExperimentConfig c;
    c.raw = j;
    c.digest = config_digest(j);
    if (j.contains("network")) c.network = parse_network(j["network"]);
    if (j.contains("epidemic")) c.epidemic = parse_epidemic(j["epidemic"]);
    if (j.contains("initial_infection")) {
        const auto& x = j["initial_infection"];
        if (x.is_number()) {
            const double f = x.get<double>();
            if (!(f > 0.0 && f <= 1.0)) throw ConfigError("/initial_infection", "fraction must be in (0, 1]");
            c.initial_fraction = f;
        } else if (x.is_array()) {
            c.initial_infected = get_list<NodeId>(x, "/initial_infection", [](const json& v, const std::string& p) {
                return static_cast<NodeId>(get_uint(v, p));
            });
        } else {
            throw ConfigError("/initial_infection", "expected a fraction or a list of node ids");
        }
    }
    if (j.contains("strategies")) c.strategies = get_list<StrategyConfig>(j["strategies"], "/strategies", get_strategy);
    else c.strategies = {StrategyConfig::parse("RDRA")};
    if (j.contains("scorers")) c.scorers = get_list<ScorerKind>(j["scorers"], "/scorers", get_scorer);
    if (j.contains("alphas")) c.alphas = get_list<double>(j["alphas"], "/alphas", get_alpha);
    if (j.contains("sampling")) {
        const auto m = get_string(j["sampling"], "/sampling");
        if (m == "uniform") c.sampling = SamplingMode::uniform;
        else if (m == "softmax") c.sampling = SamplingMode::softmax;
        else throw ConfigError("/sampling", "expected 'uniform' or 'softmax'");
    }
    if (j.contains("time_axis")) {
        const auto a = get_string(j["time_axis"], "/time_axis");
        if (a == "clock") c.axis = TimeAxis::clock;
        else if (a == "rounds") c.axis = TimeAxis::rounds;
        else throw ConfigError("/time_axis", "expected 'clock' or 'rounds'");
    }
    if (j.contains("horizon")) {
        c.horizon = get_number(j["horizon"], "/horizon", "horizon");
        if (!(c.horizon > 0.0)) throw ConfigError("/horizon", "must be > 0");
    }
    if (j.contains("max_events")) c.max_events = get_uint(j["max_events"], "/max_events");
    if (j.contains("seeds")) {
        c.seeds = get_uint(j["seeds"], "/seeds");
        if (c.seeds == 0) throw ConfigError("/seeds", "must be >= 1");
    }
    if (j.contains("seed")) c.base_seed = get_uint(j["seed"], "/seed");
    if (j.contains("threads")) c.threads = std::max<std::uint64_t>(1, get_uint(j["threads"], "/threads"));
    if (j.contains("output")) c.out_dir = get_string(j["output"], "/output");
    if (j.contains("write_runs")) {
        if (!j["write_runs"].is_boolean()) throw ConfigError("/write_runs", "expected a boolean");
        c.write_runs = j["write_runs"].get<bool>();
    }
    if (j.contains("curve_points")) {
        c.curve_points = get_uint(j["curve_points"], "/curve_points");
        if (c.curve_points < 2) throw ConfigError("/curve_points", "must be >= 2");
    }
    if (j.contains("score_rounds"))
        c.score_rounds = get_list<std::size_t>(j["score_rounds"], "/score_rounds",
                                               [](const json& v, const std::string& p) { return get_uint(v, p); });
    if (j.contains("plan")) {
        const auto& p = j["plan"];
        check_keys(p, "/plan", {"iterations", "seed", "path"});
        if (p.contains("iterations")) c.plan.iterations = get_uint(p["iterations"], "/plan/iterations");
        if (p.contains("seed")) c.plan.seed = get_uint(p["seed"], "/plan/seed");
        if (p.contains("path")) c.plan_path = get_string(p["path"], "/plan/path");
    }
    if (j.contains("cutoff_table")) {
        const auto& t = j["cutoff_table"];
        check_keys(t, "/cutoff_table", {"path", "replicas", "seed"});
        if (t.contains("path")) c.cutoff_path = get_string(t["path"], "/cutoff_table/path");
        if (t.contains("replicas")) {
            c.cutoff_replicas = get_uint(t["replicas"], "/cutoff_table/replicas");
            if (c.cutoff_replicas < 1000) throw ConfigError("/cutoff_table/replicas", "must be >= 1000");
        }
        if (t.contains("seed")) c.cutoff_seed = get_uint(t["seed"], "/cutoff_table/seed");
    }
    c.regress_strategies = default_regress_strategies();
    if (j.contains("regress")) {
        const auto& r = j["regress"];
        check_keys(r, "/regress", {"alphas", "strategies", "error"});
        if (r.contains("error")) {
            const auto e = get_string(r["error"], "/regress/error");
            if (e == "trajectory") c.regress_error = ErrorMeasure::trajectory;
            else if (e == "shadow") c.regress_error = ErrorMeasure::shadow;
            else throw ConfigError("/regress/error", "expected 'trajectory' or 'shadow'");
        }
        if (r.contains("alphas")) c.regress_alphas = get_list<double>(r["alphas"], "/regress/alphas", get_alpha);
        if (r.contains("strategies")) {
            c.regress_strategies = get_list<StrategyConfig>(r["strategies"], "/regress/strategies", get_strategy);
            for (std::size_t k = 0; k < c.regress_strategies.size(); ++k)
                if (c.regress_strategies[k].family != Family::sdra)
                    throw ConfigError(fmt::format("/regress/strategies/{}", k), "only SDRA strategies are regressed");
        }
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        check_keys(s, "/sweep", {"types", "mean_degrees", "alphas"});
        if (s.contains("types"))
            c.sweep_types = get_list<std::string>(s["types"], "/sweep/types", [](const json& x, const std::string& p) {
                auto t = get_string(x, p);
                if (t != "ER" && t != "SF" && t != "SW") throw ConfigError(p, "expected ER, SF or SW");
                return t;
            });
        if (s.contains("mean_degrees"))
            c.sweep_mean_degrees = get_list<double>(s["mean_degrees"], "/sweep/mean_degrees",
                                                    [](const json& x, const std::string& p) {
                                                        const double k = get_number(x, p, "mean degree");
                                                        if (!(k > 0.0)) throw ConfigError(p, "must be > 0");
                                                        return k;
                                                    });
        if (s.contains("alphas")) c.sweep_alphas = get_list<double>(s["alphas"], "/sweep/alphas", get_alpha);
    }
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line/column position.
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(fmt::format("line {}, column {}", line, col), "malformed JSON");
    }
    return parse_config(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

RunOptions ExperimentConfig::run_options(const StrategyConfig& s, ScorerKind k, double alpha) const {
    RunOptions o;
    o.epidemic = epidemic;
    o.sampler = {alpha, sampling};
    o.strategy = s;
    o.scorer = k;
    o.axis = axis;
    o.horizon = horizon;
    o.max_events = max_events;
    o.initial_fraction = initial_fraction;
    o.initial_infected = initial_infected;
    return o;
}

std::vector<std::size_t> cutoff_n_grid(std::size_t n_max) {
    std::vector<std::size_t> g;
    for (std::size_t n = 1; n <= std::min<std::size_t>(n_max, 40); ++n) g.push_back(n);
    double x = 40.0;
    while (g.empty() || g.back() < n_max) {
        x *= 1.15;
        g.push_back(std::min(n_max, static_cast<std::size_t>(std::ceil(x))));
    }
    return g;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t k = 0; k < count; ++k) job(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr first;
    std::size_t first_index = count;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) {
                try {
                    job(k);
                } catch (...) {
                    std::lock_guard lock(mu);
                    // Report the lowest failing job so errors do not depend on scheduling.
                    if (k < first_index) {
                        first_index = k;
                        first = std::current_exception();
                    }
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

RunContext prepare_context(const Graph& g, const ExperimentConfig& cfg,
                           const std::vector<StrategyConfig>& strategies,
                           const std::vector<ScorerKind>& scorers, const std::vector<double>& alphas) {
    RunContext ctx;
    ctx.graph = &g;
    auto uses = [&](ScorerKind k) { return std::find(scorers.begin(), scorers.end(), k) != scorers.end(); };
    if (uses(ScorerKind::mcm)) {
        if (cfg.plan_path && std::filesystem::exists(*cfg.plan_path)) {
            std::ifstream in(*cfg.plan_path);
            auto plan = read_plan(in);
            if (plan.order.size() != g.node_count())
                throw ConfigError("/plan/path", "plan does not match the network size");
            ctx.plan = std::make_shared<const PriorityPlan>(std::move(plan));
        } else {
            ctx.plan = std::make_shared<const PriorityPlan>(optimize_plan(g, cfg.plan));
            if (cfg.plan_path) {
                std::ofstream out(*cfg.plan_path);
                write_plan(*ctx.plan, out);
            }
        }
    }
    if (uses(ScorerKind::lrsr)) ctx.lrsr = std::make_shared<const LrsrTable>(lrsr_table(g));

    const bool need_table = std::any_of(strategies.begin(), strategies.end(),
                                        [](const StrategyConfig& s) { return s.needs_cutoff_table(); });
    if (need_table) {
        double a_max = 0.0;
        for (double a : alphas) a_max = std::max(a_max, a);
        const std::size_t n_max = std::max<std::size_t>(1, SamplerConfig{a_max, cfg.sampling}.sample_size(g.node_count()));
        // an empty output directory means no on-disk cache
        const bool on_disk = cfg.cutoff_path || !cfg.out_dir.empty();
        const auto path = cfg.cutoff_path.value_or(cfg.out_dir / "cutoff_table.csv");
        std::shared_ptr<const CutoffTable> cached;
        if (on_disk && std::filesystem::exists(path)) {
            std::ifstream in(path);
            auto t = CutoffTable::read_csv(in);
            std::size_t covered = 0;
            bool matches = true;
            for (const auto& c : t.cells()) {
                if (c.budget != cfg.epidemic.budget) continue;
                covered = std::max(covered, c.n);
                matches = matches && c.replicas == cfg.cutoff_replicas && c.seed == cfg.cutoff_seed;
            }
            if (matches && covered >= n_max) cached = std::make_shared<const CutoffTable>(std::move(t));
        }
        if (cached) {
            ctx.cutoffs = std::move(cached);
        } else {
            CutoffTableOptions opt;
            opt.budget = cfg.epidemic.budget;
            opt.n_grid = cutoff_n_grid(n_max);
            opt.replicas = cfg.cutoff_replicas;
            opt.seed = cfg.cutoff_seed;
            opt.threads = cfg.threads;
            auto table = std::make_shared<const CutoffTable>(build_cutoff_table(opt));
            if (on_disk)
                write_with_digest(path, config_digest({{"b", opt.budget}, {"n_max", n_max}, {"replicas", opt.replicas},
                                                       {"seed", opt.seed}}),
                                  [&](std::ostream& out) { table->write_csv(out); });
            ctx.cutoffs = std::move(table);
        }
    }
    return ctx;
}

void write_with_digest(const std::filesystem::path& path, const std::string& digest,
                       const std::function<void(std::ostream&)>& body) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# digest=" << digest << '\n';
    body(out);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

RunSummary cmd_run(const ExperimentConfig& cfg) {
    const Graph g = build_network(cfg.network);
    const RunContext ctx = prepare_context(g, cfg, cfg.strategies, cfg.scorers, cfg.alphas);

    RunSummary sum;
    for (const auto& s : cfg.strategies)
        for (auto k : cfg.scorers)
            for (double a : cfg.alphas) sum.arms.push_back({arm_label(s, k, a), s.label(), k, a, {}, {}, {}, {}});
    for (auto& arm : sum.arms) {
        arm.auc.assign(cfg.seeds, 0.0);
        arm.mean_epsilon.assign(cfg.seeds, 0.0);
        arm.curve.assign(cfg.curve_points, 0.0);
    }
    sum.grid.resize(cfg.curve_points);
    for (std::size_t k = 0; k < cfg.curve_points; ++k)
        sum.grid[k] = cfg.horizon * static_cast<double>(k) / static_cast<double>(cfg.curve_points - 1);

    std::vector<std::vector<double>> curves(sum.arms.size() * cfg.seeds);

    parallel_for(sum.arms.size() * cfg.seeds, cfg.threads, [&](std::size_t job) {
        const std::size_t a = job / cfg.seeds, r = job % cfg.seeds;
        auto& arm = sum.arms[a];
        auto opt = cfg.run_options(StrategyConfig::parse(arm.strategy), arm.scorer, arm.alpha);
        if (r == 0) opt.score_rounds = cfg.score_rounds;
        auto rec = simulate(ctx, opt, replicate_seed(cfg.base_seed, r));
        rec.config_digest = cfg.digest;
        if (r == 0) arm.scores = std::move(rec.score_snapshots);
        arm.auc[r] = auc_infection(rec, cfg.horizon, cfg.axis);
        double eps = 0.0;
        for (const auto& st : rec.rounds) eps += static_cast<double>(st.epsilon);
        arm.mean_epsilon[r] = rec.rounds.empty() ? 0.0 : eps / static_cast<double>(rec.rounds.size());
        curves[job] = mean_curve(std::span(&rec, 1), cfg.horizon, cfg.curve_points, cfg.axis);
        if (cfg.write_runs)
            write_with_digest(cfg.out_dir / "runs" / sanitize(arm.arm) / fmt::format("seed_{:04d}.csv", r), cfg.digest,
                              [&](std::ostream& out) { write_run_csv(rec, out); });
    });
    for (std::size_t a = 0; a < sum.arms.size(); ++a) {
        for (std::size_t r = 0; r < cfg.seeds; ++r)
            for (std::size_t k = 0; k < cfg.curve_points; ++k) sum.arms[a].curve[k] += curves[a * cfg.seeds + r][k];
        for (double& v : sum.arms[a].curve) v /= static_cast<double>(cfg.seeds);
    }

    write_with_digest(cfg.out_dir / "summary.csv", cfg.digest, [&](std::ostream& out) {
        out << "arm,strategy,scorer,alpha,seeds,auc_mean,auc_se,epsilon_mean\n";
        for (const auto& arm : sum.arms) {
            const auto s = summarize(arm.auc);
            const auto e = summarize(arm.mean_epsilon);
            out << fmt::format("{},{},{},{},{},{:.9g},{:.9g},{:.9g}\n", arm.arm, arm.strategy, to_string(arm.scorer),
                               arm.alpha, s.n, s.mean, s.se, e.mean);
        }
    });
    write_with_digest(cfg.out_dir / "curves.csv", cfg.digest, [&](std::ostream& out) {
        out << "arm,t,eta\n";
        for (const auto& arm : sum.arms)
            for (std::size_t k = 0; k < sum.grid.size(); ++k)
                out << fmt::format("{},{:.9g},{:.9g}\n", arm.arm, sum.grid[k], arm.curve[k]);
    });
    if (!cfg.score_rounds.empty())
        write_with_digest(cfg.out_dir / "scores.csv", cfg.digest, [&](std::ostream& out) {
            out << "arm,round,role,node,score\n";
            for (const auto& arm : sum.arms)
                for (const auto& snap : arm.scores) {
                    for (const auto& c : snap.preselection)
                        out << fmt::format("{},{},holder,{},{:.9g}\n", arm.arm, snap.round, c.node, c.score);
                    for (const auto& c : snap.candidates)
                        out << fmt::format("{},{},candidate,{},{:.9g}\n", arm.arm, snap.round, c.node, c.score);
                }
        });
    return sum;
}

std::vector<RegressionFit> cmd_regress(const ExperimentConfig& cfg) {
    if (cfg.regress_strategies.size() < 3)
        throw ConfigError("/regress/strategies", "regression needs at least 3 strategies");
    const Graph g = build_network(cfg.network);
    const ScorerKind scorer = cfg.scorers.front();
    const RunContext ctx = prepare_context(g, cfg, cfg.regress_strategies, {scorer}, cfg.regress_alphas);
    const std::size_t ns = cfg.regress_strategies.size(), na = cfg.regress_alphas.size();

    // Per (alpha, strategy, seed): error AUC and infected AUC gap.
    std::vector<double> ae(na * ns * cfg.seeds), adn(na * ns * cfg.seeds);
    parallel_for(ae.size(), cfg.threads, [&](std::size_t job) {
        const std::size_t r = job % cfg.seeds;
        const std::size_t si = (job / cfg.seeds) % ns;
        const std::size_t ai = job / (cfg.seeds * ns);
        const auto opt = cfg.run_options(cfg.regress_strategies[si], scorer, cfg.regress_alphas[ai]);
        const auto pr = paired_offline_run(ctx, opt, replicate_seed(cfg.base_seed, r));
        ae[job] = cfg.regress_error == ErrorMeasure::trajectory ? trajectory_error_auc(pr, cfg.epidemic.budget)
                                                                : error_auc(pr.online, cfg.epidemic.budget);
        adn[job] = auc_infection(pr.online, cfg.horizon, cfg.axis) - auc_infection(pr.offline, cfg.horizon, cfg.axis);
    });

    std::vector<RegressionFit> fits;
    for (std::size_t ai = 0; ai < na; ++ai) {
        std::vector<RegressionPoint> pts;
        for (std::size_t si = 0; si < ns; ++si) {
            const auto off = (ai * ns + si) * cfg.seeds;
            RegressionPoint p;
            p.strategy = cfg.regress_strategies[si].label();
            p.error_auc = summarize(std::span(ae).subspan(off, cfg.seeds)).mean;
            p.infected_gap = summarize(std::span(adn).subspan(off, cfg.seeds)).mean;
            pts.push_back(p);
        }
        auto fit = fit_regression(pts, cfg.regress_alphas[ai]);
        if (fit.degenerate)
            std::cerr << fmt::format("warning: regression at alpha={} is degenerate (all A_e equal)\n", fit.alpha);
        fits.push_back(std::move(fit));
    }
    write_with_digest(cfg.out_dir / "regression.csv", cfg.digest, [&](std::ostream& out) {
        std::ostringstream body;
        for (std::size_t k = 0; k < fits.size(); ++k) {
            std::ostringstream one;
            write_regression_csv(fits[k], one);
            auto text = one.str();
            if (k > 0) text = text.substr(text.find('\n') + 1);  // one header only
            body << text;
        }
        out << body.str();
    });
    return fits;
}

CutoffTable cmd_cutoff_table(const ExperimentConfig& cfg, std::size_t n_max) {
    CutoffTableOptions opt;
    opt.budget = cfg.epidemic.budget;
    opt.n_grid = cutoff_n_grid(n_max);
    opt.replicas = cfg.cutoff_replicas;
    opt.seed = cfg.cutoff_seed;
    opt.threads = cfg.threads;
    auto table = build_cutoff_table(opt);
    const auto path = cfg.cutoff_path.value_or(cfg.out_dir / "cutoff_table.csv");
    write_with_digest(path, cfg.digest, [&](std::ostream& out) { table.write_csv(out); });
    return table;
}

std::vector<SweepRow> cmd_sweep_alpha(const ExperimentConfig& cfg) {
    const StrategyConfig ccm = StrategyConfig::parse("SDRA-CCM*");
    const ScorerKind scorer = cfg.scorers.front();
    std::vector<SweepRow> rows;
    for (const auto& type : cfg.sweep_types)
        for (double kbar : cfg.sweep_mean_degrees) {
            NetworkSpec spec = cfg.network;
            if (type == "ER") {
                spec.type = "erdos_renyi";
                spec.mean_degree = kbar;
            } else if (type == "SF") {
                spec.type = "barabasi_albert";
                spec.m = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(kbar / 2.0)));
            } else {
                spec.type = "watts_strogatz";
                auto m = static_cast<std::size_t>(std::lround(kbar));
                spec.m = std::max<std::size_t>(2, m - m % 2);
            }
            const Graph g = build_network(spec);
            const RunContext ctx = prepare_context(g, cfg, {ccm}, {scorer}, cfg.sweep_alphas);
            std::vector<double> auc(cfg.sweep_alphas.size() * cfg.seeds);
            parallel_for(auc.size(), cfg.threads, [&](std::size_t job) {
                const auto opt = cfg.run_options(ccm, scorer, cfg.sweep_alphas[job / cfg.seeds]);
                const auto rec = simulate(ctx, opt, replicate_seed(cfg.base_seed, job % cfg.seeds));
                auc[job] = auc_infection(rec, cfg.horizon, cfg.axis);
            });
            for (std::size_t ai = 0; ai < cfg.sweep_alphas.size(); ++ai)
                rows.push_back({type, kbar, cfg.sweep_alphas[ai],
                                summarize(std::span(auc).subspan(ai * cfg.seeds, cfg.seeds))});
        }
    write_with_digest(cfg.out_dir / "sweep_alpha.csv", cfg.digest, [&](std::ostream& out) {
        out << "type,mean_degree,alpha,auc_mean,auc_se,seeds\n";
        for (const auto& r : rows)
            out << fmt::format("{},{},{},{:.9g},{:.9g},{}\n", r.type, r.mean_degree, r.alpha, r.auc.mean, r.auc.se,
                               r.auc.n);
    });
    return rows;
}

}  // namespace seqdra
