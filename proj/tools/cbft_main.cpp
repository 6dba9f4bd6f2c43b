// cbft: solve, sweep, simulate and compare adversarial strategies for chained BFT protocols.
#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "cbft/replay.hpp"
#include "cbft/report.hpp"
#include "cbft/strategy.hpp"

using namespace cbft;

namespace {

enum Exit { kOk = 0, kUsage = 1, kSolver = 2, kReplay = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Protocol protocol_arg(const std::string& s)
{
    auto p = parse_protocol(s);
    if (!p) throw UsageError("unknown protocol '" + s + "'");
    return *p;
}

std::vector<Metric> metrics_arg(const std::string& s)
{
    if (s == "both") return {Metric::Growth, Metric::Rate};
    auto m = parse_metric(s);
    if (!m) throw UsageError("unknown metric '" + s + "'");
    return {*m};
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string x; std::getline(is, x, sep);)
        if (!x.empty()) out.push_back(x);
    return out;
}

MdpInstance instance(Protocol p, double alpha, double k, int lh_cap)
{
    try {
        return build_mdp(p, alpha, k, lh_cap);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::vector<double> grid_arg(const std::string& s)
{
    try {
        return parse_grid(s);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

DelayModel delay_arg(const std::string& s)
{
    auto f = split(s, ':');
    try {
        if (f.size() == 2 && f[0] == "fixed") return DelayModel::fixed(parse_double(f[1]));
        if (f.size() == 3 && f[0] == "uniform") return DelayModel::uniform(parse_double(f[1]), parse_double(f[2]));
    } catch (const std::exception&) {
    }
    throw UsageError("delay must be fixed:D or uniform:D:A, got '" + s + "'");
}

// Runs tasks on a small pool; results keep the task order.
template <class T>
std::vector<T> run_all(std::vector<std::function<T()>> tasks, unsigned jobs)
{
    std::vector<T> out(tasks.size());
    std::vector<std::exception_ptr> errs(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < tasks.size();) {
            try {
                out[i] = tasks[i]();
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

void emit_csv(const std::vector<MetricsRow>& rows, const std::string& out)
{
    if (out.empty() || out == "-") {
        write_csv(std::cout, rows);
        return;
    }
    std::ofstream os(out);
    if (!os) throw UsageError("cannot write " + out);
    write_csv(os, rows);
}

struct Common {
    double k = 5.0;
    int lh_cap = kDefaultStreamletLhCap;
    double eps = 1e-4;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

void add_common(CLI::App* app, Common& c, bool with_eps = true)
{
    app->add_option("--k", c.k, "timeout bound over actual delay")->capture_default_str();
    app->add_option("--lh-cap", c.lh_cap, "Streamlet pending-block cap")->capture_default_str();
    if (with_eps) app->add_option("--eps", c.eps, "binary search precision")->capture_default_str();
}

int cmd_solve(const std::string& proto, double alpha, const std::string& metric, const Common& c,
              std::string out)
{
    const auto p = protocol_arg(proto);
    const auto ms = metrics_arg(metric);
    if (ms.size() != 1) throw UsageError("solve takes a single metric");
    const auto mdp = instance(p, alpha, c.k, c.lh_cap);
    const auto r = solve_min_metric(mdp, ms[0], c.eps);
    for (const auto& w : r.warnings) spdlog::warn("{}", w);
    if (out.empty()) out = std::string(to_string(p)) + "_" + format_double(alpha) + "_" + metric + ".policy";
    save_policy(mdp, r, out);
    std::cout << "protocol=" << to_string(p) << " alpha=" << format_double(alpha) << " metric=" << metric
              << " rho_bar=" << format_double(r.rho_bar) << " metric_value=" << format_double(r.metric_value)
              << " iterations=" << r.outer_iterations << " residual=" << r.inner_residual << " policy=" << out
              << '\n';
    return kOk;
}

int cmd_sweep(const std::string& protos, const std::string& grid, const std::string& metric, const Common& c,
              const std::string& out)
{
    std::vector<Protocol> ps;
    for (const auto& s : split(protos, ',')) ps.push_back(protocol_arg(s));
    const auto alphas = grid_arg(grid);
    const auto ms = metrics_arg(metric);
    for (double a : alphas) instance(Protocol::CHS, a, c.k, c.lh_cap);

    std::vector<std::function<MetricsRow()>> tasks;
    for (auto p : ps)
        for (double a : alphas)
            for (auto m : ms)
                tasks.push_back([=] {
                    const auto mdp = build_mdp(p, a, c.k, c.lh_cap);
                    const auto r = solve_min_metric(mdp, m, c.eps);
                    spdlog::debug("{} alpha={} {}: {}", to_string(p), a, to_string(m), r.metric_value);
                    return theory_row(p, a, m, "theory", r.metric_value, c.k);
                });
    emit_csv(run_all(std::move(tasks), c.jobs), out);
    return kOk;
}

Policy policy_source(const std::string& src, const MdpInstance& mdp, double eps)
{
    if (src == "silent") return silent_baseline_policy(mdp);
    if (src == "adopt") return adopt_policy(mdp);
    if (src.rfind("optimal:", 0) == 0) {
        auto m = parse_metric(src.substr(8));
        if (!m) throw UsageError("unknown metric in policy source '" + src + "'");
        return solve_min_metric(mdp, *m, eps).policy;
    }
    try {
        return load_policy(src, mdp);
    } catch (const PolicyFileError& e) {
        throw UsageError(e.what());
    }
}

struct SimArgs {
    std::string protocol;
    double alpha = -1.0;
    int nodes = 0;
    int faulty = -1;
    std::string policy = "optimal:growth";
    std::int64_t views = 100000;
    std::int64_t warmup = 100;
    std::string delay = "fixed:1";
    int reps = 6;
    std::uint64_t seed = 42;
    std::string trace;
    std::string out;
};

int cmd_simulate(const SimArgs& a, const Common& c)
{
    const auto p = protocol_arg(a.protocol);
    double alpha = a.alpha;
    if (a.nodes > 0 || a.faulty >= 0) {
        try {
            alpha = alpha_from_nodes(a.nodes, a.faulty);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    if (alpha < 0.0) throw UsageError("give --alpha or --nodes with --faulty");
    const auto mdp = instance(p, alpha, c.k, c.lh_cap);
    const auto pol = policy_source(a.policy, mdp, c.eps);

    SimConfig cfg;
    cfg.delay = delay_arg(a.delay);
    cfg.n_views = a.views;
    cfg.warmup_views = a.warmup;
    cfg.seed = a.seed;
    cfg.replications = a.reps;
    ReplicateOptions opt;
    opt.verify_replay = true;
    opt.keep_first_trace = !a.trace.empty();
    ReplicateResult res;
    try {
        check_delay(cfg.delay, mdp.k);
        res = replicate(mdp, pol, cfg, opt);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    if (!a.trace.empty()) {
        std::ofstream os(a.trace);
        if (!os) throw UsageError("cannot write " + a.trace);
        write_trace(os, res.first_trace);
    }
    std::vector<MetricsRow> rows;
    for (auto m : {Metric::Growth, Metric::Rate})
        rows.push_back(simulation_row(p, alpha, m, res.of(m), a.seed, c.k));
    emit_csv(rows, a.out);

    std::size_t bad = 0;
    for (std::size_t i = 0; i < res.replay_discrepancies.size(); ++i)
        if (res.replay_discrepancies[i]) {
            spdlog::error("replication {} (seed {}): {} replay discrepancies", i, res.samples[i].seed,
                          res.replay_discrepancies[i]);
            bad += res.replay_discrepancies[i];
        }
    return bad ? kReplay : kOk;
}

int cmd_compare(const std::string& proto, const std::string& strategies, const std::string& grid,
                const std::string& metric, const Common& c, const std::string& out)
{
    const auto p = protocol_arg(proto);
    const auto ms = metrics_arg(metric);
    const auto alphas = grid_arg(grid);
    const auto kinds = split(strategies, ',');
    for (const auto& s : kinds)
        if (s != "optimal" && s != "silent" && s != "none") throw UsageError("unknown strategy '" + s + "'");
    for (double a : alphas) instance(p, a, c.k, c.lh_cap);
    const auto none = no_attack_reference(p, c.k, c.lh_cap);

    struct Cell {
        std::vector<MetricsRow> rows;
    };
    std::vector<std::function<Cell()>> tasks;
    for (double a : alphas)
        tasks.push_back([=, &kinds] {
            Cell cell;
            const auto mdp = build_mdp(p, a, c.k, c.lh_cap);
            const auto silent = evaluate_policy(mdp, silent_baseline_policy(mdp));
            for (auto m : ms)
                for (const auto& s : kinds) {
                    if (s == "optimal")
                        cell.rows.push_back(
                            theory_row(p, a, m, "theory", solve_min_metric(mdp, m, c.eps).metric_value, c.k));
                    else if (s == "silent")
                        cell.rows.push_back(theory_row(p, a, m, "baseline-silent", silent.of(m), c.k));
                    else
                        cell.rows.push_back(theory_row(p, a, m, "no-attack", none.of(m), c.k));
                }
            return cell;
        });
    std::vector<MetricsRow> rows;
    for (auto& cell : run_all(std::move(tasks), c.jobs)) {
        std::optional<double> opt_v, sil_v, none_v;
        for (auto& r : cell.rows) {
            if (r.method == "theory") opt_v = r.value;
            if (r.method == "baseline-silent") sil_v = r.value;
            if (r.method == "no-attack") none_v = r.value;
            rows.push_back(r);
        }
        const auto& r0 = cell.rows.front();
        // The optimal value carries the binary search error.
        const double slack = c.eps;
        if (ms.size() == 1 && ((opt_v && sil_v && *opt_v > *sil_v + slack) ||
                               (sil_v && none_v && *sil_v > *none_v + 1e-12) ||
                               (opt_v && none_v && *opt_v > *none_v + slack)))
            spdlog::warn("ordering optimal <= silent <= none violated at alpha={}", r0.alpha);
    }
    emit_csv(rows, out);
    return kOk;
}

int cmd_replay(const std::string& proto, const std::string& path, const Common& c)
{
    const auto p = protocol_arg(proto);
    std::ifstream is(path);
    if (!is) throw UsageError("cannot read " + path);
    std::vector<ViewRecord> trace;
    try {
        trace = read_trace(is);
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
    const auto rep = replay_verify(trace, p, c.lh_cap);
    std::cout << rep.describe() << '\n';
    return rep.ok() ? kOk : kReplay;
}

} // namespace

int main(int argc, char** argv)
{
    auto logger = spdlog::stderr_color_mt("cbft");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::cfg::load_env_levels();

    CLI::App app{"Worst-case chain growth and commitment rate of chained BFT protocols"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    Common common;
    std::string protocol, metric = "growth", out, grid = "0:0.03:0.33";
    double alpha = -1.0;

    auto* solve = app.add_subcommand("solve", "solve the metric-minimizing adversarial policy");
    solve->add_option("--protocol", protocol, "chs|2chs|fhs|streamlet")->required();
    solve->add_option("--alpha", alpha, "adversarial fraction in [0, 1/3)")->required();
    solve->add_option("--metric", metric, "growth|rate")->required();
    solve->add_option("--out", out, "policy file path");
    add_common(solve, common);

    std::string protocols = "chs,2chs,fhs,streamlet", sweep_metric = "both";
    auto* sweep = app.add_subcommand("sweep", "theory values over an alpha grid");
    sweep->add_option("--protocols", protocols, "comma-separated protocols")->capture_default_str();
    sweep->add_option("--alpha-grid", grid, "start:step:end")->capture_default_str();
    sweep->add_option("--metric", sweep_metric, "growth|rate|both")->capture_default_str();
    sweep->add_option("--out", out, "CSV path (default stdout)");
    sweep->add_option("--jobs", common.jobs, "worker threads");
    add_common(sweep, common);

    SimArgs sim;
    auto* simulate = app.add_subcommand("simulate", "replicated view-level simulation");
    simulate->add_option("--protocol", sim.protocol, "chs|2chs|fhs|streamlet")->required();
    simulate->add_option("--alpha", sim.alpha, "adversarial fraction");
    simulate->add_option("--nodes", sim.nodes, "node count n (with --faulty)");
    simulate->add_option("--faulty", sim.faulty, "Byzantine node count f");
    simulate->add_option("--policy", sim.policy, "PATH|optimal:growth|optimal:rate|silent|adopt")
        ->capture_default_str();
    simulate->add_option("--views", sim.views, "views per replication")->capture_default_str();
    simulate->add_option("--warmup", sim.warmup, "discarded leading views")->capture_default_str();
    simulate->add_option("--delay", sim.delay, "fixed:D or uniform:D:A")->capture_default_str();
    simulate->add_option("--reps", sim.reps, "replications")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "master seed")->capture_default_str();
    simulate->add_option("--trace", sim.trace, "dump the first replication's trace here");
    simulate->add_option("--out", sim.out, "CSV path (default stdout)");
    add_common(simulate, common);

    std::string strategies = "optimal,silent,none", cmp_metric = "rate";
    auto* compare = app.add_subcommand("compare", "optimal vs silent baseline vs no attack");
    compare->add_option("--protocol", protocol, "chs|2chs|fhs|streamlet")->required();
    compare->add_option("--strategies", strategies, "subset of optimal,silent,none")->capture_default_str();
    compare->add_option("--alpha-grid", grid, "start:step:end")->capture_default_str();
    compare->add_option("--metric", cmp_metric, "growth|rate|both")->capture_default_str();
    compare->add_option("--out", out, "CSV path (default stdout)");
    compare->add_option("--jobs", common.jobs, "worker threads");
    add_common(compare, common);

    std::string trace_path;
    auto* replay = app.add_subcommand("replay", "check a trace dump against the block-tree replay");
    replay->add_option("--protocol", protocol, "chs|2chs|fhs|streamlet")->required();
    replay->add_option("--trace", trace_path, "trace file")->required();
    replay->add_option("--lh-cap", common.lh_cap, "Streamlet pending-block cap")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*solve) return cmd_solve(protocol, alpha, metric, common, out);
        if (*sweep) return cmd_sweep(protocols, grid, sweep_metric, common, out);
        if (*simulate) return cmd_simulate(sim, common);
        if (*compare) return cmd_compare(protocol, strategies, grid, cmp_metric, common, out);
        if (*replay) return cmd_replay(protocol, trace_path, common);
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const SolverError& e) {
        spdlog::error("solver failure: {}", e.what());
        return kSolver;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kSolver;
    }
    return kUsage;
}
