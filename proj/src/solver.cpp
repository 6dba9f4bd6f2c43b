#include "cbft/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cbft {

std::string_view to_string(Metric m) { return m == Metric::Growth ? "growth" : "rate"; }

std::optional<Metric> parse_metric(std::string_view s)
{
    if (s == "growth") return Metric::Growth;
    if (s == "rate") return Metric::Rate;
    return std::nullopt;
}

void check_policy(const MdpInstance& mdp, const Policy& policy)
{
    if (policy.size() != mdp.size())
        throw SolverError("policy covers " + std::to_string(policy.size()) + " states, instance has " +
                          std::to_string(mdp.size()));
    for (std::size_t s = 0; s < mdp.size(); ++s)
        if (!mdp.find(static_cast<int>(s), policy[s]))
            throw SolverError("policy assigns illegal " + std::string(to_string(policy[s])) + " in " +
                              render_state(mdp.states[s]));
}

namespace {

double numerator(const RewardVector& r, Metric m) { return m == Metric::Growth ? r.b_h : r.c; }

double q_value(const ActionEntry& e, Metric m, double rho, const std::vector<double>& h)
{
    double q = 0.0;
    for (int j = 0; j < 2; ++j) {
        const auto& o = e.outcomes[j];
        q += o.prob * ((1.0 - rho) * o.reward.t - numerator(o.reward, m) + h[e.targets[j]]);
    }
    return q;
}

// Successor sets of the chain induced by a policy, zero-probability edges dropped.
std::vector<std::vector<int>> successors(const MdpInstance& mdp, const Policy& policy)
{
    std::vector<std::vector<int>> out(mdp.size());
    for (std::size_t s = 0; s < mdp.size(); ++s) {
        const auto* e = mdp.find(static_cast<int>(s), policy[s]);
        for (int j = 0; j < 2; ++j)
            if (e->outcomes[j].prob > 0.0) out[s].push_back(e->targets[j]);
    }
    return out;
}

std::vector<char> reach_from(const std::vector<std::vector<int>>& succ, int start)
{
    std::vector<char> seen(succ.size(), 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int t : succ[s])
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
    }
    return seen;
}

} // namespace

ViResult average_reward_vi(const MdpInstance& mdp, Metric metric, double rho, const ViOptions& opt,
                           const std::vector<double>* warm_start)
{
    if (!(rho >= 0.0 && rho <= 1.0)) throw SolverError("rho outside [0,1]");
    if (!(opt.tol > 0.0)) throw SolverError("tolerance must be positive");
    const std::size_t n = mdp.size();
    if (n == 0) throw SolverError("empty instance");

    std::vector<double> h(n, 0.0), th(n);
    if (warm_start && warm_start->size() == n) h = *warm_start;

    ViResult res;
    double last_check = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iter; ++it) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& e : mdp.table[s]) best = std::max(best, q_value(e, metric, rho, h));
            th[s] = best;
            const double d = best - h[s];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        const double span = hi - lo;
        if (span < opt.tol) {
            res.gain = 0.5 * (hi + lo);
            res.iterations = it;
            res.span = span;
            res.greedy.actions.resize(n);
            for (std::size_t s = 0; s < n; ++s) {
                const double best = th[s];
                const double slack = 1e-9 * (1.0 + std::abs(best));
                for (const auto& e : mdp.table[s])
                    if (q_value(e, metric, rho, h) >= best - slack) {
                        res.greedy.actions[s] = e.action;
                        break;
                    }
            }
            res.bias = h;
            return res;
        }
        // A span that stops shrinking means the optimal gain differs between states.
        if (it % 5000 == 0) {
            if (std::abs(last_check - span) <= 1e-12 * std::max(1.0, span))
                throw SolverError("multichain structure: gain not constant across recurrent classes (span " +
                                  std::to_string(span) + ")");
            last_check = span;
        }
        const double ref = h[0] + opt.tau * (th[0] - h[0]);
        for (std::size_t s = 0; s < n; ++s) h[s] = h[s] + opt.tau * (th[s] - h[s]) - ref;
        res.span = span;
    }
    std::ostringstream os;
    os << "relative value iteration did not converge in " << opt.max_iter << " iterations, span "
       << res.span;
    throw SolverError(os.str());
}

SolveResult solve_min_metric(const MdpInstance& mdp, Metric metric, double eps, const ViOptions& opt)
{
    if (!(eps > 0.0)) throw SolverError("eps must be positive");
    SolveResult r;
    r.metric = metric;

    auto v0 = average_reward_vi(mdp, metric, 0.0, opt);
    if (!(v0.gain > 0.0)) r.warnings.push_back("v*(0) = " + std::to_string(v0.gain) + " is not positive");
    auto v1 = average_reward_vi(mdp, metric, 1.0, opt, &v0.bias);
    if (!(v1.gain < 0.0)) r.warnings.push_back("v*(1) = " + std::to_string(v1.gain) + " is not negative");

    double lo = 0.0, hi = 1.0;
    std::vector<double> warm = v0.bias;
    while (hi - lo >= eps) {
        const double mid = 0.5 * (lo + hi);
        auto v = average_reward_vi(mdp, metric, mid, opt, &warm);
        warm = v.bias;
        ++r.outer_iterations;
        if (v.gain > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    r.rho_bar = 0.5 * (lo + hi);
    r.metric_value = 1.0 - r.rho_bar;
    auto fin = average_reward_vi(mdp, metric, r.rho_bar, opt, &warm);
    r.policy = fin.greedy;
    r.inner_residual = fin.span;
    r.gain_at_rho_bar = fin.gain;
    return r;
}

std::vector<double> stationary_distribution(const MdpInstance& mdp, const Policy& policy, int start)
{
    check_policy(mdp, policy);
    const int n = static_cast<int>(mdp.size());
    if (start < 0 || start >= n) throw SolverError("start state out of range");

    const auto succ = successors(mdp, policy);
    const auto reach = reach_from(succ, start);

    // A reachable state is recurrent iff it can return from everywhere it can go.
    std::vector<std::vector<char>> closure(n);
    for (int s = 0; s < n; ++s)
        if (reach[s]) closure[s] = reach_from(succ, s);
    std::vector<int> cls(n, -1);
    int classes = 0;
    for (int s = 0; s < n; ++s) {
        if (!reach[s] || cls[s] >= 0) continue;
        bool recurrent = true;
        for (int t = 0; t < n && recurrent; ++t)
            if (closure[s][t] && !closure[t][s]) recurrent = false;
        if (!recurrent) continue;
        for (int t = 0; t < n; ++t)
            if (closure[s][t]) cls[t] = classes;
        ++classes;
    }
    if (classes != 1)
        throw SolverError(std::to_string(classes) + " recurrent classes reachable from " +
                          render_state(mdp.states[start]));

    std::vector<int> members;
    std::vector<int> local(n, -1);
    for (int s = 0; s < n; ++s)
        if (cls[s] == 0) {
            local[s] = static_cast<int>(members.size());
            members.push_back(s);
        }
    const int m = static_cast<int>(members.size());

    // pi (P - I) = 0 with the last balance equation replaced by sum(pi) = 1.
    Eigen::MatrixXd a = -Eigen::MatrixXd::Identity(m, m);
    for (int i = 0; i < m; ++i) {
        const auto* e = mdp.find(members[i], policy[members[i]]);
        for (int j = 0; j < 2; ++j)
            if (e->outcomes[j].prob > 0.0) a(local[e->targets[j]], i) += e->outcomes[j].prob;
    }
    a.row(m - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b(m - 1) = 1.0;
    Eigen::VectorXd x = a.fullPivLu().solve(b);

    std::vector<double> pi(n, 0.0);
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        pi[members[i]] = std::max(0.0, x(i));
        total += pi[members[i]];
    }
    for (double& p : pi) p /= total;
    return pi;
}

PolicyValue evaluate_policy(const MdpInstance& mdp, const Policy& policy)
{
    const auto pi = stationary_distribution(mdp, policy, mdp.initial_state());
    double eb = 0.0, ec = 0.0, et = 0.0;
    for (std::size_t s = 0; s < mdp.size(); ++s) {
        if (pi[s] == 0.0) continue;
        const auto* e = mdp.find(static_cast<int>(s), policy[s]);
        for (const auto& o : e->outcomes) {
            eb += pi[s] * o.prob * o.reward.b_h;
            ec += pi[s] * o.prob * o.reward.c;
            et += pi[s] * o.prob * o.reward.t;
        }
    }
    return {eb / et, ec / et};
}

Certificate deviation_certificate(const MdpInstance& mdp, const Policy& policy, Metric metric, double tol)
{
    Certificate cert;
    cert.base_metric = evaluate_policy(mdp, policy).of(metric);
    // Deviating in a state the chain never visits leaves the metric unchanged.
    const auto reach = reach_from(successors(mdp, policy), mdp.initial_state());
    for (std::size_t s = 0; s < mdp.size(); ++s) {
        if (!reach[s]) continue;
        for (const auto& e : mdp.table[s]) {
            if (e.action == policy[s]) continue;
            Policy alt = policy;
            alt.actions[s] = e.action;
            ++cert.evaluated;
            double v;
            try {
                v = evaluate_policy(mdp, alt).of(metric);
            } catch (const SolverError&) {
                ++cert.skipped;
                continue;
            }
            if (v < cert.base_metric - tol) cert.violations.push_back({static_cast<int>(s), e.action, v});
        }
    }
    cert.passed = cert.violations.empty();
    return cert;
}

} // namespace cbft
