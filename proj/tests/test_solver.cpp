#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

#include "cbft/solver.hpp"
#include "cbft/strategy.hpp"

using namespace cbft;

namespace {

const std::vector<double> kGrid = {0.0, 0.03, 0.06, 0.09, 0.12, 0.15, 0.18, 0.21, 0.24, 0.27, 0.30, 0.33};
const std::vector<Protocol> kAll = {Protocol::CHS, Protocol::TCHS, Protocol::FHS, Protocol::STREAMLET};

ActionEntry entry(Action a, int t0, double p0, int t1, double p1, int b_h, double t)
{
    ActionEntry e;
    e.action = a;
    e.targets = {t0, t1};
    e.outcomes[0] = TransitionEntry{{}, p0, RewardVector{b_h, 0, {1, 1}, t}};
    e.outcomes[1] = TransitionEntry{{}, p1, RewardVector{b_h, 0, {1, 1}, t}};
    return e;
}

MdpInstance toy(std::size_t n)
{
    MdpInstance m;
    m.states.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.states[i] = State{{0, false}, 0, static_cast<int>(i), Leader::H};
    m.table.resize(n);
    return m;
}

// Damped power iteration from the initial state, kept apart from the library's linear solve.
PolicyValue power_iteration_value(const MdpInstance& mdp, const Policy& pol)
{
    const std::size_t n = mdp.size();
    std::vector<double> d(n, 0.0), nd(n);
    d[mdp.initial_state()] = 1.0;
    for (int it = 0; it < 2000000; ++it) {
        std::fill(nd.begin(), nd.end(), 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            if (d[s] == 0.0) continue;
            nd[s] += 0.5 * d[s];
            const auto* e = mdp.find(static_cast<int>(s), pol[s]);
            for (int j = 0; j < 2; ++j) nd[e->targets[j]] += 0.5 * d[s] * e->outcomes[j].prob;
        }
        double diff = 0.0;
        for (std::size_t s = 0; s < n; ++s) diff = std::max(diff, std::abs(nd[s] - d[s]));
        d.swap(nd);
        if (diff < 1e-15) break;
    }
    double b = 0, c = 0, t = 0;
    for (std::size_t s = 0; s < n; ++s) {
        const auto* e = mdp.find(static_cast<int>(s), pol[s]);
        for (const auto& o : e->outcomes) {
            b += d[s] * o.prob * o.reward.b_h;
            c += d[s] * o.prob * o.reward.c;
            t += d[s] * o.prob * o.reward.t;
        }
    }
    return {b / t, c / t};
}

// Gain of a policy under per-view reward r, from h(s) + g = r(s) + sum p h(s')
// with h(initial) = 0, by dense elimination. nullopt when singular.
struct GainBias {
    double g;
    std::vector<double> h;
};

template <class R>
std::optional<GainBias> gain_bias(const MdpInstance& mdp, const Policy& pol, R reward)
{
    const std::size_t n = mdp.size();
    const std::size_t ref = mdp.initial_state();
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t s = 0; s < n; ++s) {
        const auto* e = mdp.find(static_cast<int>(s), pol[s]);
        a[s][s] += 1.0;
        double r = 0.0;
        for (int j = 0; j < 2; ++j) {
            a[s][e->targets[j]] -= e->outcomes[j].prob;
            r += e->outcomes[j].prob * reward(e->outcomes[j].reward);
        }
        a[s][ref] = 1.0;  // column ref now carries g
        a[s][n] = r;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-12) return std::nullopt;
        std::swap(a[c], a[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0.0) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    GainBias gb{0.0, std::vector<double>(n)};
    for (std::size_t s = 0; s < n; ++s) gb.h[s] = a[s][n] / a[s][s];
    gb.g = gb.h[ref];
    gb.h[ref] = 0.0;
    return gb;
}

double numerator(const RewardVector& r, Metric m) { return m == Metric::Growth ? r.b_h : r.c; }

double ratio(const MdpInstance& mdp, const Policy& pol, Metric m)
{
    auto num = gain_bias(mdp, pol, [&](const RewardVector& r) { return numerator(r, m); });
    auto den = gain_bias(mdp, pol, [](const RewardVector& r) { return r.t; });
    if (!num || !den) throw std::runtime_error("oracle hit a multichain policy");
    return num->g / den->g;
}

// Dinkelbach iteration on rho with Howard policy iteration for the inner
// average-reward problem. Shares nothing with the library's value iteration.
double policy_iteration_minimum(const MdpInstance& mdp, Metric m)
{
    Policy pol = silent_baseline_policy(mdp);
    double rho = ratio(mdp, pol, m);
    for (int outer = 0; outer < 100; ++outer) {
        auto w = [&](const RewardVector& r) { return rho * r.t - numerator(r, m); };
        for (int inner = 0; inner < 1000; ++inner) {
            auto gb = gain_bias(mdp, pol, w);
            if (!gb) throw std::runtime_error("oracle hit a multichain policy");
            bool changed = false;
            for (std::size_t s = 0; s < mdp.size(); ++s) {
                auto q = [&](const ActionEntry& e) {
                    double v = 0.0;
                    for (int j = 0; j < 2; ++j)
                        v += e.outcomes[j].prob * (w(e.outcomes[j].reward) + gb->h[e.targets[j]]);
                    return v;
                };
                double cur = q(*mdp.find(static_cast<int>(s), pol[s]));
                for (const auto& e : mdp.table[s])
                    if (q(e) > cur + 1e-10) {
                        cur = q(e);
                        pol.actions[s] = e.action;
                        changed = true;
                    }
            }
            if (!changed) break;
        }
        const double next = ratio(mdp, pol, m);
        if (next > rho - 1e-13) break;
        rho = next;
    }
    return rho;
}

Policy random_policy(const MdpInstance& mdp, std::mt19937& g)
{
    Policy p;
    for (std::size_t s = 0; s < mdp.size(); ++s) {
        const auto& row = mdp.table[s];
        p.actions.push_back(row[std::uniform_int_distribution<std::size_t>(0, row.size() - 1)(g)].action);
    }
    return p;
}

} // namespace

TEST(AverageRewardVi, SingleStateToy)
{
    auto m = toy(1);
    m.table[0].push_back(entry(Action::Adopt, 0, 0.5, 0, 0.5, 0, 1.0));
    m.table[0].push_back(entry(Action::Wait, 0, 0.5, 0, 0.5, 0, 2.0));
    auto r = average_reward_vi(m, Metric::Growth, 0.0);
    EXPECT_NEAR(r.gain, 2.0, 1e-9);
    EXPECT_EQ(r.greedy[0], Action::Wait);
}

TEST(AverageRewardVi, HonestClosedForms)
{
    auto m = build_mdp(Protocol::CHS, 0.0, 5);
    EXPECT_NEAR(average_reward_vi(m, Metric::Growth, 2.0 / 3.0).gain, 0.0, 1e-8);
    EXPECT_NEAR(average_reward_vi(m, Metric::Growth, 0.5).gain, 0.5, 1e-8);
}

TEST(AverageRewardVi, GainNonIncreasingInRho)
{
    for (auto p : kAll)
        for (auto metric : {Metric::Growth, Metric::Rate})
            for (double a : {0.0, 0.15, 0.3}) {
                auto m = build_mdp(p, a, 5);
                double prev = std::numeric_limits<double>::infinity();
                for (int i = 0; i <= 10; ++i) {
                    const double g = average_reward_vi(m, metric, i / 10.0).gain;
                    EXPECT_LE(g, prev + 1e-9) << to_string(p) << ' ' << a << ' ' << i;
                    prev = g;
                }
            }
}

TEST(AverageRewardVi, ReportsNonConvergence)
{
    auto m = build_mdp(Protocol::CHS, 0.2, 5);
    ViOptions opt;
    opt.max_iter = 3;
    try {
        average_reward_vi(m, Metric::Growth, 0.5, opt);
        FAIL() << "expected non-convergence";
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("span"), std::string::npos);
    }
}

TEST(AverageRewardVi, DetectsMultichainGain)
{
    auto m = toy(2);
    m.table[0].push_back(entry(Action::Adopt, 0, 0.5, 0, 0.5, 0, 1.0));
    m.table[1].push_back(entry(Action::Adopt, 1, 0.5, 1, 0.5, 0, 2.0));
    try {
        average_reward_vi(m, Metric::Growth, 0.0);
        FAIL() << "expected multichain error";
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("multichain"), std::string::npos);
    }
}

TEST(SolveMinMetric, KnownEndpoints)
{
    EXPECT_NEAR(solve_min_metric(build_mdp(Protocol::CHS, 0.0, 5), Metric::Growth).metric_value, 1.0 / 3.0, 1e-4);
    EXPECT_NEAR(solve_min_metric(build_mdp(Protocol::FHS, 0.30, 5), Metric::Growth).metric_value, 0.073, 0.005);
    EXPECT_NEAR(solve_min_metric(build_mdp(Protocol::TCHS, 0.33, 5), Metric::Rate).metric_value, 0.030, 0.005);
}

TEST(SolveMinMetric, GridProperties)
{
    const double eps = 1e-4;
    for (auto p : kAll)
        for (auto metric : {Metric::Growth, Metric::Rate})
            for (double a : kGrid) {
                auto m = build_mdp(p, a, 5);
                auto r = solve_min_metric(m, metric, eps);
                const auto label = std::string(to_string(p)) + " " + std::to_string(a) + " " +
                                   std::string(to_string(metric));
                EXPECT_LE(r.outer_iterations, 15) << label;
                EXPECT_GE(r.metric_value, 0.0);
                EXPECT_LE(r.metric_value, 1.0);
                EXPECT_LE(std::abs(r.gain_at_rho_bar), eps * 3 * m.k) << label;
                const auto v = evaluate_policy(m, r.policy).of(metric);
                EXPECT_NEAR(v, r.metric_value, 2 * eps) << label;
                EXPECT_LE(r.metric_value, evaluate_policy(m, silent_baseline_policy(m)).of(metric) + eps) << label;
                EXPECT_LE(r.metric_value, evaluate_policy(m, adopt_policy(m)).of(metric) + eps) << label;
                const auto pi = stationary_distribution(m, r.policy, m.initial_state());
                double sum = 0.0;
                for (double x : pi) sum += x;
                EXPECT_NEAR(sum, 1.0, 1e-12) << label;
            }
}

TEST(SolveMinMetric, MatchesPolicyIterationOracle)
{
    for (auto p : kAll)
        for (auto metric : {Metric::Growth, Metric::Rate})
            for (double a : {0.03, 0.15, 0.24, 0.3, 0.33}) {
                auto m = build_mdp(p, a, 5);
                auto r = solve_min_metric(m, metric);
                EXPECT_NEAR(r.metric_value, policy_iteration_minimum(m, metric), 1e-4)
                    << to_string(p) << ' ' << a << ' ' << to_string(metric);
            }
}

TEST(SolveMinMetric, Deterministic)
{
    auto m = build_mdp(Protocol::CHS, 0.21, 5);
    auto a = solve_min_metric(m, Metric::Rate);
    auto b = solve_min_metric(m, Metric::Rate);
    EXPECT_EQ(a.policy, b.policy);
    EXPECT_EQ(a.rho_bar, b.rho_bar);
}

TEST(SolveMinMetric, BracketChecks)
{
    EXPECT_TRUE(solve_min_metric(build_mdp(Protocol::CHS, 0.2, 5), Metric::Growth).warnings.empty());
    // The adversary can stop all Streamlet chain growth, so v*(1) = 0.
    auto r = solve_min_metric(build_mdp(Protocol::STREAMLET, 0.2, 5), Metric::Growth);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("v*(1)"), std::string::npos);
}

TEST(StationaryDistribution, SwapChain)
{
    auto m = toy(2);
    m.table[0].push_back(entry(Action::Adopt, 1, 0.5, 1, 0.5, 0, 1.0));
    m.table[1].push_back(entry(Action::Adopt, 0, 0.5, 0, 0.5, 0, 1.0));
    auto pi = stationary_distribution(m, Policy{{Action::Adopt, Action::Adopt}}, 0);
    EXPECT_NEAR(pi[0], 0.5, 1e-12);
    EXPECT_NEAR(pi[1], 0.5, 1e-12);
}

TEST(StationaryDistribution, RejectsTwoRecurrentClasses)
{
    auto m = toy(3);
    m.table[0].push_back(entry(Action::Adopt, 1, 0.5, 2, 0.5, 0, 1.0));
    m.table[1].push_back(entry(Action::Adopt, 1, 0.5, 1, 0.5, 0, 1.0));
    m.table[2].push_back(entry(Action::Adopt, 2, 0.5, 2, 0.5, 0, 1.0));
    EXPECT_THROW(stationary_distribution(m, Policy{std::vector<Action>(3, Action::Adopt)}, 0), SolverError);
}

TEST(StationaryDistribution, HonestChainAbsorbs)
{
    auto m = build_mdp(Protocol::CHS, 0.0, 5);
    auto wait = Policy{std::vector<Action>(m.size(), Action::Wait)};
    auto pi = stationary_distribution(m, wait, m.initial_state());
    EXPECT_NEAR(pi[m.index_of(State{{3, false}, 0, 2, Leader::H})], 1.0, 1e-12);
    pi = stationary_distribution(m, adopt_policy(m), m.initial_state());
    EXPECT_NEAR(pi[m.index_of(State{{3, false}, 0, 1, Leader::H})], 1.0, 1e-12);
}

TEST(StationaryDistribution, RejectsIllegalPolicy)
{
    auto m = build_mdp(Protocol::CHS, 0.1, 5);
    auto p = adopt_policy(m);
    p.actions[0] = Action::Release;
    EXPECT_THROW(stationary_distribution(m, p, 0), SolverError);
    EXPECT_THROW(stationary_distribution(m, Policy{}, 0), SolverError);
}

TEST(EvaluatePolicy, HonestReferences)
{
    for (auto [p, v] : {std::pair{Protocol::CHS, 1.0 / 3.0}, std::pair{Protocol::TCHS, 1.0 / 7.0},
                        std::pair{Protocol::FHS, 0.5}}) {
        auto m = build_mdp(p, 0.0, 5);
        for (Action a : {Action::Adopt, Action::Wait, Action::Silent}) {
            auto r = evaluate_policy(m, Policy{std::vector<Action>(m.size(), a)});
            EXPECT_NEAR(r.growth, v, 1e-12) << to_string(p);
            EXPECT_NEAR(r.rate, v, 1e-12) << to_string(p);
        }
    }
    auto m = build_mdp(Protocol::STREAMLET, 0.0, 5);
    auto r = evaluate_policy(m, adopt_policy(m));
    EXPECT_NEAR(r.growth, 0.1, 1e-12);
    EXPECT_NEAR(r.rate, 0.1, 1e-12);
}

TEST(EvaluatePolicy, AgreesWithPowerIteration)
{
    std::mt19937 g(7);
    for (auto p : kAll)
        for (double a : {0.0, 0.09, 0.24, 0.33}) {
            auto m = build_mdp(p, a, 5);
            std::vector<Policy> pols = {silent_baseline_policy(m), adopt_policy(m),
                                        solve_min_metric(m, Metric::Growth).policy};
            for (int i = 0; i < 3; ++i) pols.push_back(random_policy(m, g));
            for (const auto& pol : pols) {
                PolicyValue x;
                try {
                    x = evaluate_policy(m, pol);
                } catch (const SolverError&) {
                    continue;
                }
                auto y = power_iteration_value(m, pol);
                EXPECT_NEAR(x.growth, y.growth, 1e-9) << to_string(p) << ' ' << a;
                EXPECT_NEAR(x.rate, y.rate, 1e-9) << to_string(p) << ' ' << a;
            }
        }
}

TEST(EvaluatePolicy, SolvedPolicyAgreesWithSolve)
{
    auto m = build_mdp(Protocol::CHS, 0.30, 5);
    auto r = solve_min_metric(m, Metric::Growth);
    EXPECT_NEAR(evaluate_policy(m, r.policy).growth, r.metric_value, 1e-4);
}

TEST(DeviationCertificate, SolvedPolicyPasses)
{
    auto m = build_mdp(Protocol::CHS, 0.15, 5);
    auto r = solve_min_metric(m, Metric::Growth);
    auto c = deviation_certificate(m, r.policy, Metric::Growth, 1e-3);
    EXPECT_TRUE(c.passed);
    EXPECT_GT(c.evaluated, 0);
}

TEST(DeviationCertificate, SilentBaselineFails)
{
    auto m = build_mdp(Protocol::CHS, 0.15, 5);
    auto c = deviation_certificate(m, silent_baseline_policy(m), Metric::Growth, 1e-3);
    EXPECT_FALSE(c.passed);
    EXPECT_FALSE(c.violations.empty());
    for (const auto& v : c.violations) EXPECT_LT(v.metric, c.base_metric - 1e-3);
}

TEST(DeviationCertificate, ZeroAlphaPassesForAnyPolicy)
{
    std::mt19937 g(3);
    for (auto p : {Protocol::CHS, Protocol::TCHS, Protocol::FHS}) {
        auto m = build_mdp(p, 0.0, 5);
        for (int i = 0; i < 3; ++i)
            EXPECT_TRUE(deviation_certificate(m, random_policy(m, g), Metric::Rate, 1e-3).passed);
    }
}
