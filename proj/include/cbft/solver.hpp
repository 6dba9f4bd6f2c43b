#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cbft/mdp.hpp"

namespace cbft {

enum class Metric { Growth, Rate };

std::string_view to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view s);

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Policy {
    std::vector<Action> actions;

    Action operator[](std::size_t s) const { return actions[s]; }
    std::size_t size() const { return actions.size(); }
    friend bool operator==(const Policy&, const Policy&) = default;
};

// Throws SolverError unless the policy is total and legal for the instance.
void check_policy(const MdpInstance& mdp, const Policy& policy);

struct ViOptions {
    double tol = 1e-9;
    int max_iter = 100000;
    // Aperiodicity transform weight: h <- (1 - tau) h + tau T(h).
    double tau = 0.5;
};

struct ViResult {
    double gain = 0.0;
    std::vector<double> bias;
    Policy greedy;
    int iterations = 0;
    double span = 0.0;
};

// Maximizes the long-run average of (1 - rho) T - numerator per view.
ViResult average_reward_vi(const MdpInstance& mdp, Metric metric, double rho,
                           const ViOptions& opt = {}, const std::vector<double>* warm_start = nullptr);

struct SolveResult {
    Metric metric = Metric::Growth;
    double rho_bar = 0.0;
    double metric_value = 0.0;
    Policy policy;
    int outer_iterations = 0;
    double inner_residual = 0.0;
    double gain_at_rho_bar = 0.0;
    // Bracket checks v*(0) > 0 and v*(1) < 0 that did not hold.
    std::vector<std::string> warnings;
};

SolveResult solve_min_metric(const MdpInstance& mdp, Metric metric, double eps = 1e-4,
                             const ViOptions& opt = {});

// Stationary distribution of the recurrent class reachable from start.
std::vector<double> stationary_distribution(const MdpInstance& mdp, const Policy& policy, int start);

struct PolicyValue {
    double growth = 0.0;
    double rate = 0.0;

    double of(Metric m) const { return m == Metric::Growth ? growth : rate; }
};

PolicyValue evaluate_policy(const MdpInstance& mdp, const Policy& policy);

struct Deviation {
    int state = -1;
    Action action = Action::Adopt;
    double metric = 0.0;
};

struct Certificate {
    bool passed = true;
    double base_metric = 0.0;
    int evaluated = 0;
    // Deviations whose induced chain was not unichain from the initial state.
    int skipped = 0;
    std::vector<Deviation> violations;
};

Certificate deviation_certificate(const MdpInstance& mdp, const Policy& policy, Metric metric,
                                  double tol);

} // namespace cbft
