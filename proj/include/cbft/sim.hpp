#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cbft/solver.hpp"

namespace cbft {

struct DelayModel {
    enum class Kind { Fixed, Uniform };
    Kind kind = Kind::Fixed;
    double nominal = 1.0;
    double amplitude = 0.0;

    static DelayModel fixed(double d) { return {Kind::Fixed, d, 0.0}; }
    static DelayModel uniform(double d, double a) { return {Kind::Uniform, d, a}; }
};

// Throws std::invalid_argument when samples could reach zero or the bound k * nominal.
void check_delay(const DelayModel& d, double k);

struct SimConfig {
    DelayModel delay;
    std::int64_t n_views = 100000;
    std::int64_t warmup_views = 100;
    std::uint64_t seed = 42;
    int replications = 6;
    bool record_trace = true;
};

// alpha = f / n, requiring n >= 3f + 1.
double alpha_from_nodes(int n, int f);

struct ViewRecord {
    std::int64_t view = 0;
    State state;
    Action action = Action::Adopt;
    Leader next_leader = Leader::H;
    int n_actual = 0;
    int n_bound = 0;
    // Sampled delta legs first, then the fixed bound legs.
    std::array<double, 3> legs{};
    int b_h = 0;
    int c = 0;
    double t = 0.0;
};

struct SimSample {
    std::int64_t b_h = 0;
    std::int64_t c = 0;
    double total_time = 0.0;
    std::int64_t views = 0;
    std::uint64_t seed = 0;
    double delta_nominal = 1.0;

    // Per nominal delta.
    double growth() const { return b_h / (total_time / delta_nominal); }
    double rate() const { return c / (total_time / delta_nominal); }
    double of(Metric m) const { return m == Metric::Growth ? growth() : rate(); }
};

struct SimRun {
    SimSample sample;
    std::vector<ViewRecord> trace;
};

// Counts in the sample cover views at or after warmup_views; the trace covers all views.
SimRun simulate_views(const MdpInstance& mdp, const Policy& policy, const SimConfig& cfg);

std::uint64_t splitmix64(std::uint64_t x);
// Seed of replication i under a master seed.
std::uint64_t replication_seed(std::uint64_t master, int i);

struct MetricStats {
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

MetricStats summarize(const std::vector<double>& xs);

struct ReplicateResult {
    std::vector<SimSample> samples;
    MetricStats growth;
    MetricStats rate;
    // Replay discrepancies per replication; empty unless verification was requested.
    std::vector<std::size_t> replay_discrepancies;
    // Trace of replication 0 when requested.
    std::vector<ViewRecord> first_trace;

    const MetricStats& of(Metric m) const { return m == Metric::Growth ? growth : rate; }
};

struct ReplicateOptions {
    bool verify_replay = false;
    bool keep_first_trace = false;
    bool parallel = true;
};

ReplicateResult replicate(const MdpInstance& mdp, const Policy& policy, const SimConfig& cfg,
                          const ReplicateOptions& opt = {});

void write_trace(std::ostream& os, const std::vector<ViewRecord>& trace);
std::vector<ViewRecord> read_trace(std::istream& is);

} // namespace cbft
