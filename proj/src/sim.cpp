#include "cbft/sim.hpp"

#include <cmath>
#include <future>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cbft/replay.hpp"
#include "cbft/strategy.hpp"

namespace cbft {

void check_delay(const DelayModel& d, double k)
{
    if (!(d.nominal > 0.0) || !std::isfinite(d.nominal)) throw std::invalid_argument("delay must be positive");
    if (d.kind == DelayModel::Kind::Uniform) {
        if (!(d.amplitude >= 0.0 && d.amplitude < d.nominal))
            throw std::invalid_argument("amplitude must lie in [0, delay)");
        if (!(d.nominal + d.amplitude < k * d.nominal))
            throw std::invalid_argument("delay samples must stay below the bound k * delay");
    } else if (!(d.nominal < k * d.nominal)) {
        throw std::invalid_argument("delay must stay below the bound k * delay");
    }
}

double alpha_from_nodes(int n, int f)
{
    if (n <= 0 || f < 0) throw std::invalid_argument("node counts must be positive");
    if (n < 3 * f + 1) throw std::invalid_argument("need n >= 3f + 1");
    return static_cast<double>(f) / n;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t master, int i)
{
    return splitmix64(master + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1));
}

namespace {

// Leader draws and delay draws use separate streams, so every delay model sees
// the same leader schedule for a given seed.
constexpr std::uint64_t kLeaderStream = 0x4c65616465720000ULL;
constexpr std::uint64_t kDelayStream = 0x44656c6179000000ULL;

double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

} // namespace

SimRun simulate_views(const MdpInstance& mdp, const Policy& policy, const SimConfig& cfg)
{
    check_policy(mdp, policy);
    check_delay(cfg.delay, mdp.k);
    if (cfg.warmup_views < 0 || cfg.n_views <= cfg.warmup_views)
        throw std::invalid_argument("n_views must exceed warmup_views");

    std::mt19937_64 leaders(splitmix64(cfg.seed ^ kLeaderStream));
    std::mt19937_64 delays(splitmix64(cfg.seed ^ kDelayStream));
    const double d = cfg.delay.nominal;
    const double bound = mdp.k * d;
    const bool uniform = cfg.delay.kind == DelayModel::Kind::Uniform;

    SimRun run;
    run.sample.seed = cfg.seed;
    run.sample.delta_nominal = d;
    if (cfg.record_trace) run.trace.reserve(static_cast<std::size_t>(cfg.n_views));

    int s = mdp.initial_state();
    for (std::int64_t v = 0; v < cfg.n_views; ++v) {
        const Action a = policy[s];
        const ActionEntry* e = mdp.find(s, a);
        const int j = unit(leaders) < mdp.alpha ? 0 : 1;
        const auto& o = e->outcomes[j];

        ViewRecord r;
        r.view = v;
        r.state = mdp.states[s];
        r.action = a;
        r.next_leader = o.next.leader;
        r.n_actual = o.reward.legs.n_actual;
        r.n_bound = o.reward.legs.n_bound;
        int leg = 0;
        for (int i = 0; i < r.n_actual; ++i)
            r.legs[leg++] = uniform ? d + cfg.delay.amplitude * (2.0 * unit(delays) - 1.0) : d;
        for (int i = 0; i < r.n_bound; ++i) r.legs[leg++] = bound;
        for (int i = 0; i < leg; ++i) r.t += r.legs[i];
        r.b_h = o.reward.b_h;
        r.c = o.reward.c;

        if (v >= cfg.warmup_views) {
            run.sample.b_h += r.b_h;
            run.sample.c += r.c;
            run.sample.total_time += r.t;
            ++run.sample.views;
        }
        if (cfg.record_trace) run.trace.push_back(r);
        s = e->targets[j];
    }
    return run;
}

MetricStats summarize(const std::vector<double>& xs)
{
    MetricStats st;
    const double n = static_cast<double>(xs.size());
    if (xs.empty()) return st;
    double sum = 0.0;
    for (double x : xs) sum += x;
    st.mean = sum / n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - st.mean) * (x - st.mean);
        st.sd = std::sqrt(ss / (n - 1.0));
        st.se = st.sd / std::sqrt(n);
    }
    constexpr double z = 1.959963984540054;
    st.ci_low = st.mean - z * st.se;
    st.ci_high = st.mean + z * st.se;
    return st;
}

ReplicateResult replicate(const MdpInstance& mdp, const Policy& policy, const SimConfig& cfg,
                          const ReplicateOptions& opt)
{
    if (cfg.replications < 2) throw std::invalid_argument("replications must be >= 2");
    check_policy(mdp, policy);

    struct Out {
        SimSample sample;
        std::size_t discrepancies = 0;
        std::vector<ViewRecord> trace;
    };
    auto one = [&](int i) {
        SimConfig c = cfg;
        c.seed = replication_seed(cfg.seed, i);
        c.record_trace = opt.verify_replay || (opt.keep_first_trace && i == 0);
        auto run = simulate_views(mdp, policy, c);
        Out out;
        out.sample = run.sample;
        if (opt.verify_replay) out.discrepancies = replay_verify(run.trace, mdp.protocol(), mdp.spec.lh_cap).total;
        if (opt.keep_first_trace && i == 0) out.trace = std::move(run.trace);
        return out;
    };

    std::vector<Out> outs;
    if (opt.parallel) {
        std::vector<std::future<Out>> fs;
        for (int i = 0; i < cfg.replications; ++i) fs.push_back(std::async(std::launch::async, one, i));
        for (auto& f : fs) outs.push_back(f.get());
    } else {
        for (int i = 0; i < cfg.replications; ++i) outs.push_back(one(i));
    }

    ReplicateResult res;
    std::vector<double> g, r;
    for (auto& o : outs) {
        res.samples.push_back(o.sample);
        g.push_back(o.sample.growth());
        r.push_back(o.sample.rate());
        if (opt.verify_replay) res.replay_discrepancies.push_back(o.discrepancies);
    }
    if (opt.keep_first_trace) res.first_trace = std::move(outs[0].trace);
    res.growth = summarize(g);
    res.rate = summarize(r);
    return res;
}

void write_trace(std::ostream& os, const std::vector<ViewRecord>& trace)
{
    os << "# view\tstate\taction\tnext_leader\tlegs\tb_h\tc\tt\n";
    for (const auto& r : trace) {
        os << r.view << '\t' << render_state(r.state) << '\t' << to_string(r.action) << '\t'
           << to_string(r.next_leader) << '\t';
        for (int i = 0; i < r.n_actual + r.n_bound; ++i) {
            if (i) os << ',';
            os << (i < r.n_actual ? "d:" : "D:") << format_double(r.legs[i]);
        }
        os << '\t' << r.b_h << '\t' << r.c << '\t' << format_double(r.t) << '\n';
    }
}

std::vector<ViewRecord> read_trace(std::istream& is)
{
    std::vector<ViewRecord> out;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& why) {
        throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string x; std::getline(ls, x, '\t');) f.push_back(x);
        if (f.size() != 8) fail("expected 8 fields");
        ViewRecord r;
        try {
            r.view = std::stoll(f[0]);
            r.b_h = std::stoi(f[5]);
            r.c = std::stoi(f[6]);
            r.t = parse_double(f[7]);
        } catch (const std::exception&) {
            fail("bad number");
        }
        auto st = parse_state(f[1]);
        auto a = parse_action(f[2]);
        auto nl = parse_leader(f[3]);
        if (!st || !a || !nl) fail("bad state, action or leader");
        r.state = *st;
        r.action = *a;
        r.next_leader = *nl;
        std::istringstream legs(f[4]);
        int i = 0;
        for (std::string x; std::getline(legs, x, ',');) {
            if (i >= 3 || x.size() < 3 || x[1] != ':') fail("bad leg list");
            if (x[0] == 'd') {
                if (r.n_bound) fail("delta leg after bound leg");
                ++r.n_actual;
            } else if (x[0] == 'D') {
                ++r.n_bound;
            } else {
                fail("bad leg kind");
            }
            r.legs[i++] = parse_double(x.substr(2));
        }
        out.push_back(r);
    }
    return out;
}

} // namespace cbft
