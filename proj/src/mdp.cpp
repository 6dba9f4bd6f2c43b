#include "cbft/mdp.hpp"

#include <cmath>
#include <sstream>

namespace cbft {

int state_rank(const ProtocolSpec& spec, const State& s)
{
    if (!valid_state(spec, s)) return -1;
    const int cs = s.cs.primed ? spec.consec_cap + 1 : s.cs.value;
    const int leader = s.leader == Leader::H ? 0 : 1;
    return ((cs * 2 + s.la) * (spec.lh_cap + 1) + s.lh) * 2 + leader;
}

std::vector<State> enumerate_states(const ProtocolSpec& spec)
{
    std::vector<ConsecState> cs;
    for (int v = 0; v <= spec.consec_cap; ++v) cs.push_back({v, false});
    if (spec.has_primed) cs.push_back({spec.consec_cap, true});

    std::vector<State> out;
    for (auto c : cs)
        for (int la = 0; la <= 1; ++la)
            for (int lh = 0; lh <= spec.lh_cap; ++lh)
                for (Leader l : {Leader::H, Leader::A}) out.push_back(State{c, la, lh, l});
    return out;
}

int MdpInstance::index_of(const State& s) const
{
    const int r = state_rank(spec, s);
    if (r < 0 || r >= static_cast<int>(states.size()) || !(states[r] == s)) return -1;
    return r;
}

int MdpInstance::initial_state() const { return index_of(State{{0, false}, 0, 0, Leader::H}); }

const ActionEntry* MdpInstance::find(int state, Action a) const
{
    if (state < 0 || state >= static_cast<int>(table.size())) return nullptr;
    for (const auto& e : table[state])
        if (e.action == a) return &e;
    return nullptr;
}

MdpInstance build_mdp(Protocol p, double alpha, double k, int streamlet_lh_cap)
{
    if (!(alpha >= 0.0 && alpha < 1.0 / 3.0))
        throw ModelError("alpha must lie in [0, 1/3), got " + std::to_string(alpha));
    if (!(k > 1.0) || !std::isfinite(k))
        throw ModelError("k must be a finite ratio > 1, got " + std::to_string(k));

    MdpInstance m;
    m.spec = spec_of(p, streamlet_lh_cap);
    m.alpha = alpha;
    m.k = k;
    m.states = enumerate_states(m.spec);
    m.table.resize(m.states.size());
    for (std::size_t i = 0; i < m.states.size(); ++i) {
        const State& s = m.states[i];
        for (Action a : legal_actions(m.spec, s)) {
            ActionEntry e;
            e.action = a;
            e.outcomes = transition(m.spec, s, a, alpha, k);
            for (int j = 0; j < 2; ++j) e.targets[j] = m.index_of(e.outcomes[j].next);
            m.table[i].push_back(e);
        }
    }
    return m;
}

std::string ValidationReport::describe(const MdpInstance& mdp) const
{
    std::ostringstream os;
    for (const auto& v : violations) {
        if (v.state >= 0 && v.state < static_cast<int>(mdp.states.size()))
            os << render_state(mdp.states[v.state]);
        else
            os << "state#" << v.state;
        if (v.action) os << ' ' << to_string(*v.action);
        os << ": " << v.what << '\n';
    }
    return os.str();
}

ValidationReport validate_mdp(const MdpInstance& mdp)
{
    ValidationReport rep;
    auto flag = [&](int s, std::optional<Action> a, std::string what) {
        rep.violations.push_back({s, a, std::move(what)});
    };
    const int n = static_cast<int>(mdp.states.size());
    if (mdp.table.size() != mdp.states.size()) flag(-1, std::nullopt, "table size differs from state count");

    for (int i = 0; i < n; ++i) {
        const State& s = mdp.states[i];
        if (!valid_state(mdp.spec, s)) flag(i, std::nullopt, "state violates protocol invariants");
        if (state_rank(mdp.spec, s) != i) flag(i, std::nullopt, "state out of lexicographic order");
        if (i >= static_cast<int>(mdp.table.size())) continue;
        if (mdp.table[i].empty()) flag(i, std::nullopt, "no legal action");

        for (const auto& e : mdp.table[i]) {
            const Action a = e.action;
            if (!is_legal(mdp.spec, s, a)) flag(i, a, "illegal action");
            double sum = 0.0;
            for (int j = 0; j < 2; ++j) {
                const auto& o = e.outcomes[j];
                const auto& r = o.reward;
                sum += o.prob;
                if (!(o.prob >= 0.0 && o.prob <= 1.0)) flag(i, a, "probability outside [0,1]");
                if (e.targets[j] < 0 || e.targets[j] >= n)
                    flag(i, a, "transition target index out of range");
                else if (!(mdp.states[e.targets[j]] == o.next))
                    flag(i, a, "transition target does not match next state");
                if (r.b_h < 0) flag(i, a, "b_h negative");
                if (r.b_h > s.lh + 1) flag(i, a, "b_h exceeds pre-state l_h + 1");
                if (r.c < 0) flag(i, a, "c negative");
                if (r.c > 2) flag(i, a, "c exceeds bound c <= 2");
                if (r.c == 2 && !(mdp.spec.id == Protocol::STREAMLET && s.leader == Leader::H &&
                                  a == Action::Release))
                    flag(i, a, "c = 2 outside Streamlet honest-leader Release");
                const int legs = r.legs.n_actual + r.legs.n_bound;
                if (r.legs.n_actual < 0 || r.legs.n_bound < 0 || legs < 2 || legs > 3)
                    flag(i, a, "leg profile outside 2..3 legs");
                if (!(r.t > 0.0)) flag(i, a, "non-positive view time");
                if (std::abs(r.t - r.legs.time(mdp.k)) > 1e-12)
                    flag(i, a, "view time disagrees with leg profile");
            }
            if (std::abs(sum - 1.0) > 1e-12) flag(i, a, "probabilities sum to " + std::to_string(sum));
        }
    }
    return rep;
}

} // namespace cbft
