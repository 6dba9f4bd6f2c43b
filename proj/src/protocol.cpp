#include "cbft/protocol.hpp"

#include <algorithm>
#include <string>

namespace cbft {

namespace {

ConsecState plain(int v) { return ConsecState{v, false}; }

// cS arithmetic for the HotStuff family. A primed run counts as broken, so
// extending it starts over.
struct ConsecOps {
    int cap;

    bool top(ConsecState c) const { return c.primed || c.value == cap; }
    ConsecState inc1(ConsecState c) const
    {
        return c.primed ? plain(1) : plain(std::min(c.value + 1, cap));
    }
    ConsecState inc2(ConsecState c) const
    {
        return c.primed ? plain(2) : plain(std::min(c.value + 2, cap));
    }
    // The "0/3'" entries of the tables.
    ConsecState reset(ConsecState c) const
    {
        return top(c) ? ConsecState{cap, true} : plain(0);
    }
};

Step apply_hotstuff(const ProtocolSpec& spec, const State& s, Action a)
{
    const ConsecOps ops{spec.consec_cap};
    const int cap = spec.lh_cap;
    const bool top = ops.top(s.cs);
    const int lh = s.lh;
    Step r;

    if (s.leader == Leader::H) {
        switch (a) {
        case Action::Adopt:
            r.cs = s.la == 0 ? ops.inc1(s.cs) : plain(1);
            r.la = 0;
            r.lh = 1;
            r.b_h = lh;
            r.c = top;
            return r;
        case Action::Wait:
        case Action::Silent:
            r.cs = s.la == 0 ? ops.inc1(s.cs) : plain(1);
            r.la = 0;
            r.lh = std::min(lh + 1, cap);
            r.b_h = lh == cap;
            r.c = top;
            return r;
        case Action::Release:
            r.la = 0;
            r.lh = 1;
            r.b_h = 0;
            if (spec.id == Protocol::CHS && lh == 0) {
                r.cs = ops.inc2(s.cs);
                r.c = top;
            } else {
                r.cs = plain(2);
                r.c = top && lh == 0;
            }
            return r;
        default:
            break;
        }
    } else {
        switch (a) {
        case Action::Adopt:
            r.cs = s.la == 0 ? s.cs : ops.reset(s.cs);
            r.la = 1;
            r.lh = 0;
            r.b_h = lh;
            return r;
        case Action::Wait:
            if (s.la == 0) {
                r.cs = ops.reset(s.cs);
                r.la = 1;
                r.lh = lh;
                r.c = top && lh == 0;
                return r;
            }
            [[fallthrough]];
        case Action::Release:
            r.la = 1;
            r.lh = 0;
            if (lh == 0) {
                r.cs = ops.inc1(s.cs);
                r.c = top;
            } else {
                r.cs = plain(1);
            }
            return r;
        case Action::Silent: {
            const bool drops = s.la == 0 && lh > 0 && s.cs.value != 0 && !s.cs.primed;
            r.cs = plain(0);
            r.la = 0;
            r.lh = drops ? lh - 1 : lh;
            return r;
        }
        default:
            break;
        }
    }
    throw RuleError("unhandled action");
}

Step apply_streamlet(const ProtocolSpec& spec, const State& s, Action a)
{
    const int c = s.cs.value;
    const bool ext = c >= 2;
    const int lh = s.lh;
    auto grow = [&](int x) { return plain(std::min(x, 3)); };
    // Overflowed blocks are dropped without credit.
    auto lh_inc = [&] { return std::min(lh + 1, spec.lh_cap); };
    Step r;

    if (s.leader == Leader::H) {
        switch (a) {
        case Action::Adopt:
            r.cs = s.la == 0 ? grow(c + 1) : plain(1);
            r.lh = 1;
            r.b_h = lh;
            r.c = s.la == 0 && ext;
            return r;
        case Action::Wait:
        case Action::Silent:
            r.cs = s.la == 0 ? grow(c + 1) : plain(1);
            r.lh = lh_inc();
            r.c = s.la == 0 && ext;
            return r;
        case Action::Release:
            r.cs = grow(c + 2);
            r.lh = 1;
            r.b_h = lh;
            r.c = c == 1 ? 1 : (ext ? 2 : 0);
            return r;
        case Action::Withhold:
            r.cs = plain(0);
            r.b_h = lh;
            return r;
        }
    } else {
        switch (a) {
        case Action::Adopt:
            r.cs = s.la == 0 ? s.cs : plain(0);
            r.la = 1;
            r.b_h = lh;
            return r;
        case Action::Wait:
            if (s.la == 0) {
                r.cs = plain(0);
                r.lh = lh;
                return r;
            }
            [[fallthrough]];
        case Action::Release:
        case Action::Withhold:
            r.cs = grow(c + 1);
            r.la = 1;
            r.b_h = lh;
            r.c = ext;
            return r;
        case Action::Silent:
            r.cs = plain(0);
            return r;
        }
    }
    throw RuleError("unhandled action");
}

} // namespace

ProtocolSpec spec_of(Protocol p, int streamlet_lh_cap)
{
    switch (p) {
    case Protocol::CHS: return {p, 3, 2, true, false, true};
    case Protocol::TCHS: return {p, 2, 1, true, false, false};
    case Protocol::FHS: return {p, 2, 1, true, false, true};
    case Protocol::STREAMLET:
        if (streamlet_lh_cap < 1) throw RuleError("streamlet lh_cap must be >= 1");
        return {p, 3, streamlet_lh_cap, false, true, false};
    }
    throw RuleError("unknown protocol");
}

bool valid_state(const ProtocolSpec& spec, const State& s)
{
    if (s.cs.value < 0 || s.cs.value > spec.consec_cap) return false;
    if (s.cs.primed && (!spec.has_primed || s.cs.value != spec.consec_cap)) return false;
    if (s.la < 0 || s.la > 1) return false;
    if (s.lh < 0 || s.lh > spec.lh_cap) return false;
    return s.leader == Leader::H || s.leader == Leader::A;
}

std::vector<Action> legal_actions(const ProtocolSpec& spec, const State& s)
{
    if (!valid_state(spec, s))
        throw RuleError("invalid state " + render_state(s) + " for " + std::string(to_string(spec.id)));
    std::vector<Action> out{Action::Adopt, Action::Wait};
    if (s.la == 1) out.push_back(Action::Release);
    out.push_back(Action::Silent);
    if (spec.has_withhold && s.la == 1) out.push_back(Action::Withhold);
    return out;
}

bool is_legal(const ProtocolSpec& spec, const State& s, Action a)
{
    if (!valid_state(spec, s)) return false;
    switch (a) {
    case Action::Adopt:
    case Action::Wait:
    case Action::Silent: return true;
    case Action::Release: return s.la == 1;
    case Action::Withhold: return spec.has_withhold && s.la == 1;
    }
    return false;
}

Step apply(const ProtocolSpec& spec, const State& s, Action a)
{
    if (!is_legal(spec, s, a))
        throw RuleError("illegal pair " + render_state(s) + " " + std::string(to_string(a)));
    return spec.id == Protocol::STREAMLET ? apply_streamlet(spec, s, a) : apply_hotstuff(spec, s, a);
}

RewardCounts reward(const ProtocolSpec& spec, const State& s, Action a)
{
    auto st = apply(spec, s, a);
    return {st.b_h, st.c};
}

LegProfile time_legs(Protocol p, Leader current, Action a, Leader next)
{
    const bool next_h = next == Leader::H;
    if (p == Protocol::STREAMLET) return {0, 2};
    if (current == Leader::H) {
        if (p == Protocol::TCHS) return next_h ? LegProfile{2, 1} : LegProfile{1, 2};
        if (p == Protocol::FHS && next_h) return {2, 0};
        return next_h ? LegProfile{3, 0} : LegProfile{1, 2};
    }
    if (a == Action::Silent) {
        if (p == Protocol::TCHS) return {0, 2};
        return next_h ? LegProfile{1, 1} : LegProfile{0, 2};
    }
    if (p == Protocol::TCHS) return {0, 3};
    return next_h ? LegProfile{1, 2} : LegProfile{0, 3};
}

std::array<TransitionEntry, 2> transition(const ProtocolSpec& spec, const State& s, Action a,
                                          double alpha, double k)
{
    const Step st = apply(spec, s, a);
    std::array<TransitionEntry, 2> out;
    const std::array<Leader, 2> next{Leader::A, Leader::H};
    for (int i = 0; i < 2; ++i) {
        auto& e = out[i];
        e.next = State{st.cs, st.la, st.lh, next[i]};
        e.prob = i == 0 ? alpha : 1.0 - alpha;
        const auto legs = time_legs(spec.id, s.leader, a, next[i]);
        e.reward = RewardVector{st.b_h, st.c, legs, legs.time(k)};
    }
    return out;
}

} // namespace cbft
