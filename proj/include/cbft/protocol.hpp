#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "cbft/types.hpp"

namespace cbft {

struct ProtocolSpec {
    Protocol id = Protocol::CHS;
    int consec_cap = 3;
    int lh_cap = 2;
    bool has_primed = true;
    bool has_withhold = false;
    // Meaningless for Streamlet.
    bool responsive = true;
};

inline constexpr int kDefaultStreamletLhCap = 4;

ProtocolSpec spec_of(Protocol p, int streamlet_lh_cap = kDefaultStreamletLhCap);

class RuleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

bool valid_state(const ProtocolSpec& spec, const State& s);

// Legal actions in tie-break order. Throws RuleError on an invalid state.
std::vector<Action> legal_actions(const ProtocolSpec& spec, const State& s);
bool is_legal(const ProtocolSpec& spec, const State& s, Action a);

// Leader-independent part of a step: post (cS, l_a, l_h) plus credited counts.
struct Step {
    ConsecState cs;
    int la = 0;
    int lh = 0;
    int b_h = 0;
    int c = 0;
};

Step apply(const ProtocolSpec& spec, const State& s, Action a);

struct RewardCounts {
    int b_h = 0;
    int c = 0;
};

RewardCounts reward(const ProtocolSpec& spec, const State& s, Action a);

LegProfile time_legs(Protocol p, Leader current, Action a, Leader next);

// Entry 0 has next leader A (prob alpha), entry 1 next leader H (prob 1 - alpha).
std::array<TransitionEntry, 2> transition(const ProtocolSpec& spec, const State& s, Action a,
                                          double alpha, double k);

} // namespace cbft
