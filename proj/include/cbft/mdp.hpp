#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbft/protocol.hpp"
#include "cbft/types.hpp"

namespace cbft {

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ActionEntry {
    Action action = Action::Adopt;
    std::array<TransitionEntry, 2> outcomes;
    // Index of outcomes[i].next in MdpInstance::states.
    std::array<int, 2> targets{-1, -1};
};

struct MdpInstance {
    ProtocolSpec spec;
    double alpha = 0.0;
    double k = 5.0;
    double delta = 1.0;
    std::vector<State> states;
    // Per state, legal actions in tie-break order.
    std::vector<std::vector<ActionEntry>> table;

    Protocol protocol() const { return spec.id; }
    std::size_t size() const { return states.size(); }
    // -1 when the state is outside the instance.
    int index_of(const State& s) const;
    int initial_state() const;
    const ActionEntry* find(int state, Action a) const;
};

// Lexicographic position of a state in the enumeration used by build_mdp.
int state_rank(const ProtocolSpec& spec, const State& s);
std::vector<State> enumerate_states(const ProtocolSpec& spec);

MdpInstance build_mdp(Protocol p, double alpha, double k = 5.0,
                      int streamlet_lh_cap = kDefaultStreamletLhCap);

struct Violation {
    int state = -1;
    std::optional<Action> action;
    std::string what;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string describe(const MdpInstance& mdp) const;
};

ValidationReport validate_mdp(const MdpInstance& mdp);

} // namespace cbft
