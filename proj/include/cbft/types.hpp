#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cbft {

enum class Protocol { CHS, TCHS, FHS, STREAMLET };

enum class Leader : std::uint8_t { H, A };

// Declaration order is the solver's tie-break order.
enum class Action : std::uint8_t { Adopt, Wait, Release, Silent, Withhold };

inline constexpr std::array<Action, 5> kAllActions = {
    Action::Adopt, Action::Wait, Action::Release, Action::Silent, Action::Withhold};

struct ConsecState {
    int value = 0;
    bool primed = false;

    friend bool operator==(const ConsecState&, const ConsecState&) = default;
};

struct State {
    ConsecState cs;
    int la = 0;
    int lh = 0;
    Leader leader = Leader::H;

    friend bool operator==(const State&, const State&) = default;
};

struct LegProfile {
    int n_actual = 0;
    int n_bound = 0;

    double time(double k) const { return n_actual + n_bound * k; }
    friend bool operator==(const LegProfile&, const LegProfile&) = default;
};

struct RewardVector {
    int b_h = 0;
    int c = 0;
    LegProfile legs;
    // legs.time(k) for the instance's k
    double t = 0.0;
};

struct TransitionEntry {
    State next;
    double prob = 0.0;
    RewardVector reward;
};

std::string_view to_string(Protocol p);
std::string_view to_string(Action a);
std::string_view to_string(Leader l);

// Accepts chs, 2chs/tchs, fhs, streamlet (case-insensitive).
std::optional<Protocol> parse_protocol(std::string_view s);
std::optional<Action> parse_action(std::string_view s);
std::optional<Leader> parse_leader(std::string_view s);

// "(3p,1,0,A)"
std::string render_state(const State& s);
std::optional<State> parse_state(std::string_view s);

} // namespace cbft
