#include "cbft/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace cbft {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool parse_int(std::string_view s, int& out)
{
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

} // namespace

std::string_view to_string(Protocol p)
{
    switch (p) {
    case Protocol::CHS: return "chs";
    case Protocol::TCHS: return "2chs";
    case Protocol::FHS: return "fhs";
    case Protocol::STREAMLET: return "streamlet";
    }
    return "?";
}

std::string_view to_string(Action a)
{
    switch (a) {
    case Action::Adopt: return "Adopt";
    case Action::Wait: return "Wait";
    case Action::Release: return "Release";
    case Action::Silent: return "Silent";
    case Action::Withhold: return "Withhold";
    }
    return "?";
}

std::string_view to_string(Leader l) { return l == Leader::H ? "H" : "A"; }

std::optional<Protocol> parse_protocol(std::string_view s)
{
    auto v = lower(s);
    if (v == "chs") return Protocol::CHS;
    if (v == "2chs" || v == "tchs") return Protocol::TCHS;
    if (v == "fhs") return Protocol::FHS;
    if (v == "streamlet") return Protocol::STREAMLET;
    return std::nullopt;
}

std::optional<Action> parse_action(std::string_view s)
{
    auto v = lower(s);
    for (Action a : kAllActions)
        if (lower(to_string(a)) == v) return a;
    return std::nullopt;
}

std::optional<Leader> parse_leader(std::string_view s)
{
    if (s == "H") return Leader::H;
    if (s == "A") return Leader::A;
    return std::nullopt;
}

std::string render_state(const State& s)
{
    std::string out = "(";
    out += std::to_string(s.cs.value);
    if (s.cs.primed) out += 'p';
    out += ',';
    out += std::to_string(s.la);
    out += ',';
    out += std::to_string(s.lh);
    out += ',';
    out += to_string(s.leader);
    out += ')';
    return out;
}

std::optional<State> parse_state(std::string_view s)
{
    if (s.size() < 2 || s.front() != '(' || s.back() != ')') return std::nullopt;
    s = s.substr(1, s.size() - 2);
    std::array<std::string_view, 4> f;
    for (int i = 0; i < 4; ++i) {
        auto pos = s.find(',');
        if (i < 3 && pos == std::string_view::npos) return std::nullopt;
        if (i == 3 && pos != std::string_view::npos) return std::nullopt;
        f[i] = s.substr(0, pos);
        if (i < 3) s.remove_prefix(pos + 1);
    }
    State st;
    auto cs = f[0];
    if (!cs.empty() && cs.back() == 'p') {
        st.cs.primed = true;
        cs.remove_suffix(1);
    }
    auto leader = parse_leader(f[3]);
    if (!parse_int(cs, st.cs.value) || !parse_int(f[1], st.la) || !parse_int(f[2], st.lh) || !leader)
        return std::nullopt;
    st.leader = *leader;
    return st;
}

} // namespace cbft
