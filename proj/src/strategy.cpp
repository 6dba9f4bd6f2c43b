#include "cbft/strategy.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

namespace cbft {

Policy silent_baseline_policy(const MdpInstance& mdp)
{
    return Policy{std::vector<Action>(mdp.size(), Action::Silent)};
}

Policy adopt_policy(const MdpInstance& mdp)
{
    return Policy{std::vector<Action>(mdp.size(), Action::Adopt)};
}

PolicyValue no_attack_reference(Protocol p, double k, int streamlet_lh_cap)
{
    const auto mdp = build_mdp(p, 0.0, k, streamlet_lh_cap);
    return evaluate_policy(mdp, adopt_policy(mdp));
}

std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(std::string_view s)
{
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw PolicyFileError("not a number: '" + std::string(s) + "'");
    return v;
}

void write_policy(std::ostream& os, const MdpInstance& mdp, const SolveResult& result)
{
    check_policy(mdp, result.policy);
    os << "# adversarial policy\n";
    os << "protocol " << to_string(mdp.protocol()) << '\n';
    os << "alpha " << format_double(mdp.alpha) << '\n';
    os << "k " << format_double(mdp.k) << '\n';
    os << "lh_cap " << mdp.spec.lh_cap << '\n';
    os << "metric " << to_string(result.metric) << '\n';
    os << "rho_bar " << format_double(result.rho_bar) << '\n';
    os << "tool_version " << kToolVersion << '\n';
    for (std::size_t s = 0; s < mdp.size(); ++s)
        os << render_state(mdp.states[s]) << ' ' << to_string(result.policy[s]) << '\n';
}

void save_policy(const MdpInstance& mdp, const SolveResult& result, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw PolicyFileError("cannot write " + path);
    write_policy(os, mdp, result);
    if (!os) throw PolicyFileError("write failed: " + path);
}

namespace {

struct ParsedFile {
    PolicyHeader header;
    std::vector<std::pair<std::string, std::string>> entries;
};

ParsedFile parse(std::istream& is)
{
    ParsedFile f;
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key, value, extra;
        if (!(ls >> key >> value) || (ls >> extra))
            throw PolicyFileError("malformed line " + std::to_string(lineno) + ": " + line);
        if (key[0] == '(')
            f.entries.emplace_back(key, value);
        else if (!f.entries.empty())
            throw PolicyFileError("header field after state entries at line " + std::to_string(lineno));
        else
            kv[key] = value;
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw PolicyFileError(std::string("missing header field ") + key);
        return it->second;
    };
    auto p = parse_protocol(need("protocol"));
    if (!p) throw PolicyFileError("unknown protocol " + need("protocol"));
    auto m = parse_metric(need("metric"));
    if (!m) throw PolicyFileError("unknown metric " + need("metric"));
    f.header.protocol = *p;
    f.header.metric = *m;
    f.header.alpha = parse_double(need("alpha"));
    f.header.k = parse_double(need("k"));
    f.header.rho_bar = parse_double(need("rho_bar"));
    f.header.tool_version = need("tool_version");
    f.header.lh_cap = static_cast<int>(parse_double(need("lh_cap")));
    return f;
}

} // namespace

PolicyHeader read_policy_header(std::istream& is) { return parse(is).header; }

Policy read_policy(std::istream& is, const MdpInstance& mdp, PolicyHeader* header)
{
    auto f = parse(is);
    const auto& h = f.header;
    if (h.protocol != mdp.protocol() || h.alpha != mdp.alpha || h.k != mdp.k || h.lh_cap != mdp.spec.lh_cap) {
        std::ostringstream os;
        os << "policy header (" << to_string(h.protocol) << ", alpha " << format_double(h.alpha) << ", k "
           << format_double(h.k) << ", lh_cap " << h.lh_cap << ") does not match instance ("
           << to_string(mdp.protocol()) << ", alpha " << format_double(mdp.alpha) << ", k "
           << format_double(mdp.k) << ", lh_cap " << mdp.spec.lh_cap << ")";
        throw PolicyFileError(os.str());
    }
    std::vector<int> seen(mdp.size(), 0);
    Policy pol{std::vector<Action>(mdp.size(), Action::Adopt)};
    for (const auto& [st, act] : f.entries) {
        auto s = parse_state(st);
        const int idx = s ? mdp.index_of(*s) : -1;
        if (idx < 0) throw PolicyFileError("unknown state " + st);
        if (seen[idx]++) throw PolicyFileError("duplicate state " + st);
        auto a = parse_action(act);
        if (!a) throw PolicyFileError("unknown action " + act + " for " + st);
        if (!is_legal(mdp.spec, *s, *a)) throw PolicyFileError("illegal action " + act + " in " + st);
        pol.actions[idx] = *a;
    }
    for (std::size_t s = 0; s < mdp.size(); ++s)
        if (!seen[s]) throw PolicyFileError("no action for state " + render_state(mdp.states[s]));
    if (header) *header = h;
    return pol;
}

Policy load_policy(const std::string& path, const MdpInstance& mdp, PolicyHeader* header)
{
    std::ifstream is(path);
    if (!is) throw PolicyFileError("cannot read " + path);
    return read_policy(is, mdp, header);
}

} // namespace cbft
