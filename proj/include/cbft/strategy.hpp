#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "cbft/solver.hpp"

namespace cbft {

inline constexpr const char* kToolVersion = "0.1.0";

Policy silent_baseline_policy(const MdpInstance& mdp);
// Adopt in every state: the adversary builds on every honest block.
Policy adopt_policy(const MdpInstance& mdp);

// Honest execution, i.e. the alpha = 0 model run with the Adopt policy.
PolicyValue no_attack_reference(Protocol p, double k = 5.0,
                                int streamlet_lh_cap = kDefaultStreamletLhCap);

class PolicyFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PolicyHeader {
    Protocol protocol = Protocol::CHS;
    double alpha = 0.0;
    double k = 5.0;
    int lh_cap = 0;
    Metric metric = Metric::Growth;
    double rho_bar = 0.0;
    std::string tool_version;
};

void write_policy(std::ostream& os, const MdpInstance& mdp, const SolveResult& result);
void save_policy(const MdpInstance& mdp, const SolveResult& result, const std::string& path);

PolicyHeader read_policy_header(std::istream& is);
// Fails on header mismatch, unknown state strings, missing or duplicate
// states, and illegal actions.
Policy read_policy(std::istream& is, const MdpInstance& mdp, PolicyHeader* header = nullptr);
Policy load_policy(const std::string& path, const MdpInstance& mdp, PolicyHeader* header = nullptr);

// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

} // namespace cbft
