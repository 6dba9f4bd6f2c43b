#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbft/protocol.hpp"
#include "cbft/sim.hpp"

namespace cbft {

struct Discrepancy {
    std::int64_t view = 0;
    std::string field;
    std::int64_t replayed = 0;
    std::int64_t recorded = 0;
};

struct ReplayReport {
    std::int64_t views = 0;
    std::int64_t b_h = 0;
    std::int64_t c = 0;
    std::size_t total = 0;
    // First kMaxListed discrepancies.
    std::vector<Discrepancy> items;

    static constexpr std::size_t kMaxListed = 64;
    bool ok() const { return total == 0; }
    std::string describe() const;
};

// Rebuilds an explicit block tree from (leader, action) per view and checks the
// trace's b_h, c and the pending-block counts against it.
ReplayReport replay_verify(const std::vector<ViewRecord>& trace, Protocol p,
                           int streamlet_lh_cap = kDefaultStreamletLhCap);

} // namespace cbft
