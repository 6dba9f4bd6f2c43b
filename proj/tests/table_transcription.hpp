#pragma once
// Row-by-row transcription of the state transition tables, kept
// separate from the library so the golden test compares two encodings.

#include <optional>
#include <string>
#include <vector>

#include "cbft/types.hpp"

namespace golden {

using cbft::Action;
using cbft::Leader;

// cS expressions as they are printed in the tables.
enum class Cs { Inc1, Inc2, Same, One, Two, Zero, ZeroOrPrimed };
enum class Lh { One, Zero, Same, IncCapped, IncUncapped, Dec };
enum class Cond { Any, LhZero, LhPos, SilentDrops, SilentKeeps };
// Streamlet B_h / C columns; HotStuff rows leave them unset.
enum class Credit { None, Lh, Zero };
enum class Commit { None, IfTwoOrThree, ReleaseDouble, Zero };

struct Row {
    Leader leader;
    int la;  // -1 for "l_a" in the row label
    Cond cond;
    std::vector<Action> actions;
    Cs cs;
    int next_la;
    Lh lh;
    const char* t_next_a;
    const char* t_next_h;
    Credit credit = Credit::None;
    Commit commit = Commit::None;
};

inline std::vector<Row> chs_table()
{
    using A = Action;
    return {
        {Leader::H, 0, Cond::Any, {A::Adopt}, Cs::Inc1, 0, Lh::One, "δ+2Δ", "3δ"},
        {Leader::H, 1, Cond::Any, {A::Adopt}, Cs::One, 0, Lh::One, "δ+2Δ", "3δ"},
        {Leader::A, 0, Cond::Any, {A::Adopt}, Cs::Same, 1, Lh::Zero, "3Δ", "δ+2Δ"},
        {Leader::A, 1, Cond::Any, {A::Adopt}, Cs::ZeroOrPrimed, 1, Lh::Zero, "3Δ", "δ+2Δ"},
        {Leader::H, 0, Cond::Any, {A::Wait, A::Silent}, Cs::Inc1, 0, Lh::IncCapped, "δ+2Δ", "3δ"},
        {Leader::H, 1, Cond::Any, {A::Wait, A::Silent}, Cs::One, 0, Lh::IncCapped, "δ+2Δ", "3δ"},
        {Leader::A, 0, Cond::Any, {A::Wait}, Cs::ZeroOrPrimed, 1, Lh::Same, "3Δ", "δ+2Δ"},
        {Leader::A, 1, Cond::LhZero, {A::Wait}, Cs::Inc1, 1, Lh::Zero, "3Δ", "δ+2Δ"},
        {Leader::A, 1, Cond::LhPos, {A::Wait}, Cs::One, 1, Lh::Zero, "3Δ", "δ+2Δ"},
        {Leader::H, 1, Cond::LhZero, {A::Release}, Cs::Inc2, 0, Lh::One, "δ+2Δ", "3δ"},
        {Leader::H, 1, Cond::LhPos, {A::Release}, Cs::Two, 0, Lh::One, "δ+2Δ", "3δ"},
        {Leader::A, 1, Cond::LhZero, {A::Release}, Cs::Inc1, 1, Lh::Zero, "3Δ", "δ+2Δ"},
        {Leader::A, 1, Cond::LhPos, {A::Release}, Cs::One, 1, Lh::Zero, "3Δ", "δ+2Δ"},
        {Leader::A, 0, Cond::SilentDrops, {A::Silent}, Cs::Zero, 0, Lh::Dec, "2Δ", "δ+Δ"},
        {Leader::A, -1, Cond::SilentKeeps, {A::Silent}, Cs::Zero, 0, Lh::Same, "2Δ", "δ+Δ"},
    };
}

inline std::vector<Row> tchs_table()
{
    using A = Action;
    return {
        {Leader::H, 0, Cond::Any, {A::Adopt}, Cs::Inc1, 0, Lh::One, "δ+2Δ", "2δ+Δ"},
        {Leader::H, 1, Cond::Any, {A::Adopt}, Cs::One, 0, Lh::One, "δ+2Δ", "2δ+Δ"},
        {Leader::A, 0, Cond::Any, {A::Adopt}, Cs::Same, 1, Lh::Zero, "3Δ", "3Δ"},
        {Leader::A, 1, Cond::Any, {A::Adopt}, Cs::ZeroOrPrimed, 1, Lh::Zero, "3Δ", "3Δ"},
        {Leader::H, 0, Cond::Any, {A::Wait, A::Silent}, Cs::Inc1, 0, Lh::IncCapped, "δ+2Δ", "2δ+Δ"},
        {Leader::H, 1, Cond::Any, {A::Wait, A::Silent}, Cs::One, 0, Lh::IncCapped, "δ+2Δ", "2δ+Δ"},
        {Leader::A, 0, Cond::Any, {A::Wait}, Cs::ZeroOrPrimed, 1, Lh::Same, "3Δ", "3Δ"},
        {Leader::A, 1, Cond::LhZero, {A::Wait}, Cs::Inc1, 1, Lh::Zero, "3Δ", "3Δ"},
        {Leader::A, 1, Cond::LhPos, {A::Wait}, Cs::One, 1, Lh::Zero, "3Δ", "3Δ"},
        {Leader::H, 1, Cond::Any, {A::Release}, Cs::Two, 0, Lh::One, "δ+2Δ", "2δ+Δ"},
        {Leader::A, 1, Cond::LhZero, {A::Release}, Cs::Inc1, 1, Lh::Zero, "3Δ", "3Δ"},
        {Leader::A, 1, Cond::LhPos, {A::Release}, Cs::One, 1, Lh::Zero, "3Δ", "3Δ"},
        {Leader::A, 0, Cond::SilentDrops, {A::Silent}, Cs::Zero, 0, Lh::Dec, "2Δ", "2Δ"},
        {Leader::A, -1, Cond::SilentKeeps, {A::Silent}, Cs::Zero, 0, Lh::Same, "2Δ", "2Δ"},
    };
}

inline std::vector<Row> streamlet_table()
{
    using A = Action;
    const char* v = "2Δ";
    return {
        {Leader::H, 0, Cond::Any, {A::Adopt}, Cs::Inc1, 0, Lh::One, v, v, Credit::Lh, Commit::IfTwoOrThree},
        {Leader::H, 1, Cond::Any, {A::Adopt}, Cs::One, 0, Lh::One, v, v, Credit::Lh, Commit::Zero},
        {Leader::A, 0, Cond::Any, {A::Adopt}, Cs::Same, 1, Lh::Zero, v, v, Credit::Lh, Commit::Zero},
        {Leader::A, 1, Cond::Any, {A::Adopt}, Cs::Zero, 1, Lh::Zero, v, v, Credit::Lh, Commit::Zero},
        {Leader::H, 0, Cond::Any, {A::Wait, A::Silent}, Cs::Inc1, 0, Lh::IncUncapped, v, v, Credit::Zero,
         Commit::IfTwoOrThree},
        {Leader::H, 1, Cond::Any, {A::Wait, A::Silent}, Cs::One, 0, Lh::IncUncapped, v, v, Credit::Zero,
         Commit::Zero},
        {Leader::A, 0, Cond::Any, {A::Wait}, Cs::Zero, 0, Lh::Same, v, v, Credit::Zero, Commit::Zero},
        {Leader::A, 1, Cond::Any, {A::Wait}, Cs::Inc1, 1, Lh::Zero, v, v, Credit::Lh, Commit::IfTwoOrThree},
        {Leader::H, 1, Cond::Any, {A::Release}, Cs::Inc2, 0, Lh::One, v, v, Credit::Lh, Commit::ReleaseDouble},
        {Leader::A, 1, Cond::Any, {A::Release}, Cs::Inc1, 1, Lh::Zero, v, v, Credit::Lh, Commit::IfTwoOrThree},
        {Leader::H, 1, Cond::Any, {A::Withhold}, Cs::Zero, 0, Lh::Zero, v, v, Credit::Lh, Commit::Zero},
        {Leader::A, 1, Cond::Any, {A::Withhold}, Cs::Inc1, 1, Lh::Zero, v, v, Credit::Lh, Commit::IfTwoOrThree},
        {Leader::A, -1, Cond::Any, {A::Silent}, Cs::Zero, 0, Lh::Zero, v, v, Credit::Zero, Commit::Zero},
    };
}

// Counts δ and Δ terms in strings such as "δ+2Δ", "3δ", "2δ+Δ".
inline cbft::LegProfile parse_time(const std::string& s)
{
    cbft::LegProfile p;
    std::size_t i = 0;
    while (i < s.size()) {
        int coef = 0;
        bool digits = false;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            coef = coef * 10 + (s[i++] - '0');
            digits = true;
        }
        if (!digits) coef = 1;
        if (s.compare(i, 2, "δ") == 0) {
            p.n_actual += coef;
            i += 2;
        } else if (s.compare(i, 2, "Δ") == 0) {
            p.n_bound += coef;
            i += 2;
        } else {
            return {-1, -1};
        }
        if (i < s.size() && s[i] == '+') ++i;
    }
    return p;
}

} // namespace golden
