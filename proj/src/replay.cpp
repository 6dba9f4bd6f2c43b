#include "cbft/replay.hpp"

#include <sstream>

namespace cbft {

namespace {

struct Block {
    std::int64_t view;
    bool honest;
    int parent;
    bool settled = false;
    bool committed = false;
    bool orphan = false;
    // Honest block dropped without credit (Streamlet overflow or Silent).
    bool forfeit = false;
};

// Settled is ancestor-closed along any chain, so walks stop at the first
// settled block.
class Tree {
public:
    Tree(Protocol p, int lh_cap)
        : proto_(p), lh_cap_(lh_cap)
    {
        Block g{-10, false, -1};
        g.settled = g.committed = true;
        blocks_.push_back(g);
        skip_.push_back(-1);
        tip_ = 0;
        if (p == Protocol::CHS) {
            chain_len_ = 3;
            lock_depth_ = 2;
        } else {
            chain_len_ = p == Protocol::STREAMLET ? 3 : 2;
            lock_depth_ = 1;
        }
    }

    // Returns (b_h, c) credited during view v.
    std::pair<int, int> step(std::int64_t v, Leader l, Action a)
    {
        view_tip_ = tip_;
        if (proto_ == Protocol::STREAMLET) return step_streamlet(v, l, a);
        return step_hotstuff(v, l, a);
    }

    int pending_count()
    {
        int n = 0;
        for (int b = pending_at_or_below(tip_); b >= 0; b = pending_at_or_below(blocks_[b].parent)) ++n;
        return n;
    }

    bool holds_block() const { return hidden_ >= 0; }

private:
    int make(std::int64_t view, bool honest, int parent)
    {
        blocks_.push_back(Block{view, honest, parent});
        skip_.push_back(parent);
        return static_cast<int>(blocks_.size()) - 1;
    }

    bool pending(int b) const { return blocks_[b].honest && !blocks_[b].forfeit && !blocks_[b].settled; }

    // Nearest unsettled honest non-forfeit block at or below b, or -1 once a
    // settled block comes first. Both flags only ever turn on, so skip
    // pointers can be compressed over blocks that failed the test.
    int pending_at_or_below(int b)
    {
        int r = b;
        while (r >= 0 && !blocks_[r].settled && !pending(r)) r = skip_[r];
        for (int x = b; x != r;) {
            const int nx = skip_[x];
            skip_[x] = r;
            x = nx;
        }
        return r >= 0 && pending(r) ? r : -1;
    }

    int settle_from(int b)
    {
        int credit = 0;
        for (; b >= 0 && !blocks_[b].settled; b = blocks_[b].parent) {
            auto& x = blocks_[b];
            x.settled = true;
            if (x.honest && !x.forfeit && !x.orphan) ++credit;
        }
        return credit;
    }

    void commit_from(int b)
    {
        for (; b >= 0 && !blocks_[b].committed; b = blocks_[b].parent) blocks_[b].committed = true;
    }

    int ancestor(int b, int depth) const
    {
        for (int i = 0; i < depth && b >= 0; ++i) b = blocks_[b].parent;
        return b;
    }

    // Blocks on the public chain above fork point fp are abandoned.
    void orphan_above(int fp)
    {
        for (int b = tip_; b != fp && b >= 0; b = blocks_[b].parent) blocks_[b].orphan = true;
        tip_ = fp;
    }

    int fork_point()
    {
        int oldest = -1;
        for (int b = pending_at_or_below(tip_); b >= 0; b = pending_at_or_below(blocks_[b].parent)) oldest = b;
        return oldest < 0 ? tip_ : blocks_[oldest].parent;
    }

    int run_length(int b) const
    {
        int r = 1;
        while (r < chain_len_ && blocks_[b].parent >= 0) {
            const int p = blocks_[b].parent;
            if (blocks_[p].view + 1 != blocks_[b].view) break;
            ++r;
            b = p;
        }
        return r;
    }

    std::pair<int, int> append(int b)
    {
        tip_ = b;
        const int p = blocks_[b].parent;
        if (proto_ == Protocol::STREAMLET) {
            if (run_length(b) >= chain_len_ && !blocks_[p].committed) {
                commit_from(p);
                return {0, 1};
            }
            return {0, 0};
        }
        int c = 0;
        // A direct chain needs the parent to be the tip the view started from,
        // with no silent view since it was proposed.
        bool direct = p == view_tip_ && blocks_[p].view > last_silent_;
        int x = p;
        for (int i = 0; direct && i < chain_len_ - 1; ++i) {
            const int q = blocks_[x].parent;
            if (q < 0 || blocks_[q].view + 1 != blocks_[x].view)
                direct = false;
            else
                x = q;
        }
        if (direct && !blocks_[x].committed) {
            commit_from(x);
            c = 1;
        }
        const int lock = ancestor(b, lock_depth_);
        const int credit = lock >= 0 ? settle_from(lock) : 0;
        return {credit, c};
    }

    std::pair<int, int> step_hotstuff(std::int64_t v, Leader l, Action a)
    {
        int bh = 0, c = 0;
        auto add = [&](std::pair<int, int> r) {
            bh += r.first;
            c |= r.second;
        };
        if (l == Leader::H) {
            if (a == Action::Adopt) bh += settle_from(tip_);
            if (a == Action::Release) {
                const int x = hidden_;
                hidden_ = -1;
                orphan_above(blocks_[x].parent);
                add(append(x));
            } else {
                hidden_ = -1;
            }
            add(append(make(v, true, tip_)));
            return {bh, c};
        }
        switch (a) {
        case Action::Silent: {
            hidden_ = -1;
            last_silent_ = v;
            const auto& t = blocks_[tip_];
            if (t.honest && t.view == v - 1 && !t.settled) {
                blocks_[tip_].orphan = true;
                tip_ = t.parent;
            }
            return {0, 0};
        }
        case Action::Adopt:
            bh += settle_from(tip_);
            hidden_ = make(v, false, tip_);
            return {bh, 0};
        default:
            if (hidden_ < 0) {
                hidden_ = make(v, false, fork_point());
                return {0, 0};
            }
            const int x = hidden_;
            orphan_above(blocks_[x].parent);
            add(append(x));
            hidden_ = make(v, false, x);
            return {bh, c};
        }
    }

    std::pair<int, int> step_streamlet(std::int64_t v, Leader l, Action a)
    {
        int bh = 0, c = 0;
        auto settle_pending = [&] { bh += settle_from(tip_); };
        if (l == Leader::H) {
            if (a == Action::Withhold) {
                settle_pending();
                hidden_ = -1;
                blocks_[make(v, true, tip_)].orphan = true;
                return {bh, 0};
            }
            if (a == Action::Adopt) settle_pending();
            if (a == Action::Release) {
                settle_pending();
                const int x = hidden_;
                hidden_ = -1;
                c += append(x).second;
            } else {
                hidden_ = -1;
            }
            const bool overflow = (a == Action::Wait || a == Action::Silent) && pending_count() >= lh_cap_;
            const int h = make(v, true, tip_);
            blocks_[h].forfeit = overflow;
            c += append(h).second;
            return {bh, c};
        }
        if (a == Action::Silent) {
            for (int b = pending_at_or_below(tip_); b >= 0; b = pending_at_or_below(blocks_[b].parent))
                blocks_[b].orphan = blocks_[b].forfeit = true;
            hidden_ = -1;
            return {0, 0};
        }
        if (a == Action::Adopt) {
            settle_pending();
            hidden_ = make(v, false, tip_);
            return {bh, 0};
        }
        if (a == Action::Wait && hidden_ < 0) return {0, 0};
        settle_pending();
        const int x = hidden_;
        c += append(x).second;
        hidden_ = make(v, false, x);
        return {bh, c};
    }

    Protocol proto_;
    int lh_cap_;
    int chain_len_ = 3;
    int lock_depth_ = 1;
    std::vector<Block> blocks_;
    std::vector<int> skip_;
    int tip_ = 0;
    int view_tip_ = 0;
    int hidden_ = -1;
    std::int64_t last_silent_ = -100;
};

} // namespace

std::string ReplayReport::describe() const
{
    std::ostringstream os;
    os << total << " discrepancies over " << views << " views";
    for (const auto& d : items)
        os << "\n  view " << d.view << ' ' << d.field << ": replay " << d.replayed << ", trace " << d.recorded;
    return os.str();
}

ReplayReport replay_verify(const std::vector<ViewRecord>& trace, Protocol p, int streamlet_lh_cap)
{
    ReplayReport rep;
    auto flag = [&](std::int64_t view, const char* field, std::int64_t replayed, std::int64_t recorded) {
        ++rep.total;
        if (rep.items.size() < ReplayReport::kMaxListed) rep.items.push_back({view, field, replayed, recorded});
    };
    const auto spec = spec_of(p, streamlet_lh_cap);
    Tree tree(p, spec.lh_cap);
    std::int64_t trace_bh = 0, trace_c = 0;

    if (!trace.empty()) {
        const auto& s0 = trace.front().state;
        if (!(s0 == State{{0, false}, 0, 0, Leader::H})) flag(trace.front().view, "initial_state", 0, 1);
    }
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& r = trace[i];
        if (!valid_state(spec, r.state) || !is_legal(spec, r.state, r.action)) {
            flag(r.view, "illegal_record", 0, 1);
            continue;
        }
        const auto [bh, c] = tree.step(r.view, r.state.leader, r.action);
        rep.b_h += bh;
        rep.c += c;
        trace_bh += r.b_h;
        trace_c += r.c;
        ++rep.views;
        if (bh != r.b_h) flag(r.view, "b_h", bh, r.b_h);
        if (c != r.c) flag(r.view, "c", c, r.c);
        if (i + 1 < trace.size()) {
            const auto& next = trace[i + 1].state;
            if (next.leader != r.next_leader) flag(r.view, "next_leader", 0, 1);
            if (tree.pending_count() != next.lh) flag(r.view, "l_h", tree.pending_count(), next.lh);
            if (static_cast<int>(tree.holds_block()) != next.la) flag(r.view, "l_a", tree.holds_block(), next.la);
        }
    }
    if (trace_bh != rep.b_h) flag(rep.views, "total_b_h", rep.b_h, trace_bh);
    if (trace_c != rep.c) flag(rep.views, "total_c", rep.c, trace_c);
    return rep;
}

} // namespace cbft
