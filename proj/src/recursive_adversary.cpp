#include <algorithm>
#include <map>

#include "fairdiv/adversary.hpp"
#include "fairdiv/error.hpp"

namespace fairdiv {

std::vector<Rational> a_hat_sequence(const Rational& eps, std::size_t count) {
    std::vector<Rational> out;
    out.reserve(count);
    Rational sum;
    const Rational inv = eps.reciprocal();
    for (std::size_t t = 0; t < count; ++t) {
        Rational next = t == 0 ? Rational(1) : inv * sum + Rational(1);
        sum += next;
        out.push_back(std::move(next));
    }
    return out;
}

namespace {

struct Crossing {
    AgentId agent;
    Partition witness;  ///< local item indices of the reporting level
};

struct Context {
    int n;
    std::size_t horizon;
    std::shared_ptr<std::vector<WindowEvent>> events;
    std::map<std::pair<std::string, std::size_t>, std::vector<Rational>> a_hat;

    const std::vector<Rational>& sequence(const Rational& eps, std::size_t count) {
        auto& seq = a_hat[{eps.str(), count}];
        if (seq.empty()) seq = a_hat_sequence(eps, count);
        return seq;
    }
};

}  // namespace

class Level {
public:
    Level(int level, Rational eps, std::size_t offset, std::shared_ptr<Context> ctx)
        : ctx_(std::move(ctx)),
          held_(static_cast<std::size_t>(level)),
          sums_(static_cast<std::size_t>(level)),
          largest_(static_cast<std::size_t>(level)) {
        const int n = ctx_->n;
        rec_.level = level;
        rec_.offset = offset;
        rec_.eps = std::move(eps);
        rec_.eps_sub = rec_.eps / Rational(n);
        rec_.eps_top = rec_.eps / Rational(static_cast<std::int64_t>(n) * (n + 3));
        rec_.horizon = level == 2 ? static_cast<std::size_t>(n) : ctx_->horizon;
        rec_.game_horizon = ctx_->horizon;
        if (level >= 2) {
            scales_.assign(static_cast<std::size_t>(level - 1), Rational(1));
            sub_ = std::make_unique<Level>(level - 1, rec_.eps_sub, offset, ctx_);
        }
    }

    ItemValues next() {
        const std::size_t j = rec_.values.size();
        const int top = rec_.level - 1;
        ItemValues item(static_cast<std::size_t>(rec_.level));
        if (rec_.level == 1) {
            item[0] = Rational(1);
        } else {
            ItemValues lower = sub_->next();
            for (int i = 0; i < top; ++i) item[ux(i)] = lower[ux(i)] * scales_[ux(i)];
            if (!rec_.first_take)
                item[ux(top)] = j == 0 ? Rational(1) : sums_[ux(top)] / rec_.eps_top;
            else
                item[ux(top)] = a_value(j - *last_take_);
        }
        rec_.values.push_back(item);
        return item;
    }

    std::optional<Crossing> observe(AgentId w) {
        const std::size_t j = rec_.values.size() - 1;
        const int top = rec_.level - 1;
        if (w < 0 || w > top) throw InvalidInput("recursive adversary: winner outside the level's agents");
        rec_.winners.push_back(w);
        const ItemValues& item = rec_.values[j];
        for (std::size_t i = 0; i < item.size(); ++i) {
            sums_[i] += item[i];
            largest_[i] = max(largest_[i], item[i]);
        }
        held_[ux(w)] += item[ux(w)];

        if (rec_.level == 1) return level_one_crossing();
        if (w == top) {
            if (!rec_.first_take) {
                rec_.first_take = j;
                rec_.V = item[ux(top)];
            }
            last_take_ = j;
            for (int i = 0; i < top; ++i) scales_[ux(i)] = sums_[ux(i)] / rec_.eps_sub;
            sub_->discard_pending();
            sub_->collect(archived_);
            sub_ = std::make_unique<Level>(rec_.level - 1, rec_.eps_sub, rec_.offset + j + 1, ctx_);
            if (!rec_.dagger && held_[ux(top)] >= Rational(ctx_->n) * rec_.V) rec_.dagger = j;
            return top_crossing();
        }
        auto lower = sub_->observe(w);
        if (!lower) return std::nullopt;
        return lift(*lower);
    }

    /// Drops the emitted item the parent's top agent took; this level never saw it allocated.
    void discard_pending() {
        if (rec_.values.size() > rec_.winners.size()) rec_.values.pop_back();
        if (sub_) sub_->discard_pending();
    }

    void collect(std::vector<LevelRecord>& out) const {
        out.insert(out.end(), archived_.begin(), archived_.end());
        if (sub_) sub_->collect(out);
        out.push_back(rec_);
    }

    const LevelRecord& record() const { return rec_; }

private:
    static std::size_t ux(int i) { return static_cast<std::size_t>(i); }

    Rational threshold() const { return Rational(ctx_->n) - rec_.eps; }

    Rational a_value(std::size_t s) {
        const std::size_t pin = rec_.horizon + 1;
        const auto& seq = ctx_->sequence(rec_.eps_top, std::max(pin, s));
        return seq[s - 1] * rec_.V / seq[pin - 1];
    }

    Rational bundle_max(AgentId i, const Partition& p) const {
        Rational best;
        for (const auto& bundle : p) {
            Rational load;
            for (ItemId j : bundle) load += rec_.values[j][ux(i)];
            best = max(best, load);
        }
        return best;
    }

    std::optional<Crossing> report(AgentId agent, Partition witness, bool lifted) {
        Rational upper = bundle_max(agent, witness);
        WindowEvent e{rec_.level, rec_.offset, agent, lifted, held_[ux(agent)], upper, threshold(), false};
        e.pass = e.d_A > e.threshold * upper;
        bool pass = e.pass;
        ctx_->events->push_back(std::move(e));
        if (!pass) return std::nullopt;
        return Crossing{agent, std::move(witness)};
    }

    /// Single agent, unit items: round-robin split of the window.
    std::optional<Crossing> level_one_crossing() {
        const std::size_t m = rec_.values.size();
        const auto n = static_cast<std::size_t>(ctx_->n);
        Rational upper(static_cast<std::int64_t>((m + n - 1) / n));
        if (!(held_[0] > threshold() * upper)) return std::nullopt;
        Partition p(n);
        for (ItemId j = 0; j < m; ++j) p[j % n].push_back(j);
        return report(0, std::move(p), false);
    }

    /// Top agent's items first-fit into n bins of (1 + 2 eps_top) V; everything else joins the heaviest bin.
    std::optional<Crossing> top_crossing() {
        const int top = rec_.level - 1;
        const auto t = ux(top);
        Rational lower = max(sums_[t] / Rational(ctx_->n), largest_[t]);
        if (!(held_[t] > threshold() * lower)) return std::nullopt;
        const Rational cap = (Rational(1) + Rational(2) * rec_.eps_top) * largest_[t];
        const auto n = static_cast<std::size_t>(ctx_->n);
        Partition p(n);
        std::vector<Rational> load(n);
        for (ItemId j = 0; j < rec_.values.size(); ++j) {
            if (rec_.winners[j] != top) continue;
            const Rational& v = rec_.values[j][t];
            std::size_t b = 0;
            while (b < n && load[b] + v > cap) ++b;
            if (b == n) return std::nullopt;
            load[b] += v;
            p[b].push_back(j);
        }
        auto heaviest = static_cast<std::size_t>(std::max_element(load.begin(), load.end()) - load.begin());
        for (ItemId j = 0; j < rec_.values.size(); ++j)
            if (rec_.winners[j] != top) p[heaviest].push_back(j);
        for (auto& bundle : p) std::sort(bundle.begin(), bundle.end());
        return report(top, std::move(p), false);
    }

    /// Shifts the sub-level's witness to local indices and adds the pre-window items to its heaviest bundle.
    std::optional<Crossing> lift(const Crossing& lower) {
        const std::size_t start = last_take_ ? *last_take_ + 1 : 0;
        Partition p = lower.witness;
        for (auto& bundle : p)
            for (auto& j : bundle) j += start;
        std::size_t heaviest = 0;
        Rational best;
        for (std::size_t b = 0; b < p.size(); ++b) {
            Rational load;
            for (ItemId j : p[b]) load += rec_.values[j][ux(lower.agent)];
            if (b == 0 || load > best) {
                best = load;
                heaviest = b;
            }
        }
        for (ItemId j = 0; j < start; ++j) p[heaviest].push_back(j);
        std::sort(p[heaviest].begin(), p[heaviest].end());
        return report(lower.agent, std::move(p), true);
    }

    std::shared_ptr<Context> ctx_;
    LevelRecord rec_;
    std::vector<Rational> held_;
    std::vector<Rational> sums_;
    std::vector<Rational> largest_;
    std::vector<Rational> scales_;
    std::optional<std::size_t> last_take_;
    std::unique_ptr<Level> sub_;
    std::vector<LevelRecord> archived_;
};

RecursiveAdversary::RecursiveAdversary(int n, Rational eps, std::size_t horizon)
    : n_(n), eps_(std::move(eps)), horizon_(horizon), events_(std::make_shared<std::vector<WindowEvent>>()) {
    if (n < 2) throw InvalidInput("recursive adversary needs n >= 2");
    if (eps_.sign() <= 0 || eps_ > Rational(1)) throw InvalidInput("eps must lie in (0, 1]");
    if (horizon_ < 1) throw InvalidInput("horizon must be positive");
    auto ctx = std::make_shared<Context>(Context{n, horizon_, events_, {}});
    top_ = std::make_unique<Level>(n, eps_, 0, std::move(ctx));
}

RecursiveAdversary::~RecursiveAdversary() = default;

ItemValues RecursiveAdversary::next() { return top_->next(); }

void RecursiveAdversary::observe(AgentId winner) {
    auto c = top_->observe(winner);
    if (c && !crossing_) crossing_ = LabeledWitness{"recursive-window", c->agent, std::move(c->witness)};
}

CertifyOptions RecursiveAdversary::hints() const {
    CertifyOptions opts;
    if (crossing_) opts.witnesses.push_back(*crossing_);
    opts.bin_slacks.push_back(top_->record().eps_top);
    return opts;
}

std::vector<LevelRecord> RecursiveAdversary::records() const {
    std::vector<LevelRecord> out;
    top_->collect(out);
    return out;
}

ObservationReport check_O1_O2(const LevelRecord& r, int n) {
    (void)n;
    ObservationReport out;
    if (r.level < 2 || !r.first_take) return out;
    const auto top = static_cast<std::size_t>(r.level - 1);
    const std::size_t j1 = *r.first_take;
    const Rational V = r.values[j1][top];
    auto fail = [&](bool& flag, const std::string& why) {
        flag = false;
        if (out.failure.empty()) out.failure = "level " + std::to_string(r.level) + " at item " + std::to_string(r.offset) + ": " + why;
    };
    if (V != r.V) fail(out.o2, "recorded V differs from the first take's value");

    const Rational cap = r.eps_top * V;
    for (std::size_t j = 0; j < r.winners.size(); ++j)
        if (j != j1 && r.values[j][top] > cap)
            fail(out.o2, "item " + std::to_string(j + 1) + " has " + r.values[j][top].str() + " > eps V");

    Rational mine, others, window_sum;
    std::size_t idle = 0;
    bool after_first = false;
    for (std::size_t j = 0; j < r.winners.size(); ++j) {
        const Rational& v = r.values[j][top];
        const bool take = r.winners[j] == static_cast<AgentId>(top);
        // Inside a post-take window each value must exceed 1/eps times the window's earlier values.
        if (after_first && idle > 0 && !(v * r.eps_top > window_sum))
            fail(out.a_sequence, "a-sequence growth broken at item " + std::to_string(j + 1));
        if (take) {
            mine += v;
            if (j >= j1) {
                ++out.prefixes_checked;
                if (r.eps_top * mine < others) fail(out.o1, "O1 fails at the take at item " + std::to_string(j + 1));
                after_first = true;
            }
            idle = 0;
            window_sum = Rational();
        } else {
            others += v;
            if (after_first) {
                ++idle;
                out.observed_T = std::max(out.observed_T, idle);
                window_sum += v;
            }
        }
    }
    auto seq = a_hat_sequence(r.eps_top, std::max(r.horizon + 1, out.observed_T + 1));
    Rational sum;
    for (std::size_t t = 0; t < seq.size(); ++t) {
        if (t > 0 && !(seq[t] * r.eps_top > sum && seq[t] > seq[t - 1])) fail(out.a_sequence, "normalized a-sequence not super-geometric");
        sum += seq[t];
    }
    if (j1 + 1 < r.winners.size()) {
        Rational a1 = seq[0] * V / seq[r.horizon];
        if (r.values[j1 + 1][top] != a1) fail(out.a_sequence, "first post-take value is not a_1 pinned at a_{T+1} = V");
    }
    return out;
}

CleanupReport check_cleanup(const LevelRecord& r, int n) {
    CleanupReport out;
    if (r.level < 2) return out;
    const int top = r.level - 1;
    auto ctx = std::make_shared<Context>(Context{n, r.game_horizon, std::make_shared<std::vector<WindowEvent>>(), {}});
    std::vector<Rational> prefix(static_cast<std::size_t>(top));
    std::vector<Rational> scale(static_cast<std::size_t>(top), Rational(1));
    std::size_t j = 0;
    while (j < r.winners.size()) {
        Level sub(top, r.eps_sub, 0, ctx);
        for (; j < r.winners.size(); ++j) {
            ItemValues fresh = sub.next();
            for (int i = 0; i < top; ++i) {
                auto ii = static_cast<std::size_t>(i);
                if (r.values[j][ii] != fresh[ii] * scale[ii]) {
                    out.ok = false;
                    out.failure = "level " + std::to_string(r.level) + " item " + std::to_string(j + 1) + " agent " +
                                  std::to_string(i + 1) + ": " + r.values[j][ii].str() + " != " +
                                  (fresh[ii] * scale[ii]).str();
                    return out;
                }
                prefix[ii] += r.values[j][ii];
            }
            ++out.items_checked;
            if (r.winners[j] == top) break;
            sub.observe(r.winners[j]);
        }
        if (j < r.winners.size()) {
            for (int i = 0; i < top; ++i) scale[static_cast<std::size_t>(i)] = prefix[static_cast<std::size_t>(i)] / r.eps_sub;
            ++j;
        }
    }
    return out;
}

}  // namespace fairdiv
