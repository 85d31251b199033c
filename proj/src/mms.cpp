#include "fairdiv/mms.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include <json.hpp>

#include "fairdiv/error.hpp"

namespace fairdiv::mms {
namespace {

std::vector<std::size_t> descending_order(std::span<const Rational> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[b] < values[a]; });
    return order;
}

class BranchAndBound {
public:
    BranchAndBound(std::span<const Rational> values, int n) : n_(n) {
        auto order = descending_order(values);
        for (std::size_t idx : order) {
            items_.push_back(values[idx]);
            original_.push_back(idx);
        }
        suffix_.assign(items_.size() + 1, Rational());
        for (std::size_t p = items_.size(); p-- > 0;) suffix_[p] = suffix_[p + 1] + items_[p];
        loads_.assign(static_cast<std::size_t>(n), Rational());
        assign_.assign(items_.size(), 0);
    }

    ExactResult solve() {
        std::vector<Rational> sorted(items_);
        Partition start = lpt_partition(sorted, n_);
        best_ = max_load(sorted, start);
        best_assign_.assign(items_.size(), 0);
        for (std::size_t b = 0; b < start.size(); ++b)
            for (ItemId p : start[b]) best_assign_[p] = static_cast<int>(b);

        lower_ = suffix_[0] / Rational(n_);
        if (!items_.empty()) lower_ = max(lower_, items_[0]);
        if (best_ > lower_) search(0, Rational());

        ExactResult out{best_, Partition(static_cast<std::size_t>(n_))};
        for (std::size_t p = 0; p < items_.size(); ++p)
            out.witness[static_cast<std::size_t>(best_assign_[p])].push_back(original_[p]);
        for (auto& bundle : out.witness) std::sort(bundle.begin(), bundle.end());
        return out;
    }

private:
    void search(std::size_t pos, const Rational& current_max) {
        if (done_) return;
        if (pos == items_.size()) {
            if (current_max < best_) {
                best_ = current_max;
                best_assign_ = assign_;
                if (best_ == lower_) done_ = true;
            }
            return;
        }
        Rational room;
        for (const auto& load : loads_) room += best_ - load;
        if (suffix_[pos] >= room) return;

        const Rational& v = items_[pos];
        for (std::size_t b = 0; b < loads_.size(); ++b) {
            bool duplicate = false;
            for (std::size_t c = 0; c < b && !duplicate; ++c) duplicate = loads_[c] == loads_[b];
            if (duplicate) continue;
            Rational next = loads_[b] + v;
            if (next >= best_) continue;
            Rational saved = loads_[b];
            loads_[b] = next;
            assign_[pos] = static_cast<int>(b);
            search(pos + 1, max(current_max, next));
            loads_[b] = saved;
            if (done_) return;
        }
    }

    int n_;
    std::vector<Rational> items_;
    std::vector<std::size_t> original_;
    std::vector<Rational> suffix_;
    std::vector<Rational> loads_;
    std::vector<int> assign_;
    std::vector<int> best_assign_;
    Rational best_;
    Rational lower_;
    bool done_ = false;
};

}  // namespace

std::size_t exact_limit(int n) {
    if (n <= 1) return std::numeric_limits<std::size_t>::max();
    switch (n) {
        case 2: return 24;
        case 3: return 18;
        case 4: return 16;
        default: return 14;
    }
}

ExactResult mms_exact_unguarded(std::span<const Rational> values, int n) {
    if (n < 1) throw InvalidInput("bundle count must be at least 1");
    if (values.empty()) return ExactResult{Rational(), Partition(static_cast<std::size_t>(n))};
    for (const auto& v : values)
        if (v.sign() <= 0) throw InvalidInput("non-positive value in mms_exact");
    return BranchAndBound(values, n).solve();
}

ExactResult mms_exact(std::span<const Rational> values, int n) {
    if (values.size() > static_cast<std::size_t>(std::max(n, 1)) && values.size() > exact_limit(n))
        throw InstanceTooLarge("exact MMS refused: " + std::to_string(values.size()) + " items over " +
                               std::to_string(n) + " bundles exceeds the limit of " + std::to_string(exact_limit(n)));
    return mms_exact_unguarded(values, n);
}

ExactResult mms_exact(const Instance& inst, AgentId i) {
    auto values = inst.agent_values(i);
    return mms_exact(values, inst.agents());
}

Rational type_share(std::int64_t count, int n, const Rational& value) {
    return Rational(ceil_div(count, n)) * value;
}

Rational PerTypeMms::share_sum(AgentId i) const {
    Rational sum;
    for (const auto& t : agents[static_cast<std::size_t>(i)]) sum += t.share;
    return sum;
}

Rational PerTypeMms::value_sum(AgentId i) const {
    Rational sum;
    for (const auto& t : agents[static_cast<std::size_t>(i)]) sum += t.value;
    return sum;
}

PerTypeMms mms_per_type(PerTypeMms input) {
    for (auto& agent : input.agents)
        for (auto& t : agent) {
            if (t.count < 0) throw InvalidInput("negative type count");
            if (t.value.sign() <= 0) throw InvalidInput("non-positive type value");
            t.share = type_share(t.count, input.n, t.value);
        }
    return input;
}

PerTypeMms mms_per_type(const Instance& inst) {
    PerTypeMms out;
    out.n = inst.agents();
    out.agents.resize(static_cast<std::size_t>(inst.agents()));
    for (AgentId i = 0; i < inst.agents(); ++i) {
        std::map<Rational, std::size_t> index;
        auto& types = out.agents[static_cast<std::size_t>(i)];
        for (ItemId j = 0; j < inst.size(); ++j) {
            const Rational& v = inst.d(i, j);
            auto [it, inserted] = index.emplace(v, types.size());
            if (inserted) types.push_back(TypeShare{v, 0, Rational(), {}});
            auto& t = types[it->second];
            ++t.count;
            t.items.push_back(j);
        }
    }
    return mms_per_type(std::move(out));
}

Partition per_type_partition(const Instance& inst, AgentId i) {
    Partition p(static_cast<std::size_t>(inst.agents()));
    auto types = mms_per_type(inst);
    std::size_t cursor = 0;
    for (const auto& t : types.agents[static_cast<std::size_t>(i)])
        for (ItemId j : t.items) p[cursor++ % p.size()].push_back(j);
    for (auto& bundle : p) std::sort(bundle.begin(), bundle.end());
    return p;
}

Bounds mms_bounds(const Instance& inst, AgentId i, const std::optional<Partition>& witness) {
    if (inst.empty()) throw InvalidInput("mms_bounds of an empty instance");
    Bounds b;
    Rational largest;
    for (ItemId j = 0; j < inst.size(); ++j) largest = max(largest, inst.d(i, j));
    b.lower = max(inst.total(i) / Rational(inst.agents()), largest);
    b.upper_witness = per_type_partition(inst, i);
    b.upper = max_bundle(inst, i, b.upper_witness);
    if (witness) {
        if (!is_partition(*witness, inst.size(), inst.agents()))
            throw InvalidInput("witness is not a partition of the instance's items");
        Rational w = max_bundle(inst, i, *witness);
        if (w < b.upper) {
            b.upper = w;
            b.upper_witness = *witness;
        }
    }
    return b;
}

std::vector<DecompositionCheck> check_mms_decomposition(const Instance& inst) {
    auto types = mms_per_type(inst);
    std::vector<DecompositionCheck> out;
    for (AgentId i = 0; i < inst.agents(); ++i) {
        DecompositionCheck c{i, types.share_sum(i) - types.value_sum(i), mms_exact(inst, i).value,
                             types.share_sum(i), false};
        c.pass = c.lower <= c.exact && c.exact <= c.upper;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<AgentReport> mms_report(const Instance& inst) {
    std::vector<AgentReport> out;
    for (AgentId i = 0; i < inst.agents(); ++i) {
        AgentReport r{i, std::nullopt, Rational(), Rational(), std::nullopt};
        auto bounds = mms_bounds(inst, i);
        r.lower = bounds.lower;
        if (inst.size() <= exact_limit(inst.agents()) || inst.size() <= static_cast<std::size_t>(inst.agents())) {
            auto exact = mms_exact(inst, i);
            r.exact = exact.value;
            r.upper = exact.value;
            r.witness = exact.witness;
        } else {
            auto values = inst.agent_values(i);
            Partition lpt = lpt_partition(values, inst.agents());
            auto improved = mms_bounds(inst, i, lpt);
            r.upper = improved.upper;
            r.witness = improved.upper_witness;
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string report_to_json(const std::vector<AgentReport>& report) {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& r : report) {
        nlohmann::json a = {{"agent", r.agent + 1}, {"lower", r.lower.str()}, {"upper", r.upper.str()}};
        a["exact"] = r.exact ? nlohmann::json(r.exact->str()) : nlohmann::json(nullptr);
        if (r.witness) {
            nlohmann::json w = nlohmann::json::array();
            for (const auto& bundle : *r.witness) {
                nlohmann::json b = nlohmann::json::array();
                for (ItemId j : bundle) b.push_back(j + 1);
                w.push_back(std::move(b));
            }
            a["witness"] = std::move(w);
        }
        agents.push_back(std::move(a));
    }
    return nlohmann::json{{"agents", std::move(agents)}}.dump() + "\n";
}

Partition lpt_partition(std::span<const Rational> values, int n) {
    Partition p(static_cast<std::size_t>(n));
    std::vector<Rational> loads(static_cast<std::size_t>(n));
    for (std::size_t idx : descending_order(values)) {
        std::size_t b = static_cast<std::size_t>(std::min_element(loads.begin(), loads.end()) - loads.begin());
        loads[b] += values[idx];
        p[b].push_back(idx);
    }
    for (auto& bundle : p) std::sort(bundle.begin(), bundle.end());
    return p;
}

Partition first_fit_partition(std::span<const Rational> values, int n, const Rational& capacity) {
    Partition p(static_cast<std::size_t>(n));
    std::vector<Rational> loads(static_cast<std::size_t>(n));
    for (std::size_t idx = 0; idx < values.size(); ++idx) {
        std::size_t target = loads.size();
        for (std::size_t b = 0; b < loads.size(); ++b)
            if (loads[b] + values[idx] <= capacity) {
                target = b;
                break;
            }
        if (target == loads.size())
            target = static_cast<std::size_t>(std::min_element(loads.begin(), loads.end()) - loads.begin());
        loads[target] += values[idx];
        p[target].push_back(idx);
    }
    return p;
}

Rational max_load(std::span<const Rational> values, const Partition& p) {
    Rational best;
    for (const auto& bundle : p) {
        Rational load;
        for (ItemId j : bundle) load += values[j];
        best = max(best, load);
    }
    return best;
}

}  // namespace fairdiv::mms
