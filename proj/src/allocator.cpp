#include "fairdiv/allocator.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairdiv/error.hpp"

namespace fairdiv {

Rational round_up_pow2(const Rational& d) {
    if (d.sign() <= 0) throw InvalidInput("round_up_pow2 of non-positive value " + d.str());
    long z = d.floor_log2();
    Rational p = Rational::pow2(z);
    return p == d ? p : Rational::pow2(z + 1);
}

bool above_merge_threshold(const Rational& r) {
    if (r.sign() <= 0) return false;
    Rational s = Rational(2) * r + Rational(1);
    return s * s > Rational(3);
}

PressureState::PressureState(int n)
    : n_(n), skip_(n >= 2 ? Rational(1, n - 1) : Rational()), agents_(static_cast<std::size_t>(std::max(n, 0))) {}

int PressureState::max_type_count() const {
    int k = 0;
    for (AgentId i = 0; i < n_; ++i) k = std::max(k, type_count(i));
    return k;
}

std::optional<int> PressureState::find_type(AgentId i, const Rational& key) const {
    const auto& index = agents_[idx(i)].index;
    auto it = index.find(key);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

int PressureState::add_type(AgentId i, const Rational& key) {
    auto& a = agents_[idx(i)];
    int type = static_cast<int>(a.pressure.size());
    a.index.emplace(key, type);
    a.representative.push_back(key);
    a.pressure.emplace_back();
    return type;
}

void PressureState::add_alias(AgentId i, const Rational& key, int type) { agents_[idx(i)].index.emplace(key, type); }

void PressureState::set_representative(AgentId i, int type, const Rational& value) {
    agents_[idx(i)].representative[static_cast<std::size_t>(type)] = value;
}

int PressureState::register_value(AgentId i, const Rational& key) {
    if (auto t = find_type(i, key)) return *t;
    return add_type(i, key);
}

void PressureState::set_pressure(AgentId i, int type, const Rational& value) {
    agents_[idx(i)].pressure[static_cast<std::size_t>(type)] = value;
}

AgentId PressureState::argmin(const std::vector<int>& types) const {
    AgentId best = 0;
    for (AgentId i = 1; i < n_; ++i)
        if (pressure(i, types[idx(i)]) < pressure(best, types[idx(best)])) best = i;
    return best;
}

void PressureState::apply(AgentId winner, const std::vector<int>& types) {
    for (AgentId i = 0; i < n_; ++i) {
        auto& h = agents_[idx(i)].pressure[static_cast<std::size_t>(types[idx(i)])];
        if (i == winner)
            h += Rational(1);
        else
            h -= skip_;
    }
}

std::vector<std::vector<Rational>> PressureState::snapshot() const {
    std::vector<std::vector<Rational>> out;
    out.reserve(agents_.size());
    for (const auto& a : agents_) out.push_back(a.pressure);
    return out;
}

Rational PressureState::max_pressure() const {
    Rational best;
    for (const auto& a : agents_)
        for (const auto& h : a.pressure) best = max(best, h);
    return best;
}

std::string_view to_string(TypingMode mode) { return mode == TypingMode::pow2 ? "pow2" : "bi-value"; }

Allocation RunTrace::allocation() const {
    Allocation a;
    a.owner.reserve(steps.size());
    for (const auto& s : steps) a.owner.push_back(s.agent);
    return a;
}

namespace {

nlohmann::json rationals_to_json(const std::vector<Rational>& values) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : values) out.push_back(v.str());
    return out;
}

std::vector<Rational> rationals_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("expected an array of rationals");
    std::vector<Rational> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw ParseError("rationals must be strings");
        out.push_back(Rational::parse(v.get<std::string>()));
    }
    return out;
}

}  // namespace

std::string trace_to_jsonl(const RunTrace& trace) {
    std::string out;
    for (const auto& s : trace.steps) {
        nlohmann::json types = nlohmann::json::array();
        for (int u : s.types) types.push_back(u + 1);
        nlohmann::json pressures = nlohmann::json::array();
        for (const auto& agent : s.pressures) pressures.push_back(rationals_to_json(agent));
        nlohmann::json line = {{"item", s.item + 1},
                               {"d", rationals_to_json(s.raw)},
                               {"rounded", rationals_to_json(s.rounded)},
                               {"types", std::move(types)},
                               {"agent", s.agent + 1},
                               {"mode", std::string(to_string(s.mode))},
                               {"pressures", std::move(pressures)},
                               {"policy", trace.policy}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

RunTrace trace_from_jsonl(std::string_view text, int n) {
    RunTrace trace;
    trace.n = n;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            StepRecord s;
            s.item = j.at("item").get<std::size_t>() - 1;
            s.raw = rationals_from_json(j.at("d"));
            s.rounded = rationals_from_json(j.at("rounded"));
            for (const auto& u : j.at("types")) s.types.push_back(u.get<int>() - 1);
            s.agent = j.at("agent").get<int>() - 1;
            std::string mode = j.at("mode").get<std::string>();
            if (mode != "pow2" && mode != "bi-value") throw ParseError("unknown typing mode " + mode);
            s.mode = mode == "pow2" ? TypingMode::pow2 : TypingMode::bi_value;
            for (const auto& agent : j.at("pressures")) s.pressures.push_back(rationals_from_json(agent));
            if (s.raw.size() != static_cast<std::size_t>(n) || s.types.size() != static_cast<std::size_t>(n) ||
                s.agent < 0 || s.agent >= n)
                throw ParseError("trace step does not match n = " + std::to_string(n));
            if (j.contains("policy")) trace.policy = j["policy"].get<std::string>();
            trace.steps.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("trace line: ") + e.what());
        }
    }
    return trace;
}

RunResult run_online(const Instance& inst, Policy& policy) {
    if (policy.agents() != inst.agents()) throw InvalidInput("policy and instance disagree on n");
    RunResult out;
    out.trace.n = inst.agents();
    out.trace.policy = policy.name();
    for (const auto& item : inst.items()) out.trace.steps.push_back(policy.step(item));
    out.allocation = out.trace.allocation();
    return out;
}

RunResult run_online(const Instance& inst, std::string_view policy, std::uint64_t seed) {
    auto p = make_policy(policy, inst.agents(), seed);
    return run_online(inst, *p);
}

namespace {

/// Counts behind the closed form, keyed per agent in order of first appearance.
struct Ledger {
    struct Agent {
        std::map<Rational, int> index;
        std::vector<std::int64_t> received;
        std::vector<std::int64_t> seen;
    };
    std::vector<Agent> agents;

    explicit Ledger(int n) : agents(static_cast<std::size_t>(n)) {}

    int add(AgentId i, const Rational& key, bool received) {
        auto& a = agents[static_cast<std::size_t>(i)];
        auto [it, inserted] = a.index.emplace(key, static_cast<int>(a.seen.size()));
        if (inserted) {
            a.seen.push_back(0);
            a.received.push_back(0);
        }
        auto u = static_cast<std::size_t>(it->second);
        ++a.seen[u];
        if (received) ++a.received[u];
        return it->second;
    }
};

Rational sum_all(const std::vector<std::vector<Rational>>& p) {
    Rational s;
    for (const auto& a : p)
        for (const auto& h : a) s += h;
    return s;
}

}  // namespace

TraceCheck verify_trace(const RunTrace& trace) {
    TraceCheck out;
    const int n = trace.n;
    auto fail = [&](bool& flag, const std::string& why) {
        flag = false;
        if (out.failure.empty()) out.failure = why;
    };

    Ledger ledger(n);
    std::optional<TypingMode> mode;
    const Rational bi_bound = n >= 2 ? Rational(2) + Rational(1, n - 1) : Rational(2);

    std::set<Rational> lone_types;
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const auto& s = trace.steps[t];
        const std::string at = "step " + std::to_string(t + 1) + ": ";
        if (s.pressures.size() != static_cast<std::size_t>(n)) {
            fail(out.closed_form, at + "pressure snapshot has wrong agent count");
            continue;
        }
        if (n == 1) {
            // No pressure moves, but rounding and the type count still apply.
            if (sum_all(s.pressures) != Rational()) fail(out.closed_form, at + "pressure moved with one agent");
            if (s.mode == TypingMode::pow2) {
                Rational key = round_up_pow2(s.raw[0]);
                if (s.rounded[0] != key || !(s.raw[0] <= key && key < Rational(2) * s.raw[0]))
                    fail(out.rounding, at + "rounding sandwich broken for agent 1");
                lone_types.insert(key);
                out.max_types = std::max(out.max_types, static_cast<int>(lone_types.size()));
            }
            continue;
        }

        bool switched = mode && *mode != s.mode;
        if (!mode || switched) {
            // Typing regime changed: re-key all earlier items under the new regime.
            ledger = Ledger(n);
            for (std::size_t p = 0; p < t; ++p) {
                const auto& q = trace.steps[p];
                for (AgentId i = 0; i < n; ++i) {
                    auto ii = static_cast<std::size_t>(i);
                    Rational key = s.mode == TypingMode::pow2 ? round_up_pow2(q.raw[ii]) : Rational(q.types[ii]);
                    ledger.add(i, key, q.agent == i);
                }
            }
        }
        mode = s.mode;

        for (AgentId i = 0; i < n; ++i) {
            auto ii = static_cast<std::size_t>(i);
            Rational key;
            if (s.mode == TypingMode::pow2) {
                key = round_up_pow2(s.raw[ii]);
                if (s.rounded[ii] != key || !(s.raw[ii] <= key && key < Rational(2) * s.raw[ii]))
                    fail(out.rounding, at + "rounding sandwich broken for agent " + std::to_string(i + 1));
            } else {
                key = Rational(s.types[ii]);
            }
            int u = ledger.add(i, key, s.agent == i);
            if (u != s.types[ii]) fail(out.closed_form, at + "type index disagrees with first-appearance order");
        }

        if (t > 0 && !switched && sum_all(s.pressures) != sum_all(trace.steps[t - 1].pressures))
            fail(out.zero_sum, at + "pressure deltas do not sum to zero");

        int k_now = 0;
        for (const auto& a : ledger.agents) k_now = std::max(k_now, static_cast<int>(a.seen.size()));
        if (s.mode == TypingMode::pow2) out.max_types = std::max(out.max_types, k_now);
        const Rational alpha(2 * static_cast<std::int64_t>(out.max_types));

        for (AgentId i = 0; i < n; ++i) {
            const auto& a = ledger.agents[static_cast<std::size_t>(i)];
            const auto& snap = s.pressures[static_cast<std::size_t>(i)];
            if (snap.size() != a.seen.size()) {
                fail(out.closed_form, at + "agent " + std::to_string(i + 1) + " has the wrong number of types");
                continue;
            }
            for (std::size_t u = 0; u < snap.size(); ++u) {
                Rational expected = Rational(static_cast<std::int64_t>(n) * a.received[u] - a.seen[u], n - 1);
                if (snap[u] != expected)
                    fail(out.closed_form, at + "H for agent " + std::to_string(i + 1) + " type " +
                                              std::to_string(u + 1) + " is " + snap[u].str() + ", closed form " +
                                              expected.str());
                out.max_pressure = max(out.max_pressure, snap[u]);
                if (s.mode == TypingMode::pow2) {
                    if (snap[u] > alpha)
                        fail(out.pressure_bound, at + "pressure " + snap[u].str() + " exceeds 2K' = " + alpha.str());
                    std::int64_t limit = ceil_div(a.seen[u], n) - 1 + 2 * static_cast<std::int64_t>(out.max_types);
                    if (a.received[u] > limit)
                        fail(out.count_bound, at + "count bound broken for agent " + std::to_string(i + 1));
                } else if (snap[u] > bi_bound) {
                    fail(out.bi_value_bound, at + "bi-value pressure " + snap[u].str() + " exceeds " + bi_bound.str());
                }
            }
        }
    }
    return out;
}

}  // namespace fairdiv
