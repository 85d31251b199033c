#include <algorithm>
#include <charconv>

#include "fairdiv/allocator.hpp"
#include "fairdiv/error.hpp"

namespace fairdiv {

Policy::Policy(int n) : state_(n), n_(n) {
    if (n < 1) throw InvalidInput("policy needs at least one agent");
}

StepRecord Policy::step(const ItemValues& raw) {
    if (raw.size() != static_cast<std::size_t>(n_))
        throw InvalidInput("item has " + std::to_string(raw.size()) + " disutilities, expected " + std::to_string(n_));
    for (const auto& v : raw)
        if (v.sign() <= 0) throw InvalidInput("non-positive disutility " + v.str());

    Typing typing = classify(raw);
    AgentId agent = choose(raw, typing.types);
    if (agent < 0 || agent >= n_) throw InvalidInput(name() + " chose agent " + std::to_string(agent + 1));
    if (n_ >= 2) state_.apply(agent, typing.types);
    items_.push_back(raw);
    owners_.push_back(agent);

    StepRecord s;
    s.item = items_.size() - 1;
    s.raw = raw;
    s.rounded = std::move(typing.rounded);
    s.types = std::move(typing.types);
    s.agent = agent;
    s.mode = typing.mode;
    s.pressures = state_.snapshot();
    return s;
}

Policy::Typing Policy::classify(const ItemValues& raw) { return classify_pow2(raw); }

Policy::Typing Policy::classify_pow2(const ItemValues& raw) {
    Typing t{ItemValues(raw.size()), std::vector<int>(raw.size()), TypingMode::pow2};
    for (std::size_t i = 0; i < raw.size(); ++i) {
        t.rounded[i] = round_up_pow2(raw[i]);
        t.types[i] = state_.register_value(static_cast<AgentId>(i), t.rounded[i]);
    }
    return t;
}

AgentId PressureGreedyPolicy::choose(const ItemValues&, const std::vector<int>& types) { return state_.argmin(types); }

Policy::Typing BiValuePolicy::classify(const ItemValues& raw) {
    if (!fallback_) {
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const auto& seen = distinct_[i];
            if (seen.size() == 2 && std::find(seen.begin(), seen.end(), raw[i]) == seen.end()) {
                fallback_ = true;
                rebuild_pow2();
                break;
            }
        }
    }
    if (fallback_) return classify_pow2(raw);

    Typing t{ItemValues(raw.size()), std::vector<int>(raw.size()), TypingMode::bi_value};
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto agent = static_cast<AgentId>(i);
        auto& seen = distinct_[i];
        if (std::find(seen.begin(), seen.end(), raw[i]) == seen.end()) {
            if (seen.empty()) {
                state_.add_type(agent, raw[i]);
            } else {
                const Rational& first = seen.front();
                Rational ratio = min(first, raw[i]) / max(first, raw[i]);
                if (above_merge_threshold(ratio)) {
                    state_.add_alias(agent, raw[i], 0);
                    state_.set_representative(agent, 0, max(first, raw[i]));
                } else {
                    state_.add_type(agent, raw[i]);
                }
            }
            seen.push_back(raw[i]);
        }
        t.types[i] = *state_.find_type(agent, raw[i]);
        t.rounded[i] = state_.representative(agent, t.types[i]);
    }
    return t;
}

void BiValuePolicy::rebuild_pow2() {
    state_ = PressureState(agents());
    for (std::size_t p = 0; p < items_.size(); ++p) {
        auto typing = classify_pow2(items_[p]);
        if (agents() >= 2) state_.apply(owners_[p], typing.types);
    }
}

AgentId BiValuePolicy::choose(const ItemValues&, const std::vector<int>& types) { return state_.argmin(types); }

AgentId RoundRobinPolicy::choose(const ItemValues&, const std::vector<int>&) {
    AgentId out = next_;
    next_ = (next_ + 1) % agents();
    return out;
}

AgentId MixturePolicy::choose(const ItemValues&, const std::vector<int>& types) {
    switch (rng_() % 3) {
        case 0: return state_.argmin(types);
        case 1: {
            AgentId out = next_;
            next_ = (next_ + 1) % agents();
            return out;
        }
        default: return static_cast<AgentId>(rng_() % static_cast<std::uint64_t>(agents()));
    }
}

AgentId ExternalPolicy::choose(const ItemValues& raw, const std::vector<int>&) { return chooser_(raw, owners_); }

std::unique_ptr<Policy> make_policy(std::string_view name, int n, std::uint64_t seed) {
    if (name == "pressure-greedy") return std::make_unique<PressureGreedyPolicy>(n);
    if (name == "bi-value") return std::make_unique<BiValuePolicy>(n);
    if (name == "round-robin") return std::make_unique<RoundRobinPolicy>(n);
    if (name == "dump-to-one") return std::make_unique<DumpToOnePolicy>(n);
    if (name == "mixture") return std::make_unique<MixturePolicy>(n, seed);
    constexpr std::string_view prefix = "mixture:";
    if (name.starts_with(prefix)) {
        auto digits = name.substr(prefix.size());
        std::uint64_t s = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), s);
        if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
            throw InvalidInput("bad mixture seed in policy name " + std::string(name));
        return std::make_unique<MixturePolicy>(n, s);
    }
    throw InvalidInput("unknown policy " + std::string(name));
}

std::vector<std::string> policy_names() { return {"pressure-greedy", "bi-value", "round-robin", "dump-to-one", "mixture"}; }

std::vector<std::string> policy_zoo() {
    std::vector<std::string> zoo{"pressure-greedy", "bi-value", "round-robin", "dump-to-one"};
    for (int seed = 1; seed <= 5; ++seed) zoo.push_back("mixture:" + std::to_string(seed));
    return zoo;
}

}  // namespace fairdiv
