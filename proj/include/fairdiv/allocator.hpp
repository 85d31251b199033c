#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fairdiv/instance.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv {

/// Smallest 2^z (z any integer) that is >= d. Throws InvalidInput unless d > 0.
Rational round_up_pow2(const Rational& d);

/// True when (2r + 1)^2 > 3, i.e. r > (sqrt(3) - 1) / 2, decided exactly.
bool above_merge_threshold(const Rational& r);

/// Per-agent type registries and pressures H_i^u.
///
/// Types are numbered per agent in order of registration. A registry key is a
/// disutility value; several keys may alias one type.
class PressureState {
public:
    explicit PressureState(int n = 0);

    int agents() const { return n_; }
    int type_count(AgentId i) const { return static_cast<int>(agents_[idx(i)].pressure.size()); }
    int max_type_count() const;

    std::optional<int> find_type(AgentId i, const Rational& key) const;
    /// New type with pressure 0 and representative value `key`.
    int add_type(AgentId i, const Rational& key);
    void add_alias(AgentId i, const Rational& key, int type);
    void set_representative(AgentId i, int type, const Rational& value);
    /// find_type, falling back to add_type.
    int register_value(AgentId i, const Rational& key);

    const Rational& pressure(AgentId i, int type) const { return agents_[idx(i)].pressure[static_cast<std::size_t>(type)]; }
    void set_pressure(AgentId i, int type, const Rational& value);
    const Rational& representative(AgentId i, int type) const {
        return agents_[idx(i)].representative[static_cast<std::size_t>(type)];
    }

    /// Agent minimizing H_i^{types[i]}; ties go to the lowest index.
    AgentId argmin(const std::vector<int>& types) const;
    /// Winner +1 on its type, everyone else -1/(n-1) on theirs. Requires n >= 2.
    void apply(AgentId winner, const std::vector<int>& types);

    std::vector<std::vector<Rational>> snapshot() const;
    /// Largest pressure over all agents and types; 0 before any type exists.
    Rational max_pressure() const;

private:
    struct AgentTypes {
        std::map<Rational, int> index;
        std::vector<Rational> representative;
        std::vector<Rational> pressure;
    };
    static std::size_t idx(AgentId i) { return static_cast<std::size_t>(i); }

    int n_;
    Rational skip_;  ///< 1/(n-1), or 0 when n = 1
    std::vector<AgentTypes> agents_;
};

enum class TypingMode { pow2, bi_value };

std::string_view to_string(TypingMode mode);

struct StepRecord {
    ItemId item = 0;
    ItemValues raw;
    /// Value used for typing: the power-of-two rounding, or the merged type's
    /// representative under bi-value typing.
    ItemValues rounded;
    std::vector<int> types;  ///< u_i(j), 0-based
    AgentId agent = 0;
    TypingMode mode = TypingMode::pow2;
    std::vector<std::vector<Rational>> pressures;  ///< after the step

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct RunTrace {
    int n = 0;
    std::string policy;
    std::vector<StepRecord> steps;

    Allocation allocation() const;
    friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

/// One JSON object per line: item, d, rounded, types, agent, mode, pressures, policy (1-based indices).
std::string trace_to_jsonl(const RunTrace& trace);
RunTrace trace_from_jsonl(std::string_view text, int n);

/// Online allocation policy.
///
/// Every policy keeps the same pressure ledger so that traces are comparable;
/// only the choice of recipient differs. Decisions depend on nothing but the
/// items seen so far and the policy's own earlier choices.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string name() const = 0;
    int agents() const { return n_; }

    /// Allocates one item and returns the resulting trace step.
    StepRecord step(const ItemValues& raw);

    const PressureState& pressures() const { return state_; }
    const std::vector<AgentId>& history() const { return owners_; }
    const std::vector<ItemValues>& items() const { return items_; }

protected:
    explicit Policy(int n);

    struct Typing {
        ItemValues rounded;
        std::vector<int> types;
        TypingMode mode;
    };

    /// Registers the item's types in the ledger. Default: power-of-two rounding.
    virtual Typing classify(const ItemValues& raw);
    virtual AgentId choose(const ItemValues& raw, const std::vector<int>& types) = 0;

    Typing classify_pow2(const ItemValues& raw);

    PressureState state_;
    std::vector<ItemValues> items_;
    std::vector<AgentId> owners_;

private:
    int n_;
};

/// Greedy over pressure with power-of-two rounding.
class PressureGreedyPolicy : public Policy {
public:
    explicit PressureGreedyPolicy(int n) : Policy(n) {}
    std::string name() const override { return "pressure-greedy"; }

protected:
    AgentId choose(const ItemValues&, const std::vector<int>& types) override;
};

/// Greedy over pressure without rounding for agents with at most two values.
///
/// An agent's second distinct value shares the first value's type when
/// smaller/larger > (sqrt(3)-1)/2. A third distinct value for any agent
/// switches the whole run to power-of-two typing, with pressures rebuilt from
/// the closed form over the history.
class BiValuePolicy : public Policy {
public:
    explicit BiValuePolicy(int n) : Policy(n), distinct_(static_cast<std::size_t>(n)) {}
    std::string name() const override { return "bi-value"; }
    bool fell_back() const { return fallback_; }

protected:
    Typing classify(const ItemValues& raw) override;
    AgentId choose(const ItemValues&, const std::vector<int>& types) override;

private:
    void rebuild_pow2();

    bool fallback_ = false;
    std::vector<std::vector<Rational>> distinct_;
};

class RoundRobinPolicy : public Policy {
public:
    explicit RoundRobinPolicy(int n) : Policy(n) {}
    std::string name() const override { return "round-robin"; }

protected:
    AgentId choose(const ItemValues&, const std::vector<int>&) override;

private:
    AgentId next_ = 0;
};

class DumpToOnePolicy : public Policy {
public:
    explicit DumpToOnePolicy(int n, AgentId target = 0) : Policy(n), target_(target) {}
    std::string name() const override { return "dump-to-one"; }

protected:
    AgentId choose(const ItemValues&, const std::vector<int>&) override { return target_; }

private:
    AgentId target_;
};

/// Per item, a seeded draw picks greedy, round-robin, or a uniformly random agent.
class MixturePolicy : public Policy {
public:
    MixturePolicy(int n, std::uint64_t seed) : Policy(n), seed_(seed), rng_(seed) {}
    std::string name() const override { return "mixture:" + std::to_string(seed_); }

protected:
    AgentId choose(const ItemValues&, const std::vector<int>& types) override;

private:
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    AgentId next_ = 0;
};

/// Delegates each decision to a callback of (item, past owners).
class ExternalPolicy : public Policy {
public:
    using Chooser = std::function<AgentId(const ItemValues&, const std::vector<AgentId>&)>;
    ExternalPolicy(int n, std::string name, Chooser chooser)
        : Policy(n), name_(std::move(name)), chooser_(std::move(chooser)) {}
    std::string name() const override { return name_; }

protected:
    AgentId choose(const ItemValues& raw, const std::vector<int>&) override;

private:
    std::string name_;
    Chooser chooser_;
};

/// Accepts pressure-greedy, bi-value, round-robin, dump-to-one, and mixture or mixture:<seed>.
std::unique_ptr<Policy> make_policy(std::string_view name, int n, std::uint64_t seed = 0);
std::vector<std::string> policy_names();
/// The four named policies followed by mixture:1 through mixture:5.
std::vector<std::string> policy_zoo();

struct RunResult {
    Allocation allocation;
    RunTrace trace;
};

RunResult run_online(const Instance& inst, Policy& policy);
RunResult run_online(const Instance& inst, std::string_view policy, std::uint64_t seed = 0);

/// Outcome of re-deriving every trace invariant from the raw items and choices.
struct TraceCheck {
    bool closed_form = true;     ///< H = (n|A∩M| - N)/(n-1) at every step
    bool zero_sum = true;        ///< deltas of each step sum to 0
    bool rounding = true;        ///< d <= rounded < 2d on power-of-two steps
    bool pressure_bound = true;  ///< max H <= 2K' on power-of-two steps
    bool bi_value_bound = true;  ///< max H <= 2 + 1/(n-1) on bi-value steps
    bool count_bound = true;     ///< |A∩M| <= ceil(N/n) - 1 + 2K'
    Rational max_pressure;
    int max_types = 0;           ///< K': largest type count of any agent
    std::string failure;         ///< first failure, empty when all pass

    bool ok() const { return closed_form && zero_sum && rounding && pressure_bound && bi_value_bound && count_bound; }
};

TraceCheck verify_trace(const RunTrace& trace);

}  // namespace fairdiv
