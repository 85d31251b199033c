#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairdiv/instance.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv::mms {

/// Largest item count mms_exact accepts for n bundles.
std::size_t exact_limit(int n);

struct ExactResult {
    Rational value;
    Partition witness;  ///< indices into the input value list
};

/// Minimum over all n-partitions of the heaviest bundle.
///
/// Branch-and-bound over items in descending order. Bundles with equal load
/// are interchangeable, so only the first of them is branched on. A branch is
/// cut when its heaviest bundle already reaches the incumbent, or when the
/// remaining mass cannot fit strictly below the incumbent in the free room.
/// Throws InstanceTooLarge above exact_limit(n).
ExactResult mms_exact(std::span<const Rational> values, int n);

/// Agent i's exact MMS on the instance.
ExactResult mms_exact(const Instance& inst, AgentId i);

/// Same minimization without the size guard; callers own the running time.
ExactResult mms_exact_unguarded(std::span<const Rational> values, int n);

/// Closed-form MMS of `count` identical items of `value` over n bundles.
Rational type_share(std::int64_t count, int n, const Rational& value);

struct TypeShare {
    Rational value;        ///< V_i^u
    std::int64_t count;    ///< N_i^u
    Rational share;        ///< ceil(N/n) * V
    std::vector<ItemId> items;  ///< M_i^u, arrival order
};

/// Per-agent list of types in order of first appearance.
struct PerTypeMms {
    int n = 0;
    std::vector<std::vector<TypeShare>> agents;

    Rational share_sum(AgentId i) const;
    Rational value_sum(AgentId i) const;
};

/// Fills in `share` for every (agent, type) from its count and value.
PerTypeMms mms_per_type(PerTypeMms input);
PerTypeMms mms_per_type(const Instance& inst);

/// Certified MMS interval for one agent.
struct Bounds {
    Rational lower;   ///< max(total / n, largest item)
    Rational upper;   ///< min(sum of per-type shares, supplied witness)
    Partition upper_witness;  ///< partition attaining `upper`
};

Bounds mms_bounds(const Instance& inst, AgentId i, const std::optional<Partition>& witness = std::nullopt);

/// Union of per-type round-robin splits; its heaviest bundle is at most the per-type share sum.
Partition per_type_partition(const Instance& inst, AgentId i);

struct DecompositionCheck {
    AgentId agent;
    Rational lower;  ///< sum of (share - value)
    Rational exact;
    Rational upper;  ///< sum of shares
    bool pass;
};

/// Checks sum(share - V) <= MMS <= sum(share) for every agent. Throws InstanceTooLarge.
std::vector<DecompositionCheck> check_mms_decomposition(const Instance& inst);

struct AgentReport {
    AgentId agent;
    std::optional<Rational> exact;
    Rational lower;
    Rational upper;
    std::optional<Partition> witness;
};

/// Exact MMS when within the size guard, bounds plus witness otherwise.
std::vector<AgentReport> mms_report(const Instance& inst);
std::string report_to_json(const std::vector<AgentReport>& report);

// Heuristic partitions; each returns a valid n-partition of the given values.

/// Longest-processing-time: descending order, each item onto the lightest bundle.
Partition lpt_partition(std::span<const Rational> values, int n);
/// First-fit into n bins of `capacity`; items that fit nowhere go onto the lightest bin.
Partition first_fit_partition(std::span<const Rational> values, int n, const Rational& capacity);

Rational max_load(std::span<const Rational> values, const Partition& p);

}  // namespace fairdiv::mms
