#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairdiv/rational.hpp"

namespace fairdiv {

/// Agent and item indices are 0-based in memory and 1-based in every file format.
using AgentId = int;
using ItemId = std::size_t;

/// Disutility vector of one chore, one entry per agent.
using ItemValues = std::vector<Rational>;

/// An ordered stream of chores with strictly positive disutilities.
class Instance {
public:
    Instance() = default;
    /// Throws InvalidInput when n < 1, a vector has the wrong length, or a value is not positive.
    Instance(int n, std::vector<ItemValues> items);

    int agents() const { return n_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

    const ItemValues& item(ItemId j) const { return items_[j]; }
    const Rational& d(AgentId i, ItemId j) const { return items_[j][static_cast<std::size_t>(i)]; }
    const std::vector<ItemValues>& items() const { return items_; }

    /// All of agent i's values in arrival order.
    std::vector<Rational> agent_values(AgentId i) const;
    Rational total(AgentId i) const;

    /// Appends an item after validating it.
    void push_back(ItemValues values);
    /// The first `m` items.
    Instance prefix(std::size_t m) const;

    friend bool operator==(const Instance&, const Instance&) = default;

private:
    int n_ = 0;
    std::vector<ItemValues> items_;
};

/// Item j (in arrival order) goes to agent owner[j].
struct Allocation {
    std::vector<AgentId> owner;

    std::size_t size() const { return owner.size(); }
    std::vector<std::vector<ItemId>> bundles(int n) const;
    Rational disutility(const Instance& inst, AgentId i) const;

    friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// n bundles of item indices; used for MMS witnesses.
using Partition = std::vector<std::vector<ItemId>>;

/// True when every item 0..m-1 appears in exactly one of the n bundles.
bool is_partition(const Partition& p, std::size_t m, int n);
/// Agent i's disutility of the heaviest bundle of `p`.
Rational max_bundle(const Instance& inst, AgentId i, const Partition& p);

struct InstanceStats {
    int k = 0;     ///< max over agents of the number of distinct values
    Rational D;    ///< max over agents of (largest value / smallest value)
};

InstanceStats instance_stats(const Instance& inst);

// JSON file formats. Rationals are written as "p" or "p/q" strings.
Instance load_instance(std::string_view bytes);
std::string save_instance(const Instance& inst);
/// `n` bounds agent indices; `m` (when nonzero) must equal the assignment length.
Allocation load_allocation(std::string_view bytes, int n, std::size_t m = 0);
std::string save_allocation(const Allocation& alloc);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace fairdiv
