#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairdiv/instance.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv {

enum class ValueGrid { powers_of_two, uniform_rational, adversarial_near_threshold };

ValueGrid parse_value_grid(std::string_view text);
std::string_view to_string(ValueGrid grid);

struct GeneratorConfig {
    int n = 2;
    std::size_t m = 10;
    int k = 1;              ///< distinct values drawn per agent
    Rational D = Rational(1);  ///< largest / smallest value of any agent is at most D
    ValueGrid grid = ValueGrid::powers_of_two;
    std::uint64_t seed = 0;
};

/// Draws k distinct values per agent with spread <= D, then each item picks one
/// of them per agent, independently and uniformly. Deterministic in the config.
/// Throws InvalidInput when the grid cannot hold k values within spread D.
///
/// The near-threshold grid needs k <= 2; its pairs have smaller/larger ratios
/// just below or just above (sqrt(3) - 1) / 2.
Instance generate_instance(const GeneratorConfig& cfg);

/// FNV-1a 64-bit over the canonical JSON encoding, as 16 hex digits.
std::string instance_digest(const Instance& inst);

/// d <= (2 + sqrt 3) * mms, decided with rational arithmetic only.
bool within_two_plus_sqrt3(const Rational& d, const Rational& mms);

enum class BoundStatus { none, pass, fail, inconclusive };
std::string_view to_string(BoundStatus s);

/// d_A against MMS_i. `exact` means the MMS interval is a single point.
struct AgentRatio {
    AgentId agent = 0;
    Rational d_A;
    Rational mms_lower;
    Rational mms_upper;
    bool exact = false;
    Rational ratio_lower;  ///< d_A / mms_upper
    Rational ratio_upper;  ///< d_A / mms_lower
};

struct PolicyRun {
    std::string policy;
    std::vector<AgentRatio> agents;
    Rational max_pressure;
    int max_types = 0;  ///< K'
    bool trace_ok = true;
    std::string trace_failure;
    bool fell_back = false;  ///< bi-value only
    /// Stacking reduction, run for pressure-greedy with n >= 2.
    std::optional<bool> stacking_consistent;
    std::optional<Rational> stacking_margin;
    std::string stacking_failure;
    std::string bound;  ///< "8K'+2", "2+sqrt3", "n", or empty
    BoundStatus bound_status = BoundStatus::none;

    bool ok() const {
        return trace_ok && stacking_consistent.value_or(true) && bound_status != BoundStatus::fail;
    }
};

struct ExperimentReport {
    std::string digest;
    int n = 0;
    std::size_t m = 0;
    std::vector<PolicyRun> runs;

    bool ok() const;
    const PolicyRun* find(std::string_view policy) const;
};

struct ExperimentChecks {
    bool stacking = true;
    std::uint64_t seed = 0;  ///< forwarded to seeded policies
};

/// Runs each policy online, certifies every agent's ratio, and checks the bounds.
ExperimentReport run_experiment(const Instance& inst, const std::vector<std::string>& policies,
                                const ExperimentChecks& checks = {});

/// Runs independent instances on `threads` workers; the result is sorted by digest.
std::vector<ExperimentReport> run_batch(const std::vector<Instance>& instances, const std::vector<std::string>& policies,
                                        const ExperimentChecks& checks = {}, unsigned threads = 0);

std::string experiment_to_json(const std::vector<ExperimentReport>& reports);
/// One row per (instance, policy, agent); decimals to 20 significant digits beside exact strings.
std::string experiment_to_csv(const std::vector<ExperimentReport>& reports);

}  // namespace fairdiv
