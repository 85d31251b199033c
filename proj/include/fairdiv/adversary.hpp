#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairdiv/allocator.hpp"
#include "fairdiv/instance.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv {

enum class MmsSource { exact, witness, empty };

/// Certified lower bound d_A / mms_upper on one agent's competitive ratio.
struct RatioCertificate {
    AgentId agent = 0;
    Rational d_A;
    Rational mms_upper;
    MmsSource source = MmsSource::empty;
    std::string witness_kind;  ///< "exact", "lpt", "first-fit", "per-type", or a supplied label
    Partition witness;
    Rational ratio_lower = Rational(1);  ///< 1 by convention when nothing has arrived
};

std::string certificate_to_json(const RatioCertificate& c);
/// Recomputes d_A, the witness's heaviest bundle, and the ratio from scratch.
bool verify_certificate(const Instance& inst, const Allocation& alloc, const RatioCertificate& c);

/// Candidate MMS witness proposed by an adversary or a caller.
struct LabeledWitness {
    std::string label;
    std::optional<AgentId> agent;  ///< applies to every agent when empty
    Partition partition;
};

struct CertifyOptions {
    std::vector<LabeledWitness> witnesses;
    /// Each s adds first-fit bins of capacity (1 + 2s) * (largest item).
    std::vector<Rational> bin_slacks;
};

/// Certificate for one agent: exact MMS when within the size guard, else the best witness.
RatioCertificate certify_agent(const Instance& inst, const Allocation& alloc, AgentId i, const CertifyOptions& opts = {});
std::vector<RatioCertificate> certify_ratio(const Instance& inst, const Allocation& alloc, const CertifyOptions& opts = {});

/// Adaptive item generator for a lower-bound game.
class Adversary {
public:
    virtual ~Adversary() = default;
    virtual int agents() const = 0;
    virtual Rational epsilon() const = 0;
    virtual std::string name() const = 0;

    virtual ItemValues next() = 0;
    virtual void observe(AgentId winner) = 0;

    /// Witness suggestions for the current prefix.
    virtual CertifyOptions hints() const { return {}; }
    /// True once the adversary itself has certified a crossing.
    virtual bool finished() const { return false; }
};

/// Two-agent game with eps1 = eps/2 and eps2 = 1/ceil(3/eps).
class TwoAgentAdversary : public Adversary {
public:
    explicit TwoAgentAdversary(Rational eps);

    int agents() const override { return 2; }
    Rational epsilon() const override { return eps_; }
    std::string name() const override { return "two-agent"; }
    const Rational& eps1() const { return eps1_; }
    const Rational& eps2() const { return eps2_; }
    /// Item index (0-based) of agent 2's first take.
    std::optional<std::size_t> first_take() const { return first2_; }

    ItemValues next() override;
    void observe(AgentId winner) override;
    /// Every two-bundle prefix split, for both agents.
    CertifyOptions hints() const override;

private:
    Rational eps_, eps1_, eps2_;
    std::vector<ItemValues> items_;
    std::vector<AgentId> owners_;
    Rational sum2_;
    std::optional<std::size_t> first2_;
    bool pending_ = false;
};

/// One level's view of its window: agents 0..level-1, items indexed from `offset`.
struct LevelRecord {
    int level = 1;
    std::size_t offset = 0;   ///< global index of the window's first item
    Rational eps;             ///< the level's target gap
    Rational eps_sub;         ///< eps / n, passed to the sub-level
    Rational eps_top;         ///< eps / (n (n + 3)), drives the top agent
    std::size_t horizon = 0;  ///< a-sequence pin index T (a_{T+1} = V)
    std::size_t game_horizon = 0;  ///< pin index handed to levels >= 3
    std::vector<ItemValues> values;
    std::vector<AgentId> winners;
    std::optional<std::size_t> first_take;  ///< local index of the top agent's first take
    Rational V;
    std::optional<std::size_t> dagger;      ///< first local index with d_top(A_top) >= n V
};

/// A level lifting a crossing from its sub-level, or its top agent crossing.
struct WindowEvent {
    int level = 1;
    std::size_t offset = 0;
    AgentId agent = 0;
    bool lifted = false;   ///< came from the sub-level
    Rational d_A;
    Rational mms_upper;
    Rational threshold;    ///< n - eps of the level
    bool pass = false;
};

class Level;

/// Recursive n-agent construction, nested one level per agent.
///
/// Agents below the level's top are driven by a fresh sub-level restarted
/// after every take by the top agent and scaled by d_i([j*]) / eps_sub. The top
/// agent sees a geometric blow-up until its first take, then a_s where s
/// counts items since its last take. Level 2 pins the a-sequence at T = n;
/// higher levels pin it at `horizon`, which must bound any idle window.
class RecursiveAdversary : public Adversary {
public:
    RecursiveAdversary(int n, Rational eps, std::size_t horizon);
    ~RecursiveAdversary() override;

    int agents() const override { return n_; }
    Rational epsilon() const override { return eps_; }
    std::string name() const override { return "recursive"; }

    ItemValues next() override;
    void observe(AgentId winner) override;
    CertifyOptions hints() const override;
    bool finished() const override { return crossing_.has_value(); }

    /// Every level window seen so far, including the live ones.
    std::vector<LevelRecord> records() const;
    const std::vector<WindowEvent>& events() const { return *events_; }

private:
    int n_;
    Rational eps_;
    std::size_t horizon_;
    std::shared_ptr<std::vector<WindowEvent>> events_;
    std::unique_ptr<Level> top_;
    std::optional<LabeledWitness> crossing_;
};

/// Growth-normalized sequence: 1, then (1/eps) * (sum so far) + 1; `count` terms.
std::vector<Rational> a_hat_sequence(const Rational& eps, std::size_t count);

struct ObservationReport {
    bool o1 = true;
    bool o2 = true;
    bool a_sequence = true;
    std::size_t prefixes_checked = 0;
    std::size_t observed_T = 0;  ///< longest idle window of the top agent after its first take
    std::string failure;

    bool ok() const { return o1 && o2 && a_sequence; }
};

/// O1 at every prefix ending in a top-agent take after its first; O2 on every item. Exact.
ObservationReport check_O1_O2(const LevelRecord& record, int n);

/// Replays fresh sub-levels over each window and checks d_i(j) = d'_i(j - j*) d_i([j*]) / eps_sub.
struct CleanupReport {
    bool ok = true;
    std::size_t items_checked = 0;
    std::string failure;
};
CleanupReport check_cleanup(const LevelRecord& record, int n);

struct GameOptions {
    std::size_t budget = 10000;
    std::optional<Rational> target;  ///< defaults to n - eps
};

struct GameResult {
    Instance instance;
    Allocation allocation;
    RunTrace trace;
    RatioCertificate best;
    bool target_reached = false;
    bool budget_exhausted = false;
    std::size_t rounds = 0;
};

/// Alternates adversary emissions and policy choices until a certificate beats
/// the target, the adversary reports a crossing, or the budget runs out.
GameResult play_game(Adversary& adversary, Policy& policy, const GameOptions& options = {});

}  // namespace fairdiv
