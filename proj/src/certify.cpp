#include <algorithm>

#include <json.hpp>

#include "fairdiv/adversary.hpp"
#include "fairdiv/error.hpp"
#include "fairdiv/mms.hpp"

namespace fairdiv {
namespace {

std::string_view source_name(MmsSource s) {
    switch (s) {
        case MmsSource::exact: return "exact";
        case MmsSource::witness: return "witness";
        default: return "empty";
    }
}

}  // namespace

std::string certificate_to_json(const RatioCertificate& c) {
    nlohmann::json witness = nlohmann::json::array();
    for (const auto& bundle : c.witness) {
        nlohmann::json b = nlohmann::json::array();
        for (ItemId j : bundle) b.push_back(j + 1);
        witness.push_back(std::move(b));
    }
    nlohmann::json doc = {{"agent", c.agent + 1},
                          {"d_A", c.d_A.str()},
                          {"mms_upper", c.mms_upper.str()},
                          {"mms_source", std::string(source_name(c.source))},
                          {"witness_kind", c.witness_kind},
                          {"witness", std::move(witness)},
                          {"ratio_lower", c.ratio_lower.str()},
                          {"ratio_lower_decimal", c.ratio_lower.to_decimal(20)}};
    return doc.dump() + "\n";
}

bool verify_certificate(const Instance& inst, const Allocation& alloc, const RatioCertificate& c) {
    if (inst.empty()) return c.source == MmsSource::empty && c.ratio_lower == Rational(1);
    if (c.agent < 0 || c.agent >= inst.agents() || alloc.size() != inst.size()) return false;
    if (!is_partition(c.witness, inst.size(), inst.agents())) return false;
    if (max_bundle(inst, c.agent, c.witness) != c.mms_upper) return false;
    if (alloc.disutility(inst, c.agent) != c.d_A) return false;
    if (c.mms_upper.sign() <= 0 || c.ratio_lower != c.d_A / c.mms_upper) return false;
    if (c.source == MmsSource::exact && inst.size() <= mms::exact_limit(inst.agents()))
        return mms::mms_exact(inst, c.agent).value == c.mms_upper;
    return true;
}

RatioCertificate certify_agent(const Instance& inst, const Allocation& alloc, AgentId i, const CertifyOptions& opts) {
    RatioCertificate c;
    c.agent = i;
    if (inst.empty()) return c;
    if (alloc.size() != inst.size()) throw InvalidInput("allocation and instance lengths differ");
    c.d_A = alloc.disutility(inst, i);

    const int n = inst.agents();
    if (inst.size() <= mms::exact_limit(n) || inst.size() <= static_cast<std::size_t>(n)) {
        auto exact = mms::mms_exact(inst, i);
        c.source = MmsSource::exact;
        c.witness_kind = "exact";
        c.mms_upper = exact.value;
        c.witness = std::move(exact.witness);
    } else {
        c.source = MmsSource::witness;
        auto consider = [&](std::string kind, Partition p) {
            Rational upper = max_bundle(inst, i, p);
            if (c.witness.empty() || upper < c.mms_upper) {
                c.mms_upper = upper;
                c.witness = std::move(p);
                c.witness_kind = std::move(kind);
            }
        };
        auto values = inst.agent_values(i);
        consider("per-type", mms::per_type_partition(inst, i));
        consider("lpt", mms::lpt_partition(values, n));
        Rational largest = *std::max_element(values.begin(), values.end());
        for (const auto& s : opts.bin_slacks)
            consider("first-fit", mms::first_fit_partition(values, n, (Rational(1) + Rational(2) * s) * largest));
        for (const auto& w : opts.witnesses)
            if ((!w.agent || *w.agent == i) && is_partition(w.partition, inst.size(), n)) consider(w.label, w.partition);
    }
    c.ratio_lower = c.d_A / c.mms_upper;
    return c;
}

std::vector<RatioCertificate> certify_ratio(const Instance& inst, const Allocation& alloc, const CertifyOptions& opts) {
    std::vector<RatioCertificate> out;
    for (AgentId i = 0; i < inst.agents(); ++i) out.push_back(certify_agent(inst, alloc, i, opts));
    return out;
}

GameResult play_game(Adversary& adversary, Policy& policy, const GameOptions& options) {
    const int n = adversary.agents();
    if (policy.agents() != n) throw InvalidInput("adversary and policy disagree on n");
    const Rational target = options.target.value_or(Rational(n) - adversary.epsilon());

    GameResult out;
    out.instance = Instance(n, {});
    out.trace.n = n;
    out.trace.policy = policy.name();

    // Running sums for the cheap necessary condition d_A > target * max(avg, largest).
    std::vector<Rational> total(static_cast<std::size_t>(n)), largest(static_cast<std::size_t>(n)),
        held(static_cast<std::size_t>(n));

    while (out.rounds < options.budget) {
        ItemValues item = adversary.next();
        out.instance.push_back(item);
        StepRecord step = policy.step(item);
        const AgentId w = step.agent;
        out.trace.steps.push_back(std::move(step));
        out.allocation.owner.push_back(w);
        adversary.observe(w);
        ++out.rounds;

        for (std::size_t i = 0; i < item.size(); ++i) {
            total[i] += item[i];
            largest[i] = max(largest[i], item[i]);
        }
        auto wi = static_cast<std::size_t>(w);
        held[wi] += item[wi];
        Rational lower = max(total[wi] / Rational(n), largest[wi]);
        if (held[wi] > target * lower || adversary.finished()) {
            auto cert = certify_agent(out.instance, out.allocation, w, adversary.hints());
            if (cert.ratio_lower > out.best.ratio_lower || out.best.source == MmsSource::empty) out.best = cert;
            if (cert.ratio_lower > target) {
                out.best = std::move(cert);
                out.target_reached = true;
                break;
            }
        }
        if (adversary.finished()) break;
    }

    if (!out.target_reached && !out.instance.empty())
        for (auto& cert : certify_ratio(out.instance, out.allocation, adversary.hints()))
            if (cert.ratio_lower > out.best.ratio_lower || out.best.source == MmsSource::empty) out.best = std::move(cert);
    out.budget_exhausted = !out.target_reached && out.rounds >= options.budget;
    return out;
}

}  // namespace fairdiv
