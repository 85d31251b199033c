#include <doctest.h>

#include "fairdiv/adversary.hpp"
#include "fairdiv/error.hpp"
#include "fairdiv/mms.hpp"
#include "oracles.hpp"

using namespace fairdiv;

namespace {

Rational R(std::int64_t p, std::int64_t q = 1) { return Rational(p, q); }

/// Plays `owners` against the adversary and returns the emitted items.
std::vector<ItemValues> drive(Adversary& adv, const std::vector<AgentId>& owners) {
    std::vector<ItemValues> items;
    for (AgentId w : owners) {
        items.push_back(adv.next());
        adv.observe(w);
    }
    return items;
}

/// First item to agent 0, everything else to `sink`.
ExternalPolicy first_then(int n, AgentId sink) {
    return ExternalPolicy(n, "first-then", [sink](const ItemValues&, const std::vector<AgentId>& past) {
        return past.empty() ? AgentId{0} : sink;
    });
}

}  // namespace

TEST_CASE("two-agent parameters") {
    TwoAgentAdversary half(R(1, 2));
    CHECK(half.eps1() == R(1, 4));
    CHECK(half.eps2() == R(1, 6));
    TwoAgentAdversary odd(R(2, 7));
    CHECK(odd.eps2() == R(1, 11));  // ceil(21/2) = 11
    CHECK(odd.eps2() <= R(2, 7) / R(3));
    CHECK_THROWS_AS(TwoAgentAdversary(R(0)), InvalidInput);
    CHECK_THROWS_AS(TwoAgentAdversary(R(3, 2)), InvalidInput);
}

TEST_CASE("two-agent emissions follow the case rules") {
    TwoAgentAdversary adv(R(1, 2));
    auto items = drive(adv, {0, 1, 0, 1, 1, 0});
    CHECK(items[0] == ItemValues{R(1), R(1)});
    // Agent 1 took item 1; agent 2 has taken nothing: d2 = 1 / eps2.
    CHECK(items[1] == ItemValues{R(1), R(6)});
    // Agent 1 skipped item 2: d1 = d1(2) / eps1. Agent 2 just took its first item: eps2 * d2(first).
    CHECK(items[2] == ItemValues{R(4), R(1)});
    // Agent 1 took item 3: d1 unchanged. Agent 2 skipped: back to d2(first).
    CHECK(items[3] == ItemValues{R(4), R(6)});
    CHECK(items[4] == ItemValues{R(16), R(1)});
    CHECK(items[5] == ItemValues{R(64), R(1)});
    CHECK(adv.first_take() == std::size_t{1});

    CHECK_THROWS_AS(adv.observe(0), InvalidInput);
    adv.next();
    CHECK_THROWS_AS(adv.next(), InvalidInput);
}

TEST_CASE("two-agent game ends above 3/2 against dump-to-one") {
    TwoAgentAdversary adv(R(1, 2));
    DumpToOnePolicy policy(2);
    auto res = play_game(adv, policy);
    CHECK(res.target_reached);
    CHECK(res.best.agent == 0);
    CHECK(res.best.ratio_lower >= R(2) / (R(1) + adv.eps1()));
    CHECK(verify_certificate(res.instance, res.allocation, res.best));
}

TEST_CASE("two-agent game: agent 1 never takes after agent 2's first item") {
    TwoAgentAdversary adv(R(1, 2));
    auto policy = first_then(2, 1);
    auto res = play_game(adv, policy);
    CHECK(res.target_reached);
    CHECK(res.best.ratio_lower > R(3, 2));
    CHECK(verify_certificate(res.instance, res.allocation, res.best));

    // Played on for 1/eps2 items past agent 2's first take, the ratio reaches 2/(1 + eps2).
    TwoAgentAdversary longer(R(1, 2));
    std::vector<AgentId> owners{0, 1, 1, 1, 1, 1, 1, 1};
    Instance inst(2, drive(longer, owners));
    Allocation alloc{owners};
    auto cert = certify_agent(inst, alloc, 1);
    CHECK(cert.ratio_lower == R(2) / (R(1) + longer.eps2()));
}

TEST_CASE("zero budget gives the trivial certificate") {
    TwoAgentAdversary adv(R(1, 2));
    PressureGreedyPolicy policy(2);
    GameOptions opts;
    opts.budget = 0;
    auto res = play_game(adv, policy, opts);
    CHECK(res.budget_exhausted);
    CHECK_FALSE(res.target_reached);
    CHECK(res.best.ratio_lower == R(1));
    CHECK(res.best.source == MmsSource::empty);
    CHECK(verify_certificate(res.instance, res.allocation, res.best));
}

TEST_CASE("certificates are sound against the exact MMS") {
    std::mt19937_64 rng(51);
    for (int t = 0; t < 100; ++t) {
        const int n = 2 + static_cast<int>(rng() % 3);
        std::vector<ItemValues> items(1 + rng() % 9);
        for (auto& item : items)
            for (int i = 0; i < n; ++i) item.push_back(oracle::random_rational(rng, 20, 3, false));
        Instance inst(n, items);
        Allocation alloc;
        for (std::size_t j = 0; j < inst.size(); ++j) alloc.owner.push_back(static_cast<AgentId>(rng() % static_cast<unsigned>(n)));
        for (const auto& c : certify_ratio(inst, alloc)) {
            CHECK(verify_certificate(inst, alloc, c));
            CHECK(c.mms_upper == oracle::brute_mms(inst.agent_values(c.agent), n));
        }
    }
}

TEST_CASE("witness certificates on instances past the exact limit") {
    Instance inst(2, std::vector<ItemValues>(40, ItemValues{R(1), R(1)}));
    Allocation rr;
    for (std::size_t j = 0; j < 40; ++j) rr.owner.push_back(static_cast<AgentId>(j % 2));
    for (const auto& c : certify_ratio(inst, rr)) {
        CHECK(c.source == MmsSource::witness);
        CHECK(c.ratio_lower == R(1));
        CHECK(verify_certificate(inst, rr, c));
    }
    auto forged = certify_agent(inst, rr, 0);
    forged.mms_upper = R(19);
    forged.ratio_lower = forged.d_A / forged.mms_upper;
    CHECK_FALSE(verify_certificate(inst, rr, forged));
}

TEST_CASE("a-sequence growth") {
    auto seq = a_hat_sequence(R(1, 4), 6);
    REQUIRE(seq.size() == 6);
    CHECK(seq[0] == R(1));
    Rational sum;
    for (std::size_t t = 0; t < seq.size(); ++t) {
        if (t > 0) CHECK(seq[t] > R(4) * sum);
        sum += seq[t];
    }
}

TEST_CASE("recursive adversary: level one is constant, clean-up rescales") {
    RecursiveAdversary adv(2, R(1), 4);
    // Agent 1 (index 0) takes the first item, agent 2 the second.
    auto items = drive(adv, {0, 1, 0});
    CHECK(items[0] == ItemValues{R(1), R(1)});
    // Top agent has not taken anything: geometric blow-up of its sum.
    const Rational eps_top = R(1) / R(2 * 5);
    CHECK(items[1][1] == R(1) / eps_top);
    CHECK(items[1][0] == R(1));
    // After the top agent's take, agent 1's fresh sub-game is scaled by d_1([j*]) / eps_sub.
    const Rational eps_sub = R(1, 2);
    CHECK(items[2][0] == R(2) / eps_sub);

    auto records = adv.records();
    for (const auto& r : records) {
        CHECK(check_cleanup(r, 2).ok);
        CHECK(check_O1_O2(r, 2).ok());
    }
}

TEST_CASE("recursive adversary: post-take values follow the pinned a-sequence") {
    RecursiveAdversary adv(3, R(1), 5);
    // Top agent (index 2) takes the first item, then idles for two items, then takes again.
    auto items = drive(adv, {2, 0, 1, 2, 0});
    auto rec = adv.records().back();
    REQUIRE(rec.level == 3);
    const Rational V = items[0][2];
    CHECK(V == R(1));
    auto seq = a_hat_sequence(rec.eps_top, 6);
    CHECK(items[1][2] == seq[0] * V / seq[5]);
    CHECK(items[2][2] == seq[1] * V / seq[5]);
    CHECK(items[3][2] == seq[2] * V / seq[5]);
    CHECK(items[4][2] == seq[0] * V / seq[5]);
    auto o = check_O1_O2(rec, 3);
    CHECK(o.ok());
    CHECK(o.observed_T == 2);
}

TEST_CASE("recursive adversary: stalling the top agent past the horizon breaks O2") {
    // Game horizon 1: the second post-take item is a_2 = V.
    RecursiveAdversary adv(3, R(1), 1);
    drive(adv, {2, 0, 0});
    auto rec = adv.records().back();
    REQUIRE(rec.level == 3);
    auto o = check_O1_O2(rec, 3);
    CHECK_FALSE(o.o2);
    CHECK(o.failure.find("eps V") != std::string::npos);
}

TEST_CASE("recursive adversary: forged records fail the independent checks") {
    RecursiveAdversary adv(3, R(1), 6);
    drive(adv, {0, 1, 2, 0, 1, 0, 2, 1});
    auto rec = adv.records().back();
    REQUIRE(rec.level == 3);
    REQUIRE(check_cleanup(rec, 3).ok);
    auto forged = rec;
    forged.values[4][0] += R(1);
    CHECK_FALSE(check_cleanup(forged, 3).ok);

    forged = rec;
    forged.values[3][2] = forged.values[3][2] * R(2);
    CHECK_FALSE(check_O1_O2(forged, 3).ok());
}

TEST_CASE("recursive adversary: a full window forces a certified crossing") {
    // Round-robin inside the window keeps the game going; dumping on agent 1 crosses at level one.
    RecursiveAdversary adv(3, R(1), 8);
    DumpToOnePolicy policy(3);
    auto res = play_game(adv, policy);
    CHECK(adv.finished());
    CHECK(res.target_reached);
    CHECK(verify_certificate(res.instance, res.allocation, res.best));
    REQUIRE_FALSE(adv.events().empty());
    CHECK(adv.events().back().pass);
}
