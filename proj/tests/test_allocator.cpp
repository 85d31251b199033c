#include <doctest.h>

#include <set>

#include <random>

#include "fairdiv/allocator.hpp"
#include "fairdiv/error.hpp"
#include "fairdiv/mms.hpp"
#include "oracles.hpp"

using namespace fairdiv;

namespace {

ItemValues vals(std::initializer_list<std::int64_t> xs) {
    ItemValues out;
    for (auto x : xs) out.emplace_back(x);
    return out;
}

Instance random_instance(std::mt19937_64& rng, int n, std::size_t m, int k) {
    std::vector<std::vector<Rational>> grid(static_cast<std::size_t>(n));
    for (auto& g : grid)
        for (int u = 0; u < k; ++u) g.push_back(oracle::random_rational(rng, 64, 8, false));
    std::vector<ItemValues> items(m);
    for (auto& item : items)
        for (const auto& g : grid) item.push_back(g[rng() % g.size()]);
    return Instance(n, items);
}

}  // namespace

TEST_CASE("round_up_pow2") {
    CHECK(round_up_pow2(Rational(3)) == Rational(4));
    CHECK(round_up_pow2(Rational(4)) == Rational(4));
    CHECK(round_up_pow2(Rational(3, 8)) == Rational(1, 2));
    CHECK(round_up_pow2(Rational(1, 1024)) == Rational(1, 1024));
    CHECK(round_up_pow2(Rational::parse("1180591620717411303425")) == Rational::pow2(71));
    CHECK_THROWS_AS(round_up_pow2(Rational(0)), InvalidInput);
    CHECK_THROWS_AS(round_up_pow2(Rational(-1)), InvalidInput);

    std::mt19937_64 rng(31);
    for (int t = 0; t < 500; ++t) {
        Rational d = oracle::random_rational(rng, 1'000'000, 1'000'000, false);
        CHECK(round_up_pow2(d) == oracle::pow2_ceiling(d));
    }
}

TEST_CASE("merge threshold sits at (sqrt 3 - 1)/2") {
    CHECK(above_merge_threshold(Rational(1, 2)));
    CHECK_FALSE(above_merge_threshold(Rational(1, 10)));
    CHECK(above_merge_threshold(Rational(11, 30)));    // 0.3667
    CHECK(above_merge_threshold(Rational(26, 71)));    // 0.36620
    CHECK_FALSE(above_merge_threshold(Rational(15, 41)));  // 0.36585
    CHECK_FALSE(above_merge_threshold(Rational(4, 11)));   // 0.3636
}

TEST_CASE("greedy: first item with three agents") {
    PressureGreedyPolicy p(3);
    auto s = p.step(vals({5, 7, 9}));
    CHECK(s.agent == 0);
    CHECK(p.pressures().pressure(0, 0) == Rational(1));
    CHECK(p.pressures().pressure(1, 0) == Rational(-1, 2));
    CHECK(p.pressures().pressure(2, 0) == Rational(-1, 2));
}

TEST_CASE("greedy: two unit items alternate") {
    PressureGreedyPolicy p(2);
    CHECK(p.step(vals({1, 1})).agent == 0);
    CHECK(p.pressures().pressure(0, 0) == Rational(1));
    CHECK(p.pressures().pressure(1, 0) == Rational(-1));
    CHECK(p.step(vals({1, 1})).agent == 1);
    CHECK(p.pressures().pressure(0, 0) == Rational(0));
    CHECK(p.pressures().pressure(1, 0) == Rational(0));
}

TEST_CASE("greedy: two types, hand-executed") {
    PressureGreedyPolicy p(2);
    CHECK(p.step(vals({1, 1})).agent == 0);
    auto s2 = p.step(vals({4, 4}));
    CHECK(s2.agent == 0);
    CHECK(p.pressures().pressure(0, 1) == Rational(1));
    CHECK(p.pressures().pressure(1, 1) == Rational(-1));
    auto s3 = p.step(vals({1, 4}));
    CHECK(s3.types == std::vector<int>{0, 1});
    CHECK(s3.agent == 1);
}

TEST_CASE("greedy matches a hand transcription on random instances") {
    std::mt19937_64 rng(32);
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + static_cast<int>(rng() % 5);
        Instance inst = random_instance(rng, n, rng() % 60, 1 + static_cast<int>(rng() % 4));
        PressureGreedyPolicy policy(n);
        auto res = run_online(inst, policy);
        auto ref = oracle::hand_greedy(inst);
        CHECK(res.allocation.owner == ref.owners);
        if (n == 1) continue;
        const auto& st = policy.pressures();
        for (AgentId i = 0; i < n; ++i)
            for (int u = 0; u < st.type_count(i); ++u)
                CHECK(st.pressure(i, u) == ref.pressure[{i, st.representative(i, u)}]);
    }
}

TEST_CASE("baselines") {
    Instance single(3, std::vector<ItemValues>(9, vals({2, 2, 2})));
    auto rr = run_online(single, "round-robin");
    auto counts = [](const Allocation& a, int n) {
        std::vector<int> c(static_cast<std::size_t>(n));
        for (auto o : a.owner) ++c[static_cast<std::size_t>(o)];
        return c;
    };
    CHECK(counts(rr.allocation, 3) == std::vector<int>{3, 3, 3});

    auto dump = run_online(single, "dump-to-one");
    CHECK(dump.allocation.disutility(single, 0) == Rational(18));
    Rational mms1 = mms::mms_exact(single, 0).value;
    CHECK(dump.allocation.disutility(single, 0) <= Rational(3) * mms1);

    Instance ten(4, std::vector<ItemValues>(10, vals({1, 1, 1, 1})));
    auto c = counts(run_online(ten, "pressure-greedy").allocation, 4);
    CHECK(*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end()) <= 1);
}

TEST_CASE("one agent takes everything without pressure accounting") {
    Instance inst(1, {vals({3}), vals({5})});
    for (const auto& name : {"pressure-greedy", "bi-value", "round-robin", "mixture:3"}) {
        auto res = run_online(inst, name);
        CHECK(res.allocation.owner == std::vector<AgentId>{0, 0});
        CHECK(verify_trace(res.trace).ok());
        CHECK(res.trace.steps.back().pressures[0][0] == Rational(0));
    }
}

TEST_CASE("bi-value typing") {
    SUBCASE("close values merge") {
        BiValuePolicy p(2);
        p.step(vals({2, 1}));
        auto s = p.step(vals({1, 1}));
        CHECK(p.pressures().type_count(0) == 1);
        CHECK(s.rounded[0] == Rational(2));
        CHECK(s.mode == TypingMode::bi_value);
    }
    SUBCASE("distant values stay apart") {
        BiValuePolicy p(2);
        p.step(vals({10, 1}));
        p.step(vals({1, 1}));
        CHECK(p.pressures().type_count(0) == 2);
    }
    SUBCASE("a repeated value is not new") {
        BiValuePolicy p(2);
        p.step(vals({3, 1}));
        p.step(vals({3, 1}));
        CHECK(p.pressures().type_count(0) == 1);
    }
    SUBCASE("a third value falls back to power-of-two typing") {
        BiValuePolicy p(2);
        Instance inst(2, {vals({1, 1}), vals({3, 1}), vals({1, 1}), vals({5, 1}), vals({6, 1})});
        auto res = run_online(inst, p);
        CHECK(p.fell_back());
        CHECK(res.trace.steps[3].mode == TypingMode::pow2);
        CHECK(res.trace.steps[2].mode == TypingMode::bi_value);
        auto check = verify_trace(res.trace);
        CHECK(check.ok());
    }
}

TEST_CASE("trace invariants hold for every policy") {
    std::mt19937_64 rng(33);
    for (int t = 0; t < 120; ++t) {
        const int n = 2 + static_cast<int>(rng() % 5);
        Instance inst = random_instance(rng, n, 1 + rng() % 80, 1 + static_cast<int>(rng() % 3));
        for (const auto& name : {"pressure-greedy", "bi-value", "round-robin", "dump-to-one", "mixture:9"}) {
            auto res = run_online(inst, name);
            auto check = verify_trace(res.trace);
            CHECK(check.closed_form);
            CHECK(check.zero_sum);
            CHECK(check.rounding);
            if (std::string(name) == "pressure-greedy") {
                CHECK(check.pressure_bound);
                CHECK(check.count_bound);
            }
        }
    }
}

TEST_CASE("verify_trace catches tampering") {
    Instance inst(3, {vals({1, 2, 3}), vals({1, 2, 3}), vals({1, 2, 3})});
    auto res = run_online(inst, "pressure-greedy");
    REQUIRE(verify_trace(res.trace).ok());

    auto bad = res.trace;
    bad.steps[1].pressures[0][0] += Rational(1, 7);
    CHECK_FALSE(verify_trace(bad).closed_form);

    bad = res.trace;
    bad.steps[0].rounded[2] = Rational(8);
    CHECK_FALSE(verify_trace(bad).rounding);
}

TEST_CASE("trace JSON lines round-trip and runs are deterministic") {
    std::mt19937_64 rng(34);
    Instance inst = random_instance(rng, 3, 40, 3);
    for (const auto& name : {"pressure-greedy", "bi-value", "mixture:4"}) {
        auto a = run_online(inst, name);
        auto b = run_online(inst, name);
        const std::string text = trace_to_jsonl(a.trace);
        CHECK(text == trace_to_jsonl(b.trace));
        CHECK(trace_from_jsonl(text, 3) == a.trace);
    }
}

TEST_CASE("policy factory") {
    CHECK(make_policy("mixture:17", 3)->name() == "mixture:17");
    CHECK(make_policy("mixture", 3, 5)->name() == "mixture:5");
    CHECK_THROWS_AS(make_policy("mixture:x", 3), InvalidInput);
    CHECK_THROWS_AS(make_policy("nope", 3), InvalidInput);

    ExternalPolicy last(2, "always-last", [](const ItemValues&, const std::vector<AgentId>&) { return 1; });
    CHECK(last.step(vals({1, 1})).agent == 1);
    ExternalPolicy broken(2, "broken", [](const ItemValues&, const std::vector<AgentId>&) { return 5; });
    CHECK_THROWS_AS(broken.step(vals({1, 1})), InvalidInput);
}

TEST_CASE("single-agent traces still count rounded types") {
    Instance inst(1, {vals({3}), vals({4}), vals({5}), ItemValues{Rational(1, 3)}});
    auto tc = verify_trace(run_online(inst, "pressure-greedy").trace);
    CHECK(tc.ok());
    CHECK(tc.max_types == 3);  // 3 and 4 share 4; 5 rounds to 8, 1/3 to 1/2
}

TEST_CASE("the policy zoo lists nine distinct policies") {
    auto zoo = policy_zoo();
    CHECK(zoo.size() == 9);
    std::set<std::string> names;
    for (const auto& z : zoo) names.insert(make_policy(z, 2)->name());
    CHECK(names.size() == 9);
}
