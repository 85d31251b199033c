#include <doctest.h>

#include <set>

#include "fairdiv/error.hpp"
#include "fairdiv/experiment.hpp"
#include "fairdiv/mms.hpp"
#include "oracles.hpp"

using namespace fairdiv;

namespace {

Rational R(std::int64_t p, std::int64_t q = 1) { return Rational(p, q); }

const std::vector<std::string> kFour{"pressure-greedy", "bi-value", "round-robin", "dump-to-one"};

}  // namespace

TEST_CASE("generator honours k and D on every grid") {
    for (auto grid : {ValueGrid::powers_of_two, ValueGrid::uniform_rational, ValueGrid::adversarial_near_threshold})
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            GeneratorConfig cfg;
            cfg.n = 1 + static_cast<int>(seed % 4);
            cfg.m = 30;
            cfg.k = grid == ValueGrid::adversarial_near_threshold ? 1 + static_cast<int>(seed % 2) : 1 + static_cast<int>(seed % 3);
            cfg.D = R(8);
            cfg.grid = grid;
            cfg.seed = seed;
            Instance inst = generate_instance(cfg);
            CHECK(inst.size() == 30);
            auto stats = instance_stats(inst);
            CHECK(stats.k <= cfg.k);
            CHECK(stats.D <= cfg.D);
        }
}

TEST_CASE("k = 1 gives one value per agent") {
    GeneratorConfig cfg;
    cfg.n = 3;
    cfg.m = 20;
    cfg.grid = ValueGrid::uniform_rational;
    cfg.D = R(5);
    auto inst = generate_instance(cfg);
    CHECK(instance_stats(inst).k == 1);
}

TEST_CASE("near-threshold pairs straddle the merge threshold") {
    std::set<bool> sides;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        GeneratorConfig cfg{2, 40, 2, R(3), ValueGrid::adversarial_near_threshold, seed};
        Instance inst = generate_instance(cfg);
        for (AgentId i = 0; i < 2; ++i) {
            auto v = inst.agent_values(i);
            auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            if (*lo == *hi) continue;
            Rational r = *lo / *hi;
            bool above = (R(2) * r + R(1)) * (R(2) * r + R(1)) > R(3);
            sides.insert(above);
        }
    }
    CHECK(sides.size() == 2);
}

TEST_CASE("generator is deterministic and rejects infeasible configurations") {
    GeneratorConfig cfg{3, 25, 2, R(4), ValueGrid::uniform_rational, 99};
    CHECK(save_instance(generate_instance(cfg)) == save_instance(generate_instance(cfg)));
    cfg.seed = 100;
    CHECK(instance_digest(generate_instance(cfg)) != instance_digest(generate_instance({3, 25, 2, R(4), ValueGrid::uniform_rational, 99})));

    CHECK_THROWS_AS(generate_instance({2, 5, 3, R(2), ValueGrid::powers_of_two, 0}), InvalidInput);
    CHECK_THROWS_AS(generate_instance({2, 5, 2, R(1), ValueGrid::uniform_rational, 0}), InvalidInput);
    CHECK_THROWS_AS(generate_instance({2, 5, 3, R(8), ValueGrid::adversarial_near_threshold, 0}), InvalidInput);
    CHECK_THROWS_AS(generate_instance({2, 5, 2, R(2), ValueGrid::adversarial_near_threshold, 0}), InvalidInput);
    CHECK(parse_value_grid("uniform-rational") == ValueGrid::uniform_rational);
    CHECK_THROWS_AS(parse_value_grid("gaussian"), InvalidInput);
}

TEST_CASE("irrational bound comparison") {
    // 2 + sqrt 3 = 3.7320508...
    CHECK(within_two_plus_sqrt3(R(37320, 10000), R(1)));
    CHECK_FALSE(within_two_plus_sqrt3(R(37321, 10000), R(1)));
    CHECK(within_two_plus_sqrt3(R(1), R(1)));
    CHECK(within_two_plus_sqrt3(R(0), R(5)));
    CHECK(within_two_plus_sqrt3(R(7464, 1000), R(2)));
    CHECK_FALSE(within_two_plus_sqrt3(R(7465, 1000), R(2)));
}

TEST_CASE("single-type instance: greedy and round-robin reach ratio 1") {
    Instance inst(3, std::vector<ItemValues>(10, ItemValues{R(2), R(3), R(5)}));
    auto rep = run_experiment(inst, kFour);
    for (const auto* name : {"pressure-greedy", "round-robin"}) {
        const PolicyRun* run = rep.find(name);
        REQUIRE(run);
        Rational worst;
        for (const auto& a : run->agents) {
            CHECK(a.exact);
            worst = max(worst, a.ratio_lower);
        }
        CHECK(worst == R(1));
    }
    const PolicyRun* dump = rep.find("dump-to-one");
    REQUIRE(dump);
    CHECK(dump->agents[0].ratio_upper <= R(3));
    CHECK(dump->bound_status == BoundStatus::pass);
    for (const auto& run : rep.runs) {
        INFO(run.policy, " ", run.trace_failure, " ", run.stacking_failure);
        CHECK(run.ok());
    }
}

TEST_CASE("bi-valued instance is reported exactly and within 2 + sqrt 3") {
    GeneratorConfig cfg{3, 12, 2, R(3), ValueGrid::adversarial_near_threshold, 5};
    Instance inst = generate_instance(cfg);
    auto rep = run_experiment(inst, kFour);
    const PolicyRun* bv = rep.find("bi-value");
    REQUIRE(bv);
    CHECK_FALSE(bv->fell_back);
    CHECK(bv->bound == "2+sqrt3");
    CHECK(bv->bound_status == BoundStatus::pass);
    for (const auto& a : bv->agents) {
        CHECK(a.exact);
        CHECK(a.mms_upper == oracle::brute_mms(inst.agent_values(a.agent), 3));
        CHECK(within_two_plus_sqrt3(a.d_A, a.mms_upper));
    }
}

TEST_CASE("every greedy run has a consistent stacking reduction") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        GeneratorConfig cfg{2 + static_cast<int>(seed % 4), 30, 3, R(16), ValueGrid::uniform_rational, seed};
        auto rep = run_experiment(generate_instance(cfg), {"pressure-greedy"});
        REQUIRE(rep.runs.size() == 1);
        CHECK(rep.runs[0].stacking_consistent == std::optional<bool>(true));
        CHECK(rep.runs[0].trace_ok);
        CHECK(rep.runs[0].stacking_margin->sign() >= 0);
    }
}

TEST_CASE("large instances get intervals, never point ratios") {
    GeneratorConfig cfg{2, 60, 3, R(8), ValueGrid::uniform_rational, 3};
    auto rep = run_experiment(generate_instance(cfg), {"pressure-greedy"});
    for (const auto& a : rep.runs[0].agents) {
        CHECK(a.mms_lower <= a.mms_upper);
        CHECK(a.ratio_lower <= a.ratio_upper);
        CHECK(a.exact == (a.mms_lower == a.mms_upper));
    }
    const std::string json = experiment_to_json({rep});
    if (!rep.runs[0].agents[0].exact) CHECK(json.find("ratio_interval") != std::string::npos);
}

TEST_CASE("batch reports are sorted by digest and reproducible") {
    std::vector<Instance> batch;
    for (std::uint64_t seed = 0; seed < 8; ++seed)
        batch.push_back(generate_instance({3, 10, 2, R(4), ValueGrid::powers_of_two, seed}));
    auto a = run_batch(batch, kFour, {}, 3);
    auto b = run_batch(batch, kFour, {}, 1);
    REQUIRE(a.size() == 8);
    for (std::size_t t = 1; t < a.size(); ++t) CHECK(a[t - 1].digest <= a[t].digest);
    CHECK(experiment_to_json(a) == experiment_to_json(b));
    CHECK(experiment_to_csv(a) == experiment_to_csv(b));
}

TEST_CASE("CSV carries exact strings and 20-digit decimals") {
    Instance inst(2, {ItemValues{R(1), R(1, 3)}, ItemValues{R(2), R(1, 3)}, ItemValues{R(1), R(1, 3)}});
    auto csv = experiment_to_csv({run_experiment(inst, {"dump-to-one"})});
    CHECK(csv.find("digest,n,m,policy,agent") == 0);
    CHECK(csv.find("2.0000000000000000000") != std::string::npos);
    auto lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == 3);
}
