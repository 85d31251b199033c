#include <doctest.h>

#include <random>

#include "fairdiv/allocator.hpp"
#include "fairdiv/error.hpp"
#include "fairdiv/stacking.hpp"
#include "oracles.hpp"
#include "random_ops.hpp"

using namespace fairdiv;

namespace {

Rational R(std::int64_t p, std::int64_t q = 1) { return Rational(p, q); }

Interval iv(Rational l, Rational r) { return Interval{std::move(l), std::move(r)}; }

}  // namespace

TEST_CASE("zero function") {
    StackingFunction f;
    CHECK(f.pieces().size() == 1);
    CHECK(f.integral() == R(0));
    auto c = check_bound(f, BoundProfile{3, R(2)});
    CHECK(c.pass);
    CHECK(c.margin == R(3, 2));
    CHECK(c.worst_x == R(0));
    CHECK(integral_F(f, R(-1, 2)) == R(0));
}

TEST_CASE("single split with k = 1") {
    StackingOperation op{R(1), R(1), {iv(R(-1, 2), R(0))}, {iv(R(0), R(1, 2))}, 1};
    auto f1 = apply_operation(StackingFunction(), op);
    REQUIRE(f1.pieces().size() == 2);
    CHECK(f1.pieces()[0] == Piece{R(-1, 2), R(0), R(-1)});
    CHECK(f1.pieces()[1] == Piece{R(0), R(1, 2), R(1)});
    CHECK(integral_F(f1, R(0)) == R(1, 2));
    CHECK(integral_F(f1, R(-1, 2)) == R(0));
    CHECK(integral_F(f1, R(1, 2)) == R(0));
    auto c = check_bound(f1, BoundProfile{1, R(2)});
    CHECK(c.pass);
    CHECK(c.margin == R(0));
    CHECK(c.max_value == R(1));
}

TEST_CASE("three-agent, two-type cell step") {
    // Cells of width 1/6; A is one cell, B two cells.
    StackingOperation op{R(1), R(1, 2), {iv(R(-1, 2), R(-1, 3))}, {iv(R(-1, 3), R(0))}, 2};
    auto f1 = apply_operation(StackingFunction(), op);
    REQUIRE(f1.pieces().size() == 3);
    CHECK(f1.pieces()[0] == Piece{R(-1, 2), R(-1, 6), R(-1, 2)});
    CHECK(f1.pieces()[1] == Piece{R(-1, 6), R(1, 3), R(0)});
    CHECK(f1.pieces()[2] == Piece{R(1, 3), R(1, 2), R(1)});
}

TEST_CASE("symmetric push raises the maximum by a") {
    auto f = StackingFunction::from_cells({R(-1), R(0), R(0), R(1)});
    StackingOperation op{R(1, 2), R(1, 2), {iv(R(-1, 4), R(0))}, {iv(R(0), R(1, 4))}, 2};
    auto g = apply_operation(f, op);
    CHECK(g.max_value() == R(1));
    CHECK(g.integral() == R(0));
    auto f2 = StackingFunction::from_cells({R(-1), R(0), R(0), R(1)});
    StackingOperation top{R(1, 2), R(1, 2), {iv(R(1, 4), R(3, 8))}, {iv(R(3, 8), R(1, 2))}, 4};
    CHECK(apply_operation(f2, top).max_value() == R(3, 2));
}

TEST_CASE("operation validation") {
    StackingOperation wrong_measure{R(1), R(1), {iv(R(-1, 2), R(-1, 4))}, {iv(R(0), R(1, 2))}, 1};
    CHECK_THROWS_AS(validate_operation(wrong_measure), InvalidInput);
    StackingOperation b_left{R(1), R(1), {iv(R(0), R(1, 2))}, {iv(R(-1, 2), R(0))}, 1};
    CHECK_THROWS_AS(validate_operation(b_left), InvalidInput);
    StackingOperation outside{R(1), R(1), {iv(R(-1), R(-1, 2))}, {iv(R(0), R(1, 2))}, 1};
    CHECK_THROWS_AS(validate_operation(outside), InvalidInput);
    StackingOperation big_a{R(2), R(2), {iv(R(-1, 2), R(0))}, {iv(R(0), R(1, 2))}, 1};
    CHECK_THROWS_AS(validate_operation(big_a), InvalidInput);
}

TEST_CASE("invariant checker and bound violations") {
    CHECK(check_invariants({Piece{R(-1, 2), R(1, 2), R(0)}}).empty());
    CHECK_FALSE(check_invariants({Piece{R(-1, 2), R(0), R(1)}, Piece{R(0), R(1, 2), R(-1)}}).empty());
    CHECK_FALSE(check_invariants({Piece{R(-1, 2), R(0), R(-1)}, Piece{R(0), R(1, 2), R(2)}}).empty());
    CHECK_THROWS_AS(StackingFunction::from_pieces({Piece{R(-1, 2), R(0), R(-1)}, Piece{R(1, 4), R(1, 2), R(1)}}),
                    InvalidInput);

    auto tall = StackingFunction::from_pieces({Piece{R(-1, 2), R(1, 4), R(-1)}, Piece{R(1, 4), R(1, 2), R(3)}});
    auto c = check_bound(tall, BoundProfile{1, R(2)});
    CHECK_FALSE(c.pass);
    CHECK(c.max_value == R(3));
}

TEST_CASE("contiguify") {
    SUBCASE("contiguous operations are fixed points") {
        StackingOperation op{R(1), R(1), {iv(R(-1, 2), R(0))}, {iv(R(0), R(1, 2))}, 1};
        CHECK(is_contiguous(op));
        CHECK(contiguify(StackingFunction(), op) == op);
    }
    SUBCASE("split A moves next to B") {
        StackingOperation op{R(1, 2), R(1, 2), {iv(R(-1, 8), R(0)), iv(R(1, 8), R(1, 4))}, {iv(R(1, 4), R(1, 2))}, 2};
        CHECK_FALSE(is_contiguous(op));
        auto c = contiguify(StackingFunction(), op);
        CHECK(c.A == IntervalSet{iv(R(0), R(1, 4))});
        CHECK(c.B == IntervalSet{iv(R(1, 4), R(1, 2))});
        CHECK(c.a == op.a);
        CHECK(c.b == op.b);
    }
    SUBCASE("three A fragments collapse to one run") {
        StackingOperation clean{R(1), R(1), {iv(R(-1, 2), R(-7, 16)), iv(R(-1, 4), R(-3, 16)), iv(R(0), R(1, 8))},
                                {iv(R(1, 4), R(1, 2))}, 2};
        auto c = contiguify(StackingFunction(), clean);
        REQUIRE(c.A.size() == 1);
        REQUIRE(c.B.size() == 1);
        CHECK(c.A == IntervalSet{iv(R(0), R(1, 4))});
        CHECK(c.B == IntervalSet{iv(R(1, 4), R(1, 2))});
        CHECK(measure(c.A) + measure(c.B) == R(1, 2));
    }
}

TEST_CASE("random operation sequences keep the invariants and the bound") {
    std::mt19937_64 rng(41);
    for (int k = 1; k <= 3; ++k)
        for (int seq = 0; seq < 20; ++seq) {
            StackingFunction f;
            for (int t = 0; t < 40; ++t) {
                auto op = fixtures::random_op(rng, k, 6, R(2));
                f = apply_operation(f, op);
                CHECK(check_invariants(f.pieces()).empty());
                auto c = check_bound(f, BoundProfile{k, R(2)});
                CHECK(c.pass);
                CHECK(f.max_value() <= R(2 * k));
            }
        }
}

TEST_CASE("contiguified operations dominate") {
    std::mt19937_64 rng(42);
    int tested = 0;
    for (int t = 0; t < 200; ++t) {
        const int k = 1 + static_cast<int>(rng() % 3);
        StackingFunction f;
        for (int w = 0; w < 5; ++w) f = apply_operation(f, fixtures::random_op(rng, k, 6, R(2)));
        auto op = fixtures::random_op(rng, k, 6, R(2));
        if (is_contiguous(op)) continue;
        ++tested;
        auto c = contiguify(f, op);
        CHECK(is_contiguous(c));
        CHECK(measure(c.A) == measure(op.A));
        CHECK(measure(c.B) == measure(op.B));
        CHECK(dominates(apply_operation(f, c), apply_operation(f, op)));
    }
    CHECK(tested > 100);
}

TEST_CASE("reduction from greedy runs") {
    SUBCASE("two agents, one type oscillate") {
        Instance inst(2, std::vector<ItemValues>(4, ItemValues{R(1), R(1)}));
        auto red = allocator_to_stacking(run_online(inst, "pressure-greedy").trace);
        REQUIRE(red.steps.size() == 4);
        CHECK(red.steps[0].after == StackingFunction::from_cells({R(-1), R(1)}));
        CHECK(red.steps[1].after == StackingFunction());
        CHECK(red.steps[2].after == StackingFunction::from_cells({R(-1), R(1)}));
        CHECK(red.bound_ok);
    }
    SUBCASE("three agents, first step") {
        Instance inst(3, {ItemValues{R(1), R(1), R(1)}});
        auto red = allocator_to_stacking(run_online(inst, "pressure-greedy").trace);
        REQUIRE(red.steps.size() == 1);
        CHECK(red.steps[0].op.a == R(1));
        CHECK(red.steps[0].op.b == R(1, 2));
        CHECK(measure(red.steps[0].op.A) == R(1, 3));
        CHECK(measure(red.steps[0].op.B) == R(2, 3));
    }
    SUBCASE("empty trace") {
        RunTrace empty;
        empty.n = 3;
        auto red = allocator_to_stacking(empty);
        CHECK(red.steps.empty());
    }
    SUBCASE("non-greedy traces are rejected") {
        Instance inst(2, std::vector<ItemValues>(3, ItemValues{R(1), R(1)}));
        CHECK_THROWS_AS(allocator_to_stacking(run_online(inst, "dump-to-one").trace), InvalidInput);
    }
}

TEST_CASE("stacking traces replay from JSON lines") {
    std::mt19937_64 rng(43);
    std::vector<ItemValues> items(60);
    for (auto& item : items)
        for (int i = 0; i < 4; ++i) item.push_back(Rational::pow2(static_cast<long>(rng() % 3)));
    auto red = allocator_to_stacking(run_online(Instance(4, items), "pressure-greedy").trace);
    const std::string text = stacking_trace_to_jsonl(red.steps);
    auto steps = stacking_trace_from_jsonl(text);
    CHECK(stacking_trace_to_jsonl(steps) == text);
    auto rep = replay(steps);
    CHECK(rep.ok);
    CHECK(rep.steps == 60);

    // A forged value is caught.
    auto forged = steps;
    auto pieces = forged[10].after.pieces();
    pieces.back().value += R(1);
    pieces.front().value -= R(1) * (pieces.back().right - pieces.back().left) / (pieces.front().right - pieces.front().left);
    forged[10].after = StackingFunction::from_pieces(pieces);
    CHECK_FALSE(replay(forged).ok);
}
