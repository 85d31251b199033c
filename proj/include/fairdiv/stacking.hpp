#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairdiv/allocator.hpp"
#include "fairdiv/rational.hpp"

namespace fairdiv {

/// Left-open, right-closed interval (left, right].
struct Interval {
    Rational left;
    Rational right;

    Rational length() const { return right - left; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, pairwise disjoint, non-touching intervals.
using IntervalSet = std::vector<Interval>;

/// Sorts, drops empty intervals, and merges touching ones. Throws InvalidInput on overlap.
IntervalSet normalize(IntervalSet set);
Rational measure(const IntervalSet& set);

struct Piece {
    Rational left;
    Rational right;
    Rational value;

    Rational length() const { return right - left; }

    friend bool operator==(const Piece&, const Piece&) = default;
};

/// Non-decreasing step function on (-1/2, 1/2] with zero integral.
///
/// Adjacent pieces always carry distinct values.
class StackingFunction {
public:
    /// The zero function.
    StackingFunction();
    /// Validates cover, sortedness, and zero integral; merges equal neighbours.
    static StackingFunction from_pieces(std::vector<Piece> pieces);
    /// Consecutive equal-width cells from -1/2 with the given sorted values.
    static StackingFunction from_cells(const std::vector<Rational>& values);

    const std::vector<Piece>& pieces() const { return pieces_; }
    Rational max_value() const { return pieces_.back().value; }
    Rational min_value() const { return pieces_.front().value; }
    Rational integral() const;
    /// f(x) for x in (-1/2, 1/2].
    Rational value_at(const Rational& x) const;
    /// Piece endpoints, -1/2 through 1/2.
    std::vector<Rational> breakpoints() const;

    friend bool operator==(const StackingFunction&, const StackingFunction&) = default;

private:
    explicit StackingFunction(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {}
    std::vector<Piece> pieces_;
};

/// Empty when f satisfies every invariant, else a description of the first failure.
std::string check_invariants(const std::vector<Piece>& pieces);

struct StackingOperation {
    Rational a;
    Rational b;
    IntervalSet A;
    IntervalSet B;
    int k = 1;

    friend bool operator==(const StackingOperation&, const StackingOperation&) = default;
};

/// Throws InvalidInput when a or b is outside (0,1], the measures are wrong,
/// the sets leave (-1/2, 1/2], overlap, or some point of A lies right of B.
void validate_operation(const StackingOperation& op);

/// Adds a on A, subtracts b on B, then sorts pieces by (value, left endpoint before sorting).
StackingFunction apply_operation(const StackingFunction& f, const StackingOperation& op);

/// F(x) = integral of f over (x, 1/2].
Rational integral_F(const StackingFunction& f, const Rational& x);
/// F at every breakpoint, in breakpoint order.
std::vector<Rational> integral_profile(const StackingFunction& f);

struct BoundProfile {
    int k = 1;
    Rational beta = Rational(2);
};

/// beta*k/4 - beta*k*x^2.
Rational bound_at(const BoundProfile& profile, const Rational& x);

struct BoundCheck {
    bool pass = true;
    Rational margin;  ///< min over breakpoints of bound(x) - F(x)
    Rational worst_x;
    Rational max_value;
    std::string failure;
};

/// F(x) <= bound(x) at every breakpoint and max f <= beta*k.
///
/// F is linear between breakpoints and the bound is concave, so the bound
/// minus F is concave on each piece and attains its minimum at an endpoint.
BoundCheck check_bound(const StackingFunction& f, const BoundProfile& profile);

/// Same a, b, |A|, |B| with A and B one contiguous run: (m - |A|, m] and (m, m + |B|], m = min B.
///
/// Built by repeated substitution: the left end of the leftmost A fragment
/// moves into the rightmost hole left of min B, then the right end of the
/// rightmost B fragment moves into the leftmost hole of B. Each move shifts
/// +a onto a weakly larger value or -b onto a weakly smaller one.
StackingOperation contiguify(const StackingFunction& f, const StackingOperation& op);
bool is_contiguous(const StackingOperation& op);

/// F_hi(x) >= F_lo(x) at every breakpoint of either function.
bool dominates(const StackingFunction& hi, const StackingFunction& lo);

/// One step of a stacking trace.
struct StackingStep {
    StackingOperation op;
    Rational beta = Rational(2);
    /// Set when the cell grid was refined before this step.
    std::optional<StackingFunction> before;
    StackingFunction after;
};

/// JSON lines: {a, b, A, B, k, beta, pieces_after[, pieces_before]}; rationals as strings.
std::string stacking_trace_to_jsonl(const std::vector<StackingStep>& steps);
std::vector<StackingStep> stacking_trace_from_jsonl(std::string_view text);

struct ReplayReport {
    std::size_t steps = 0;
    bool ok = true;
    Rational min_margin;
    Rational max_value;
    std::string failure;
};

/// Re-applies each operation from the zero function and re-checks all invariants and bounds.
ReplayReport replay(const std::vector<StackingStep>& steps);

/// Pressure-greedy run mapped onto the stacking game.
struct Reduction {
    int n = 0;
    int k = 1;  ///< final cell count per agent
    std::vector<StackingStep> steps;
    std::size_t re_embeds = 0;
    Rational max_value;
    Rational min_margin;
    bool bound_ok = true;
};

/// Maps a power-of-two-typed run with n >= 2 onto the stacking game.
///
/// Cell c of n*K equal cells carries one (agent, type) label; dummy types hold
/// 0. Each item becomes a = 1, b = 1/(n-1) with the winner's cell as A and the
/// other touched cells as B. Throws ConsistencyError if the cell values ever
/// disagree with the trace's pressures or with apply_operation.
Reduction allocator_to_stacking(const RunTrace& trace);

}  // namespace fairdiv
