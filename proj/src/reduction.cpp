#include <algorithm>
#include <numeric>

#include "fairdiv/error.hpp"
#include "fairdiv/stacking.hpp"

namespace fairdiv {
namespace {

struct Label {
    AgentId agent;
    int type;
};

class CellBoard {
public:
    explicit CellBoard(int n) : n_(n) { grow(1); }

    int k() const { return k_; }

    /// Adds dummy cells (value 0) for types k()..k_new-1 just before the first positive cell.
    void grow(int k_new) {
        std::vector<int> fresh;
        for (AgentId i = 0; i < n_; ++i)
            for (int u = k_; u < k_new; ++u) {
                fresh.push_back(static_cast<int>(labels_.size()));
                labels_.push_back(Label{i, u});
                values_.emplace_back();
            }
        auto at = std::find_if(order_.begin(), order_.end(), [&](int l) { return values_[idx(l)].sign() > 0; });
        order_.insert(at, fresh.begin(), fresh.end());
        k_ = k_new;
        index_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(k_), -1);
        for (std::size_t l = 0; l < labels_.size(); ++l) index_[slot(labels_[l].agent, labels_[l].type)] = static_cast<int>(l);
        refresh_positions();
    }

    int label_of(AgentId i, int u) const { return index_[slot(i, u)]; }
    std::size_t position(int label) const { return position_[idx(label)]; }
    const Rational& value(int label) const { return values_[idx(label)]; }

    void swap_cells(std::size_t p, std::size_t q) {
        std::swap(order_[p], order_[q]);
        refresh_positions();
    }

    Interval cell(std::size_t p) const {
        Rational width(1, static_cast<std::int64_t>(order_.size()));
        Rational left = Rational(-1, 2) + width * Rational(static_cast<std::int64_t>(p));
        return Interval{left, left + width};
    }

    /// Applies the deltas and re-sorts cells by (new value, old position).
    void apply(const std::vector<std::pair<int, Rational>>& deltas) {
        for (const auto& [label, delta] : deltas) values_[idx(label)] += delta;
        std::stable_sort(order_.begin(), order_.end(), [&](int x, int y) { return values_[idx(x)] < values_[idx(y)]; });
        refresh_positions();
    }

    StackingFunction function() const {
        std::vector<Rational> cells;
        cells.reserve(order_.size());
        for (int l : order_) cells.push_back(values_[idx(l)]);
        return StackingFunction::from_cells(cells);
    }

    std::vector<Rational> sorted_values() const {
        std::vector<Rational> out(values_);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    static std::size_t idx(int l) { return static_cast<std::size_t>(l); }
    std::size_t slot(AgentId i, int u) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(u);
    }
    void refresh_positions() {
        position_.assign(labels_.size(), 0);
        for (std::size_t p = 0; p < order_.size(); ++p) position_[idx(order_[p])] = p;
    }

    int n_;
    int k_ = 0;
    std::vector<Label> labels_;
    std::vector<Rational> values_;
    std::vector<int> order_;  ///< cell position -> label
    std::vector<std::size_t> position_;
    std::vector<int> index_;
};

}  // namespace

Reduction allocator_to_stacking(const RunTrace& trace) {
    const int n = trace.n;
    if (n < 2) throw InvalidInput("the stacking reduction needs n >= 2");
    Reduction out;
    out.n = n;
    const Rational b(1, n - 1);
    const Rational beta = Rational(n, n - 1);

    CellBoard board(n);
    StackingFunction f;
    out.min_margin = check_bound(f, BoundProfile{1, beta}).margin;

    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const auto& s = trace.steps[t];
        const std::string at = "step " + std::to_string(t + 1) + ": ";
        if (s.mode != TypingMode::pow2) throw InvalidInput(at + "reduction needs power-of-two typing");

        int need = board.k();
        for (AgentId i = 0; i < n; ++i) {
            need = std::max(need, s.types[static_cast<std::size_t>(i)] + 1);
            need = std::max(need, static_cast<int>(s.pressures[static_cast<std::size_t>(i)].size()));
        }
        std::optional<StackingFunction> before;
        if (need > board.k()) {
            board.grow(need);
            before = board.function();
            f = *before;
            ++out.re_embeds;
        }

        std::vector<int> touched(static_cast<std::size_t>(n));
        for (AgentId i = 0; i < n; ++i) touched[static_cast<std::size_t>(i)] = board.label_of(i, s.types[static_cast<std::size_t>(i)]);
        const int winner = touched[static_cast<std::size_t>(s.agent)];
        for (int l : touched)
            if (board.value(l) < board.value(winner))
                throw InvalidInput(at + "winner does not hold the minimum pressure; the reduction needs pressure-greedy");

        // Equal-valued cells are interchangeable; put the winner leftmost among its ties.
        std::size_t leftmost = board.position(winner);
        for (int l : touched)
            if (board.value(l) == board.value(winner)) leftmost = std::min(leftmost, board.position(l));
        if (leftmost != board.position(winner)) board.swap_cells(leftmost, board.position(winner));

        StackingOperation op;
        op.a = Rational(1);
        op.b = b;
        op.k = board.k();
        op.A = {board.cell(board.position(winner))};
        std::vector<std::pair<int, Rational>> deltas{{winner, Rational(1)}};
        for (int l : touched)
            if (l != winner) {
                op.B.push_back(board.cell(board.position(l)));
                deltas.emplace_back(l, -b);
            }
        op.B = normalize(std::move(op.B));

        f = apply_operation(f, op);
        board.apply(deltas);
        if (!(board.function() == f)) throw ConsistencyError(at + "cell values disagree with apply_operation");

        std::vector<Rational> pressures;
        for (AgentId i = 0; i < n; ++i) {
            const auto& snap = s.pressures[static_cast<std::size_t>(i)];
            for (int u = 0; u < board.k(); ++u) {
                Rational expected = static_cast<std::size_t>(u) < snap.size() ? snap[static_cast<std::size_t>(u)] : Rational();
                if (board.value(board.label_of(i, u)) != expected)
                    throw ConsistencyError(at + "cell of agent " + std::to_string(i + 1) + " type " +
                                           std::to_string(u + 1) + " holds " + board.value(board.label_of(i, u)).str() +
                                           ", pressure is " + expected.str());
                pressures.push_back(expected);
            }
        }
        std::sort(pressures.begin(), pressures.end());
        if (pressures != board.sorted_values()) throw ConsistencyError(at + "pressure multiset differs from piece values");

        auto check = check_bound(f, BoundProfile{board.k(), beta});
        out.min_margin = min(out.min_margin, check.margin);
        out.max_value = max(out.max_value, check.max_value);
        out.bound_ok = out.bound_ok && check.pass;
        out.steps.push_back(StackingStep{std::move(op), beta, std::move(before), f});
    }
    out.k = board.k();
    return out;
}

}  // namespace fairdiv
