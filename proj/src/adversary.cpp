#include "fairdiv/adversary.hpp"

#include "fairdiv/error.hpp"

namespace fairdiv {

TwoAgentAdversary::TwoAgentAdversary(Rational eps) : eps_(std::move(eps)) {
    if (eps_.sign() <= 0 || eps_ > Rational(1)) throw InvalidInput("eps must lie in (0, 1]");
    eps1_ = eps_ / Rational(2);
    Rational q = (Rational(3) / eps_).ceil();
    eps2_ = q.reciprocal();
}

ItemValues TwoAgentAdversary::next() {
    if (pending_) throw InvalidInput("two-agent adversary: previous item not yet allocated");
    ItemValues item;
    if (items_.empty()) {
        item = {Rational(1), Rational(1)};
    } else {
        const ItemValues& prev = items_.back();
        const AgentId last = owners_.back();
        Rational d1 = last == 0 ? prev[0] : prev[0] / eps1_;
        Rational d2;
        if (!first2_)
            d2 = sum2_ / eps2_;
        else if (last == 1)
            d2 = eps2_ * items_[*first2_][1];
        else
            d2 = items_[*first2_][1];
        item = {std::move(d1), std::move(d2)};
    }
    items_.push_back(item);
    pending_ = true;
    return item;
}

void TwoAgentAdversary::observe(AgentId winner) {
    if (!pending_) throw InvalidInput("two-agent adversary: observe without a pending item");
    if (winner != 0 && winner != 1) throw InvalidInput("two-agent adversary: agent out of range");
    pending_ = false;
    owners_.push_back(winner);
    sum2_ += items_.back()[1];
    if (winner == 1 && !first2_) first2_ = items_.size() - 1;
}

CertifyOptions TwoAgentAdversary::hints() const {
    CertifyOptions opts;
    const std::size_t m = items_.size();
    for (std::size_t s = 1; s < m; ++s) {
        Partition p(2);
        for (ItemId j = 0; j < m; ++j) p[j < s ? 0 : 1].push_back(j);
        opts.witnesses.push_back(LabeledWitness{"prefix-split", std::nullopt, std::move(p)});
    }
    return opts;
}

}  // namespace fairdiv
