#include "fairdiv/stacking.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "fairdiv/error.hpp"

namespace fairdiv {
namespace {

const Rational kLeft(-1, 2);
const Rational kRight(1, 2);

void push_merged(std::vector<Piece>& out, Piece p) {
    if (!out.empty() && out.back().value == p.value && out.back().right == p.left)
        out.back().right = p.right;
    else
        out.push_back(std::move(p));
}

}  // namespace

IntervalSet normalize(IntervalSet set) {
    for (const auto& iv : set)
        if (iv.right < iv.left) throw InvalidInput("interval (" + iv.left.str() + ", " + iv.right.str() + "] is reversed");
    std::sort(set.begin(), set.end(), [](const Interval& x, const Interval& y) { return x.left < y.left; });
    IntervalSet out;
    for (auto& iv : set) {
        if (iv.left == iv.right) continue;
        if (!out.empty() && iv.left < out.back().right) throw InvalidInput("intervals overlap");
        if (!out.empty() && iv.left == out.back().right)
            out.back().right = iv.right;
        else
            out.push_back(std::move(iv));
    }
    return out;
}

Rational measure(const IntervalSet& set) {
    Rational total;
    for (const auto& iv : set) total += iv.length();
    return total;
}

StackingFunction::StackingFunction() : pieces_{Piece{kLeft, kRight, Rational()}} {}

std::string check_invariants(const std::vector<Piece>& pieces) {
    if (pieces.empty()) return "no pieces";
    if (pieces.front().left != kLeft) return "first piece does not start at -1/2";
    if (pieces.back().right != kRight) return "last piece does not end at 1/2";
    Rational integral;
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        const auto& piece = pieces[p];
        if (!(piece.left < piece.right)) return "empty piece at " + piece.left.str();
        if (p > 0 && pieces[p - 1].right != piece.left) return "gap or overlap at " + piece.left.str();
        if (p > 0 && piece.value < pieces[p - 1].value) return "values decrease at " + piece.left.str();
        integral += piece.value * piece.length();
    }
    if (!integral.is_zero()) return "integral is " + integral.str() + ", not 0";
    return {};
}

StackingFunction StackingFunction::from_pieces(std::vector<Piece> pieces) {
    if (auto why = check_invariants(pieces); !why.empty()) throw InvalidInput("invalid stacking function: " + why);
    std::vector<Piece> merged;
    for (auto& p : pieces) push_merged(merged, std::move(p));
    return StackingFunction(std::move(merged));
}

StackingFunction StackingFunction::from_cells(const std::vector<Rational>& values) {
    if (values.empty()) throw InvalidInput("from_cells needs at least one cell");
    Rational width(1, static_cast<std::int64_t>(values.size()));
    std::vector<Piece> pieces;
    for (std::size_t c = 0; c < values.size(); ++c) {
        Rational left = kLeft + width * Rational(static_cast<std::int64_t>(c));
        pieces.push_back(Piece{left, left + width, values[c]});
    }
    return from_pieces(std::move(pieces));
}

Rational StackingFunction::integral() const {
    Rational total;
    for (const auto& p : pieces_) total += p.value * (p.right - p.left);
    return total;
}

Rational StackingFunction::value_at(const Rational& x) const {
    if (x <= kLeft || x > kRight) throw InvalidInput("value_at outside (-1/2, 1/2]");
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), x,
                               [](const Piece& p, const Rational& v) { return p.right < v; });
    return it->value;
}

std::vector<Rational> StackingFunction::breakpoints() const {
    std::vector<Rational> out;
    out.reserve(pieces_.size() + 1);
    for (const auto& p : pieces_) out.push_back(p.left);
    out.push_back(kRight);
    return out;
}

void validate_operation(const StackingOperation& op) {
    auto in_unit = [](const Rational& v) { return v.sign() > 0 && v <= Rational(1); };
    if (!in_unit(op.a) || !in_unit(op.b)) throw InvalidInput("a and b must lie in (0, 1]");
    if (op.k < 1) throw InvalidInput("k must be at least 1");
    IntervalSet A = normalize(op.A);
    IntervalSet B = normalize(op.B);
    if (A.empty() || B.empty()) throw InvalidInput("A and B must be nonempty");
    for (const auto* set : {&A, &B})
        if (set->front().left < kLeft || set->back().right > kRight)
            throw InvalidInput("operation reaches outside (-1/2, 1/2]");
    Rational scale = Rational(op.k) * (op.a + op.b);
    if (measure(A) != op.b / scale || measure(B) != op.a / scale)
        throw InvalidInput("measure mismatch: |A| = " + measure(A).str() + ", |B| = " + measure(B).str() +
                           ", expected " + (op.b / scale).str() + " and " + (op.a / scale).str());
    if (B.front().left < A.back().right) throw InvalidInput("A must lie entirely left of B");
}

StackingFunction apply_operation(const StackingFunction& f, const StackingOperation& op) {
    validate_operation(op);
    IntervalSet A = normalize(op.A);
    IntervalSet B = normalize(op.B);

    std::vector<Rational> cuts;
    for (const auto& p : f.pieces()) cuts.push_back(p.left);
    cuts.push_back(kRight);
    for (const auto* set : {&A, &B})
        for (const auto& iv : *set) {
            cuts.push_back(iv.left);
            cuts.push_back(iv.right);
        }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // Fragments in left-to-right order; each lies inside one piece and is fully in or out of A and B.
    std::vector<Piece> frags;
    frags.reserve(cuts.size());
    const auto& pieces = f.pieces();
    std::size_t pi = 0, ai = 0, bi = 0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const Rational& l = cuts[c];
        while (pieces[pi].right <= l) ++pi;
        while (ai < A.size() && A[ai].right <= l) ++ai;
        while (bi < B.size() && B[bi].right <= l) ++bi;
        Rational v = pieces[pi].value;
        if (ai < A.size() && A[ai].left <= l) v += op.a;
        if (bi < B.size() && B[bi].left <= l) v -= op.b;
        frags.push_back(Piece{l, cuts[c + 1], std::move(v)});
    }

    std::stable_sort(frags.begin(), frags.end(), [](const Piece& x, const Piece& y) { return x.value < y.value; });

    std::vector<Piece> out;
    Rational pos = kLeft;
    for (auto& frag : frags) {
        Rational next = pos + (frag.right - frag.left);
        push_merged(out, Piece{pos, next, std::move(frag.value)});
        pos = std::move(next);
    }
    return StackingFunction::from_pieces(std::move(out));
}

Rational integral_F(const StackingFunction& f, const Rational& x) {
    if (x < kLeft || x > kRight) throw InvalidInput("integral_F outside [-1/2, 1/2]");
    Rational total;
    for (const auto& p : f.pieces())
        if (p.right > x) total += p.value * (p.right - max(p.left, x));
    return total;
}

std::vector<Rational> integral_profile(const StackingFunction& f) {
    const auto& pieces = f.pieces();
    std::vector<Rational> out(pieces.size() + 1);
    for (std::size_t p = pieces.size(); p-- > 0;)
        out[p] = out[p + 1] + pieces[p].value * (pieces[p].right - pieces[p].left);
    return out;
}

Rational bound_at(const BoundProfile& profile, const Rational& x) {
    Rational bk = profile.beta * Rational(profile.k);
    return bk / Rational(4) - bk * x * x;
}

BoundCheck check_bound(const StackingFunction& f, const BoundProfile& profile) {
    BoundCheck out;
    // Both sides vanish at -1/2 and 1/2, so the margin is taken over the
    // interior breakpoints plus the bound's peak at 0.
    auto xs = f.breakpoints();
    auto F = integral_profile(f);
    xs.push_back(Rational(0));
    F.push_back(integral_F(f, Rational(0)));
    bool first = true;
    for (std::size_t p = 0; p < xs.size(); ++p) {
        if (xs[p] == Rational(-1, 2) || xs[p] == Rational(1, 2)) continue;
        Rational slack = bound_at(profile, xs[p]) - F[p];
        if (first || slack < out.margin || (slack == out.margin && xs[p] < out.worst_x)) {
            out.margin = slack;
            out.worst_x = xs[p];
            first = false;
        }
    }
    out.max_value = f.max_value();
    Rational cap = profile.beta * Rational(profile.k);
    if (out.margin.sign() < 0) {
        out.pass = false;
        out.failure = "F(" + out.worst_x.str() + ") exceeds the bound by " + (-out.margin).str();
    } else if (out.max_value > cap) {
        out.pass = false;
        out.failure = "max value " + out.max_value.str() + " exceeds " + cap.str();
    }
    return out;
}

namespace {

/// Holes of `set` inside (from, to], left to right.
IntervalSet holes(const IntervalSet& set, const Rational& from, const Rational& to) {
    IntervalSet out;
    Rational cursor = from;
    for (const auto& iv : set) {
        if (iv.left > cursor) out.push_back(Interval{cursor, iv.left});
        cursor = max(cursor, iv.right);
    }
    if (cursor < to) out.push_back(Interval{cursor, to});
    return out;
}

}  // namespace

bool is_contiguous(const StackingOperation& op) {
    IntervalSet A = normalize(op.A);
    IntervalSet B = normalize(op.B);
    return A.size() == 1 && B.size() == 1 && A.front().right == B.front().left;
}

StackingOperation contiguify(const StackingFunction& f, const StackingOperation& op) {
    validate_operation(op);
    (void)f;  // the result depends only on the geometry of op
    StackingOperation out = op;
    out.A = normalize(op.A);
    out.B = normalize(op.B);
    const Rational anchor = out.B.front().left;

    for (;;) {
        auto gaps = holes(out.A, out.A.front().left, anchor);
        if (gaps.empty()) break;
        const Interval target = gaps.back();
        Interval& first = out.A.front();
        Rational delta = min(first.length(), target.length());
        first.left += delta;
        out.A.push_back(Interval{target.left, target.left + delta});
        out.A = normalize(std::move(out.A));
    }
    for (;;) {
        auto gaps = holes(out.B, out.B.front().left, out.B.back().right);
        if (gaps.empty()) break;
        const Interval target = gaps.front();
        Interval& last = out.B.back();
        Rational delta = min(last.length(), target.length());
        last.right -= delta;
        out.B.push_back(Interval{target.right - delta, target.right});
        out.B = normalize(std::move(out.B));
    }
    validate_operation(out);
    return out;
}

bool dominates(const StackingFunction& hi, const StackingFunction& lo) {
    auto xs = hi.breakpoints();
    auto more = lo.breakpoints();
    xs.insert(xs.end(), more.begin(), more.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (const auto& x : xs)
        if (integral_F(hi, x) < integral_F(lo, x)) return false;
    return true;
}

namespace {

nlohmann::json intervals_json(const IntervalSet& set) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& iv : set) out.push_back({iv.left.str(), iv.right.str()});
    return out;
}

nlohmann::json pieces_json(const StackingFunction& f) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : f.pieces()) out.push_back({p.left.str(), p.right.str(), p.value.str()});
    return out;
}

Rational rat(const nlohmann::json& j) {
    if (!j.is_string()) throw ParseError("rationals must be strings");
    return Rational::parse(j.get<std::string>());
}

IntervalSet intervals_from(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("interval list must be an array");
    IntervalSet out;
    for (const auto& iv : j) {
        if (!iv.is_array() || iv.size() != 2) throw ParseError("interval must be [l, r]");
        out.push_back(Interval{rat(iv[0]), rat(iv[1])});
    }
    return out;
}

StackingFunction pieces_from(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("piece list must be an array");
    std::vector<Piece> out;
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 3) throw ParseError("piece must be [l, r, value]");
        out.push_back(Piece{rat(p[0]), rat(p[1]), rat(p[2])});
    }
    return StackingFunction::from_pieces(std::move(out));
}

}  // namespace

std::string stacking_trace_to_jsonl(const std::vector<StackingStep>& steps) {
    std::string out;
    for (const auto& s : steps) {
        nlohmann::json line = {{"a", s.op.a.str()},
                               {"b", s.op.b.str()},
                               {"k", s.op.k},
                               {"beta", s.beta.str()},
                               {"A", intervals_json(s.op.A)},
                               {"B", intervals_json(s.op.B)},
                               {"pieces_after", pieces_json(s.after)}};
        if (s.before) line["pieces_before"] = pieces_json(*s.before);
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<StackingStep> stacking_trace_from_jsonl(std::string_view text) {
    std::vector<StackingStep> steps;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            StackingStep s;
            s.op.a = rat(j.at("a"));
            s.op.b = rat(j.at("b"));
            s.op.k = j.contains("k") ? j["k"].get<int>() : 1;
            if (j.contains("beta")) s.beta = rat(j["beta"]);
            s.op.A = intervals_from(j.at("A"));
            s.op.B = intervals_from(j.at("B"));
            s.after = pieces_from(j.at("pieces_after"));
            if (j.contains("pieces_before")) s.before = pieces_from(j["pieces_before"]);
            steps.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("stacking trace line " + std::to_string(number) + ": " + e.what());
        } catch (const InvalidInput& e) {
            throw ParseError("stacking trace line " + std::to_string(number) + ": " + e.what());
        }
    }
    return steps;
}

ReplayReport replay(const std::vector<StackingStep>& steps) {
    ReplayReport out;
    StackingFunction f;
    BoundProfile first{steps.empty() ? 1 : steps.front().op.k, steps.empty() ? Rational(2) : steps.front().beta};
    out.min_margin = check_bound(f, first).margin;
    for (const auto& s : steps) {
        ++out.steps;
        const std::string at = "step " + std::to_string(out.steps) + ": ";
        if (s.before) f = *s.before;
        try {
            f = apply_operation(f, s.op);
        } catch (const InvalidInput& e) {
            out.ok = false;
            out.failure = at + e.what();
            return out;
        }
        if (!(f == s.after)) {
            out.ok = false;
            out.failure = at + "recorded pieces_after differ from the recomputed function";
            return out;
        }
        if (s.beta.sign() <= 0 || s.beta > Rational(2) || s.op.a + s.op.b > s.beta) {
            out.ok = false;
            out.failure = at + "a + b exceeds beta or beta outside (0, 2]";
            return out;
        }
        auto check = check_bound(f, BoundProfile{s.op.k, s.beta});
        out.min_margin = min(out.min_margin, check.margin);
        out.max_value = max(out.max_value, check.max_value);
        if (!check.pass) {
            out.ok = false;
            out.failure = at + check.failure;
            return out;
        }
    }
    return out;
}

}  // namespace fairdiv
