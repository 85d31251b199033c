#include <algorithm>
#include <cstdio>
#include <random>

#include "fairdiv/error.hpp"
#include "fairdiv/experiment.hpp"

namespace fairdiv {
namespace {

// Ratios smaller/larger around (sqrt 3 - 1)/2 = 0.36602...; two below, two above.
const Rational kNearThreshold[] = {Rational(4, 11), Rational(15, 41), Rational(11, 30), Rational(26, 71)};

constexpr std::int64_t kUniformSteps = 1000;

/// Uniform in [0, bound) by rejection, so the stream is the same on every standard library.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return x % bound;
}

/// k distinct draws from 0..population-1, in draw order.
std::vector<std::int64_t> sample_distinct(std::mt19937_64& rng, std::int64_t population, int k) {
    std::vector<std::int64_t> out;
    while (static_cast<int>(out.size()) < k) {
        auto x = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(population)));
        if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    }
    return out;
}

std::vector<Rational> agent_values(const GeneratorConfig& cfg, std::mt19937_64& rng) {
    std::vector<Rational> values;
    switch (cfg.grid) {
        case ValueGrid::powers_of_two: {
            const long span = cfg.D.floor_log2();  // exponents 0..span keep the spread within D
            if (span + 1 < cfg.k) throw InvalidInput("powers-of-two grid: k values do not fit spread D");
            const long shift = static_cast<long>(uniform_index(rng, 7)) - 3;
            for (auto z : sample_distinct(rng, span + 1, cfg.k)) values.push_back(Rational::pow2(z + shift));
            break;
        }
        case ValueGrid::uniform_rational: {
            if (cfg.k > 1 && cfg.D == Rational(1)) throw InvalidInput("uniform grid: k > 1 needs D > 1");
            if (cfg.k > kUniformSteps + 1) throw InvalidInput("uniform grid: k exceeds the grid size");
            const Rational scale(static_cast<std::int64_t>(uniform_index(rng, 8)) + 1,
                                 static_cast<std::int64_t>(uniform_index(rng, 8)) + 1);
            const Rational step = (cfg.D - Rational(1)) / Rational(kUniformSteps);
            for (auto t : sample_distinct(rng, kUniformSteps + 1, cfg.k)) values.push_back(scale * (Rational(1) + step * Rational(t)));
            break;
        }
        case ValueGrid::adversarial_near_threshold: {
            if (cfg.k > 2) throw InvalidInput("near-threshold grid supports k <= 2");
            std::vector<Rational> ratios;
            for (const auto& r : kNearThreshold)
                if (r.reciprocal() <= cfg.D) ratios.push_back(r);
            const Rational larger = Rational::pow2(static_cast<long>(uniform_index(rng, 4)));
            values.push_back(larger);
            if (cfg.k == 2) {
                if (ratios.empty()) throw InvalidInput("near-threshold grid needs D >= 71/26");
                values.push_back(larger * ratios[uniform_index(rng, ratios.size())]);
            }
            break;
        }
    }
    return values;
}

}  // namespace

ValueGrid parse_value_grid(std::string_view text) {
    if (text == "powers-of-two") return ValueGrid::powers_of_two;
    if (text == "uniform-rational") return ValueGrid::uniform_rational;
    if (text == "adversarial-near-threshold") return ValueGrid::adversarial_near_threshold;
    throw InvalidInput("unknown value grid: " + std::string(text));
}

std::string_view to_string(ValueGrid grid) {
    switch (grid) {
        case ValueGrid::powers_of_two: return "powers-of-two";
        case ValueGrid::uniform_rational: return "uniform-rational";
        default: return "adversarial-near-threshold";
    }
}

Instance generate_instance(const GeneratorConfig& cfg) {
    if (cfg.n < 1) throw InvalidInput("generator: n must be >= 1");
    if (cfg.k < 1) throw InvalidInput("generator: k must be >= 1");
    if (cfg.D < Rational(1)) throw InvalidInput("generator: D must be >= 1");

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::vector<Rational>> grid;
    for (int i = 0; i < cfg.n; ++i) grid.push_back(agent_values(cfg, rng));

    std::vector<ItemValues> items(cfg.m);
    for (auto& item : items)
        for (const auto& vals : grid) item.push_back(vals[uniform_index(rng, vals.size())]);
    return Instance(cfg.n, std::move(items));
}

std::string instance_digest(const Instance& inst) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : save_instance(inst)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fairdiv
