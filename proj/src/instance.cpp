#include "fairdiv/instance.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairdiv/error.hpp"

namespace fairdiv {
namespace {

void validate_item(int n, const ItemValues& values, std::size_t index) {
    if (values.size() != static_cast<std::size_t>(n))
        throw InvalidInput("item " + std::to_string(index + 1) + " has " + std::to_string(values.size()) +
                           " disutilities, expected " + std::to_string(n));
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i].sign() <= 0)
            throw InvalidInput("non-positive disutility " + values[i].str() + " for agent " + std::to_string(i + 1) +
                               " on item " + std::to_string(index + 1));
}

Rational parse_json_rational(const nlohmann::json& v) {
    if (v.is_string()) return Rational::parse(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    throw ParseError("rational must be a \"p\" or \"p/q\" string");
}

}  // namespace

Instance::Instance(int n, std::vector<ItemValues> items) : n_(n), items_(std::move(items)) {
    if (n < 1) throw InvalidInput("agent count must be at least 1");
    for (std::size_t j = 0; j < items_.size(); ++j) validate_item(n_, items_[j], j);
}

std::vector<Rational> Instance::agent_values(AgentId i) const {
    std::vector<Rational> out;
    out.reserve(items_.size());
    for (const auto& item : items_) out.push_back(item[static_cast<std::size_t>(i)]);
    return out;
}

Rational Instance::total(AgentId i) const {
    Rational sum;
    for (const auto& item : items_) sum += item[static_cast<std::size_t>(i)];
    return sum;
}

void Instance::push_back(ItemValues values) {
    validate_item(n_, values, items_.size());
    items_.push_back(std::move(values));
}

Instance Instance::prefix(std::size_t m) const {
    Instance out;
    out.n_ = n_;
    out.items_.assign(items_.begin(), items_.begin() + static_cast<std::ptrdiff_t>(std::min(m, items_.size())));
    return out;
}

std::vector<std::vector<ItemId>> Allocation::bundles(int n) const {
    std::vector<std::vector<ItemId>> out(static_cast<std::size_t>(n));
    for (ItemId j = 0; j < owner.size(); ++j) out[static_cast<std::size_t>(owner[j])].push_back(j);
    return out;
}

Rational Allocation::disutility(const Instance& inst, AgentId i) const {
    Rational sum;
    for (ItemId j = 0; j < owner.size(); ++j)
        if (owner[j] == i) sum += inst.d(i, j);
    return sum;
}

bool is_partition(const Partition& p, std::size_t m, int n) {
    if (p.size() != static_cast<std::size_t>(n)) return false;
    std::vector<char> seen(m, 0);
    std::size_t count = 0;
    for (const auto& bundle : p)
        for (ItemId j : bundle) {
            if (j >= m || seen[j]) return false;
            seen[j] = 1;
            ++count;
        }
    return count == m;
}

Rational max_bundle(const Instance& inst, AgentId i, const Partition& p) {
    Rational best;
    for (const auto& bundle : p) {
        Rational load;
        for (ItemId j : bundle) load += inst.d(i, j);
        best = max(best, load);
    }
    return best;
}

InstanceStats instance_stats(const Instance& inst) {
    if (inst.empty()) throw InvalidInput("instance_stats of an empty instance");
    InstanceStats stats{0, Rational(1)};
    for (AgentId i = 0; i < inst.agents(); ++i) {
        std::set<Rational> distinct;
        for (const auto& item : inst.items()) distinct.insert(item[static_cast<std::size_t>(i)]);
        stats.k = std::max(stats.k, static_cast<int>(distinct.size()));
        stats.D = max(stats.D, *distinct.rbegin() / *distinct.begin());
    }
    return stats;
}

Instance load_instance(std::string_view bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("instance JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("items") || !doc["n"].is_number_integer() ||
        !doc["items"].is_array())
        throw ParseError("instance JSON must be {\"n\": int, \"items\": [...]}");
    int n = doc["n"].get<int>();
    if (n < 1) throw InvalidInput("agent count must be at least 1");
    std::vector<ItemValues> items;
    for (const auto& entry : doc["items"]) {
        if (!entry.is_object() || !entry.contains("d") || !entry["d"].is_array())
            throw ParseError("each item must be {\"d\": [...]}");
        ItemValues values;
        for (const auto& v : entry["d"]) values.push_back(parse_json_rational(v));
        items.push_back(std::move(values));
    }
    return Instance(n, std::move(items));
}

std::string save_instance(const Instance& inst) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : inst.items()) {
        nlohmann::json d = nlohmann::json::array();
        for (const auto& v : item) d.push_back(v.str());
        items.push_back({{"d", std::move(d)}});
    }
    nlohmann::json doc = {{"n", inst.agents()}, {"items", std::move(items)}};
    return doc.dump() + "\n";
}

Allocation load_allocation(std::string_view bytes, int n, std::size_t m) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("allocation JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("assignment") || !doc["assignment"].is_array())
        throw ParseError("allocation JSON must be {\"assignment\": [...]}");
    Allocation alloc;
    for (const auto& v : doc["assignment"]) {
        if (!v.is_number_integer()) throw ParseError("assignment entries must be integers");
        int agent = v.get<int>();
        if (agent < 1 || agent > n) throw InvalidInput("agent index " + std::to_string(agent) + " out of range");
        alloc.owner.push_back(agent - 1);
    }
    if (m != 0 && alloc.owner.size() != m)
        throw InvalidInput("allocation covers " + std::to_string(alloc.owner.size()) + " items, instance has " +
                           std::to_string(m));
    return alloc;
}

std::string save_allocation(const Allocation& alloc) {
    nlohmann::json a = nlohmann::json::array();
    for (AgentId i : alloc.owner) a.push_back(i + 1);
    return nlohmann::json{{"assignment", std::move(a)}}.dump() + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << contents;
}

}  // namespace fairdiv
