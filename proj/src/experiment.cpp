#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fairdiv/allocator.hpp"
#include "fairdiv/error.hpp"
#include "fairdiv/experiment.hpp"
#include "fairdiv/mms.hpp"
#include "fairdiv/stacking.hpp"

namespace fairdiv {
namespace {

struct MmsInterval {
    Rational lower, upper;
    bool exact;
};

std::vector<MmsInterval> mms_intervals(const Instance& inst) {
    std::vector<MmsInterval> out;
    for (const auto& r : mms::mms_report(inst)) {
        if (r.exact) {
            out.push_back({*r.exact, *r.exact, true});
            continue;
        }
        auto values = inst.agent_values(r.agent);
        Rational upper = min(r.upper, mms::max_load(values, mms::lpt_partition(values, inst.agents())));
        out.push_back({r.lower, upper, r.lower == upper});
    }
    return out;
}

/// pass when the bound holds for every MMS in the interval, fail when it holds for none.
template <class Within>
BoundStatus judge(const std::vector<AgentRatio>& agents, Within within) {
    BoundStatus status = BoundStatus::pass;
    for (const auto& a : agents) {
        if (a.mms_upper.is_zero()) continue;
        if (!within(a.d_A, a.mms_upper)) return BoundStatus::fail;
        if (!within(a.d_A, a.mms_lower)) status = BoundStatus::inconclusive;
    }
    return status;
}

BoundStatus judge_factor(const std::vector<AgentRatio>& agents, const Rational& c) {
    return judge(agents, [&](const Rational& d, const Rational& mms) { return d <= c * mms; });
}

PolicyRun run_policy(const Instance& inst, const std::string& name, const std::vector<MmsInterval>& mms,
                     const ExperimentChecks& checks) {
    const int n = inst.agents();
    auto policy = make_policy(name, n, checks.seed);
    RunResult result = run_online(inst, *policy);

    PolicyRun run;
    run.policy = policy->name();
    for (AgentId i = 0; i < n; ++i) {
        const auto& iv = mms[static_cast<std::size_t>(i)];
        AgentRatio a;
        a.agent = i;
        a.d_A = result.allocation.disutility(inst, i);
        a.mms_lower = iv.lower;
        a.mms_upper = iv.upper;
        a.exact = iv.exact;
        if (iv.upper.is_zero()) {
            a.ratio_lower = a.ratio_upper = Rational(1);  // nothing arrived
        } else {
            a.ratio_lower = a.d_A / iv.upper;
            a.ratio_upper = a.d_A / iv.lower;
        }
        run.agents.push_back(std::move(a));
    }

    const bool greedy = dynamic_cast<PressureGreedyPolicy*>(policy.get()) != nullptr;
    auto* bi_value = dynamic_cast<BiValuePolicy*>(policy.get());
    if (bi_value) run.fell_back = bi_value->fell_back();

    // Pressure and count bounds are guarantees of the pressure policies only; every trace
    // must still satisfy the closed form, the zero sum and the rounding sandwich.
    TraceCheck tc = verify_trace(result.trace);
    const bool structural = tc.closed_form && tc.zero_sum && tc.rounding;
    run.trace_ok = (greedy || bi_value) ? tc.ok() : structural;
    if (!run.trace_ok) run.trace_failure = tc.failure;
    run.max_pressure = tc.max_pressure;
    run.max_types = tc.max_types;

    if (checks.stacking && greedy && n >= 2) {
        try {
            Reduction red = allocator_to_stacking(result.trace);
            run.stacking_consistent = red.bound_ok;
            run.stacking_margin = red.min_margin;
            if (!red.bound_ok) run.stacking_failure = "stacking bound violated";
        } catch (const Error& e) {
            run.stacking_consistent = false;
            run.stacking_failure = e.what();
        }
    }

    const Rational greedy_factor = Rational(8 * run.max_types + 2);
    if (greedy || (run.policy == "bi-value" && run.fell_back)) {
        run.bound = "8K'+2";
        run.bound_status = judge_factor(run.agents, greedy_factor);
    } else if (run.policy == "bi-value") {
        run.bound = "2+sqrt3";
        run.bound_status = judge(run.agents, within_two_plus_sqrt3);
    } else if (run.policy == "dump-to-one") {
        run.bound = "n";
        run.bound_status = judge_factor(run.agents, Rational(n));
    }
    return run;
}

nlohmann::json ratio_json(const AgentRatio& a) {
    nlohmann::json j = {{"agent", a.agent + 1}, {"d_A", a.d_A.str()}, {"exact", a.exact}};
    if (a.exact) {
        j["mms"] = a.mms_upper.str();
        j["ratio"] = a.ratio_lower.str();
        j["ratio_decimal"] = a.ratio_lower.to_decimal(20);
    } else {
        j["mms_interval"] = {a.mms_lower.str(), a.mms_upper.str()};
        j["ratio_interval"] = {a.ratio_lower.str(), a.ratio_upper.str()};
    }
    return j;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace

bool within_two_plus_sqrt3(const Rational& d, const Rational& mms) {
    Rational x = d - Rational(2) * mms;
    return x.sign() <= 0 || x * x <= Rational(3) * mms * mms;
}

std::string_view to_string(BoundStatus s) {
    switch (s) {
        case BoundStatus::pass: return "pass";
        case BoundStatus::fail: return "fail";
        case BoundStatus::inconclusive: return "inconclusive";
        default: return "none";
    }
}

bool ExperimentReport::ok() const {
    return std::all_of(runs.begin(), runs.end(), [](const PolicyRun& r) { return r.ok(); });
}

const PolicyRun* ExperimentReport::find(std::string_view policy) const {
    for (const auto& r : runs)
        if (r.policy == policy) return &r;
    return nullptr;
}

ExperimentReport run_experiment(const Instance& inst, const std::vector<std::string>& policies,
                                const ExperimentChecks& checks) {
    ExperimentReport report;
    report.digest = instance_digest(inst);
    report.n = inst.agents();
    report.m = inst.size();
    const auto mms = mms_intervals(inst);
    for (const auto& name : policies) report.runs.push_back(run_policy(inst, name, mms, checks));
    return report;
}

std::vector<ExperimentReport> run_batch(const std::vector<Instance>& instances, const std::vector<std::string>& policies,
                                        const ExperimentChecks& checks, unsigned threads) {
    std::vector<ExperimentReport> out(instances.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, instances.size())));

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (std::size_t t; (t = next++) < instances.size() && !failed;) {
            try {
                out[t] = run_experiment(instances[t], policies, checks);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.digest < b.digest; });
    return out;
}

std::string experiment_to_json(const std::vector<ExperimentReport>& reports) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& rep : reports) {
        nlohmann::json runs = nlohmann::json::array();
        for (const auto& r : rep.runs) {
            nlohmann::json agents = nlohmann::json::array();
            for (const auto& a : r.agents) agents.push_back(ratio_json(a));
            nlohmann::json j = {{"policy", r.policy},
                                {"agents", std::move(agents)},
                                {"max_pressure", r.max_pressure.str()},
                                {"max_types", r.max_types},
                                {"trace_ok", r.trace_ok},
                                {"bound", r.bound},
                                {"bound_status", std::string(to_string(r.bound_status))}};
            if (!r.trace_failure.empty()) j["trace_failure"] = r.trace_failure;
            if (r.policy == "bi-value") j["fell_back"] = r.fell_back;
            if (r.stacking_consistent) {
                j["stacking_consistent"] = *r.stacking_consistent;
                if (r.stacking_margin) j["stacking_margin"] = r.stacking_margin->str();
                if (!r.stacking_failure.empty()) j["stacking_failure"] = r.stacking_failure;
            }
            runs.push_back(std::move(j));
        }
        doc.push_back({{"digest", rep.digest}, {"n", rep.n}, {"m", rep.m}, {"runs", std::move(runs)}});
    }
    return doc.dump(2) + "\n";
}

std::string experiment_to_csv(const std::vector<ExperimentReport>& reports) {
    std::ostringstream os;
    os << "digest,n,m,policy,agent,d_A,mms_lower,mms_upper,exact,ratio_lower,ratio_upper,"
          "ratio_lower_decimal,ratio_upper_decimal,max_pressure,max_pressure_decimal,max_types,trace_ok,"
          "stacking_consistent,stacking_margin,bound,bound_status\n";
    for (const auto& rep : reports)
        for (const auto& r : rep.runs)
            for (const auto& a : r.agents) {
                os << rep.digest << ',' << rep.n << ',' << rep.m << ',' << csv_field(r.policy) << ',' << a.agent + 1 << ','
                   << a.d_A.str() << ',' << a.mms_lower.str() << ',' << a.mms_upper.str() << ','
                   << (a.exact ? "true" : "false") << ',' << a.ratio_lower.str() << ',' << a.ratio_upper.str() << ','
                   << a.ratio_lower.to_decimal(20) << ',' << a.ratio_upper.to_decimal(20) << ','
                   << r.max_pressure.str() << ',' << r.max_pressure.to_decimal(20) << ',' << r.max_types << ','
                   << (r.trace_ok ? "true" : "false") << ','
                   << (r.stacking_consistent ? (*r.stacking_consistent ? "true" : "false") : "") << ','
                   << (r.stacking_margin ? r.stacking_margin->str() : "") << ',' << csv_field(r.bound) << ','
                   << to_string(r.bound_status) << '\n';
            }
    return os.str();
}

}  // namespace fairdiv
