// Command-line front end. Exit codes: 0 all checks pass, 1 a bound or invariant
// check failed, 2 usage or input error.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairdiv/adversary.hpp"
#include "fairdiv/allocator.hpp"
#include "fairdiv/error.hpp"
#include "fairdiv/experiment.hpp"
#include "fairdiv/mms.hpp"
#include "fairdiv/stacking.hpp"

namespace {

using namespace fairdiv;

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_file(path, text);
}

std::string input(const std::string& path) {
    if (path.empty() || path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        return os.str();
    }
    return read_file(path);
}

struct Common {
    std::string in, out, format = "json";
    std::uint64_t seed = 0;
};

void add_io(CLI::App* cmd, Common& c, bool with_in) {
    if (with_in) cmd->add_option("--in", c.in, "input file (default stdin)");
    cmd->add_option("--out", c.out, "output file (default stdout)");
    cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", c.seed, "seed for generators and seeded policies");
}

int cmd_gen(const Common& c, const GeneratorConfig& base, const std::string& grid, const std::string& spread) {
    GeneratorConfig cfg = base;
    cfg.seed = c.seed;
    cfg.grid = parse_value_grid(grid);
    cfg.D = Rational::parse(spread);
    emit(c.out, save_instance(generate_instance(cfg)));
    return kPass;
}

int cmd_run(const Common& c, std::vector<std::string> policies, const std::string& trace_out) {
    Instance inst = load_instance(input(c.in));
    if (policies.empty()) policies = {"pressure-greedy", "bi-value", "round-robin", "dump-to-one"};
    ExperimentChecks checks;
    checks.seed = c.seed;
    auto report = run_experiment(inst, policies, checks);
    if (!trace_out.empty()) {
        auto policy = make_policy(policies.front(), inst.agents(), c.seed);
        write_file(trace_out, trace_to_jsonl(run_online(inst, *policy).trace));
    }
    std::vector<ExperimentReport> all{report};
    emit(c.out, c.format == "csv" ? experiment_to_csv(all) : experiment_to_json(all));
    return report.ok() ? kPass : kViolation;
}

struct AdversaryArgs {
    int n = 2;
    std::string eps = "1/2";
    std::string policy = "pressure-greedy";
    std::size_t budget = 10000;
    std::size_t horizon = 8;
    std::string instance_out, allocation_out;
};

int cmd_adversary(const Common& c, const AdversaryArgs& a) {
    const Rational eps = Rational::parse(a.eps);
    std::unique_ptr<Adversary> adv;
    if (a.n == 2)
        adv = std::make_unique<TwoAgentAdversary>(eps);
    else
        adv = std::make_unique<RecursiveAdversary>(a.n, eps, a.horizon);
    auto policy = make_policy(a.policy, a.n, c.seed);
    GameOptions opts;
    opts.budget = a.budget;
    GameResult res = play_game(*adv, *policy, opts);

    if (!a.instance_out.empty()) write_file(a.instance_out, save_instance(res.instance));
    if (!a.allocation_out.empty()) write_file(a.allocation_out, save_allocation(res.allocation));
    const bool verified = verify_certificate(res.instance, res.allocation, res.best);
    if (c.format == "csv") {
        emit(c.out, "agent,d_A,mms_upper,ratio_lower,ratio_lower_decimal,rounds,target_reached,verified\n" +
                        std::to_string(res.best.agent + 1) + "," + res.best.d_A.str() + "," + res.best.mms_upper.str() +
                        "," + res.best.ratio_lower.str() + "," + res.best.ratio_lower.to_decimal(20) + "," +
                        std::to_string(res.rounds) + "," + (res.target_reached ? "true" : "false") + "," +
                        (verified ? "true" : "false") + "\n");
    } else {
        emit(c.out, certificate_to_json(res.best));
    }
    std::cerr << "rounds " << res.rounds << ", ratio " << res.best.ratio_lower.to_decimal(12) << ", target "
              << (Rational(a.n) - eps).str() << (res.target_reached ? " reached" : " not reached")
              << (verified ? "" : ", certificate FAILED verification") << "\n";
    return verified && res.target_reached ? kPass : kViolation;
}

int cmd_replay(const Common& c) {
    auto steps = stacking_trace_from_jsonl(input(c.in));
    ReplayReport r = replay(steps);
    if (c.format == "csv") {
        emit(c.out, "steps,ok,min_margin,max_value,failure\n" + std::to_string(r.steps) + "," + (r.ok ? "true" : "false") +
                        "," + r.min_margin.str() + "," + r.max_value.str() + "," + r.failure + "\n");
    } else {
        nlohmann::json j = {{"steps", r.steps},
                            {"ok", r.ok},
                            {"min_margin", r.min_margin.str()},
                            {"max_value", r.max_value.str()}};
        if (!r.failure.empty()) j["failure"] = r.failure;
        emit(c.out, j.dump() + "\n");
    }
    return r.ok ? kPass : kViolation;
}

int cmd_stacking_export(const Common& c) {
    Instance inst = load_instance(input(c.in));
    PressureGreedyPolicy policy(inst.agents());
    Reduction red = allocator_to_stacking(run_online(inst, policy).trace);
    emit(c.out, stacking_trace_to_jsonl(red.steps));
    return red.bound_ok ? kPass : kViolation;
}

int cmd_mms(const Common& c) {
    Instance inst = load_instance(input(c.in));
    auto report = mms::mms_report(inst);
    if (c.format == "csv") {
        std::string out = "agent,exact,lower,upper,lower_decimal,upper_decimal\n";
        for (const auto& r : report)
            out += std::to_string(r.agent + 1) + "," + (r.exact ? r.exact->str() : "") + "," + r.lower.str() + "," +
                   r.upper.str() + "," + r.lower.to_decimal(20) + "," + r.upper.to_decimal(20) + "\n";
        emit(c.out, out);
    } else {
        emit(c.out, mms::report_to_json(report));
    }
    return kPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online MMS allocation of chores: allocators, oracles, stacking game, adversaries"};
    app.require_subcommand(1);

    Common gen_io, run_io, adv_io, replay_io, export_io, mms_io;

    GeneratorConfig gen;
    std::string grid = "powers-of-two", spread = "1";
    auto* g = app.add_subcommand("gen", "generate a random instance");
    add_io(g, gen_io, false);
    g->add_option("--n", gen.n, "agents")->required();
    g->add_option("--m", gen.m, "items")->required();
    g->add_option("--k", gen.k, "distinct values per agent");
    g->add_option("--D", spread, "largest/smallest value bound, as a rational");
    g->add_option("--grid", grid, "powers-of-two | uniform-rational | adversarial-near-threshold");

    std::vector<std::string> policies;
    std::string trace_out;
    auto* r = app.add_subcommand("run", "run policies on an instance and check every bound");
    add_io(r, run_io, true);
    r->add_option("--policy", policies, "policy (repeatable); default: the four named policies");
    r->add_option("--trace-out", trace_out, "JSON-lines trace of the first policy");

    AdversaryArgs adv;
    auto* a = app.add_subcommand("adversary", "adaptive lower-bound games");
    a->require_subcommand(1);
    auto* ar = a->add_subcommand("run", "play the adversary against a policy");
    add_io(ar, adv_io, false);
    ar->add_option("--n", adv.n, "agents")->check(CLI::Range(2, 64));
    ar->add_option("--eps", adv.eps, "gap eps in (0, 1], as a rational");
    ar->add_option("--policy", adv.policy, "policy");
    ar->add_option("--budget", adv.budget, "round budget");
    ar->add_option("--horizon", adv.horizon, "a-sequence pin index for levels >= 3");
    ar->add_option("--instance-out", adv.instance_out, "realized instance");
    ar->add_option("--allocation-out", adv.allocation_out, "realized allocation");

    auto* s = app.add_subcommand("stacking", "stacking-game traces");
    s->require_subcommand(1);
    auto* sr = s->add_subcommand("replay", "re-verify a stacking trace");
    add_io(sr, replay_io, true);
    auto* se = s->add_subcommand("export", "reduce a pressure-greedy run on an instance to a stacking trace");
    add_io(se, export_io, true);

    auto* m = app.add_subcommand("mms", "exact MMS or certified bounds per agent");
    add_io(m, mms_io, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        if (*g) return cmd_gen(gen_io, gen, grid, spread);
        if (*r) return cmd_run(run_io, policies, trace_out);
        if (*ar) return cmd_adversary(adv_io, adv);
        if (*sr) return cmd_replay(replay_io);
        if (*se) return cmd_stacking_export(export_io);
        if (*m) return cmd_mms(mms_io);
    } catch (const ConsistencyError& e) {
        std::cerr << "consistency failure: " << e.what() << "\n";
        return kViolation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
