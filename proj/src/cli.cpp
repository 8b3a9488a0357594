#include "rmdp/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rmdp/bench.hpp"
#include "rmdp/bisim.hpp"
#include "rmdp/games.hpp"
#include "rmdp/model_io.hpp"
#include "rmdp/robust_eval.hpp"
#include "rmdp/solvers.hpp"
#include "rmdp/uncertainty.hpp"

namespace rmdp {

namespace {

using json = nlohmann::ordered_json;

/// Command-line misuse that CLI11 cannot catch itself (conflicting flags,
/// names that do not resolve, and so on). Reported as an input error.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

std::string fmt6(prec_t v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_output(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw UsageError("cannot write '" + out_path + "'");
    file << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const Mdp& as_mdp(const ParsedModel& parsed, const char* command) {
    if (parsed.kind != ModelKind::Mdp)
        throw UsageError(std::string(command) + " needs a model of kind 'mdp', got '" +
                         to_string(parsed.kind) + "'");
    return std::get<Mdp>(parsed.model);
}

/// Evaluation dispatch on the stored representation; mixing is rejected
/// inside either entry point.
ValueFunction evaluate_any(const Rmdp& rmdp, const Policy& policy) {
    for (long s = 0; s < rmdp.num_states(); ++s)
        if (!rmdp.enabled[s].empty())
            return rmdp.uncertainty[s][rmdp.enabled[s].front()].is_lifted()
                       ? robust_policy_evaluation_lifted(rmdp, policy)
                       : robust_policy_evaluation(rmdp, policy);
    throw ModelError("model has no enabled actions");
}

json policy_json(const Policy& policy, const std::vector<std::string>& state_names,
                 const std::vector<std::string>& action_names) {
    json out = json::object();
    for (size_t s = 0; s < policy.size(); ++s)
        out[state_names[s]] = action_names[policy[s]];
    return out;
}

void print_policy(std::ostream& os, const Policy& policy,
                  const std::vector<std::string>& state_names,
                  const std::vector<std::string>& action_names) {
    os << "policy:\n";
    for (size_t s = 0; s < policy.size(); ++s)
        os << "  " << state_names[s] << ": " << action_names[policy[s]] << "\n";
}

json values_json(const numvec& values, const std::vector<std::string>& state_names) {
    json out = json::object();
    for (size_t s = 0; s < values.size(); ++s) out[state_names[s]] = values[s];
    return out;
}

std::pair<std::string, std::string> split_pair(const std::string& text) {
    const size_t comma = text.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == text.size())
        throw UsageError("--pair wants two state names separated by a comma");
    return {text.substr(0, comma), text.substr(comma + 1)};
}

long state_by_name(const std::vector<std::string>& names, const std::string& name,
                   const char* where) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw UsageError(std::string(where) + ": unknown state '" + name + "'");
    return static_cast<long>(it - names.begin());
}

// *******************************************************
// Subcommand argument bundles
// *******************************************************

struct SolveArgs {
    std::string model_path, algo = "rpi", out_path;
    double eps = 1e-6;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double kappa = 0.0;
    bool kappa_given = false;
    bool as_json = false;
};

struct EvalArgs {
    std::string model_path, policy_path, out_path;
    bool as_json = false;
};

struct BisimArgs {
    std::string model_path, union_path, engine = "rpi", pair, out_path;
    double eps = 1e-6;
    bool as_json = false;
};

struct ConvertArgs {
    std::string model_path, out_path;
};

struct GameArgs {
    std::string model_path, out_path;
    double eps = 1e-6;
    bool as_json = false;
};

struct BenchArgs {
    std::vector<long> sizes = {3};
    long seed_count = 10;
    double timeout_s = 0.0;
    double slip = 1.0 / 3.0;
    double eps = 1e-6;
    std::uint64_t map_seed = 0;
    double density = 0.2;
    std::string out_path;
    bool as_json = false;
};

struct ValidateArgs {
    std::string model_path, out_path;
    bool as_json = false;
};

// *******************************************************
// Subcommand bodies
// *******************************************************

void run_solve(const SolveArgs& a, std::ostream& out) {
    const ParsedModel parsed = load_model(a.model_path);
    const Rmdp rmdp = parsed_to_rmdp(parsed);

    SolverConfig config;
    config.eps = a.eps;
    if (a.seed_given) config.initial_policy = SeededPolicy{a.seed};
    config.use_optimality_test = a.algo == "rpiot";

    const std::string initial_name = rmdp.state_names[rmdp.initial_state];
    json doc = json::object();
    std::ostringstream text;

    if (a.kappa_given) {
        if (a.algo == "rvi")
            throw UsageError("threshold mode runs policy iteration; drop '--algo rvi'");
        const ThresholdOutcome outcome = threshold_decision(rmdp, a.kappa, config);
        text << (outcome.satisfied ? "Yes" : "No") << "\n";
        text << "kappa: " << fmt6(a.kappa) << "\n";
        text << "bound: " << fmt6(outcome.bound) << " (value at '" << initial_name << "')\n";
        print_policy(text, outcome.policy, rmdp.state_names, rmdp.action_names);
        doc["command"] = "solve";
        doc["kappa"] = a.kappa;
        doc["satisfied"] = outcome.satisfied;
        doc["bound"] = outcome.bound;
        doc["initial"] = initial_name;
        doc["policy"] = policy_json(outcome.policy, rmdp.state_names, rmdp.action_names);
    } else if (a.algo == "rvi") {
        long sweeps = 0;
        const ValueFunction values = robust_value_iteration(rmdp, config, &sweeps);
        Policy greedy;
        robust_bellman_greedy(rmdp, values.values, greedy);
        text << "value: " << fmt6(values.at(rmdp.initial_state)) << " (initial state '"
             << initial_name << "')\n";
        text << "iterations: " << sweeps << "\n";
        text << "certificate: bounded gap <= " << a.eps << "\n";
        print_policy(text, greedy, rmdp.state_names, rmdp.action_names);
        doc["command"] = "solve";
        doc["algorithm"] = "rvi";
        doc["value"] = values.at(rmdp.initial_state);
        doc["initial"] = initial_name;
        doc["iterations"] = sweeps;
        doc["certificate"] = "bounded-gap";
        doc["eps"] = a.eps;
        doc["values"] = values_json(values.values, rmdp.state_names);
        doc["policy"] = policy_json(greedy, rmdp.state_names, rmdp.action_names);
    } else {
        const RpiResult res = robust_policy_iteration(rmdp, config);
        text << "value: " << fmt6(res.value.at(rmdp.initial_state)) << " (initial state '"
             << initial_name << "')\n";
        text << "iterations: " << res.trace.iterations << "\n";
        text << "certificate: exact LP\n";
        print_policy(text, res.policy, rmdp.state_names, rmdp.action_names);
        doc["command"] = "solve";
        doc["algorithm"] = a.algo;
        doc["value"] = res.value.at(rmdp.initial_state);
        doc["initial"] = initial_name;
        doc["iterations"] = res.trace.iterations;
        doc["certificate"] = "lp-exact";
        doc["values"] = values_json(res.value.values, rmdp.state_names);
        doc["policy"] = policy_json(res.policy, rmdp.state_names, rmdp.action_names);
    }

    write_output(a.as_json ? doc.dump(2) + "\n" : text.str(), a.out_path, out);
}

void run_eval(const EvalArgs& a, std::ostream& out) {
    const ParsedModel parsed = load_model(a.model_path);
    const Rmdp rmdp = parsed_to_rmdp(parsed);
    const Policy policy =
        parse_policy(read_file(a.policy_path), rmdp.state_names, rmdp.action_names);
    const ValueFunction values = evaluate_any(rmdp, policy);

    if (a.as_json) {
        json doc = json::object();
        doc["command"] = "eval";
        doc["values"] = values_json(values.values, rmdp.state_names);
        write_output(doc.dump(2) + "\n", a.out_path, out);
    } else {
        std::ostringstream text;
        for (long s = 0; s < rmdp.num_states(); ++s)
            text << rmdp.state_names[s] << ": " << fmt6(values.at(s)) << "\n";
        write_output(text.str(), a.out_path, out);
    }
}

void run_bisim(const BisimArgs& a, std::ostream& out) {
    const ParsedModel parsed = load_model(a.model_path);
    const Mdp& base = as_mdp(parsed, "bisim");

    Mdp model;
    long i = 0, j = 0;
    std::string name_i, name_j;
    if (!a.union_path.empty()) {
        const ParsedModel other_parsed = load_model(a.union_path);
        const Mdp& other = as_mdp(other_parsed, "bisim --union");
        if (a.pair.empty()) {
            i = base.initial_state;
            j = other.initial_state;
        } else {
            const auto [first, second] = split_pair(a.pair);
            i = state_by_name(base.state_names, first, "--pair (first model)");
            j = state_by_name(other.state_names, second, "--pair (second model)");
        }
        name_i = base.state_names[i];
        name_j = other.state_names[j];
        j += base.num_states();
        model = disjoint_union(base, other);
    } else {
        model = base;
        if (a.pair.empty()) {
            if (model.num_states() < 2)
                throw UsageError("the model has a single state; give --pair");
            i = 0;
            j = 1;
        } else {
            const auto [first, second] = split_pair(a.pair);
            i = state_by_name(model.state_names, first, "--pair");
            j = state_by_name(model.state_names, second, "--pair");
        }
        name_i = model.state_names[i];
        name_j = model.state_names[j];
    }

    SolverConfig config;
    config.eps = a.eps;
    prec_t distance = 0.0;
    long iterations = 0;
    if (a.engine == "fixpoint") {
        const Pseudometric metric =
            bisim_fixed_point(model, default_bisim_weights(model.discount), a.eps, 0, &iterations);
        distance = metric.at(i, j);
    } else {
        const Rmdp product = build_bisim_rmdp(model, i, j);
        if (a.engine == "rvi") {
            const ValueFunction values = robust_value_iteration(product, config, &iterations);
            distance = values.at(product.initial_state);
        } else {
            const RpiResult res = robust_policy_iteration(product, config);
            distance = res.value.at(product.initial_state);
            iterations = res.trace.iterations;
        }
    }

    if (a.as_json) {
        json doc = json::object();
        doc["command"] = "bisim";
        doc["engine"] = a.engine;
        doc["pair"] = json::array({name_i, name_j});
        doc["distance"] = distance;
        doc["iterations"] = iterations;
        write_output(doc.dump(2) + "\n", a.out_path, out);
    } else {
        std::ostringstream text;
        text << "distance: " << fmt6(distance) << "\n";
        text << "pair: '" << name_i << "' vs '" << name_j << "'\n";
        text << "engine: " << a.engine << " (" << iterations << " iterations)\n";
        write_output(text.str(), a.out_path, out);
    }
}

void run_convert(const ConvertArgs& a, std::ostream& out) {
    const ParsedModel parsed = load_model(a.model_path);
    write_output(render_model(parsed_to_rmdp(parsed)), a.out_path, out);
}

void run_game_solve(const GameArgs& a, std::ostream& out) {
    const ParsedModel parsed = load_model(a.model_path);
    if (parsed.kind != ModelKind::Game)
        throw UsageError("game-solve needs a model of kind 'game', got '" +
                         to_string(parsed.kind) + "'");
    const DiscountedGame& game = std::get<DiscountedGame>(parsed.model);
    SolverConfig config;
    config.eps = a.eps;
    const prec_t value = game_value(game, config);

    if (a.as_json) {
        json doc = json::object();
        doc["command"] = "game-solve";
        doc["value"] = value;
        doc["initial"] = game.state_names[game.initial_state];
        write_output(doc.dump(2) + "\n", a.out_path, out);
    } else {
        std::ostringstream text;
        text << "value: " << fmt6(value) << " (initial state '"
             << game.state_names[game.initial_state] << "')\n";
        write_output(text.str(), a.out_path, out);
    }
}

void run_bench(const BenchArgs& a, std::ostream& out) {
    BenchOptions options;
    options.sizes = a.sizes;
    options.seeds.clear();
    for (long k = 1; k <= a.seed_count; ++k)
        options.seeds.push_back(static_cast<std::uint64_t>(k));
    options.timeout_s = a.timeout_s;
    options.slip = a.slip;
    options.eps = a.eps;
    options.map_seed = a.map_seed;
    options.hole_density = a.density;

    const BenchReport report = bench_frozen_lake(options);
    write_output(a.as_json ? bench_json(report) : bench_csv(report), a.out_path, out);
}

void run_validate(const ValidateArgs& a, std::ostream& out) {
    const ParsedModel parsed = load_model(a.model_path);
    // Parsing already checked the structural invariants; polytopic kinds
    // additionally get the LP geometry checks (nonempty, bounded, inside
    // the simplex).
    if (std::holds_alternative<Rmdp>(parsed.model))
        validate_rmdp_polytopes(std::get<Rmdp>(parsed.model));

    const auto [states, actions] = std::visit(
        [](const auto& m) { return std::pair<long, long>{m.num_states(), m.num_actions()}; },
        parsed.model);

    if (a.as_json) {
        json doc = json::object();
        doc["command"] = "validate";
        doc["valid"] = true;
        doc["kind"] = to_string(parsed.kind);
        doc["states"] = states;
        doc["actions"] = actions;
        write_output(doc.dump(2) + "\n", a.out_path, out);
    } else {
        std::ostringstream text;
        text << "valid: kind=" << to_string(parsed.kind) << " states=" << states
             << " actions=" << actions << "\n";
        write_output(text.str(), a.out_path, out);
    }
}

int report_error(std::ostream& err, bool as_json, int code, const char* category,
                 const char* type, const std::string& message) {
    if (as_json) {
        json doc = json::object();
        json inner = json::object();
        inner["category"] = category;
        inner["type"] = type;
        inner["message"] = message;
        doc["error"] = std::move(inner);
        err << doc.dump() << "\n";
    } else {
        err << "error (" << type << "): " << message << "\n";
    }
    return code;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    // Best-effort detection so even errors thrown before parsing finishes
    // honor the requested error format.
    const bool json_errors = std::find(args.begin(), args.end(), "--json") != args.end();

    CLI::App app{"Exact solvers for robust MDPs with polytopic uncertainty sets"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "Robust optimal value and policy");
    solve->add_option("model", solve_args.model_path, "model file")->required();
    solve->add_option("--algo", solve_args.algo, "rpi, rpiot or rvi")
        ->check(CLI::IsMember({"rpi", "rpiot", "rvi"}));
    solve->add_option("--eps", solve_args.eps, "value-iteration precision");
    CLI::Option* seed_opt =
        solve->add_option("--seed", solve_args.seed, "seed for the random initial policy");
    CLI::Option* kappa_opt = solve->add_option(
        "--kappa", solve_args.kappa, "threshold mode: decide whether the value reaches kappa");
    solve->add_flag("--json", solve_args.as_json, "JSON output");
    solve->add_option("--out", solve_args.out_path, "write the report to this file");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Robust value of a fixed policy");
    eval->add_option("model", eval_args.model_path, "model file")->required();
    eval->add_option("--policy", eval_args.policy_path, "policy file")->required();
    eval->add_flag("--json", eval_args.as_json, "JSON output");
    eval->add_option("--out", eval_args.out_path, "write the report to this file");

    BisimArgs bisim_args;
    CLI::App* bisim = app.add_subcommand("bisim", "Bisimulation pseudometric between two states");
    bisim->add_option("model", bisim_args.model_path, "MDP file")->required();
    bisim->add_option("--union", bisim_args.union_path,
                      "second MDP file; compare across the disjoint union");
    bisim->add_option("--engine", bisim_args.engine, "rpi, rvi or fixpoint")
        ->check(CLI::IsMember({"rpi", "rvi", "fixpoint"}));
    bisim->add_option("--pair", bisim_args.pair, "two state names, comma separated");
    bisim->add_option("--eps", bisim_args.eps, "precision for rvi/fixpoint engines");
    bisim->add_flag("--json", bisim_args.as_json, "JSON output");
    bisim->add_option("--out", bisim_args.out_path, "write the report to this file");

    ConvertArgs convert_args;
    CLI::App* convert =
        app.add_subcommand("convert", "Rewrite any model kind as explicit polytopes");
    convert->add_option("model", convert_args.model_path, "model file")->required();
    convert->add_option("--out", convert_args.out_path, "write the converted model here");

    GameArgs game_args;
    CLI::App* game_solve = app.add_subcommand("game-solve", "Max-min value of a discounted game");
    game_solve->add_option("model", game_args.model_path, "game file")->required();
    game_solve->add_option("--eps", game_args.eps, "solver precision");
    game_solve->add_flag("--json", game_args.as_json, "JSON output");
    game_solve->add_option("--out", game_args.out_path, "write the report to this file");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "Benchmark harnesses");
    bench->require_subcommand(1);
    CLI::App* frozen = bench->add_subcommand(
        "frozen-lake", "Bisimulation metric workload on generated lake maps");
    frozen->add_option("--sizes", bench_args.sizes, "map side lengths")->delimiter(',');
    frozen->add_option("--seeds", bench_args.seed_count, "number of initial-policy seeds")
        ->check(CLI::PositiveNumber);
    frozen->add_option("--timeout-s", bench_args.timeout_s,
                       "skip a combination's remaining seeds once a run exceeds this");
    frozen->add_option("--slip", bench_args.slip, "slip probability");
    frozen->add_option("--eps", bench_args.eps, "value-iteration precision");
    frozen->add_option("--map-seed", bench_args.map_seed, "layout seed");
    frozen->add_option("--density", bench_args.density, "hole density");
    frozen->add_flag("--json", bench_args.as_json, "JSON report instead of CSV");
    frozen->add_option("--out", bench_args.out_path, "write the report to this file");

    ValidateArgs validate_args;
    CLI::App* validate =
        app.add_subcommand("validate", "Check shapes and uncertainty-set geometry");
    validate->add_option("model", validate_args.model_path, "model file")->required();
    validate->add_flag("--json", validate_args.as_json, "JSON output");
    validate->add_option("--out", validate_args.out_path, "write the report to this file");

    solve->callback([&] {
        solve_args.seed_given = seed_opt->count() > 0;
        solve_args.kappa_given = kappa_opt->count() > 0;
        run_solve(solve_args, out);
    });
    eval->callback([&] { run_eval(eval_args, out); });
    bisim->callback([&] { run_bisim(bisim_args, out); });
    convert->callback([&] { run_convert(convert_args, out); });
    game_solve->callback([&] { run_game_solve(game_args, out); });
    frozen->callback([&] { run_bench(bench_args, out); });
    validate->callback([&] { run_validate(validate_args, out); });

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("robustmdp");
    for (const std::string& arg : args) argv.push_back(arg.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        return 0;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return report_error(err, json_errors, 2, "input", "usage", e.what());
    } catch (const UsageError& e) {
        return report_error(err, json_errors, 2, "input", "usage", e.what());
    } catch (const FormatError& e) {
        return report_error(err, json_errors, 2, "input", "format", e.what());
    } catch (const InvalidLayout& e) {
        return report_error(err, json_errors, 2, "input", "layout", e.what());
    } catch (const ActionMismatch& e) {
        return report_error(err, json_errors, 2, "input", "action-mismatch", e.what());
    } catch (const EmptyUncertainty& e) {
        return report_error(err, json_errors, 2, "input", "empty-uncertainty", e.what());
    } catch (const ModelError& e) {
        return report_error(err, json_errors, 2, "input", "model", e.what());
    } catch (const IterationCapExceeded& e) {
        return report_error(err, json_errors, 1, "solver", "iteration-cap", e.what());
    } catch (const NumericalFailure& e) {
        return report_error(err, json_errors, 1, "solver", "numerical", e.what());
    } catch (const std::exception& e) {
        return report_error(err, json_errors, 1, "solver", "internal", e.what());
    }
}

}  // namespace rmdp
