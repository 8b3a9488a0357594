#include "rmdp/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "rmdp/bisim.hpp"
#include "rmdp/frozen_lake.hpp"
#include "rmdp/solvers.hpp"

namespace rmdp {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Combo {
    const char* algorithm;
    bool seeded;
    bool optimality_test;
};

// Row order within one size: the deterministic value-iteration run first,
// then the seeded policy-iteration variants.
constexpr Combo kCombos[] = {
    {"rvi", false, false},
    {"rpi", true, false},
    {"rpiot", true, true},
};

BenchRow run_once(const Rmdp& product, const Combo& combo, prec_t eps, std::uint64_t seed) {
    BenchRow row;
    row.algorithm = combo.algorithm;
    row.seed = seed;
    const auto start = Clock::now();
    if (combo.seeded) {
        SolverConfig config;
        config.initial_policy = SeededPolicy{seed};
        config.use_optimality_test = combo.optimality_test;
        const RpiResult res = robust_policy_iteration(product, config);
        row.value = res.value.values[product.initial_state];
        row.iterations = res.trace.iterations;
    } else {
        SolverConfig config;
        config.eps = eps;
        long sweeps = 0;
        const ValueFunction values = robust_value_iteration(product, config, &sweeps);
        row.value = values.values[product.initial_state];
        row.iterations = sweeps;
    }
    row.time_s = seconds_since(start);
    return row;
}

}  // namespace

BenchReport bench_frozen_lake(const BenchOptions& options) {
    if (options.sizes.empty()) throw ModelError("bench needs at least one map size");
    if (options.seeds.empty()) throw ModelError("bench needs at least one seed");
    if (!(options.eps > 0.0)) throw ModelError("bench eps must be positive");

    BenchReport report;
    for (const long n : options.sizes) {
        const auto holes = frozen_lake_random_holes(n, options.map_seed, options.hole_density);
        const Mdp lake = frozen_lake_mdp(n, options.slip, holes);
        // Metric between the start cell and its right neighbor; construction
        // and validation are shared by all runs and not timed.
        const Rmdp product = build_bisim_rmdp(lake, 0, 1);

        for (const Combo& combo : kCombos) {
            const std::vector<std::uint64_t> seeds =
                combo.seeded ? options.seeds : std::vector<std::uint64_t>{0};
            bool combo_timed_out = false;
            for (const std::uint64_t seed : seeds) {
                if (combo_timed_out) {
                    report.skipped.push_back({combo.algorithm, n, seed});
                    continue;
                }
                BenchRow row = run_once(product, combo, options.eps, seed);
                row.size = n;
                if (options.timeout_s > 0.0 && row.time_s > options.timeout_s)
                    combo_timed_out = true;
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

std::string bench_csv(const BenchReport& report) {
    std::string out = "algorithm,size,seed,value,time_s,iterations\n";
    char line[160];
    for (const BenchRow& row : report.rows) {
        std::snprintf(line, sizeof line, "%s,%ld,%llu,%.9f,%.3f,%ld\n", row.algorithm.c_str(),
                      row.size, static_cast<unsigned long long>(row.seed), row.value, row.time_s,
                      row.iterations);
        out += line;
    }
    return out;
}

std::string bench_json(const BenchReport& report) {
    json doc = json::object();
    doc["workload"] = "frozen-lake-bisim";
    doc["pair"] = json::array({"c0", "c1"});

    json runs = json::array();
    for (const BenchRow& row : report.rows) {
        json r = json::object();
        r["algorithm"] = row.algorithm;
        r["size"] = row.size;
        r["seed"] = row.seed;
        r["value"] = row.value;
        r["time_s"] = row.time_s;
        r["iterations"] = row.iterations;
        runs.push_back(std::move(r));
    }
    doc["runs"] = std::move(runs);

    json skipped = json::array();
    for (const BenchSkip& skip : report.skipped) {
        json s = json::object();
        s["algorithm"] = skip.algorithm;
        s["size"] = skip.size;
        s["seed"] = skip.seed;
        s["reason"] = "timeout";
        skipped.push_back(std::move(s));
    }
    doc["skipped"] = std::move(skipped);

    // One aggregate per (algorithm, size) in first-appearance order.
    json aggregates = json::array();
    std::vector<std::pair<std::string, long>> seen;
    for (const BenchRow& row : report.rows) {
        const std::pair<std::string, long> key{row.algorithm, row.size};
        bool done = false;
        for (const auto& k : seen)
            if (k == key) {
                done = true;
                break;
            }
        if (done) continue;
        seen.push_back(key);

        long count = 0, min_it = 0, max_it = 0;
        double time_sum = 0.0, value_sum = 0.0, iter_sum = 0.0;
        for (const BenchRow& r : report.rows) {
            if (r.algorithm != key.first || r.size != key.second) continue;
            if (count == 0) {
                min_it = max_it = r.iterations;
            } else {
                min_it = std::min(min_it, r.iterations);
                max_it = std::max(max_it, r.iterations);
            }
            ++count;
            time_sum += r.time_s;
            value_sum += r.value;
            iter_sum += static_cast<double>(r.iterations);
        }
        const double mean_time = time_sum / count;
        double var = 0.0;
        for (const BenchRow& r : report.rows)
            if (r.algorithm == key.first && r.size == key.second)
                var += (r.time_s - mean_time) * (r.time_s - mean_time);
        const double sd_time = count > 1 ? std::sqrt(var / (count - 1)) : 0.0;

        json agg = json::object();
        agg["algorithm"] = key.first;
        agg["size"] = key.second;
        agg["runs"] = count;
        agg["mean_value"] = value_sum / count;
        agg["mean_time_s"] = mean_time;
        agg["sd_time_s"] = sd_time;
        agg["mean_iterations"] = iter_sum / count;
        agg["min_iterations"] = min_it;
        agg["max_iterations"] = max_it;
        aggregates.push_back(std::move(agg));
    }
    doc["aggregates"] = std::move(aggregates);
    return doc.dump(2) + "\n";
}

}  // namespace rmdp
