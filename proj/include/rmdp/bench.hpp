#pragma once

// Benchmark harness for the bisimulation-metric workload: on each lake map
// it measures bounded value iteration once and seeded policy iteration
// (with and without the optimality test) across seeds, reporting the metric
// between the start cell and its right neighbor. Reports render as CSV rows
// or as JSON with per-combination aggregates.

#include <cstdint>
#include <string>
#include <vector>

#include "rmdp/types.hpp"

namespace rmdp {

struct BenchOptions {
    /// Map side lengths. Kept small by default: the product RMDP has n^4
    /// states and the evaluation LP grows accordingly.
    std::vector<long> sizes = {3};
    /// Seeds for the random initial policies of the policy-iteration runs.
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    /// When positive, once a run of some algorithm/size exceeds this wall
    /// time the remaining seeds of that combination are skipped. Checked
    /// between runs; a running solve is never interrupted.
    double timeout_s = 0.0;
    prec_t slip = 1.0 / 3.0;
    /// Convergence threshold of the value-iteration runs.
    prec_t eps = 1e-6;
    std::uint64_t map_seed = 0;
    prec_t hole_density = 0.2;
};

struct BenchRow {
    std::string algorithm;  // "rvi", "rpi" or "rpiot"
    long size = 0;
    std::uint64_t seed = 0;  // 0 for the deterministic rvi run
    prec_t value = 0.0;      // metric between cells 0 and 1
    double time_s = 0.0;
    long iterations = 0;  // outer iterations (rpi variants) or sweeps (rvi)
};

struct BenchSkip {
    std::string algorithm;
    long size = 0;
    std::uint64_t seed = 0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<BenchSkip> skipped;
};

/// Runs the workload. Model construction and polytope validation happen
/// once per size and are excluded from the per-run times. Throws
/// InvalidLayout/ModelError for bad options and passes solver errors
/// through.
BenchReport bench_frozen_lake(const BenchOptions& options);

/// Per-run rows, one line each, fixed column order
///     algorithm,size,seed,value,time_s,iterations
/// Identical inputs give byte-identical output except the time column.
std::string bench_csv(const BenchReport& report);

/// Rows plus per-(algorithm, size) aggregates: mean and sample standard
/// deviation of the times, mean/min/max iteration counts, mean value.
std::string bench_json(const BenchReport& report);

}  // namespace rmdp
