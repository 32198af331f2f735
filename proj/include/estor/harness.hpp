#ifndef ESTOR_HARNESS_HPP
#define ESTOR_HARNESS_HPP

#include "estor/estimators.hpp"
#include "estor/program.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace estor {

namespace corpus {

struct BenchmarkSpec {
	std::string name;
	std::string source; // DSL text
};

// Programs from the worked examples.
std::string r_w_w();
std::string r_r_r(std::size_t readers = 3);
std::string r_rr();
std::string r_nr(std::size_t reads);
std::string wrww_rr();
std::string hairbrush(std::size_t writes);

// Parametric families with the same concurrency shapes at desk scale:
// contended increments, per-thread counters joined on a flag, write-only
// contention, and symmetric readers against ordered writers.
std::string incrementor(std::size_t threads);
std::string fine_counter(std::size_t threads);
std::string writers(std::size_t threads);
std::string readers_writers(std::size_t readers, std::size_t writers);
/// A blocked-execution variant: each reader assumes it saw the last write.
std::string assume_last_writer(std::size_t readers, std::size_t writers);

std::vector<BenchmarkSpec> paper_micro_suite();
std::vector<BenchmarkSpec> parametric_suite();
std::vector<BenchmarkSpec> all_suites();

} // namespace corpus

struct ConvergenceConfig {
	double band = 0.20;	      // relative half-width around the exact count
	std::size_t stable_window = 50;
	double flat_threshold = 0.02; // relative change of the smoothed mean
	std::size_t flat_window = 100;
	std::size_t max_trials = 2000;
	std::size_t seeds = 5;
	std::size_t success_quorum = 3;
};

struct TrialRun {
	std::vector<EstimateTrial> trials;
	std::vector<double> running_mean; // after each trial
};

using TrialSink = std::function<void(const EstimateTrial &, double running_mean)>;

/// Runs n_trials independent trials; trial i is seeded with
/// mix_seed(base_seed, i), so the stream is reproducible and independent of
/// any parallel scheduling of trials.
TrialRun run_trials(const Program &p, EstimatorKind alg, std::size_t budget, WeightMode mode,
		    std::size_t n_trials, std::uint64_t base_seed,
		    const TrialSink &sink = nullptr);

/// First trial index (0-based) from which the running mean sits inside the
/// band around `exact` for a full stability window while its trailing
/// moving average stays flat across the flatness window; nullopt when the
/// trajectory never settles.
std::optional<std::size_t> detect_convergence(const std::vector<double> &running_mean,
					      double exact, const ConvergenceConfig &cfg);

struct SeedOutcome {
	std::uint64_t seed = 0;
	bool converged = false;
	std::size_t trials_to_converge = 0; // 1-based, when converged
	double final_mean = 0.0;
};

struct ConvergenceReport {
	std::string benchmark;
	EstimatorKind alg = EstimatorKind::SE;
	std::size_t budget = 1;
	WeightMode mode = WeightMode::MaximalLeavesOnly;
	double exact = 0.0;
	double mean = 0.0;	// pooled over seeds, after max_trials
	double rel_error = 0.0; // |mean - exact| / exact
	double success_ratio = 0.0;
	bool quorum_met = false;
	double mean_trials_to_converge = 0.0; // over converged seeds, when quorum met
	std::vector<SeedOutcome> seeds;
};

/// Runs `seeds` independent trial sequences (base seeds base_seed + s) and
/// aggregates the section-style convergence verdicts.
ConvergenceReport run_convergence(const Program &p, const std::string &name,
				  EstimatorKind alg, std::size_t budget, WeightMode mode,
				  double exact, const ConvergenceConfig &cfg,
				  std::uint64_t base_seed);

struct BenchCell {
	EstimatorKind alg;
	std::size_t budget;
	WeightMode mode;
};

struct BenchReport {
	std::vector<ConvergenceReport> rows;
};

/// Exact counts come from the exhaustive oracle at run time; there are no
/// stored goldens to go stale.
BenchReport run_benchmark_suite(const std::vector<corpus::BenchmarkSpec> &suite,
				const std::vector<BenchCell> &cells,
				const ConvergenceConfig &cfg, std::uint64_t base_seed,
				std::uint64_t oracle_node_cap = 5'000'000,
				std::ostream *progress = nullptr);

void write_bench_csv(std::ostream &out, const BenchReport &report);
std::string bench_report_json(const BenchReport &report);

} // namespace estor

#endif
