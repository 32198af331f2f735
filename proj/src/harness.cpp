#include "estor/harness.hpp"
#include "estor/dtree.hpp"
#include "estor/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace estor {

TrialRun run_trials(const Program &p, EstimatorKind alg, std::size_t budget, WeightMode mode,
		    std::size_t n_trials, std::uint64_t base_seed, const TrialSink &sink)
{
	TrialRun run;
	run.trials.reserve(n_trials);
	run.running_mean.reserve(n_trials);
	double sum = 0.0;
	for (std::size_t i = 0; i < n_trials; ++i) {
		std::uint64_t seed = mix_seed(base_seed, i);
		EstimateTrial trial = run_estimator(p, alg, budget, mode, seed);
		sum += trial.value;
		double mean = sum / static_cast<double>(i + 1);
		run.running_mean.push_back(mean);
		if (sink)
			sink(trial, mean);
		run.trials.push_back(std::move(trial));
	}
	return run;
}

namespace {

/// Trailing simple moving average of the running mean, window `w`.
std::vector<double> smoothed(const std::vector<double> &xs, std::size_t w)
{
	std::vector<double> out(xs.size());
	double sum = 0.0;
	for (std::size_t i = 0; i < xs.size(); ++i) {
		sum += xs[i];
		if (i >= w)
			sum -= xs[i - w];
		out[i] = sum / static_cast<double>(std::min(i + 1, w));
	}
	return out;
}

} // namespace

std::optional<std::size_t> detect_convergence(const std::vector<double> &running_mean,
					      double exact, const ConvergenceConfig &cfg)
{
	if (exact <= 0.0)
		throw std::invalid_argument("convergence detection needs a positive exact count");
	std::size_t n = running_mean.size();
	std::size_t horizon = std::max(cfg.stable_window, cfg.flat_window);
	if (n < horizon)
		return std::nullopt;
	std::vector<double> ma = smoothed(running_mean, cfg.flat_window);

	double lo = exact * (1.0 - cfg.band);
	double hi = exact * (1.0 + cfg.band);
	for (std::size_t t = 0; t + horizon <= n; ++t) {
		bool in_band = true;
		for (std::size_t i = t; i < t + cfg.stable_window; ++i)
			if (running_mean[i] < lo || running_mean[i] > hi) {
				in_band = false;
				break;
			}
		if (!in_band)
			continue;
		double ma_min = ma[t], ma_max = ma[t];
		for (std::size_t i = t; i < t + cfg.flat_window; ++i) {
			ma_min = std::min(ma_min, ma[i]);
			ma_max = std::max(ma_max, ma[i]);
		}
		if (ma_min <= 0.0 || (ma_max - ma_min) / ma_min >= cfg.flat_threshold)
			continue;
		return t;
	}
	return std::nullopt;
}

ConvergenceReport run_convergence(const Program &p, const std::string &name,
				  EstimatorKind alg, std::size_t budget, WeightMode mode,
				  double exact, const ConvergenceConfig &cfg,
				  std::uint64_t base_seed)
{
	ConvergenceReport report;
	report.benchmark = name;
	report.alg = alg;
	report.budget = budget;
	report.mode = mode;
	report.exact = exact;

	double pooled = 0.0;
	std::size_t converged = 0;
	double trials_sum = 0.0;
	for (std::size_t s = 0; s < cfg.seeds; ++s) {
		SeedOutcome outcome;
		outcome.seed = base_seed + s;
		TrialRun run = run_trials(p, alg, budget, mode, cfg.max_trials, outcome.seed);
		outcome.final_mean = run.running_mean.empty() ? 0.0 : run.running_mean.back();
		if (auto t = detect_convergence(run.running_mean, exact, cfg)) {
			outcome.converged = true;
			outcome.trials_to_converge = *t + 1;
			++converged;
			trials_sum += static_cast<double>(outcome.trials_to_converge);
		}
		pooled += outcome.final_mean;
		report.seeds.push_back(outcome);
	}
	report.mean = pooled / static_cast<double>(cfg.seeds);
	report.rel_error = std::abs(report.mean - exact) / exact;
	report.success_ratio =
		static_cast<double>(converged) / static_cast<double>(cfg.seeds);
	report.quorum_met = converged >= cfg.success_quorum;
	if (report.quorum_met)
		report.mean_trials_to_converge = trials_sum / static_cast<double>(converged);
	return report;
}

BenchReport run_benchmark_suite(const std::vector<corpus::BenchmarkSpec> &suite,
				const std::vector<BenchCell> &cells,
				const ConvergenceConfig &cfg, std::uint64_t base_seed,
				std::uint64_t oracle_node_cap, std::ostream *progress)
{
	BenchReport report;
	for (const corpus::BenchmarkSpec &bench : suite) {
		Program p;
		try {
			p = parse_program(bench.source);
		} catch (const std::exception &e) {
			if (progress)
				*progress << bench.name << ": parse failed: " << e.what()
					  << "\n";
			continue;
		}
		for (const BenchCell &cell : cells) {
			try {
				TreeStats stats =
					enumerate_d_tree(p, cell.mode, oracle_node_cap);
				if (!stats.complete) {
					if (progress)
						*progress << bench.name
							  << ": oracle cap exceeded, skipped\n";
					continue;
				}
				double exact = cell.mode == WeightMode::MaximalLeavesOnly
						       ? static_cast<double>(
								 stats.maximal_leaves)
						       : static_cast<double>(stats.total_weight);
				report.rows.push_back(
					run_convergence(p, bench.name, cell.alg, cell.budget,
							cell.mode, exact, cfg, base_seed));
				if (progress) {
					const ConvergenceReport &row = report.rows.back();
					*progress << bench.name << " "
						  << estimator_name(cell.alg)
						  << " B=" << cell.budget
						  << " exact=" << exact
						  << " rel_error=" << row.rel_error
						  << " success=" << row.success_ratio << "\n";
				}
			} catch (const std::exception &e) {
				if (progress)
					*progress << bench.name << ": " << e.what() << "\n";
			}
		}
	}
	return report;
}

namespace {

const char *mode_name(WeightMode mode)
{
	return mode == WeightMode::MaximalLeavesOnly ? "maximal" : "cost";
}

} // namespace

void write_bench_csv(std::ostream &out, const BenchReport &report)
{
	out << "benchmark,alg,budget,weight,exact,mean,rel_error,success_ratio,"
	       "trials_to_converge\n";
	for (const ConvergenceReport &row : report.rows) {
		out << row.benchmark << "," << estimator_name(row.alg) << "," << row.budget
		    << "," << mode_name(row.mode) << "," << row.exact << "," << row.mean << ","
		    << row.rel_error << "," << row.success_ratio << ",";
		if (row.quorum_met)
			out << row.mean_trials_to_converge;
		else
			out << "failed";
		out << "\n";
	}
}

std::string bench_report_json(const BenchReport &report)
{
	nlohmann::json rows = nlohmann::json::array();
	for (const ConvergenceReport &row : report.rows) {
		nlohmann::json seeds = nlohmann::json::array();
		for (const SeedOutcome &s : row.seeds)
			seeds.push_back({{"seed", s.seed},
					 {"converged", s.converged},
					 {"trials_to_converge", s.trials_to_converge},
					 {"final_mean", s.final_mean}});
		nlohmann::json r = {{"benchmark", row.benchmark},
				    {"alg", estimator_name(row.alg)},
				    {"budget", row.budget},
				    {"weight", mode_name(row.mode)},
				    {"exact", row.exact},
				    {"mean", row.mean},
				    {"rel_error", row.rel_error},
				    {"success_ratio", row.success_ratio},
				    {"seeds", seeds}};
		if (row.quorum_met)
			r["trials_to_converge"] = row.mean_trials_to_converge;
		else
			r["trials_to_converge"] = "failed";
		rows.push_back(std::move(r));
	}
	return rows.dump(2);
}

} // namespace estor
