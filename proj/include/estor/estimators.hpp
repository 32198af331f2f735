#ifndef ESTOR_ESTIMATORS_HPP
#define ESTOR_ESTIMATORS_HPP

#include "estor/dtree.hpp"
#include "estor/graph.hpp"
#include "estor/program.hpp"
#include "estor/rng.hpp"
#include "estor/tdag.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace estor {

/// One randomized estimate with its provenance.
struct EstimateTrial {
	double value = 0.0;
	std::size_t path_length = 0;
	std::uint64_t seed = 0;
	std::string alg;
	std::size_t budget = 1;
};

struct Expansion {
	std::vector<ExecutionGraph> children; // deterministic order
	std::size_t inconsistent_count = 0;
};

/// Tree/DAG abstraction behind the random walks: the interleaving system
/// (a DAG whose in-degrees are the sequentially-maximal event counts) and
/// the DPOR tree (in-degree 1 everywhere).
class SuccessorProvider {
public:
	virtual ~SuccessorProvider() = default;
	virtual ExecutionGraph root() const { return ExecutionGraph(); }
	virtual Expansion expand(const ExecutionGraph &g) const = 0;
	virtual std::size_t in_degree(const ExecutionGraph &g) const = 0;
	virtual NodeClass classify(const ExecutionGraph &g) const = 0;
};

class TSystemProvider final : public SuccessorProvider {
public:
	explicit TSystemProvider(const Program &p) : p_(p) {}
	Expansion expand(const ExecutionGraph &g) const override;
	std::size_t in_degree(const ExecutionGraph &g) const override;
	NodeClass classify(const ExecutionGraph &g) const override;

private:
	const Program &p_;
};

class DTreeProvider final : public SuccessorProvider {
public:
	explicit DTreeProvider(const Program &p) : p_(p) {}
	Expansion expand(const ExecutionGraph &g) const override;
	std::size_t in_degree(const ExecutionGraph &) const override { return 1; }
	NodeClass classify(const ExecutionGraph &g) const override;

private:
	const Program &p_;
};

/// Random root-to-terminal walk; returns sum_i w(v_i) * prod_{j<i} d_j.
/// With MaximalLeavesOnly this is the plain branching-factor product on
/// walks ending in a maximal leaf and 0 on blocked walks.
EstimateTrial knuth_estimate(const SuccessorProvider &provider, WeightMode mode, Rng &rng,
			     std::uint64_t seed = 0);

/// Walk on the interleaving DAG returning prod_i d_i/e_i, with e = 1 at the
/// root and d = 1 at the sink; unbiased for the sink count.
EstimateTrial pitt_estimate(const Program &p, Rng &rng, std::uint64_t seed = 0);

/// Knuth walk on the DPOR tree.
EstimateTrial trust_estimate(const Program &p, WeightMode mode, Rng &rng,
			     std::uint64_t seed = 0);

/// Population walk keeping at most `budget` coupled paths per depth.
/// Population dynamics run on the unique-successor-compressed view of the
/// tree (chains of forced moves are fast-forwarded, carrying their weight),
/// which is the granularity at which exploration branches; estimates stay
/// unbiased and a budget covering every branching level gives variance 0.
EstimateTrial se_estimate(const Program &p, std::size_t budget, WeightMode mode, Rng &rng,
			  std::uint64_t seed = 0);

/// The write-first counting baseline: schedules pending writes before
/// reads, never performs a backward revisit, and instead bumps the option
/// counter of any read such a revisit would have targeted. Biased.
EstimateTrial genmc_estimate(const Program &p, Rng &rng, std::uint64_t seed = 0);

/// Level widths of the unique-successor-compressed tree (the population
/// sizes an unbounded-budget walk would see). A budget of at least the
/// maximum width makes se_estimate deterministic.
std::vector<std::size_t> compressed_level_widths(const Program &p);

enum class EstimatorKind { KnuthT, Pitt, Trust, SE, GenMC };

const char *estimator_name(EstimatorKind kind);

/// Dispatch helper used by the trial runner and CLI.
EstimateTrial run_estimator(const Program &p, EstimatorKind kind, std::size_t budget,
			    WeightMode mode, std::uint64_t seed);

/// Exact value -> probability map of an estimator, as rationals.
class OutputDistribution {
public:
	std::vector<std::pair<mpq_class, mpq_class>> entries; // sorted by value

	void add(const mpq_class &value, const mpq_class &probability);
	void normalize_sorted();

	mpq_class total_probability() const;
	mpq_class mean() const;
	mpq_class second_moment() const;
	mpq_class variance() const; // second_moment - mean^2
};

/// Enumerates every root-to-terminal walk with its exact probability.
/// Throws std::length_error beyond `path_cap` paths.
OutputDistribution exact_output_distribution(const Program &p, EstimatorKind alg,
					     WeightMode mode = WeightMode::MaximalLeavesOnly,
					     std::uint64_t path_cap = 5'000'000);

} // namespace estor

#endif
