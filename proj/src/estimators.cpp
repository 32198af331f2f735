#include "estor/estimators.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <stdexcept>

namespace estor {

Expansion TSystemProvider::expand(const ExecutionGraph &g) const
{
	Expansion out;
	for (auto &[tid, child] : t_successors(p_, g)) {
		(void)tid;
		out.children.push_back(std::move(child));
	}
	return out;
}

std::size_t TSystemProvider::in_degree(const ExecutionGraph &g) const
{
	if (g.size() == 1)
		return 1; // root convention
	return t_predecessor_count(g);
}

NodeClass TSystemProvider::classify(const ExecutionGraph &g) const
{
	return classify_node(p_, g);
}

Expansion DTreeProvider::expand(const ExecutionGraph &g) const
{
	Expansion out;
	ChildList kids = d_children(p_, g);
	out.inconsistent_count = kids.inconsistent_count;
	for (auto &[label, child] : kids.children) {
		(void)label;
		out.children.push_back(std::move(child));
	}
	return out;
}

NodeClass DTreeProvider::classify(const ExecutionGraph &g) const
{
	return classify_node(p_, g);
}

EstimateTrial knuth_estimate(const SuccessorProvider &provider, WeightMode mode, Rng &rng,
			     std::uint64_t seed)
{
	EstimateTrial trial;
	trial.seed = seed;
	trial.alg = "knuth";
	double product = 1.0;
	double total = 0.0;
	ExecutionGraph g = provider.root();
	for (;;) {
		Expansion exp = provider.expand(g);
		total += product * static_cast<double>(node_weight(
					   mode, provider.classify(g), exp.inconsistent_count));
		if (exp.children.empty())
			break;
		product *= static_cast<double>(exp.children.size());
		std::size_t pick = pick_index(rng, exp.children.size());
		g = std::move(exp.children[pick]);
		++trial.path_length;
	}
	trial.value = total;
	return trial;
}

EstimateTrial pitt_estimate(const Program &p, Rng &rng, std::uint64_t seed)
{
	EstimateTrial trial;
	trial.seed = seed;
	trial.alg = "pitt";
	TSystemProvider provider(p);
	double value = 1.0;
	ExecutionGraph g = provider.root();
	for (;;) {
		Expansion exp = provider.expand(g);
		double d = exp.children.empty() ? 1.0 : static_cast<double>(exp.children.size());
		double e = static_cast<double>(provider.in_degree(g));
		value *= d / e;
		if (exp.children.empty())
			break;
		std::size_t pick = pick_index(rng, exp.children.size());
		g = std::move(exp.children[pick]);
		++trial.path_length;
	}
	trial.value = value;
	return trial;
}

EstimateTrial trust_estimate(const Program &p, WeightMode mode, Rng &rng, std::uint64_t seed)
{
	DTreeProvider provider(p);
	EstimateTrial trial = knuth_estimate(provider, mode, rng, seed);
	trial.alg = "trust";
	return trial;
}

namespace {

/// A population member: the end of a forced-move chain, its children, and
/// the weight accumulated along the chain (the end node included).
struct Member {
	std::vector<ExecutionGraph> children;
	std::uint64_t weight = 0;
	std::size_t chain_length = 0;
};

Member compress(const DTreeProvider &provider, ExecutionGraph g, WeightMode mode)
{
	Member m;
	for (;;) {
		Expansion exp = provider.expand(g);
		m.weight += node_weight(mode, provider.classify(g), exp.inconsistent_count);
		if (exp.children.size() == 1) {
			g = std::move(exp.children[0]);
			++m.chain_length;
			continue;
		}
		m.children = std::move(exp.children);
		return m;
	}
}

} // namespace

EstimateTrial se_estimate(const Program &p, std::size_t budget, WeightMode mode, Rng &rng,
			  std::uint64_t seed)
{
	if (budget < 1)
		throw std::invalid_argument("stochastic enumeration requires budget >= 1");
	EstimateTrial trial;
	trial.seed = seed;
	trial.alg = "se";
	trial.budget = budget;

	DTreeProvider provider(p);
	std::vector<Member> population;
	population.push_back(compress(provider, provider.root(), mode));
	trial.path_length = population.front().chain_length;

	double total = 0.0;
	double prefix = 1.0;
	while (!population.empty()) {
		std::uint64_t level_weight = 0;
		std::size_t successor_count = 0;
		for (const Member &m : population) {
			level_weight += m.weight;
			successor_count += m.children.size();
		}
		total += prefix * static_cast<double>(level_weight) /
			 static_cast<double>(population.size());
		if (successor_count == 0)
			break;
		prefix *= static_cast<double>(successor_count) /
			  static_cast<double>(population.size());

		std::vector<ExecutionGraph> successors;
		successors.reserve(successor_count);
		for (Member &m : population)
			for (ExecutionGraph &child : m.children)
				successors.push_back(std::move(child));

		std::vector<Member> next;
		if (successors.size() <= budget) {
			next.reserve(successors.size());
			for (ExecutionGraph &g : successors)
				next.push_back(compress(provider, std::move(g), mode));
		} else {
			for (std::size_t i : sample_indices(rng, successors.size(), budget))
				next.push_back(
					compress(provider, std::move(successors[i]), mode));
		}
		population = std::move(next);
		++trial.path_length;
	}
	trial.value = total;
	return trial;
}

std::vector<std::size_t> compressed_level_widths(const Program &p)
{
	DTreeProvider provider(p);
	std::vector<std::size_t> widths;
	std::vector<Member> level;
	level.push_back(compress(provider, provider.root(), WeightMode::MaximalLeavesOnly));
	while (!level.empty()) {
		widths.push_back(level.size());
		std::vector<Member> next;
		for (Member &m : level)
			for (ExecutionGraph &child : m.children)
				next.push_back(compress(provider, std::move(child),
							WeightMode::MaximalLeavesOnly));
		level = std::move(next);
	}
	return widths;
}

EstimateTrial genmc_estimate(const Program &p, Rng &rng, std::uint64_t seed)
{
	EstimateTrial trial;
	trial.seed = seed;
	trial.alg = "genmc";

	ExecutionGraph g;
	std::vector<std::pair<EventId, std::uint64_t>> read_options;
	double mo_product = 1.0;

	for (;;) {
		std::vector<PendingEvent> pending = next_events(p, g);
		if (pending.empty())
			break;
		std::vector<const PendingEvent *> pool;
		for (const PendingEvent &e : pending)
			if (e.kind == OpKind::Write)
				pool.push_back(&e);
		if (pool.empty())
			for (const PendingEvent &e : pending)
				pool.push_back(&e);
		const PendingEvent &e = *pool[pick_index(rng, pool.size())];
		++trial.path_length;

		if (e.kind == OpKind::Read) {
			std::vector<ExecutionGraph> options;
			for (EventId w : g.writes_at(e.loc)) {
				ExecutionGraph child = g;
				child.append_read(e.tid, e.idx, e.loc, w, g.event(w).value);
				if (child.is_sc_consistent())
					options.push_back(std::move(child));
			}
			assert(!options.empty()); // reading mo-max always works
			read_options.emplace_back(EventId{e.tid, e.idx},
						  static_cast<std::uint64_t>(options.size()));
			g = std::move(options[pick_index(rng, options.size())]);
		} else {
			std::vector<ExecutionGraph> options;
			for (EventId w : g.writes_at(e.loc)) {
				ExecutionGraph child = g;
				child.append_write(e.tid, e.idx, e.loc, e.value, w);
				if (child.is_sc_consistent())
					options.push_back(std::move(child));
			}
			assert(!options.empty());
			mo_product *= static_cast<double>(options.size());
			g = std::move(options[pick_index(rng, options.size())]);

			// a backward revisit would target every earlier
			// same-location read outside the new write's
			// happens-before prefix; count it instead of doing it
			EventId added{e.tid, e.idx};
			auto reach = g.porf_reachability();
			std::size_t e_pos = g.ins_position(added);
			for (EventId r : g.reads_at(e.loc)) {
				if (!reach[g.ins_position(r)][e_pos])
					for (auto &[id, count] : read_options)
						if (id == r)
							++count;
			}
		}
	}
	double value = mo_product;
	for (const auto &[id, count] : read_options) {
		(void)id;
		value *= static_cast<double>(count);
	}
	trial.value = value;
	return trial;
}

const char *estimator_name(EstimatorKind kind)
{
	switch (kind) {
	case EstimatorKind::KnuthT:
		return "knuth-t";
	case EstimatorKind::Pitt:
		return "pitt";
	case EstimatorKind::Trust:
		return "trust";
	case EstimatorKind::SE:
		return "se";
	case EstimatorKind::GenMC:
		return "genmc";
	}
	return "?";
}

EstimateTrial run_estimator(const Program &p, EstimatorKind kind, std::size_t budget,
			    WeightMode mode, std::uint64_t seed)
{
	Rng rng = make_rng(seed);
	switch (kind) {
	case EstimatorKind::KnuthT: {
		TSystemProvider provider(p);
		EstimateTrial t = knuth_estimate(provider, mode, rng, seed);
		t.alg = "knuth-t";
		return t;
	}
	case EstimatorKind::Pitt:
		return pitt_estimate(p, rng, seed);
	case EstimatorKind::Trust:
		return trust_estimate(p, mode, rng, seed);
	case EstimatorKind::SE:
		return se_estimate(p, budget, mode, rng, seed);
	case EstimatorKind::GenMC:
		return genmc_estimate(p, rng, seed);
	}
	throw std::logic_error("unknown estimator");
}

void OutputDistribution::add(const mpq_class &value, const mpq_class &probability)
{
	for (auto &[v, prob] : entries)
		if (v == value) {
			prob += probability;
			return;
		}
	entries.emplace_back(value, probability);
}

void OutputDistribution::normalize_sorted()
{
	std::sort(entries.begin(), entries.end(),
		  [](const auto &a, const auto &b) { return a.first < b.first; });
}

mpq_class OutputDistribution::total_probability() const
{
	mpq_class total = 0;
	for (const auto &[v, prob] : entries)
		total += prob;
	return total;
}

mpq_class OutputDistribution::mean() const
{
	mpq_class m = 0;
	for (const auto &[v, prob] : entries)
		m += v * prob;
	return m;
}

mpq_class OutputDistribution::second_moment() const
{
	mpq_class m = 0;
	for (const auto &[v, prob] : entries)
		m += v * v * prob;
	return m;
}

mpq_class OutputDistribution::variance() const
{
	mpq_class mu = mean();
	return second_moment() - mu * mu;
}

namespace {

struct DistEnumerator {
	const SuccessorProvider &provider;
	WeightMode mode;
	bool pitt;
	std::uint64_t path_cap;
	std::uint64_t paths = 0;
	OutputDistribution dist;

	void run()
	{
		walk(provider.root(), mpq_class(1), mpq_class(1), mpq_class(0));
		dist.normalize_sorted();
	}

	void walk(const ExecutionGraph &g, mpq_class probability, mpq_class factor,
		  mpq_class accumulated)
	{
		Expansion exp = provider.expand(g);
		if (pitt) {
			mpq_class d(exp.children.empty() ? 1
							 : static_cast<unsigned long>(
								   exp.children.size()));
			factor *= d / mpq_class(static_cast<unsigned long>(
					     provider.in_degree(g)));
		} else {
			accumulated +=
				factor * mpq_class(static_cast<unsigned long>(node_weight(
						mode, provider.classify(g),
						exp.inconsistent_count)));
			factor *= mpq_class(
				static_cast<unsigned long>(exp.children.empty()
								   ? 1
								   : exp.children.size()));
		}
		if (exp.children.empty()) {
			if (++paths > path_cap)
				throw std::length_error(
					"exact distribution: path cap exceeded");
			dist.add(pitt ? factor : accumulated, probability);
			return;
		}
		mpq_class child_probability =
			probability / mpq_class(static_cast<unsigned long>(exp.children.size()));
		for (const ExecutionGraph &child : exp.children)
			walk(child, child_probability, factor, accumulated);
	}
};

} // namespace

OutputDistribution exact_output_distribution(const Program &p, EstimatorKind alg,
					     WeightMode mode, std::uint64_t path_cap)
{
	if (alg == EstimatorKind::Pitt || alg == EstimatorKind::KnuthT) {
		TSystemProvider provider(p);
		DistEnumerator e{provider, mode, alg == EstimatorKind::Pitt, path_cap, 0, {}};
		e.run();
		return std::move(e.dist);
	}
	if (alg == EstimatorKind::Trust) {
		DTreeProvider provider(p);
		DistEnumerator e{provider, mode, false, path_cap, 0, {}};
		e.run();
		return std::move(e.dist);
	}
	throw std::invalid_argument("exact distribution requires knuth-t, pitt, or trust");
}

} // namespace estor
