#include "estor/subexp.hpp"

#include <algorithm>
#include <cassert>
#include <optional>
#include <stdexcept>

namespace estor {

PaddedTreeParams PaddedTreeParams::make(std::uint32_t branching, std::uint32_t height)
{
	if (branching < 2)
		throw std::invalid_argument("padded tree needs branching >= 2");
	if (height < 1)
		throw std::invalid_argument("padded tree needs height >= 1");
	PaddedTreeParams params;
	params.branching = branching;
	params.height = height;
	mpz_class b(branching);

	params.subtree_numbers.resize(height + 1);
	params.subtree_numbers[0] = 1;
	for (std::uint32_t j = 1; j <= height; ++j)
		params.subtree_numbers[j] = b * params.subtree_numbers[j - 1] + b;

	params.level_sizes.resize(height + 1);
	params.level_sizes[0] = 1;
	for (std::uint32_t d = 1; d <= height; ++d)
		params.level_sizes[d] = params.level_sizes[d - 1] * b;

	mpz_class bh = params.level_sizes[height]; // b^h
	params.node_count = (bh * b - 1) / (b - 1);
	params.number_count = bh + b * (bh - 1) / (b - 1);
	assert(params.number_count == params.subtree_numbers[height]);
	return params;
}

PaddedTreeParams PaddedTreeParams::measured(const Program &p, std::uint64_t node_cap)
{
	TreeStats stats = enumerate_d_tree(p, WeightMode::MaximalLeavesOnly, node_cap);
	if (!stats.complete)
		throw std::runtime_error("bounding pass exceeded the node cap; "
					 "supply padded parameters explicitly");
	auto branching = static_cast<std::uint32_t>(std::max<std::size_t>(2, stats.max_out_degree));
	auto height = static_cast<std::uint32_t>(std::max<std::size_t>(1, stats.max_depth));
	return make(branching, height);
}

bool PaddedTreeParams::admits(const Program &p, std::uint64_t node_cap) const
{
	TreeStats stats = enumerate_d_tree(p, WeightMode::MaximalLeavesOnly, node_cap);
	return stats.complete && stats.max_out_degree <= branching &&
	       stats.max_depth <= height;
}

namespace {

/// Offset of a node's subtree numbering: numbers inside the subtree are
/// (offset, offset + T_j], the node's own numbers sit at offset + m (T_{j-1} + 1).
mpz_class subtree_offset(const PaddedTreeParams &params, const TreePath &path)
{
	mpz_class x = 0;
	for (std::size_t i = 0; i < path.size(); ++i) {
		std::uint32_t child = path[i];
		if (child < 1 || child > params.branching)
			throw std::invalid_argument("child index out of range");
		std::uint32_t child_height = params.height - static_cast<std::uint32_t>(i) - 1;
		x += mpz_class(child - 1) * (params.subtree_numbers[child_height] + 1);
	}
	return x;
}

} // namespace

std::vector<mpz_class> inorder_set(const PaddedTreeParams &params, const TreePath &path)
{
	if (path.size() > params.height)
		throw std::invalid_argument("path longer than the padded height");
	mpz_class x = subtree_offset(params, path);
	std::uint32_t j = params.height - static_cast<std::uint32_t>(path.size());
	if (j == 0)
		return {x + 1};
	std::vector<mpz_class> numbers;
	numbers.reserve(params.branching);
	const mpz_class stride = params.subtree_numbers[j - 1] + 1;
	for (std::uint32_t m = 1; m <= params.branching; ++m)
		numbers.push_back(x + m * stride);
	return numbers;
}

TreePath locate_interval(const PaddedTreeParams &params, const Interval &interval)
{
	if (interval.lo < 1 || interval.hi > params.number_count ||
	    interval.lo > interval.hi)
		throw std::invalid_argument("interval out of range");
	TreePath path;
	mpz_class x = 0;
	for (std::uint32_t j = params.height; j > 0; --j) {
		const mpz_class stride = params.subtree_numbers[j - 1] + 1;
		bool descended = false;
		for (std::uint32_t k = 1; k <= params.branching; ++k) {
			mpz_class child_lo = x + (k - 1) * stride + 1;
			mpz_class child_hi = x + (k - 1) * stride +
					     params.subtree_numbers[j - 1];
			if (interval.lo >= child_lo && interval.hi <= child_hi) {
				path.push_back(k);
				x += (k - 1) * stride;
				descended = true;
				break;
			}
		}
		if (!descended)
			return path; // one of this node's own numbers splits I
	}
	return path; // depth-h leaf
}

PaddedNodeKind is_dpor_node(const Program &p, const TreePath &path)
{
	if (p.has_assume())
		throw std::invalid_argument(
			"the approximate counter handles assume-free programs only");
	ExecutionGraph g;
	for (std::uint32_t child : path) {
		if (classify_node(p, g) == NodeClass::MaximalLeaf)
			return PaddedNodeKind::Dummy; // below a real leaf
		ChildList kids = d_children(p, g);
		if (child < 1 || child > kids.children.size())
			return PaddedNodeKind::Dummy;
		g = std::move(kids.children[child - 1].second);
	}
	return classify_node(p, g) == NodeClass::MaximalLeaf ? PaddedNodeKind::RealMaximalLeaf
							     : PaddedNodeKind::RealInternal;
}

namespace {

/// One enumeration phase: the inorder-least maximal leaf whose subtree
/// numbers end past `found_up_to`. Descends through real children only,
/// skipping subtrees whose number range is exhausted, and backs up when a
/// qualifying child turns out to hold no further leaf.
struct LeafSearch {
	const Program &p;
	const PaddedTreeParams &params;

	std::optional<std::pair<std::string, mpz_class>>
	next_leaf(const mpz_class &found_up_to) const
	{
		return descend(ExecutionGraph(), 0, params.height, found_up_to);
	}

	std::optional<std::pair<std::string, mpz_class>>
	descend(const ExecutionGraph &g, const mpz_class &offset, std::uint32_t height,
		const mpz_class &found_up_to) const
	{
		mpz_class subtree_end = offset + params.subtree_numbers[height];
		if (subtree_end <= found_up_to)
			return std::nullopt;
		if (classify_node(p, g) == NodeClass::MaximalLeaf)
			return std::make_pair(g.canonical_key(), subtree_end);
		ChildList kids = d_children(p, g);
		if (height == 0)
			throw std::logic_error("padded height shorter than the real tree");
		const mpz_class stride = params.subtree_numbers[height - 1] + 1;
		for (std::size_t k = 0; k < kids.children.size(); ++k) {
			mpz_class child_offset = offset + mpz_class(k) * stride;
			auto found = descend(kids.children[k].second, child_offset,
					     height - 1, found_up_to);
			if (found)
				return found;
		}
		return std::nullopt;
	}
};

} // namespace

std::vector<std::string> enumerate_first_leaves(const Program &p, std::uint64_t theta,
						const PaddedTreeParams &params)
{
	if (p.has_assume())
		throw std::invalid_argument(
			"the approximate counter handles assume-free programs only");
	LeafSearch search{p, params};
	std::vector<std::string> leaves;
	mpz_class found_up_to = 0;
	while (leaves.size() < theta) {
		auto found = search.next_leaf(found_up_to);
		if (!found)
			break;
		leaves.push_back(std::move(found->first));
		found_up_to = std::move(found->second);
	}
	return leaves;
}

std::vector<std::string> enumerate_first_leaves(const Program &p, std::uint64_t theta)
{
	return enumerate_first_leaves(p, theta, PaddedTreeParams::measured(p));
}

namespace {

mpz_class ceil_sqrt(const mpz_class &n)
{
	mpz_class root;
	mpz_sqrt(root.get_mpz_t(), n.get_mpz_t());
	if (root * root < n)
		++root;
	return root;
}

mpz_class ceil_div(const mpz_class &num, const mpz_class &den)
{
	mpz_class q;
	mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
	return q;
}

} // namespace

ApproxResult approx_count(const Program &p, double ratio, double failure_probability,
			  std::uint64_t seed, const PaddedTreeParams &params,
			  std::uint64_t sample_cap)
{
	if (!(ratio > 1.0))
		throw std::invalid_argument("approximation ratio must exceed 1");
	if (!(failure_probability > 0.0) || !(failure_probability < 1.0))
		throw std::invalid_argument("failure probability must lie in (0, 1)");
	if (p.has_assume())
		throw std::invalid_argument(
			"the approximate counter handles assume-free programs only");

	ApproxResult result;
	result.params = params;
	const mpz_class &M = params.node_count;
	result.theta = ceil_sqrt(M);

	// Act one: exact enumeration up to theta leaves. Finding theta + 1
	// proves the count exceeds theta.
	if (result.theta + 1 > sample_cap)
		throw std::runtime_error("theta = " + result.theta.get_str() +
					 " leaves to enumerate; padded tree too large");
	std::uint64_t want = mpz_class(result.theta + 1).get_ui();
	std::vector<std::string> leaves = enumerate_first_leaves(p, want, params);
	if (leaves.size() <= result.theta) {
		result.exact = true;
		result.exact_count = leaves.size();
		return result;
	}

	// Act two: uniform node sampling. Chebyshev gives the (ratio, rho)
	// contract with z = (1/rho) (1/(ratio-1)^2) (M/theta - 1) samples.
	mpq_class z_exact = mpq_class(M - result.theta) / mpq_class(result.theta);
	z_exact *= mpq_class(1) / mpq_class(failure_probability);
	z_exact *= mpq_class(1) / mpq_class((ratio - 1) * (ratio - 1));
	result.samples = ceil_div(z_exact.get_num(), z_exact.get_den());
	if (result.samples < 1)
		result.samples = 1;
	if (result.samples > sample_cap)
		throw std::runtime_error("approximate counter would need " +
					 result.samples.get_str() +
					 " samples; padded tree too large");

	gmp_randclass uniform(gmp_randinit_default);
	uniform.seed(static_cast<unsigned long>(seed));

	std::uint64_t z = result.samples.get_ui();
	for (std::uint64_t i = 0; i < z; ++i) {
		mpz_class u = uniform.get_z_range(M);
		std::uint32_t depth = 0;
		mpz_class covered = 0;
		while (covered + params.level_sizes[depth] <= u) {
			covered += params.level_sizes[depth];
			++depth;
		}
		TreePath path(depth);
		for (std::uint32_t d = 0; d < depth; ++d) {
			mpz_class pick = uniform.get_z_range(mpz_class(params.branching));
			path[d] = static_cast<std::uint32_t>(pick.get_ui()) + 1;
		}
		if (is_dpor_node(p, path) == PaddedNodeKind::RealMaximalLeaf)
			++result.hits;
	}
	result.estimate = mpq_class(M * result.hits) / mpq_class(result.samples);
	return result;
}

ApproxResult approx_count(const Program &p, double ratio, double failure_probability,
			  std::uint64_t seed)
{
	return approx_count(p, ratio, failure_probability, seed,
			    PaddedTreeParams::measured(p));
}

} // namespace estor
