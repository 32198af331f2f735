#ifndef ESTOR_SUBEXP_HPP
#define ESTOR_SUBEXP_HPP

#include "estor/dtree.hpp"
#include "estor/program.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace estor {

/// The square-root-time approximate counter embeds the DPOR tree into a
/// complete b-ary tree of height h (dummy children pad every degree to b)
/// and drives everything through a stateless inorder numbering of that
/// padded tree. All node and number counts are arbitrary precision; they
/// overflow 64 bits at moderate (b, h).

struct PaddedTreeParams {
	std::uint32_t branching = 2; // >= 2 and >= max DPOR out-degree
	std::uint32_t height = 1;    // >= max DPOR depth

	mpz_class node_count;		     // (b^{h+1} - 1) / (b - 1)
	mpz_class number_count;		     // b^h + b (b^h - 1) / (b - 1)
	std::vector<mpz_class> subtree_numbers; // [j]: numbers inside a height-j subtree
	std::vector<mpz_class> level_sizes;	 // [d]: b^d nodes at depth d

	static PaddedTreeParams make(std::uint32_t branching, std::uint32_t height);
	/// Bounds measured from an exhaustive traversal (b = max out-degree,
	/// h = max depth, clamped to the minima above).
	static PaddedTreeParams measured(const Program &p,
					 std::uint64_t node_cap = 5'000'000);
	/// Whether the DPOR tree of `p` embeds under these bounds.
	bool admits(const Program &p, std::uint64_t node_cap = 5'000'000) const;
};

/// Child indices in [1..b] from the root; empty is the root.
using TreePath = std::vector<std::uint32_t>;

struct Interval {
	mpz_class lo = 1;
	mpz_class hi = 1; // inclusive; lo <= hi
};

/// Inorder numbers of the node: a singleton at depth h, exactly b numbers
/// above, computed by the top-down offset recurrence.
std::vector<mpz_class> inorder_set(const PaddedTreeParams &params, const TreePath &path);

/// The unique node whose inorder set meets I and whose subtree contains
/// every node with that property, found by descending and narrowing.
TreePath locate_interval(const PaddedTreeParams &params, const Interval &interval);

enum class PaddedNodeKind { RealInternal, RealMaximalLeaf, Dummy };

/// Follows child indices through the ordered consistent children of the
/// DPOR tree. Rejects programs with assume instructions: blocked leaves
/// would break the subtree-has-a-real-leaf test the counter relies on.
PaddedNodeKind is_dpor_node(const Program &p, const TreePath &path);

/// The first min(theta, C(P)) maximal leaves in inorder sequence, as
/// canonical keys; equals the prefix of the depth-first leaf order.
std::vector<std::string> enumerate_first_leaves(const Program &p, std::uint64_t theta,
						const PaddedTreeParams &params);
std::vector<std::string> enumerate_first_leaves(const Program &p, std::uint64_t theta);

struct ApproxResult {
	bool exact = false;
	std::uint64_t exact_count = 0; // act one
	mpq_class estimate = 0;	       // act two: (M/z) * hits
	std::uint64_t hits = 0;
	mpz_class theta;
	mpz_class samples; // z
	PaddedTreeParams params;
};

/// Two-act counter: enumerate through theta = ceil(sqrt(M)) leaves exactly,
/// and past that estimate by uniform node sampling (depth weighted by
/// level size, then uniform child indices), so a sample hits a maximal
/// leaf with probability exactly C(P)/M.
ApproxResult approx_count(const Program &p, double ratio, double failure_probability,
			  std::uint64_t seed, const PaddedTreeParams &params,
			  std::uint64_t sample_cap = 10'000'000);
ApproxResult approx_count(const Program &p, double ratio, double failure_probability,
			  std::uint64_t seed);

} // namespace estor

#endif
