#ifndef ESTOR_DTREE_HPP
#define ESTOR_DTREE_HPP

#include "estor/graph.hpp"
#include "estor/program.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

namespace estor {

/// The exploration tree of the stateless optimal DPOR construction.
/// Nodes are execution graphs with insertion order; every consistent graph
/// is reached on exactly one root-to-node path, and the maximal leaves are
/// exactly the maximal graphs of the interleaving semantics.

enum class RevisitDir : std::uint8_t { Fwd, Bwd };

struct TransitionLabel {
	RevisitDir dir = RevisitDir::Fwd;
	EventId added;	 // the newly added event
	EventId target;	 // Fwd: rf/mo anchor write; Bwd: the revisited read
	EventId anchor;	 // Bwd only: the mo anchor write chosen for `added`
};

enum class NodeClass : std::uint8_t { Internal, MaximalLeaf, BlockedLeaf };

/// Candidate transitions for the minimal pending event `e` of `g`.
/// `h` must be the interleaving step of `e` from `g` (it supplies the
/// happens-before filter for backward candidates). Backward options are
/// listed before the maximal-revisitability check is applied.
std::vector<TransitionLabel> visit_options(const ExecutionGraph &g, const PendingEvent &e,
					   const ExecutionGraph &h);

/// Whether the events of `d_set` were added to `g` in one consecutive
/// sequence: peeling them off in reverse insertion order must pass through
/// valid interleaving steps only (each peeled read reads the then mo-maximal
/// write, each peeled write is mo-maximal, and each peeled event is its
/// thread's next replay event).
bool is_maximally_revisitable(const Program &p, const ExecutionGraph &g,
			      const std::vector<EventId> &d_set);

struct ChildList {
	std::vector<std::pair<TransitionLabel, ExecutionGraph>> children;
	std::size_t inconsistent_count = 0; // candidates filtered by the consistency check
};

/// All consistent children of an internal node, in the fixed deterministic
/// order: forward children by mo position of the anchor, then backward
/// children by (insertion position of the revisited read, mo position of
/// the anchor). Inconsistent candidates are tallied, not expanded.
ChildList d_children(const Program &p, const ExecutionGraph &g);

NodeClass classify_node(const Program &p, const ExecutionGraph &g);

enum class WeightMode : std::uint8_t {
	MaximalLeavesOnly, // weight 1 on maximal leaves, 0 elsewhere
	FullCost,	   // weight 1 on every consistent node, plus 1 per
			   // inconsistent candidate and per blocked leaf
};

std::uint64_t node_weight(WeightMode mode, NodeClass cls, std::size_t inconsistent_children);

struct TreeStats {
	std::uint64_t maximal_leaves = 0;
	std::uint64_t blocked_leaves = 0;
	std::uint64_t inconsistent_leaves = 0;
	std::uint64_t internal_nodes = 0;
	std::uint64_t total_weight = 0;		   // under the requested mode
	std::vector<std::uint64_t> width_per_depth; // consistent nodes per depth
	std::size_t max_out_degree = 0;
	std::size_t max_depth = 0;
	bool complete = true; // false iff the node cap was hit

	std::uint64_t consistent_nodes() const
	{
		return maximal_leaves + blocked_leaves + internal_nodes;
	}
};

/// Called once per visited consistent node, in depth-first order.
using NodeVisitor = std::function<void(std::size_t depth, NodeClass cls,
				       std::size_t child_count, std::size_t inconsistent_count,
				       std::uint64_t weight, const ExecutionGraph &g)>;

/// Exhaustive depth-first traversal in d_children order.
TreeStats enumerate_d_tree(const Program &p, WeightMode mode = WeightMode::MaximalLeavesOnly,
			   std::uint64_t node_cap = 5'000'000,
			   const NodeVisitor &visit = nullptr);

/// One line per visited node: depth, class, childCount, inconsistentCount,
/// weight. The traversal order and fields are stable.
void write_tree_log(std::ostream &out, const Program &p, WeightMode mode,
		    std::uint64_t node_cap = 5'000'000);

/// Canonical keys (insertion order dropped) of the maximal leaves, in
/// depth-first order.
std::vector<std::string> d_tree_leaf_keys(const Program &p,
					  std::uint64_t node_cap = 5'000'000);

} // namespace estor

#endif
