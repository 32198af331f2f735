#ifndef ESTOR_TDAG_HPP
#define ESTOR_TDAG_HPP

#include "estor/graph.hpp"
#include "estor/program.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace estor {

/// The interleaving transition system on execution graphs: a pending read
/// reads from the mo-maximal write, a pending write is appended mo-maximal.

/// One successor per pending event, in scheduler (ascending tid) order.
std::vector<std::pair<Tid, ExecutionGraph>> t_successors(const Program &p,
							  const ExecutionGraph &g);

/// In-degree of a non-initial node, computed as the number of sc-maximal
/// events. Throws std::invalid_argument on the initial graph (callers use
/// the root convention e = 1 instead).
std::size_t t_predecessor_count(const ExecutionGraph &g);

struct SinkEnumeration {
	std::uint64_t count = 0;	  // maximal graphs (blocked sinks excluded)
	std::set<std::string> sinks;	  // canonical keys of the maximal graphs
	std::uint64_t blocked_sinks = 0;
	std::uint64_t dag_nodes = 0;	  // distinct graphs visited
	bool complete = true;		  // false iff the node cap was hit
};

/// Memoized exhaustive traversal keyed on canonical keys. Blocked sinks
/// (no successors, some thread blocked on a failed assume) are exploration
/// cost, not behaviors: counted separately and excluded from `count`.
SinkEnumeration enumerate_t_sinks(const Program &p, std::uint64_t node_cap = 1'000'000);

/// DOT rendering of the materialized DAG, for small programs.
std::string t_dag_to_dot(const Program &p, std::uint64_t node_cap = 10'000);

} // namespace estor

#endif
