#ifndef ESTOR_TESTS_ORACLES_HPP
#define ESTOR_TESTS_ORACLES_HPP

// Independent brute-force oracles. Everything here recomputes results from
// first principles (full relation closures, exhaustive path searches,
// direct recursive constructions) and must stay independent of the library
// code paths it checks.

#include "estor/graph.hpp"
#include "estor/program.hpp"
#include "estor/subexp.hpp"

#include <gmpxx.h>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace estor::oracle {

/// Fully expanded po u rf u mo u fr pair set of a graph.
std::set<std::pair<EventId, EventId>> sc_relation_pairs(const ExecutionGraph &g);

/// Floyd-Warshall style closure over the expanded pair set.
bool sc_consistent_bruteforce(const ExecutionGraph &g);

/// Maximal events under the closed relation.
std::set<EventId> sc_maximal_bruteforce(const ExecutionGraph &g);

/// fr pairs by direct pair enumeration: (r, w) iff rf(r) precedes w in mo.
std::set<std::pair<EventId, EventId>> fr_pairs_bruteforce(const ExecutionGraph &g);

struct MaterializedTDag {
	// canonical key -> distinct successor keys / predecessor keys
	std::map<std::string, std::set<std::string>> successors;
	std::map<std::string, std::set<std::string>> predecessors;
	std::map<std::string, ExecutionGraph> graphs;
	std::string root_key;
};

/// Explicit interleaving DAG, for in-degree and sink cross-checks.
MaterializedTDag materialize_t_dag(const Program &p, std::size_t node_cap = 200'000);

/// Whether some interleaving run reaching exactly `target` (up to insertion
/// order) executes the events of `suffix` as its final steps, in order.
/// Exhaustive search over all runs; for small programs only.
bool reachable_with_suffix(const Program &p, const ExecutionGraph &target,
			   const std::vector<EventId> &suffix);

/// Direct recursive inorder numbering of the complete b-ary tree of height
/// h: every node's number set, keyed by root path.
std::map<std::vector<std::uint32_t>, std::vector<mpz_class>>
inorder_numbering_recursive(std::uint32_t branching, std::uint32_t height);

} // namespace estor::oracle

#endif
