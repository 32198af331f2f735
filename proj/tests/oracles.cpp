#include "oracles.hpp"

#include "estor/tdag.hpp"

#include <algorithm>
#include <stdexcept>

namespace estor::oracle {

std::set<std::pair<EventId, EventId>> fr_pairs_bruteforce(const ExecutionGraph &g)
{
	std::set<std::pair<EventId, EventId>> fr;
	for (const Event &r : g.events()) {
		if (r.op != OpKind::Read)
			continue;
		EventId src = g.rf(r.id());
		std::vector<EventId> order = g.mo(r.loc);
		auto src_pos = std::find(order.begin(), order.end(), src);
		if (src_pos == order.end())
			continue;
		for (auto it = src_pos + 1; it != order.end(); ++it)
			fr.insert({r.id(), *it});
	}
	return fr;
}

std::set<std::pair<EventId, EventId>> sc_relation_pairs(const ExecutionGraph &g)
{
	std::set<std::pair<EventId, EventId>> rel;
	// po: init before everything, same-thread by idx
	for (const Event &a : g.events()) {
		for (const Event &b : g.events()) {
			if (a.id() == b.id())
				continue;
			if (a.is_init() && !b.is_init())
				rel.insert({a.id(), b.id()});
			else if (!a.is_init() && !b.is_init() && a.tid == b.tid &&
				 a.idx < b.idx)
				rel.insert({a.id(), b.id()});
		}
	}
	// rf
	for (const Event &r : g.events())
		if (r.op == OpKind::Read)
			rel.insert({g.rf(r.id()), r.id()});
	// mo: all ordered same-location pairs
	for (const Event &a : g.events()) {
		if (!a.is_write())
			continue;
		for (const Event &b : g.events()) {
			if (!b.is_write() || a.id() == b.id())
				continue;
			if (a.is_init() && b.is_init())
				continue;
			Loc loc = a.is_init() ? b.loc : a.loc;
			if (!a.is_init() && !b.is_init() && a.loc != b.loc)
				continue;
			std::vector<EventId> order = g.mo(loc);
			auto pa = std::find(order.begin(), order.end(), a.id());
			auto pb = std::find(order.begin(), order.end(), b.id());
			if (pa != order.end() && pb != order.end() && pa < pb)
				rel.insert({a.id(), b.id()});
		}
	}
	for (const auto &pair : fr_pairs_bruteforce(g))
		rel.insert(pair);
	return rel;
}

namespace {

std::set<std::pair<EventId, EventId>> closure(std::set<std::pair<EventId, EventId>> rel)
{
	bool changed = true;
	while (changed) {
		changed = false;
		std::set<std::pair<EventId, EventId>> add;
		for (const auto &[a, b] : rel)
			for (const auto &[c, d] : rel)
				if (b == c && !rel.count({a, d}))
					add.insert({a, d});
		if (!add.empty()) {
			changed = true;
			rel.insert(add.begin(), add.end());
		}
	}
	return rel;
}

} // namespace

bool sc_consistent_bruteforce(const ExecutionGraph &g)
{
	auto closed = closure(sc_relation_pairs(g));
	for (const Event &e : g.events())
		if (closed.count({e.id(), e.id()}))
			return false;
	return true;
}

std::set<EventId> sc_maximal_bruteforce(const ExecutionGraph &g)
{
	auto closed = closure(sc_relation_pairs(g));
	std::set<EventId> maximal;
	for (const Event &e : g.events()) {
		bool has_successor = false;
		for (const Event &other : g.events())
			if (closed.count({e.id(), other.id()})) {
				has_successor = true;
				break;
			}
		if (!has_successor)
			maximal.insert(e.id());
	}
	return maximal;
}

MaterializedTDag materialize_t_dag(const Program &p, std::size_t node_cap)
{
	MaterializedTDag dag;
	ExecutionGraph root;
	dag.root_key = root.canonical_key();
	std::vector<ExecutionGraph> stack;
	dag.graphs.emplace(dag.root_key, root);
	stack.push_back(std::move(root));
	while (!stack.empty()) {
		ExecutionGraph g = std::move(stack.back());
		stack.pop_back();
		std::string key = g.canonical_key();
		if (dag.graphs.size() > node_cap)
			throw std::length_error("t-dag oracle cap exceeded");
		for (auto &[tid, next] : t_successors(p, g)) {
			(void)tid;
			std::string next_key = next.canonical_key();
			dag.successors[key].insert(next_key);
			dag.predecessors[next_key].insert(key);
			if (dag.graphs.emplace(next_key, next).second)
				stack.push_back(std::move(next));
		}
	}
	return dag;
}

namespace {

bool search_runs(const Program &p, const ExecutionGraph &g, const std::string &target_key,
		 std::size_t target_size, const std::vector<EventId> &suffix,
		 std::vector<EventId> &steps)
{
	if (g.canonical_key() == target_key) {
		if (steps.size() < suffix.size())
			return false;
		return std::equal(suffix.begin(), suffix.end(),
				  steps.end() - static_cast<std::ptrdiff_t>(suffix.size()));
	}
	if (g.size() >= target_size)
		return false;
	for (auto &[tid, next] : t_successors(p, g)) {
		(void)tid;
		steps.push_back(next.events().back().id());
		if (search_runs(p, next, target_key, target_size, suffix, steps))
			return true;
		steps.pop_back();
	}
	return false;
}

} // namespace

bool reachable_with_suffix(const Program &p, const ExecutionGraph &target,
			   const std::vector<EventId> &suffix)
{
	std::vector<EventId> steps;
	ExecutionGraph root;
	return search_runs(p, root, target.canonical_key(), target.size(), suffix, steps);
}

namespace {

void number_subtree(std::vector<std::uint32_t> &path, std::uint32_t branching,
		    std::uint32_t height, mpz_class &counter,
		    std::map<std::vector<std::uint32_t>, std::vector<mpz_class>> &out)
{
	if (path.size() == height) {
		++counter;
		out[path].push_back(counter);
		return;
	}
	std::vector<mpz_class> own;
	for (std::uint32_t child = 1; child <= branching; ++child) {
		path.push_back(child);
		number_subtree(path, branching, height, counter, out);
		path.pop_back();
		++counter;
		own.push_back(counter);
	}
	out[path] = std::move(own);
}

} // namespace

std::map<std::vector<std::uint32_t>, std::vector<mpz_class>>
inorder_numbering_recursive(std::uint32_t branching, std::uint32_t height)
{
	std::map<std::vector<std::uint32_t>, std::vector<mpz_class>> out;
	std::vector<std::uint32_t> path;
	mpz_class counter = 0;
	number_subtree(path, branching, height, counter, out);
	return out;
}

} // namespace estor::oracle
