#include "estor/tdag.hpp"

#include <cassert>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace estor {

namespace {

ExecutionGraph t_step(const ExecutionGraph &g, const PendingEvent &e)
{
	ExecutionGraph next = g;
	if (e.kind == OpKind::Read) {
		EventId src = g.mo_max_write(e.loc);
		Val value = g.event(src).value; // init's stored value is 0
		next.append_read(e.tid, e.idx, e.loc, src, value);
	} else {
		next.append_write(e.tid, e.idx, e.loc, e.value, g.mo_max_write(e.loc));
	}
	return next;
}

} // namespace

std::vector<std::pair<Tid, ExecutionGraph>> t_successors(const Program &p,
							  const ExecutionGraph &g)
{
	std::vector<std::pair<Tid, ExecutionGraph>> result;
	for (const PendingEvent &e : next_events(p, g)) {
		ExecutionGraph next = t_step(g, e);
		// reading from mo-max keeps SC; guarded in debug builds only
		assert(next.is_sc_consistent());
		result.emplace_back(e.tid, std::move(next));
	}
	return result;
}

std::size_t t_predecessor_count(const ExecutionGraph &g)
{
	if (g.size() == 1)
		throw std::invalid_argument(
			"t_predecessor_count is undefined on the initial graph");
	return g.sc_maximal_events().size();
}

namespace {

enum class SinkKind { NotSink, Maximal, Blocked };

SinkKind classify_sink(const Program &p, const ExecutionGraph &g)
{
	bool blocked = false;
	for (const Thread &t : p.threads) {
		ThreadReplayState state = replay_thread(p, t.tid, g);
		if (state.status == ThreadStatus::Running)
			return SinkKind::NotSink;
		if (state.status == ThreadStatus::Blocked)
			blocked = true;
	}
	return blocked ? SinkKind::Blocked : SinkKind::Maximal;
}

} // namespace

SinkEnumeration enumerate_t_sinks(const Program &p, std::uint64_t node_cap)
{
	SinkEnumeration result;
	std::unordered_set<std::string> visited;
	std::vector<ExecutionGraph> stack;
	stack.push_back(ExecutionGraph());
	visited.insert(stack.back().canonical_key());

	while (!stack.empty()) {
		ExecutionGraph g = std::move(stack.back());
		stack.pop_back();
		++result.dag_nodes;
		if (result.dag_nodes > node_cap) {
			result.complete = false;
			--result.dag_nodes;
			return result;
		}
		auto succs = t_successors(p, g);
		if (succs.empty()) {
			switch (classify_sink(p, g)) {
			case SinkKind::Maximal:
				++result.count;
				result.sinks.insert(g.canonical_key());
				break;
			case SinkKind::Blocked:
				++result.blocked_sinks;
				break;
			case SinkKind::NotSink:
				assert(false && "no successors but a thread is running");
				break;
			}
			continue;
		}
		for (auto &[tid, next] : succs) {
			(void)tid;
			if (visited.insert(next.canonical_key()).second)
				stack.push_back(std::move(next));
		}
	}
	return result;
}

std::string t_dag_to_dot(const Program &p, std::uint64_t node_cap)
{
	std::ostringstream out;
	out << "digraph T {\n  rankdir=TB;\n";
	std::unordered_map<std::string, std::uint64_t> id_of;
	std::vector<ExecutionGraph> stack;
	stack.push_back(ExecutionGraph());
	id_of[stack.back().canonical_key()] = 0;

	auto node_id = [&](const ExecutionGraph &g, bool &fresh) {
		std::string key = g.canonical_key();
		auto [it, inserted] = id_of.try_emplace(key, id_of.size());
		fresh = inserted;
		return it->second;
	};

	while (!stack.empty()) {
		ExecutionGraph g = std::move(stack.back());
		stack.pop_back();
		bool fresh = false;
		std::uint64_t from = node_id(g, fresh);
		out << "  n" << from << " [label=\"" << g.size() - 1 << " events\"];\n";
		if (id_of.size() > node_cap)
			break;
		for (auto &[tid, next] : t_successors(p, g)) {
			std::uint64_t to = node_id(next, fresh);
			out << "  n" << from << " -> n" << to << " [label=\"t" << tid
			    << "\"];\n";
			if (fresh)
				stack.push_back(std::move(next));
		}
	}
	out << "}\n";
	return out.str();
}

} // namespace estor
