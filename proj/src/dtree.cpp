#include "estor/dtree.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <unordered_set>

namespace estor {

namespace {

ExecutionGraph interleaving_step(const ExecutionGraph &g, const PendingEvent &e)
{
	ExecutionGraph h = g;
	if (e.kind == OpKind::Read) {
		EventId src = g.mo_max_write(e.loc);
		h.append_read(e.tid, e.idx, e.loc, src, g.event(src).value);
	} else {
		h.append_write(e.tid, e.idx, e.loc, e.value, g.mo_max_write(e.loc));
	}
	return h;
}

} // namespace

std::vector<TransitionLabel> visit_options(const ExecutionGraph &g, const PendingEvent &e,
					   const ExecutionGraph &h)
{
	std::vector<TransitionLabel> options;
	EventId added{e.tid, e.idx};
	for (EventId w : g.writes_at(e.loc))
		options.push_back({RevisitDir::Fwd, added, w, {}});
	if (e.kind == OpKind::Write) {
		auto reach = h.porf_reachability();
		std::size_t e_pos = h.ins_position(added);
		for (EventId r : g.reads_at(e.loc)) {
			std::size_t r_pos = h.ins_position(r);
			if (!reach[r_pos][e_pos])
				options.push_back({RevisitDir::Bwd, added, r, {}});
		}
	}
	return options;
}

bool is_maximally_revisitable(const Program &p, const ExecutionGraph &g,
			      const std::vector<EventId> &d_set)
{
	// peel order: insertion order within g
	std::vector<EventId> peel = d_set;
	std::sort(peel.begin(), peel.end(), [&](EventId a, EventId b) {
		return g.ins_position(a) < g.ins_position(b);
	});

	for (std::size_t i = 0; i < peel.size(); ++i) {
		// H_i = g restricted to everything before the peeled suffix
		std::vector<EventId> keep;
		for (const Event &e : g.events()) {
			EventId id = e.id();
			if (std::find(peel.begin() + i, peel.end(), id) == peel.end())
				keep.push_back(id);
		}
		if (!g.restriction_valid(keep))
			return false; // a surviving read would lose its source
		ExecutionGraph h = g.restrict(keep);

		const EventId d = peel[i];
		const Event &ev = g.event(d);
		ThreadReplayState state;
		try {
			state = replay_thread(p, ev.tid, h);
		} catch (const ReplayError &) {
			// the peel punched a hole in the thread's prefix
			return false;
		}
		if (state.status != ThreadStatus::Running)
			return false;
		const PendingEvent &pending = *state.pending;
		if (pending.idx != ev.idx || pending.kind != ev.op || pending.loc != ev.loc)
			return false;
		if (ev.op == OpKind::Read) {
			if (g.rf(d) != h.mo_max_write(ev.loc))
				return false;
		} else {
			if (pending.value != ev.value)
				return false;
			// d must have entered mo-maximally: every write of H
			// at the location is mo-before d in g
			const std::vector<EventId> g_mo = g.mo(ev.loc);
			auto d_pos = std::find(g_mo.begin(), g_mo.end(), d);
			assert(d_pos != g_mo.end());
			for (EventId w : h.mo(ev.loc)) {
				auto w_pos = std::find(g_mo.begin(), g_mo.end(), w);
				if (w_pos == g_mo.end() || w_pos >= d_pos)
					return false;
			}
		}
	}
	return true;
}

ChildList d_children(const Program &p, const ExecutionGraph &g)
{
	ChildList result;
	std::vector<PendingEvent> pending = next_events(p, g);
	if (pending.empty())
		return result;
	const PendingEvent &e = pending.front(); // minimal in scheduler order
	EventId added{e.tid, e.idx};
	ExecutionGraph h = interleaving_step(g, e);

	auto consider = [&](TransitionLabel label, ExecutionGraph child) {
		if (child.is_sc_consistent())
			result.children.emplace_back(label, std::move(child));
		else
			++result.inconsistent_count;
	};

	std::vector<TransitionLabel> options = visit_options(g, e, h);
	// forward candidates, anchors already in mo order
	for (const TransitionLabel &opt : options) {
		if (opt.dir != RevisitDir::Fwd)
			continue;
		ExecutionGraph child = g;
		if (e.kind == OpKind::Read)
			child.append_read(e.tid, e.idx, e.loc, opt.target,
					  g.event(opt.target).value);
		else
			child.append_write(e.tid, e.idx, e.loc, e.value, opt.target);
		consider(opt, std::move(child));
	}
	// backward candidates: reads in insertion order, then anchors in mo order
	for (const TransitionLabel &opt : options) {
		if (opt.dir != RevisitDir::Bwd)
			continue;
		const EventId r = opt.target;
		std::size_t r_pos = g.ins_position(r);
		std::size_t e_pos_h = h.ins_position(added);
		auto reach = h.porf_reachability();

		std::vector<EventId> deleted;
		for (std::size_t i = r_pos + 1; i < g.size(); ++i) {
			EventId id = g.events()[i].id();
			if (!reach[h.ins_position(id)][e_pos_h])
				deleted.push_back(id);
		}
		std::vector<EventId> d_and_r = deleted;
		d_and_r.push_back(r);
		if (!is_maximally_revisitable(p, g, d_and_r))
			continue;

		std::vector<EventId> keep;
		for (const Event &ev : g.events())
			if (std::find(deleted.begin(), deleted.end(), ev.id()) == deleted.end())
				keep.push_back(ev.id());
		ExecutionGraph base = g.restrict(keep);

		for (EventId w : base.writes_at(e.loc)) {
			ExecutionGraph child = base;
			child.append_write(e.tid, e.idx, e.loc, e.value, w);
			child.set_rf(r, added, e.value);
			TransitionLabel label = opt;
			label.anchor = w;
			if (!child.is_sc_consistent()) {
				++result.inconsistent_count;
				continue;
			}
			// the rewritten read must still replay: everything
			// its new value could invalidate was deleted
			ThreadReplayState check = replay_thread(p, g.event(r).tid, child);
			(void)check;
			result.children.emplace_back(label, std::move(child));
		}
	}
	return result;
}

NodeClass classify_node(const Program &p, const ExecutionGraph &g)
{
	bool blocked = false;
	for (const Thread &t : p.threads) {
		ThreadReplayState state = replay_thread(p, t.tid, g);
		if (state.status == ThreadStatus::Running)
			return NodeClass::Internal;
		if (state.status == ThreadStatus::Blocked)
			blocked = true;
	}
	return blocked ? NodeClass::BlockedLeaf : NodeClass::MaximalLeaf;
}

std::uint64_t node_weight(WeightMode mode, NodeClass cls, std::size_t inconsistent_children)
{
	switch (mode) {
	case WeightMode::MaximalLeavesOnly:
		return cls == NodeClass::MaximalLeaf ? 1 : 0;
	case WeightMode::FullCost:
		return 1 + inconsistent_children;
	}
	return 0;
}

TreeStats enumerate_d_tree(const Program &p, WeightMode mode, std::uint64_t node_cap,
			   const NodeVisitor &visit)
{
	TreeStats stats;
	struct Frame {
		ExecutionGraph graph;
		std::size_t depth;
	};
	std::vector<Frame> stack;
	stack.push_back({ExecutionGraph(), 0});
	std::uint64_t visited = 0;

	while (!stack.empty()) {
		Frame frame = std::move(stack.back());
		stack.pop_back();
		if (++visited > node_cap) {
			stats.complete = false;
			return stats;
		}
		NodeClass cls = classify_node(p, frame.graph);
		ChildList kids;
		if (cls == NodeClass::Internal)
			kids = d_children(p, frame.graph);

		if (stats.width_per_depth.size() <= frame.depth)
			stats.width_per_depth.resize(frame.depth + 1, 0);
		++stats.width_per_depth[frame.depth];
		stats.max_depth = std::max(stats.max_depth, frame.depth);
		stats.max_out_degree = std::max(stats.max_out_degree, kids.children.size());
		stats.inconsistent_leaves += kids.inconsistent_count;
		std::uint64_t w = node_weight(mode, cls, kids.inconsistent_count);
		stats.total_weight += w;
		switch (cls) {
		case NodeClass::MaximalLeaf:
			++stats.maximal_leaves;
			break;
		case NodeClass::BlockedLeaf:
			++stats.blocked_leaves;
			break;
		case NodeClass::Internal:
			++stats.internal_nodes;
			break;
		}
		if (visit)
			visit(frame.depth, cls, kids.children.size(), kids.inconsistent_count,
			      w, frame.graph);
		// push in reverse so children pop in order
		for (auto it = kids.children.rbegin(); it != kids.children.rend(); ++it)
			stack.push_back({std::move(it->second), frame.depth + 1});
	}
	return stats;
}

void write_tree_log(std::ostream &out, const Program &p, WeightMode mode,
		    std::uint64_t node_cap)
{
	enumerate_d_tree(p, mode, node_cap,
			 [&](std::size_t depth, NodeClass cls, std::size_t child_count,
			     std::size_t inconsistent, std::uint64_t weight,
			     const ExecutionGraph &) {
				 const char *name = cls == NodeClass::Internal ? "internal"
						    : cls == NodeClass::MaximalLeaf
							    ? "maximal"
							    : "blocked";
				 out << depth << " " << name << " " << child_count << " "
				     << inconsistent << " " << weight << "\n";
			 });
}

std::vector<std::string> d_tree_leaf_keys(const Program &p, std::uint64_t node_cap)
{
	std::vector<std::string> keys;
	enumerate_d_tree(p, WeightMode::MaximalLeavesOnly, node_cap,
			 [&](std::size_t, NodeClass cls, std::size_t, std::size_t,
			     std::uint64_t, const ExecutionGraph &g) {
				 if (cls == NodeClass::MaximalLeaf)
					 keys.push_back(g.canonical_key());
			 });
	return keys;
}

} // namespace estor
