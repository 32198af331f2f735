#include "estor/graph.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace estor {

ExecutionGraph::ExecutionGraph()
{
	events_.push_back(Event{0, 0, OpKind::Init, 0, 0});
}

bool ExecutionGraph::contains(EventId id) const
{
	for (const Event &e : events_)
		if (e.id() == id)
			return true;
	return false;
}

const Event &ExecutionGraph::event(EventId id) const
{
	for (const Event &e : events_)
		if (e.id() == id)
			return e;
	throw ReplayError("event not in graph");
}

std::size_t ExecutionGraph::ins_position(EventId id) const
{
	for (std::size_t i = 0; i < events_.size(); ++i)
		if (events_[i].id() == id)
			return i;
	throw ReplayError("event not in graph");
}

std::vector<Event> ExecutionGraph::thread_events(Tid tid) const
{
	std::vector<Event> result;
	for (const Event &e : events_)
		if (e.tid == tid)
			result.push_back(e);
	// insertion order restricted to one thread is idx order
	for (std::size_t i = 1; i < result.size(); ++i)
		assert(result[i - 1].idx < result[i].idx);
	return result;
}

std::size_t ExecutionGraph::thread_event_count(Tid tid) const
{
	std::size_t n = 0;
	for (const Event &e : events_)
		if (e.tid == tid)
			++n;
	return n;
}

EventId ExecutionGraph::rf(EventId read) const
{
	for (const auto &[r, w] : rf_)
		if (r == read)
			return w;
	throw ReplayError("read has no rf edge");
}

const ExecutionGraph::MoList *ExecutionGraph::find_mo(Loc loc) const
{
	for (const MoList &m : mo_)
		if (m.loc == loc)
			return &m;
	return nullptr;
}

ExecutionGraph::MoList &ExecutionGraph::ensure_mo(Loc loc)
{
	auto it = std::find_if(mo_.begin(), mo_.end(),
			       [&](const MoList &m) { return m.loc == loc; });
	if (it != mo_.end())
		return *it;
	MoList m;
	m.loc = loc;
	m.order.push_back(EventId::init());
	auto pos = std::lower_bound(mo_.begin(), mo_.end(), loc,
				    [](const MoList &a, Loc l) { return a.loc < l; });
	return *mo_.insert(pos, std::move(m));
}

std::vector<EventId> ExecutionGraph::mo(Loc loc) const
{
	if (const MoList *m = find_mo(loc))
		return m->order;
	return {EventId::init()};
}

EventId ExecutionGraph::mo_max_write(Loc loc) const
{
	if (const MoList *m = find_mo(loc))
		return m->order.back();
	return EventId::init();
}

std::vector<EventId> ExecutionGraph::reads_at(Loc loc) const
{
	std::vector<EventId> result;
	for (const Event &e : events_)
		if (e.op == OpKind::Read && e.loc == loc)
			result.push_back(e.id());
	return result;
}

void ExecutionGraph::append_read(Tid tid, Idx idx, Loc loc, EventId rf_source, Val value)
{
	assert(!contains(EventId{tid, idx}));
	events_.push_back(Event{tid, idx, OpKind::Read, loc, value});
	auto pos = std::lower_bound(rf_.begin(), rf_.end(), EventId{tid, idx},
				    [](const auto &p, const EventId &id) { return p.first < id; });
	rf_.insert(pos, {EventId{tid, idx}, rf_source});
}

void ExecutionGraph::append_write(Tid tid, Idx idx, Loc loc, Val value, EventId mo_anchor)
{
	assert(!contains(EventId{tid, idx}));
	events_.push_back(Event{tid, idx, OpKind::Write, loc, value});
	MoList &m = ensure_mo(loc);
	auto it = std::find(m.order.begin(), m.order.end(), mo_anchor);
	assert(it != m.order.end());
	m.order.insert(it + 1, EventId{tid, idx});
}

void ExecutionGraph::set_rf(EventId read, EventId write, Val value)
{
	for (auto &[r, w] : rf_)
		if (r == read) {
			w = write;
			for (Event &e : events_)
				if (e.id() == read)
					e.value = value;
			return;
		}
	throw ReplayError("set_rf on a non-read event");
}

bool ExecutionGraph::restriction_valid(const std::vector<EventId> &keep) const
{
	auto kept = [&](EventId id) {
		return std::find(keep.begin(), keep.end(), id) != keep.end();
	};
	if (!kept(EventId::init()))
		return false;
	for (const auto &[r, w] : rf_)
		if (kept(r) && !kept(w))
			return false;
	return true;
}

ExecutionGraph ExecutionGraph::restrict(const std::vector<EventId> &keep) const
{
	if (!restriction_valid(keep))
		throw ReplayError("restriction drops the rf source of a surviving read");
	auto kept = [&](EventId id) {
		return std::find(keep.begin(), keep.end(), id) != keep.end();
	};
	ExecutionGraph out;
	out.events_.clear();
	for (const Event &e : events_)
		if (kept(e.id()))
			out.events_.push_back(e);
	for (const auto &[r, w] : rf_)
		if (kept(r))
			out.rf_.push_back({r, w});
	for (const MoList &m : mo_) {
		MoList nm;
		nm.loc = m.loc;
		for (EventId id : m.order)
			if (kept(id))
				nm.order.push_back(id);
		if (nm.order.size() > 1)
			out.mo_.push_back(std::move(nm));
	}
	return out;
}

// po successor edges (init -> first event of each thread, thread-adjacent
// pairs), rf edges, mo-adjacent edges, and for each read one fr edge to the
// mo-successor of its source. The transitive closure, cycle structure, and
// maximal (out-degree zero) events agree with the fully expanded relations.
std::vector<std::pair<std::size_t, std::size_t>> ExecutionGraph::sc_skeleton_edges() const
{
	std::unordered_map<std::uint64_t, std::size_t> pos;
	auto key = [](EventId id) { return (std::uint64_t(id.tid) << 32) | id.idx; };
	for (std::size_t i = 0; i < events_.size(); ++i)
		pos[key(events_[i].id())] = i;

	std::vector<std::pair<std::size_t, std::size_t>> edges;
	// po
	std::unordered_map<Tid, std::size_t> last_of_thread;
	for (std::size_t i = 1; i < events_.size(); ++i) {
		const Event &e = events_[i];
		auto it = last_of_thread.find(e.tid);
		edges.emplace_back(it == last_of_thread.end() ? 0 : it->second, i);
		last_of_thread[e.tid] = i;
	}
	// rf
	for (const auto &[r, w] : rf_)
		edges.emplace_back(pos.at(key(w)), pos.at(key(r)));
	// mo (adjacent) and fr (first overwrite of each read's source)
	for (const MoList &m : mo_) {
		for (std::size_t i = 0; i + 1 < m.order.size(); ++i)
			edges.emplace_back(pos.at(key(m.order[i])), pos.at(key(m.order[i + 1])));
		for (const auto &[r, w] : rf_) {
			if (event(r).loc != m.loc)
				continue;
			auto it = std::find(m.order.begin(), m.order.end(), w);
			if (it != m.order.end() && it + 1 != m.order.end())
				edges.emplace_back(pos.at(key(r)), pos.at(key(*(it + 1))));
		}
	}
	return edges;
}

bool ExecutionGraph::is_sc_consistent() const
{
	std::size_t n = events_.size();
	std::vector<std::vector<std::size_t>> adj(n);
	for (const auto &[a, b] : sc_skeleton_edges())
		adj[a].push_back(b);

	// iterative three-color DFS cycle detection
	std::vector<std::uint8_t> color(n, 0);
	std::vector<std::pair<std::size_t, std::size_t>> stack;
	for (std::size_t s = 0; s < n; ++s) {
		if (color[s] != 0)
			continue;
		stack.push_back({s, 0});
		color[s] = 1;
		while (!stack.empty()) {
			auto &[v, next] = stack.back();
			if (next < adj[v].size()) {
				std::size_t u = adj[v][next++];
				if (color[u] == 1)
					return false;
				if (color[u] == 0) {
					color[u] = 1;
					stack.push_back({u, 0});
				}
			} else {
				color[v] = 2;
				stack.pop_back();
			}
		}
	}
	return true;
}

std::vector<std::vector<bool>> ExecutionGraph::porf_reachability() const
{
	std::size_t n = events_.size();
	std::vector<std::vector<std::size_t>> adj(n);
	std::vector<std::pair<Tid, std::size_t>> last_of;
	for (std::size_t i = 1; i < n; ++i) {
		const Event &e = events_[i];
		std::size_t prev = 0; // init precedes every thread's first event
		bool found = false;
		for (auto &[tid, pos] : last_of)
			if (tid == e.tid) {
				prev = pos;
				pos = i;
				found = true;
			}
		if (!found)
			last_of.emplace_back(e.tid, i);
		adj[prev].push_back(i);
	}
	for (const auto &[r, w] : rf_)
		adj[ins_position(w)].push_back(ins_position(r));

	std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
	for (std::size_t s = 0; s < n; ++s) {
		std::vector<std::size_t> stack{s};
		while (!stack.empty()) {
			std::size_t v = stack.back();
			stack.pop_back();
			for (std::size_t u : adj[v])
				if (!reach[s][u]) {
					reach[s][u] = true;
					stack.push_back(u);
				}
		}
	}
	return reach;
}

std::vector<EventId> ExecutionGraph::sc_maximal_events() const
{
	std::size_t n = events_.size();
	std::vector<bool> has_successor(n, false);
	for (const auto &[a, b] : sc_skeleton_edges()) {
		(void)b;
		has_successor[a] = true;
	}
	std::vector<EventId> result;
	for (std::size_t i = 0; i < n; ++i)
		if (!has_successor[i])
			result.push_back(events_[i].id());
	return result;
}

namespace {

void append_id(std::ostringstream &out, EventId id)
{
	out << id.tid << "." << id.idx;
}

} // namespace

std::string ExecutionGraph::canonical_key() const
{
	std::vector<Event> sorted = events_;
	std::sort(sorted.begin(), sorted.end(), [](const Event &a, const Event &b) {
		return a.id() < b.id();
	});
	std::ostringstream out;
	out << "E";
	for (const Event &e : sorted) {
		out << "|";
		append_id(out, e.id());
		out << ":" << static_cast<int>(e.op) << ":" << e.loc << ":" << e.value;
	}
	out << "#R";
	for (const auto &[r, w] : rf_) { // rf_ kept sorted by read
		out << "|";
		append_id(out, r);
		out << "<";
		append_id(out, w);
	}
	out << "#M";
	for (const MoList &m : mo_) { // mo_ kept sorted by loc
		out << "|" << m.loc << ":";
		for (EventId id : m.order) {
			append_id(out, id);
			out << ",";
		}
	}
	return out.str();
}

std::string ExecutionGraph::keyed_with_insertion_order() const
{
	std::ostringstream out;
	out << canonical_key() << "#I";
	for (const Event &e : events_) {
		out << "|";
		append_id(out, e.id());
	}
	return out.str();
}

std::string ExecutionGraph::debug_string(const Program *p) const
{
	auto loc_name = [&](Loc l) {
		if (p && l < p->loc_names.size())
			return p->loc_names[l];
		return "loc" + std::to_string(l);
	};
	std::ostringstream out;
	out << "events (insertion order):\n";
	for (const Event &e : events_) {
		out << "  [" << e.tid << "," << e.idx << "] ";
		switch (e.op) {
		case OpKind::Init:
			out << "init";
			break;
		case OpKind::Read:
			out << "R(" << loc_name(e.loc) << ") = " << e.value;
			break;
		case OpKind::Write:
			out << "W(" << loc_name(e.loc) << ", " << e.value << ")";
			break;
		}
		out << "\n";
	}
	out << "rf:\n";
	for (const auto &[r, w] : rf_)
		out << "  [" << w.tid << "," << w.idx << "] -> [" << r.tid << "," << r.idx
		    << "]\n";
	out << "mo:\n";
	for (const MoList &m : mo_) {
		out << "  " << loc_name(m.loc) << ":";
		for (EventId id : m.order)
			out << " [" << id.tid << "," << id.idx << "]";
		out << "\n";
	}
	return out.str();
}

bool ExecutionGraph::well_formed() const
{
	if (events_.empty() || !events_[0].is_init())
		return false;
	std::unordered_set<std::uint64_t> seen;
	auto key = [](EventId id) { return (std::uint64_t(id.tid) << 32) | id.idx; };
	for (const Event &e : events_)
		if (!seen.insert(key(e.id())).second)
			return false;
	for (const Event &e : events_) {
		if (e.op != OpKind::Read)
			continue;
		bool found = false;
		for (const auto &[r, w] : rf_) {
			if (r != e.id())
				continue;
			found = true;
			const Event &src = event(w);
			// init writes 0 to every location
			if (!src.writes(e.loc) || src.value != e.value)
				return false;
		}
		if (!found)
			return false;
	}
	for (const MoList &m : mo_) {
		if (m.order.empty() || !m.order[0].is_init())
			return false;
		std::size_t writes_here = 0;
		for (const Event &e : events_)
			if (e.op == OpKind::Write && e.loc == m.loc)
				++writes_here;
		if (m.order.size() != writes_here + 1)
			return false;
		for (std::size_t i = 1; i < m.order.size(); ++i)
			if (!event(m.order[i]).writes(m.loc))
				return false;
	}
	return true;
}

} // namespace estor
