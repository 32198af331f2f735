#ifndef ESTOR_GRAPH_HPP
#define ESTOR_GRAPH_HPP

#include "estor/program.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace estor {

/// Identity of an event: (tid, idx). Init is (0, 0). Stable across graph
/// restriction, unlike insertion positions.
struct EventId {
	Tid tid = 0;
	Idx idx = 0;

	static EventId init() { return {0, 0}; }
	bool is_init() const { return tid == 0; }
	friend bool operator==(const EventId &, const EventId &) = default;
	friend auto operator<=>(const EventId &, const EventId &) = default;
};

struct Event {
	Tid tid = 0;
	Idx idx = 0;
	OpKind op = OpKind::Init;
	Loc loc = 0;
	Val value = 0;

	EventId id() const { return {tid, idx}; }
	bool is_init() const { return op == OpKind::Init; }
	bool is_read() const { return op == OpKind::Read; }
	// Init counts as a write to every location.
	bool is_write() const { return op == OpKind::Write || op == OpKind::Init; }
	bool writes(Loc l) const { return op == OpKind::Init || (op == OpKind::Write && loc == l); }
};

/// An execution graph: events with reads-from, per-location modification
/// order, and the insertion order in which events were added. Events are
/// stored in insertion order; relations are keyed by EventId. Value type;
/// all mutation happens through the builder-style methods used by the
/// transition constructions.
class ExecutionGraph {
public:
	ExecutionGraph();

	const std::vector<Event> &events() const { return events_; }
	std::size_t size() const { return events_.size(); }

	bool contains(EventId id) const;
	const Event &event(EventId id) const;
	/// Position in insertion order.
	std::size_t ins_position(EventId id) const;

	/// Events of one thread, in insertion (= idx) order.
	std::vector<Event> thread_events(Tid tid) const;
	/// Number of events of one thread.
	std::size_t thread_event_count(Tid tid) const;

	EventId rf(EventId read) const;
	/// Modification order at loc, Init first. Locations with no write map
	/// to the one-element sequence [Init].
	std::vector<EventId> mo(Loc loc) const;
	EventId mo_max_write(Loc loc) const;
	/// Writes at loc in mo order (Init first); reads at loc in insertion order.
	std::vector<EventId> writes_at(Loc loc) const { return mo(loc); }
	std::vector<EventId> reads_at(Loc loc) const;

	/// Appends a new event insertion-last. Reads must carry their final
	/// value and rf source; writes are spliced into mo directly after
	/// `mo_anchor` (use mo_max for a T(P) step).
	void append_read(Tid tid, Idx idx, Loc loc, EventId rf_source, Val value);
	void append_write(Tid tid, Idx idx, Loc loc, Val value, EventId mo_anchor);

	/// Rewrites the rf edge of an existing read and updates its label.
	void set_rf(EventId read, EventId write, Val value);

	/// Restriction to `keep` (which must contain Init and be closed under
	/// rf sources); preserves relative insertion, rf, and mo order.
	/// Throws ReplayError on a dangling rf source.
	ExecutionGraph restrict(const std::vector<EventId> &keep) const;
	/// False iff some surviving read has its rf source deleted.
	bool restriction_valid(const std::vector<EventId> &keep) const;

	/// Irreflexivity of (po u rf u mo u fr)+.
	bool is_sc_consistent() const;
	/// Events with no sc-successor. Nonempty for consistent graphs.
	std::vector<EventId> sc_maximal_events() const;

	/// Reachability matrix of (po u rf)+ over insertion positions:
	/// reach[a][b] iff the event at position a happens-before b.
	std::vector<std::vector<bool>> porf_reachability() const;

	/// Key identifying the graph up to insertion order: equal keys iff
	/// equal (events, rf, mo). Bit-stable across runs.
	std::string canonical_key() const;
	/// Key including the insertion order (for tree-identity checks).
	std::string keyed_with_insertion_order() const;

	/// Human-readable block: events in insertion order plus rf/mo edges.
	/// Location names taken from `p` when given. Format is stable, for
	/// golden tests.
	std::string debug_string(const Program *p = nullptr) const;

	/// Structural well-formedness (type invariants); used by tests.
	bool well_formed() const;

private:
	std::vector<Event> events_; // insertion order, [0] is Init
	std::vector<std::pair<EventId, EventId>> rf_; // read -> write, sorted by read
	struct MoList {
		Loc loc;
		std::vector<EventId> order; // Init first
	};
	std::vector<MoList> mo_; // sorted by loc

	const MoList *find_mo(Loc loc) const;
	MoList &ensure_mo(Loc loc);

	// Sparse sc skeleton: po successor edges, rf, mo successor edges and
	// first fr edges. Its cycles and out-degree-0 events agree with the
	// full closed relation.
	std::vector<std::pair<std::size_t, std::size_t>> sc_skeleton_edges() const;
};

} // namespace estor

template <> struct std::hash<estor::EventId> {
	std::size_t operator()(const estor::EventId &id) const
	{
		return std::hash<std::uint64_t>()((std::uint64_t(id.tid) << 32) | id.idx);
	}
};

#endif
