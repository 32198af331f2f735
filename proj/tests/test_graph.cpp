#include "doctest.h"

#include "oracles.hpp"

#include "estor/graph.hpp"
#include "estor/harness.hpp"
#include "estor/tdag.hpp"

#include <set>

using namespace estor;

namespace {

/// Store buffering: two threads write then read the other's location,
/// both reads from init. The canonical SC violation.
ExecutionGraph store_buffering()
{
	ExecutionGraph g;
	g.append_write(1, 0, 0, 1, EventId::init()); // W(x,1)
	g.append_read(1, 1, 1, EventId::init(), 0);  // R(y)=0
	g.append_write(2, 0, 1, 1, EventId::init()); // W(y,1)
	g.append_read(2, 1, 0, EventId::init(), 0);  // R(x)=0
	return g;
}

} // namespace

TEST_CASE("initial graph is consistent and init is its maximal event")
{
	ExecutionGraph g;
	CHECK(g.well_formed());
	CHECK(g.is_sc_consistent());
	auto maximal = g.sc_maximal_events();
	REQUIRE(maximal.size() == 1);
	CHECK(maximal[0] == EventId::init());
}

TEST_CASE("store buffering is rejected, matching the closure oracle")
{
	ExecutionGraph g = store_buffering();
	CHECK(g.well_formed());
	CHECK(!oracle::sc_consistent_bruteforce(g));
	CHECK(!g.is_sc_consistent());
}

TEST_CASE("consistency matches the closure oracle across the r+w+w system")
{
	Program p = parse_program(corpus::r_w_w());
	auto dag = oracle::materialize_t_dag(p);
	for (const auto &[key, g] : dag.graphs) {
		(void)key;
		CHECK(g.is_sc_consistent());
		CHECK(oracle::sc_consistent_bruteforce(g));
	}
}

TEST_CASE("sc-maximal events match the closure oracle on reachable graphs")
{
	for (const char *src : {"r+w+w", "r+rr", "wrww+rr"}) {
		std::string source = src == std::string("r+w+w") ? corpus::r_w_w()
				     : src == std::string("r+rr") ? corpus::r_rr()
								  : corpus::wrww_rr();
		Program p = parse_program(source);
		auto dag = oracle::materialize_t_dag(p);
		for (const auto &[key, g] : dag.graphs) {
			(void)key;
			auto got = g.sc_maximal_events();
			std::set<EventId> got_set(got.begin(), got.end());
			CHECK(got_set == oracle::sc_maximal_bruteforce(g));
			CHECK(!got_set.empty());
		}
	}
}

TEST_CASE("r+rr after three init reads has two maximal events")
{
	Program p = parse_program(corpus::r_rr());
	ExecutionGraph g;
	Loc y = p.find_loc("y").value();
	Loc x = p.find_loc("x").value();
	g.append_read(1, 0, y, EventId::init(), 0);
	g.append_read(2, 0, x, EventId::init(), 0);
	g.append_read(2, 1, x, EventId::init(), 0);
	auto maximal = g.sc_maximal_events();
	std::set<EventId> expect{{1, 0}, {2, 1}};
	CHECK(std::set<EventId>(maximal.begin(), maximal.end()) == expect);
}

TEST_CASE("r+w+w maximal graph: only the mo-last write is maximal")
{
	// the read-from-init has fr edges into both writes, so the sole
	// maximal event is w2; the T(P) in-degree of this leaf is 1
	ExecutionGraph g;
	g.append_read(1, 0, 0, EventId::init(), 0);
	g.append_write(2, 0, 0, 1, g.mo_max_write(0));
	g.append_write(3, 0, 0, 2, g.mo_max_write(0));
	auto maximal = g.sc_maximal_events();
	std::set<EventId> expect{{3, 0}};
	CHECK(std::set<EventId>(maximal.begin(), maximal.end()) == expect);
	CHECK(oracle::sc_maximal_bruteforce(g) == expect);

	Program p = parse_program(corpus::r_w_w());
	auto dag = oracle::materialize_t_dag(p);
	CHECK(dag.predecessors.at(g.canonical_key()).size() == 1);
}

TEST_CASE("mo_max_write tracks appended writes and defaults to init")
{
	ExecutionGraph g;
	CHECK(g.mo_max_write(5) == EventId::init());
	g.append_write(2, 0, 0, 1, g.mo_max_write(0));
	CHECK(g.mo_max_write(0) == EventId{2, 0});
	g.append_write(3, 0, 0, 2, g.mo_max_write(0));
	CHECK(g.mo_max_write(0) == EventId{3, 0});
	CHECK(g.mo_max_write(1) == EventId::init());
}

TEST_CASE("fr pairs: a read precedes exactly the overwrites of its source")
{
	Program p = parse_program(corpus::wrww_rr());
	auto dag = oracle::materialize_t_dag(p);
	for (const auto &[key, g] : dag.graphs) {
		(void)key;
		for (const auto &[r, w] : oracle::fr_pairs_bruteforce(g)) {
			const std::vector<EventId> order = g.mo(g.event(r).loc);
			auto src = std::find(order.begin(), order.end(), g.rf(r));
			auto dst = std::find(order.begin(), order.end(), w);
			CHECK(src < dst);
		}
	}
}

TEST_CASE("canonical keys ignore insertion order but nothing else")
{
	Loc x = 0;
	ExecutionGraph a;
	a.append_read(1, 0, x, EventId::init(), 0);
	a.append_write(2, 0, x, 1, EventId::init());

	ExecutionGraph b;
	b.append_write(2, 0, x, 1, EventId::init());
	b.append_read(1, 0, x, EventId::init(), 0);

	CHECK(a.canonical_key() == b.canonical_key());
	CHECK(a.keyed_with_insertion_order() != b.keyed_with_insertion_order());

	ExecutionGraph c;
	c.append_write(2, 0, x, 1, EventId::init());
	c.append_read(1, 0, x, EventId{2, 0}, 1); // different rf
	CHECK(a.canonical_key() != c.canonical_key());
}

TEST_CASE("the six r+w+w maximal graphs have six distinct keys")
{
	Program p = parse_program(corpus::r_w_w());
	auto sinks = enumerate_t_sinks(p);
	CHECK(sinks.sinks.size() == 6);
}

TEST_CASE("restrict keeps relative orders and validates rf sources")
{
	ExecutionGraph g;
	Loc x = 0;
	g.append_read(1, 0, x, EventId::init(), 0);
	g.append_write(2, 0, x, 1, g.mo_max_write(x)); // fr-ordered after the read
	SUBCASE("identity restriction")
	{
		std::vector<EventId> keep{EventId::init(), {1, 0}, {2, 0}};
		ExecutionGraph h = g.restrict(keep);
		CHECK(h.canonical_key() == g.canonical_key());
		CHECK(h.keyed_with_insertion_order() == g.keyed_with_insertion_order());
	}
	SUBCASE("dropping the fr-ordered write leaves the two-event graph")
	{
		std::vector<EventId> keep{EventId::init(), {1, 0}};
		ExecutionGraph h = g.restrict(keep);
		CHECK(h.size() == 2);
		CHECK(h.rf(EventId{1, 0}) == EventId::init());
		CHECK(h.mo_max_write(x) == EventId::init());
	}
	SUBCASE("dropping a consumed write is an error")
	{
		ExecutionGraph bad;
		bad.append_write(2, 0, x, 1, bad.mo_max_write(x));
		bad.append_read(1, 0, x, EventId{2, 0}, 1);
		std::vector<EventId> keep{EventId::init(), {1, 0}};
		CHECK(!bad.restriction_valid(keep));
		CHECK_THROWS_AS(bad.restrict(keep), ReplayError);
	}
}

TEST_CASE("restriction then key equals an independently built graph's key")
{
	Loc x = 0;
	ExecutionGraph g;
	g.append_read(1, 0, x, EventId::init(), 0);
	g.append_write(2, 0, x, 1, g.mo_max_write(x));
	g.append_write(3, 0, x, 2, g.mo_max_write(x));
	std::vector<EventId> keep{EventId::init(), {1, 0}, {2, 0}};
	ExecutionGraph restricted = g.restrict(keep);

	ExecutionGraph direct;
	direct.append_read(1, 0, x, EventId::init(), 0);
	direct.append_write(2, 0, x, 1, direct.mo_max_write(x));
	CHECK(restricted.canonical_key() == direct.canonical_key());
}

TEST_CASE("read values always equal their rf source's value")
{
	Program p = parse_program(corpus::wrww_rr());
	auto dag = oracle::materialize_t_dag(p);
	for (const auto &[key, g] : dag.graphs) {
		(void)key;
		for (const Event &e : g.events())
			if (e.op == OpKind::Read)
				CHECK(g.event(g.rf(e.id())).value == e.value);
	}
}

TEST_CASE("debug serialization is stable and readable")
{
	Program p = parse_program(corpus::r_w_w());
	ExecutionGraph g;
	g.append_read(1, 0, p.find_loc("x").value(), EventId::init(), 0);
	std::string block = g.debug_string(&p);
	CHECK(block == "events (insertion order):\n"
		       "  [0,0] init\n"
		       "  [1,0] R(x) = 0\n"
		       "rf:\n"
		       "  [0,0] -> [1,0]\n"
		       "mo:\n");
}
