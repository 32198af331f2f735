#include "doctest.h"

#include "oracles.hpp"

#include "estor/dtree.hpp"
#include "estor/harness.hpp"
#include "estor/tdag.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

using namespace estor;

namespace {

ExecutionGraph step_read_from_init(const Program &p)
{
	// r+w+w after the forced first step: {init, R(x) <- init}
	ExecutionGraph g;
	g.append_read(1, 0, p.find_loc("x").value(), EventId::init(), 0);
	return g;
}

std::vector<EventId> non_init_ids(const ExecutionGraph &g)
{
	std::vector<EventId> ids;
	for (const Event &e : g.events())
		if (!e.is_init())
			ids.push_back(e.id());
	return ids;
}

} // namespace

TEST_CASE("visit options for the write after the r+w+w read: one forward, one backward")
{
	Program p = parse_program(corpus::r_w_w());
	ExecutionGraph g = step_read_from_init(p);
	std::vector<PendingEvent> pending = next_events(p, g);
	REQUIRE(!pending.empty());
	const PendingEvent &e = pending.front();
	REQUIRE(e.kind == OpKind::Write);

	ExecutionGraph h = g;
	h.append_write(e.tid, e.idx, e.loc, e.value, g.mo_max_write(e.loc));
	auto options = visit_options(g, e, h);
	REQUIRE(options.size() == 2);
	CHECK(options[0].dir == RevisitDir::Fwd);
	CHECK(options[0].target == EventId::init());
	CHECK(options[1].dir == RevisitDir::Bwd);
	CHECK(options[1].target == EventId{1, 0});
}

TEST_CASE("a read with only init available gets a single forward option")
{
	Program p = parse_program(corpus::r_w_w());
	ExecutionGraph g;
	std::vector<PendingEvent> pending = next_events(p, g);
	const PendingEvent &e = pending.front();
	REQUIRE(e.kind == OpKind::Read);
	ExecutionGraph h = g;
	h.append_read(e.tid, e.idx, e.loc, EventId::init(), 0);
	auto options = visit_options(g, e, h);
	REQUIRE(options.size() == 1);
	CHECK(options[0].dir == RevisitDir::Fwd);
}

TEST_CASE("reads inside the writer's happens-before prefix are not revisit targets")
{
	// wrww+rr: t1's own earlier read is po-before W(x,2), so only t2's
	// read (when present) can be targeted
	Program p = parse_program(corpus::wrww_rr());
	Loc x = p.find_loc("x").value();
	ExecutionGraph g;
	g.append_write(1, 0, x, 1, g.mo_max_write(x));
	g.append_read(1, 1, x, EventId{1, 0}, 1);
	std::vector<PendingEvent> pending = next_events(p, g);
	const PendingEvent &e = pending.front();
	REQUIRE(e.kind == OpKind::Write); // W(x,2)
	REQUIRE(e.tid == 1);
	ExecutionGraph h = g;
	h.append_write(e.tid, e.idx, e.loc, e.value, g.mo_max_write(e.loc));
	for (const TransitionLabel &opt : visit_options(g, e, h))
		CHECK(opt.dir == RevisitDir::Fwd);
}

TEST_CASE("a one-event suffix always peels")
{
	Program p = parse_program(corpus::r_w_w());
	auto dag = oracle::materialize_t_dag(p);
	for (const auto &[key, g] : dag.graphs) {
		if (key == dag.root_key)
			continue;
		EventId last = g.events().back().id();
		CHECK(is_maximally_revisitable(p, g, {last}));
	}
}

TEST_CASE("the r+w+w revisit cases match the worked tree")
{
	Program p = parse_program(corpus::r_w_w());
	Loc x = p.find_loc("x").value();

	SUBCASE("read-from-init then a write: {read, write} peels")
	{
		ExecutionGraph g = step_read_from_init(p);
		g.append_write(2, 0, x, 1, g.mo_max_write(x));
		CHECK(is_maximally_revisitable(p, g, {{1, 0}, {2, 0}}));
	}
	SUBCASE("after a backward revisit the read no longer peels first")
	{
		// {init, r <- w1, w1} with insertion order init, r, w1
		ExecutionGraph g = step_read_from_init(p);
		g.append_write(2, 0, x, 1, g.mo_max_write(x));
		g.set_rf(EventId{1, 0}, EventId{2, 0}, 1);
		CHECK(!is_maximally_revisitable(p, g, {{1, 0}, {2, 0}}));
	}
}

TEST_CASE("maximal revisitability agrees with the exhaustive run-suffix oracle")
{
	for (const std::string &source : {corpus::r_w_w(), corpus::r_rr(),
					  corpus::hairbrush(3), corpus::wrww_rr()}) {
		Program p = parse_program(source);
		std::size_t checked = 0;
		enumerate_d_tree(p, WeightMode::MaximalLeavesOnly, 100'000,
				 [&](std::size_t, NodeClass, std::size_t, std::size_t,
				     std::uint64_t, const ExecutionGraph &g) {
					 std::vector<EventId> ids = non_init_ids(g);
					 std::size_t n = ids.size();
					 if (n == 0 || n > 6)
						 return;
					 for (std::size_t mask = 1; mask < (1u << n);
					      ++mask) {
						 std::vector<EventId> subset;
						 for (std::size_t i = 0; i < n; ++i)
							 if (mask & (1u << i))
								 subset.push_back(ids[i]);
						 std::sort(subset.begin(), subset.end(),
							   [&](EventId a, EventId b) {
								   return g.ins_position(a) <
									  g.ins_position(b);
							   });
						 bool fast = is_maximally_revisitable(p, g,
										      subset);
						 bool slow = oracle::reachable_with_suffix(
							 p, g, subset);
						 CHECK(fast == slow);
						 ++checked;
					 }
				 });
		CHECK(checked > 0);
	}
}

TEST_CASE("d_children reproduces the worked r+w+w tree")
{
	Program p = parse_program(corpus::r_w_w());

	ChildList root_kids = d_children(p, ExecutionGraph());
	REQUIRE(root_kids.children.size() == 1); // the forced read step

	const ExecutionGraph &g1 = root_kids.children[0].second;
	ChildList g1_kids = d_children(p, g1);
	REQUIRE(g1_kids.children.size() == 2);
	CHECK(g1_kids.children[0].first.dir == RevisitDir::Fwd);
	CHECK(g1_kids.children[1].first.dir == RevisitDir::Bwd);

	// forward branch: read still sees init, both writes pending
	const ExecutionGraph &g2 = g1_kids.children[0].second;
	CHECK(g2.rf(EventId{1, 0}) == EventId::init());
	ChildList g2_kids = d_children(p, g2);
	REQUIRE(g2_kids.children.size() == 3); // two mo splices and one revisit
	CHECK(g2_kids.children[0].first.dir == RevisitDir::Fwd);
	CHECK(g2_kids.children[1].first.dir == RevisitDir::Fwd);
	CHECK(g2_kids.children[2].first.dir == RevisitDir::Bwd);

	// backward branch: the read was rewritten to the new write
	const ExecutionGraph &g8 = g1_kids.children[1].second;
	CHECK(g8.rf(EventId{1, 0}) == EventId{2, 0});
	CHECK(g8.event(EventId{1, 0}).value == 1);
	ChildList g8_kids = d_children(p, g8);
	CHECK(g8_kids.children.size() == 2); // revisit here is not maximal

	// backward revisit from g2 deletes the fr-ordered write first
	const ExecutionGraph &g5 = g2_kids.children[2].second;
	CHECK(g5.size() == 3); // init, read, new write
	CHECK(g5.rf(EventId{1, 0}) == EventId{3, 0});
	CHECK(d_children(p, g5).children.size() == 2);
}

TEST_CASE("the single-trace programs have a single-path tree")
{
	for (const std::string &source : {corpus::r_r_r(), corpus::r_rr()}) {
		Program p = parse_program(source);
		TreeStats stats = enumerate_d_tree(p);
		CHECK(stats.maximal_leaves == 1);
		CHECK(stats.max_out_degree == 1);
		for (std::uint64_t width : stats.width_per_depth)
			CHECK(width == 1);
	}
}

TEST_CASE("hairbrush spine nodes branch exactly twice")
{
	Program p = parse_program(corpus::hairbrush(5));
	TreeStats stats = enumerate_d_tree(p);
	CHECK(stats.maximal_leaves == 6);
	CHECK(stats.max_out_degree == 2);
	// the branching population never exceeds two coupled paths
	std::vector<std::size_t> widths = compressed_level_widths(p);
	CHECK(*std::max_element(widths.begin(), widths.end()) == 2);
}

TEST_CASE("leaf counts for the worked examples")
{
	CHECK(enumerate_d_tree(parse_program(corpus::r_w_w())).maximal_leaves == 6);
	CHECK(enumerate_d_tree(parse_program(corpus::wrww_rr())).maximal_leaves == 4);
	for (std::size_t n = 1; n <= 8; ++n)
		CHECK(enumerate_d_tree(parse_program(corpus::hairbrush(n))).maximal_leaves ==
		      n + 1);
}

TEST_CASE("classification of nodes")
{
	Program p = parse_program(corpus::r_w_w());
	CHECK(classify_node(p, ExecutionGraph()) == NodeClass::Internal);

	ExecutionGraph full;
	full.append_read(1, 0, 0, EventId::init(), 0);
	full.append_write(2, 0, 0, 1, full.mo_max_write(0));
	full.append_write(3, 0, 0, 2, full.mo_max_write(0));
	CHECK(classify_node(p, full) == NodeClass::MaximalLeaf);

	Program blocked = parse_program("thread 1\n"
					"  r = read x\n"
					"  assume r == 1\n");
	ExecutionGraph g;
	g.append_read(1, 0, 0, EventId::init(), 0);
	CHECK(classify_node(blocked, g) == NodeClass::BlockedLeaf);
}

TEST_CASE("blocked leaves surface in the traversal stats")
{
	Program p = parse_program(corpus::assume_last_writer(1, 2));
	TreeStats stats = enumerate_d_tree(p);
	CHECK(stats.maximal_leaves == 2);
	CHECK(stats.blocked_leaves > 0);
}

TEST_CASE("no node repeats inside a traversal (tree property)")
{
	for (const std::string &source : {corpus::r_w_w(), corpus::wrww_rr(),
					  corpus::hairbrush(4), corpus::incrementor(3)}) {
		Program p = parse_program(source);
		std::set<std::string> seen;
		bool duplicate = false;
		TreeStats stats = enumerate_d_tree(
			p, WeightMode::MaximalLeavesOnly, 5'000'000,
			[&](std::size_t, NodeClass, std::size_t, std::size_t, std::uint64_t,
			    const ExecutionGraph &g) {
				if (!seen.insert(g.keyed_with_insertion_order()).second)
					duplicate = true;
			});
		CHECK(!duplicate);
		CHECK(seen.size() == stats.consistent_nodes());
	}
}

TEST_CASE("optimality: leaf keys are duplicate-free and equal the sink set")
{
	for (const std::string &source :
	     {corpus::r_w_w(), corpus::r_r_r(), corpus::r_rr(), corpus::wrww_rr(),
	      corpus::hairbrush(5), corpus::incrementor(3), corpus::writers(4),
	      corpus::readers_writers(2, 3), corpus::assume_last_writer(1, 2)}) {
		Program p = parse_program(source);
		std::vector<std::string> leaves = d_tree_leaf_keys(p);
		std::set<std::string> unique(leaves.begin(), leaves.end());
		CHECK(unique.size() == leaves.size());
		CHECK(unique == enumerate_t_sinks(p).sinks);
	}
}

TEST_CASE("every expanded node is consistent")
{
	Program p = parse_program(corpus::wrww_rr());
	enumerate_d_tree(p, WeightMode::MaximalLeavesOnly, 5'000'000,
			 [&](std::size_t, NodeClass, std::size_t, std::size_t, std::uint64_t,
			     const ExecutionGraph &g) { CHECK(g.is_sc_consistent()); });
}

TEST_CASE("traversal and child order are deterministic")
{
	Program p = parse_program(corpus::wrww_rr());
	std::vector<std::string> first, second;
	auto collect = [&](std::vector<std::string> &into) {
		return [&into](std::size_t, NodeClass, std::size_t, std::size_t,
			       std::uint64_t, const ExecutionGraph &g) {
			into.push_back(g.keyed_with_insertion_order());
		};
	};
	enumerate_d_tree(p, WeightMode::MaximalLeavesOnly, 5'000'000, collect(first));
	enumerate_d_tree(p, WeightMode::MaximalLeavesOnly, 5'000'000, collect(second));
	CHECK(first == second);
}

TEST_CASE("full-cost weight totals count every constructed graph")
{
	Program p = parse_program(corpus::hairbrush(4));
	TreeStats stats = enumerate_d_tree(p, WeightMode::FullCost);
	CHECK(stats.total_weight == stats.consistent_nodes() + stats.inconsistent_leaves);
	TreeStats maximal = enumerate_d_tree(p, WeightMode::MaximalLeavesOnly);
	CHECK(maximal.total_weight == maximal.maximal_leaves);
}

TEST_CASE("tree log lines mirror the traversal")
{
	Program p = parse_program(corpus::r_w_w());
	std::ostringstream out;
	write_tree_log(out, p, WeightMode::MaximalLeavesOnly);
	std::istringstream in(out.str());
	std::size_t lines = 0;
	std::string line;
	while (std::getline(in, line))
		++lines;
	TreeStats stats = enumerate_d_tree(p);
	CHECK(lines == stats.consistent_nodes());
	CHECK(out.str().find("maximal") != std::string::npos);
}

TEST_CASE("node cap aborts with partial stats")
{
	Program p = parse_program(corpus::incrementor(4));
	TreeStats stats = enumerate_d_tree(p, WeightMode::MaximalLeavesOnly, 50);
	CHECK(!stats.complete);
}
