#ifndef ESTOR_PROGRAM_HPP
#define ESTOR_PROGRAM_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace estor {

using Val = std::int64_t;
using Loc = std::uint32_t;
using Tid = std::uint32_t; // 0 is reserved for the init event
using Idx = std::uint32_t; // event position within a thread
using RegId = std::uint32_t;

enum class OpKind : std::uint8_t { Init, Read, Write };

struct ParseError : std::runtime_error {
	ParseError(std::size_t line, std::size_t column, const std::string &what)
		: std::runtime_error(line == 0 ? "parse error: " + what
					       : "parse error at " + std::to_string(line) + ":" +
							 std::to_string(column) + ": " + what),
		  line(line), column(column)
	{}
	std::size_t line;
	std::size_t column;
};

/// Thrown when a graph disagrees with the program it is replayed against,
/// or when an internal transition-construction invariant breaks.
struct ReplayError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

struct Operand {
	bool is_reg = false;
	RegId reg = 0;
	Val constant = 0;

	static Operand make_reg(RegId r) { return {true, r, 0}; }
	static Operand make_const(Val v) { return {false, 0, v}; }
	friend bool operator==(const Operand &, const Operand &) = default;
};

/// Value expression of a write: constant, register, or register + constant.
struct Expr {
	enum class Kind : std::uint8_t { Const, Reg, RegPlusConst } kind = Kind::Const;
	RegId reg = 0;
	Val constant = 0;
	friend bool operator==(const Expr &, const Expr &) = default;
};

enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Le };

struct Cond {
	Operand lhs;
	CmpOp op = CmpOp::Eq;
	Operand rhs;
	friend bool operator==(const Cond &, const Cond &) = default;
};

struct Instruction {
	enum class Kind : std::uint8_t { Read, Write, Branch, Assume } kind = Kind::Read;
	RegId reg = 0;	    // Read
	Loc loc = 0;	    // Read / Write
	Expr expr;	    // Write
	Cond cond;	    // Branch / Assume
	std::size_t target = 0; // Branch: strictly later index, may equal instruction count (exit)
	friend bool operator==(const Instruction &, const Instruction &) = default;
};

struct Thread {
	Tid tid = 0;
	std::vector<Instruction> instructions;
	std::vector<std::string> reg_names; // indexed by RegId, thread-local

	// Concrete-syntax label names, kept only so print() can round-trip
	// readable sources; not part of the abstract syntax.
	std::vector<std::pair<std::size_t, std::string>> labels;

	friend bool operator==(const Thread &a, const Thread &b)
	{
		return a.tid == b.tid && a.instructions == b.instructions;
	}
};

struct Program {
	std::vector<Thread> threads;	    // tids contiguous from 1, in order
	std::vector<std::string> loc_names; // indexed by Loc

	const Thread &thread(Tid tid) const { return threads.at(tid - 1); }
	std::size_t instruction_count() const;
	bool has_assume() const;
	std::optional<Loc> find_loc(const std::string &name) const;

	friend bool operator==(const Program &a, const Program &b)
	{
		return a.threads == b.threads && a.loc_names == b.loc_names;
	}
};

/// Parses DSL text. Rejects syntax errors (with position), backward or
/// self branch targets, duplicate thread ids, and any register that may be
/// used before it is written on some control path.
Program parse_program(const std::string &text);

/// Inverse of parse_program up to label naming: parse(print(p)) == p.
std::string print_program(const Program &p);

enum class ThreadStatus : std::uint8_t { Running, Blocked, Done };

/// The event a running thread would produce next. For reads the value is
/// unset until an rf source is chosen.
struct PendingEvent {
	Tid tid = 0;
	Idx idx = 0;
	OpKind kind = OpKind::Read;
	Loc loc = 0;
	Val value = 0;
	bool value_set = false;
};

struct ThreadReplayState {
	std::size_t pc = 0;
	std::vector<Val> regs;
	ThreadStatus status = ThreadStatus::Running;
	std::optional<PendingEvent> pending; // set iff status == Running
};

class ExecutionGraph;

/// Re-executes thread `tid` against the events recorded for it in `g`,
/// feeding each read instruction the value on the corresponding read event.
/// Throws ReplayError if the graph disagrees with the program.
ThreadReplayState replay_thread(const Program &p, Tid tid, const ExecutionGraph &g);

/// One pending event per running thread, in ascending tid order (the fixed
/// scheduler). Empty iff no thread can move.
std::vector<PendingEvent> next_events(const Program &p, const ExecutionGraph &g);

} // namespace estor

#endif
