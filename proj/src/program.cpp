#include "estor/program.hpp"
#include "estor/graph.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace estor {

std::size_t Program::instruction_count() const
{
	std::size_t n = 0;
	for (const Thread &t : threads)
		n += t.instructions.size();
	return n;
}

bool Program::has_assume() const
{
	for (const Thread &t : threads)
		for (const Instruction &i : t.instructions)
			if (i.kind == Instruction::Kind::Assume)
				return true;
	return false;
}

std::optional<Loc> Program::find_loc(const std::string &name) const
{
	for (std::size_t i = 0; i < loc_names.size(); ++i)
		if (loc_names[i] == name)
			return static_cast<Loc>(i);
	return std::nullopt;
}

namespace {

struct Token {
	enum class Kind { Ident, Int, Symbol, End } kind;
	std::string text;
	Val value = 0;
	std::size_t column = 0;
};

class LineLexer {
public:
	LineLexer(const std::string &line, std::size_t line_no) : line_(line), line_no_(line_no)
	{
		tokenize();
	}

	const Token &peek() const { return tokens_[pos_]; }
	Token next() { return tokens_[pos_ == tokens_.size() - 1 ? pos_ : pos_++]; }
	bool at_end() const { return peek().kind == Token::Kind::End; }

	[[noreturn]] void fail(const std::string &msg) const
	{
		throw ParseError(line_no_, peek().column, msg);
	}

	Token expect_ident(const std::string &what)
	{
		if (peek().kind != Token::Kind::Ident)
			fail("expected " + what);
		return next();
	}

	void expect_symbol(const std::string &sym)
	{
		if (peek().kind != Token::Kind::Symbol || peek().text != sym)
			fail("expected '" + sym + "'");
		next();
	}

	bool accept_symbol(const std::string &sym)
	{
		if (peek().kind == Token::Kind::Symbol && peek().text == sym) {
			next();
			return true;
		}
		return false;
	}

private:
	void tokenize()
	{
		std::size_t i = 0;
		while (i < line_.size()) {
			char c = line_[i];
			if (std::isspace(static_cast<unsigned char>(c))) {
				++i;
				continue;
			}
			if (c == '#')
				break;
			std::size_t col = i + 1;
			if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
				std::size_t j = i;
				while (j < line_.size() &&
				       (std::isalnum(static_cast<unsigned char>(line_[j])) ||
					line_[j] == '_'))
					++j;
				tokens_.push_back(
					{Token::Kind::Ident, line_.substr(i, j - i), 0, col});
				i = j;
				continue;
			}
			if (std::isdigit(static_cast<unsigned char>(c)) ||
			    (c == '-' && i + 1 < line_.size() &&
			     std::isdigit(static_cast<unsigned char>(line_[i + 1])))) {
				std::size_t j = i + 1;
				while (j < line_.size() &&
				       std::isdigit(static_cast<unsigned char>(line_[j])))
					++j;
				Token t{Token::Kind::Int, line_.substr(i, j - i), 0, col};
				try {
					t.value = std::stoll(t.text);
				} catch (const std::exception &) {
					throw ParseError(line_no_, col, "integer out of range");
				}
				tokens_.push_back(t);
				i = j;
				continue;
			}
			// multi-char comparison operators first
			for (const char *sym : {"==", "!=", "<=", "<", "+", "-", "=", ":"}) {
				std::size_t len = std::char_traits<char>::length(sym);
				if (line_.compare(i, len, sym) == 0) {
					tokens_.push_back({Token::Kind::Symbol,
							   std::string(sym), 0, col});
					i += len;
					goto matched;
				}
			}
			throw ParseError(line_no_, col,
					 std::string("unexpected character '") + c + "'");
		matched:;
		}
		tokens_.push_back({Token::Kind::End, "", 0, line_.size() + 1});
	}

	const std::string &line_;
	std::size_t line_no_;
	std::vector<Token> tokens_;
	std::size_t pos_ = 0;
};

bool is_keyword(const std::string &s)
{
	return s == "thread" || s == "read" || s == "write" || s == "if" || s == "goto" ||
	       s == "assume";
}

struct PendingBranch {
	std::size_t instr_index;
	std::string label;
	std::size_t line;
	std::size_t column;
};

class Parser {
public:
	explicit Parser(const std::string &text) : text_(text) {}

	Program run()
	{
		std::istringstream in(text_);
		std::string line;
		std::size_t line_no = 0;
		while (std::getline(in, line)) {
			++line_no;
			parse_line(line, line_no);
		}
		finish_thread();
		check_registers();
		return std::move(program_);
	}

private:
	Thread *current() { return program_.threads.empty() ? nullptr : &program_.threads.back(); }

	void parse_line(const std::string &line, std::size_t line_no)
	{
		LineLexer lex(line, line_no);
		if (lex.at_end())
			return;
		const Token &head = lex.peek();
		if (head.kind != Token::Kind::Ident)
			lex.fail("expected instruction or 'thread' header");
		if (head.text == "thread") {
			lex.next();
			if (lex.peek().kind != Token::Kind::Int || lex.peek().value <= 0)
				lex.fail("expected positive thread id");
			Val tid = lex.next().value;
			finish_thread();
			for (const Thread &t : program_.threads)
				if (t.tid == static_cast<Tid>(tid))
					throw ParseError(line_no, head.column,
							 "duplicate thread id " +
								 std::to_string(tid));
			if (static_cast<std::size_t>(tid) != program_.threads.size() + 1)
				throw ParseError(line_no, head.column,
						 "thread ids must be contiguous from 1, got " +
							 std::to_string(tid));
			Thread t;
			t.tid = static_cast<Tid>(tid);
			program_.threads.push_back(std::move(t));
			if (!lex.at_end())
				lex.fail("trailing input after thread header");
			return;
		}
		if (!current())
			lex.fail("instruction outside of a thread");
		parse_instruction(lex, line_no);
	}

	void parse_instruction(LineLexer &lex, std::size_t line_no)
	{
		Thread &t = *current();
		// optional "label:" prefix; a bare "label:" marks the next
		// index (thread exit when it stays last)
		Token head = lex.expect_ident("instruction");
		if (!is_keyword(head.text) && lex.peek().kind == Token::Kind::Symbol &&
		    lex.peek().text == ":") {
			lex.next();
			define_label(head.text, t.instructions.size(), line_no, head.column);
			if (lex.at_end())
				return;
			head = lex.expect_ident("instruction");
		}

		Instruction instr;
		if (head.text == "write") {
			instr.kind = Instruction::Kind::Write;
			instr.loc = intern_loc(lex.expect_ident("location").text);
			instr.expr = parse_expr(lex, t);
		} else if (head.text == "if") {
			instr.kind = Instruction::Kind::Branch;
			instr.cond = parse_cond(lex, t, line_no);
			Token kw = lex.expect_ident("'goto'");
			if (kw.text != "goto")
				lex.fail("expected 'goto'");
			Token label = lex.expect_ident("branch label");
			branches_.push_back(
				{t.instructions.size(), label.text, line_no, label.column});
		} else if (head.text == "assume") {
			instr.kind = Instruction::Kind::Assume;
			instr.cond = parse_cond(lex, t, line_no);
		} else if (!is_keyword(head.text)) {
			// reg = read loc
			instr.kind = Instruction::Kind::Read;
			lex.expect_symbol("=");
			Token kw = lex.expect_ident("'read'");
			if (kw.text != "read")
				lex.fail("expected 'read'");
			instr.reg = intern_reg(t, head.text);
			instr.loc = intern_loc(lex.expect_ident("location").text);
		} else {
			lex.fail("unexpected keyword '" + head.text + "'");
		}
		if (!lex.at_end())
			lex.fail("trailing input after instruction");
		t.instructions.push_back(instr);
	}

	Expr parse_expr(LineLexer &lex, Thread &t)
	{
		Expr e;
		if (lex.peek().kind == Token::Kind::Int) {
			e.kind = Expr::Kind::Const;
			e.constant = lex.next().value;
			return e;
		}
		Token reg = lex.expect_ident("register or constant");
		e.reg = intern_reg(t, reg.text);
		if (lex.accept_symbol("+")) {
			e.kind = Expr::Kind::RegPlusConst;
			if (lex.peek().kind != Token::Kind::Int)
				lex.fail("expected constant");
			e.constant = lex.next().value;
		} else if (lex.accept_symbol("-")) {
			e.kind = Expr::Kind::RegPlusConst;
			if (lex.peek().kind != Token::Kind::Int)
				lex.fail("expected constant");
			e.constant = -lex.next().value;
		} else {
			e.kind = Expr::Kind::Reg;
		}
		return e;
	}

	Operand parse_operand(LineLexer &lex, Thread &t)
	{
		if (lex.peek().kind == Token::Kind::Int)
			return Operand::make_const(lex.next().value);
		Token reg = lex.expect_ident("register or constant");
		return Operand::make_reg(intern_reg(t, reg.text));
	}

	Cond parse_cond(LineLexer &lex, Thread &t, std::size_t line_no)
	{
		Cond c;
		c.lhs = parse_operand(lex, t);
		if (lex.peek().kind != Token::Kind::Symbol)
			lex.fail("expected comparison operator");
		std::string op = lex.next().text;
		if (op == "==")
			c.op = CmpOp::Eq;
		else if (op == "!=")
			c.op = CmpOp::Ne;
		else if (op == "<")
			c.op = CmpOp::Lt;
		else if (op == "<=")
			c.op = CmpOp::Le;
		else
			throw ParseError(line_no, lex.peek().column,
					 "unknown comparison '" + op + "'");
		c.rhs = parse_operand(lex, t);
		return c;
	}

	void define_label(const std::string &name, std::size_t index, std::size_t line_no,
			  std::size_t column)
	{
		if (labels_.count(name))
			throw ParseError(line_no, column, "duplicate label '" + name + "'");
		labels_[name] = index;
		current()->labels.emplace_back(index, name);
	}

	Loc intern_loc(const std::string &name)
	{
		if (auto l = program_.find_loc(name))
			return *l;
		program_.loc_names.push_back(name);
		return static_cast<Loc>(program_.loc_names.size() - 1);
	}

	RegId intern_reg(Thread &t, const std::string &name)
	{
		for (std::size_t i = 0; i < t.reg_names.size(); ++i)
			if (t.reg_names[i] == name)
				return static_cast<RegId>(i);
		t.reg_names.push_back(name);
		return static_cast<RegId>(t.reg_names.size() - 1);
	}

	void finish_thread()
	{
		Thread *t = current();
		if (!t)
			return;
		for (const PendingBranch &b : branches_) {
			auto it = labels_.find(b.label);
			if (it == labels_.end())
				throw ParseError(b.line, b.column,
						 "undefined label '" + b.label + "'");
			if (it->second <= b.instr_index)
				throw ParseError(b.line, b.column,
						 "backward branch to '" + b.label + "'");
			t->instructions[b.instr_index].target = it->second;
		}
		branches_.clear();
		labels_.clear();
	}

	// Every register must be written before any use, on every control
	// path. Definite-assignment sets flow forward; forward-only branches
	// allow a single pass in index order.
	void check_registers()
	{
		for (const Thread &t : program_.threads) {
			std::size_t n = t.instructions.size();
			std::vector<std::set<RegId>> incoming(n + 1);
			std::vector<bool> reachable(n + 1, false);
			reachable[0] = true;
			for (std::size_t i = 0; i < n; ++i) {
				if (!reachable[i])
					continue;
				const Instruction &instr = t.instructions[i];
				const std::set<RegId> &assigned = incoming[i];
				check_uses(t, instr, assigned);
				std::set<RegId> out = assigned;
				if (instr.kind == Instruction::Kind::Read)
					out.insert(instr.reg);
				if (instr.kind == Instruction::Kind::Branch)
					merge_into(incoming, reachable, instr.target, assigned);
				merge_into(incoming, reachable, i + 1, out);
			}
		}
	}

	static void merge_into(std::vector<std::set<RegId>> &incoming,
			       std::vector<bool> &reachable, std::size_t index,
			       const std::set<RegId> &assigned)
	{
		if (!reachable[index]) {
			reachable[index] = true;
			incoming[index] = assigned;
			return;
		}
		std::set<RegId> meet;
		std::set_intersection(incoming[index].begin(), incoming[index].end(),
				      assigned.begin(), assigned.end(),
				      std::inserter(meet, meet.begin()));
		incoming[index] = std::move(meet);
	}

	void check_uses(const Thread &t, const Instruction &instr,
			const std::set<RegId> &assigned) const
	{
		auto require = [&](const Operand &o) {
			if (o.is_reg && !assigned.count(o.reg))
				throw ParseError(
					0, 0,
					"thread " + std::to_string(t.tid) + ": register '" +
						t.reg_names[o.reg] +
						"' may be used before it is written");
		};
		switch (instr.kind) {
		case Instruction::Kind::Write:
			if (instr.expr.kind != Expr::Kind::Const &&
			    !assigned.count(instr.expr.reg))
				throw ParseError(0, 0,
						 "thread " + std::to_string(t.tid) +
							 ": register '" +
							 t.reg_names[instr.expr.reg] +
							 "' may be used before it is written");
			break;
		case Instruction::Kind::Branch:
		case Instruction::Kind::Assume:
			require(instr.cond.lhs);
			require(instr.cond.rhs);
			break;
		case Instruction::Kind::Read:
			break;
		}
	}

	const std::string &text_;
	Program program_;
	std::map<std::string, std::size_t> labels_;
	std::vector<PendingBranch> branches_;
};

std::string operand_str(const Operand &o, const Thread &t)
{
	return o.is_reg ? t.reg_names[o.reg] : std::to_string(o.constant);
}

std::string cmp_str(CmpOp op)
{
	switch (op) {
	case CmpOp::Eq:
		return "==";
	case CmpOp::Ne:
		return "!=";
	case CmpOp::Lt:
		return "<";
	case CmpOp::Le:
		return "<=";
	}
	return "?";
}

} // namespace

Program parse_program(const std::string &text) { return Parser(text).run(); }

std::string print_program(const Program &p)
{
	std::ostringstream out;
	for (const Thread &t : p.threads) {
		out << "thread " << t.tid << "\n";
		// labels recorded at parse time, or synthesized for targets
		std::map<std::size_t, std::string> label_at;
		for (const auto &[index, name] : t.labels)
			label_at[index] = name;
		for (const Instruction &i : t.instructions)
			if (i.kind == Instruction::Kind::Branch && !label_at.count(i.target))
				label_at[i.target] = "L" + std::to_string(i.target);
		for (std::size_t i = 0; i <= t.instructions.size(); ++i) {
			if (i == t.instructions.size()) {
				if (label_at.count(i))
					out << "  " << label_at[i] << ":\n";
				break;
			}
			out << "  ";
			if (label_at.count(i))
				out << label_at[i] << ": ";
			const Instruction &instr = t.instructions[i];
			switch (instr.kind) {
			case Instruction::Kind::Read:
				out << t.reg_names[instr.reg] << " = read "
				    << p.loc_names[instr.loc];
				break;
			case Instruction::Kind::Write:
				out << "write " << p.loc_names[instr.loc] << " ";
				switch (instr.expr.kind) {
				case Expr::Kind::Const:
					out << instr.expr.constant;
					break;
				case Expr::Kind::Reg:
					out << t.reg_names[instr.expr.reg];
					break;
				case Expr::Kind::RegPlusConst:
					out << t.reg_names[instr.expr.reg];
					if (instr.expr.constant < 0)
						out << " - " << -instr.expr.constant;
					else
						out << " + " << instr.expr.constant;
					break;
				}
				break;
			case Instruction::Kind::Branch:
				out << "if " << operand_str(instr.cond.lhs, t) << " "
				    << cmp_str(instr.cond.op) << " "
				    << operand_str(instr.cond.rhs, t) << " goto "
				    << label_at[instr.target];
				break;
			case Instruction::Kind::Assume:
				out << "assume " << operand_str(instr.cond.lhs, t) << " "
				    << cmp_str(instr.cond.op) << " "
				    << operand_str(instr.cond.rhs, t);
				break;
			}
			out << "\n";
		}
	}
	return out.str();
}

namespace {

Val eval_operand(const Operand &o, const std::vector<Val> &regs)
{
	return o.is_reg ? regs[o.reg] : o.constant;
}

bool eval_cond(const Cond &c, const std::vector<Val> &regs)
{
	Val l = eval_operand(c.lhs, regs);
	Val r = eval_operand(c.rhs, regs);
	switch (c.op) {
	case CmpOp::Eq:
		return l == r;
	case CmpOp::Ne:
		return l != r;
	case CmpOp::Lt:
		return l < r;
	case CmpOp::Le:
		return l <= r;
	}
	return false;
}

Val eval_expr(const Expr &e, const std::vector<Val> &regs)
{
	switch (e.kind) {
	case Expr::Kind::Const:
		return e.constant;
	case Expr::Kind::Reg:
		return regs[e.reg];
	case Expr::Kind::RegPlusConst:
		return regs[e.reg] + e.constant;
	}
	return 0;
}

} // namespace

ThreadReplayState replay_thread(const Program &p, Tid tid, const ExecutionGraph &g)
{
	const Thread &t = p.thread(tid);
	std::vector<Event> recorded = g.thread_events(tid);

	ThreadReplayState state;
	state.regs.assign(t.reg_names.size(), 0);
	std::size_t consumed = 0;

	std::size_t pc = 0;
	while (pc < t.instructions.size()) {
		const Instruction &instr = t.instructions[pc];
		switch (instr.kind) {
		case Instruction::Kind::Read: {
			if (consumed < recorded.size()) {
				const Event &e = recorded[consumed];
				if (e.op != OpKind::Read || e.loc != instr.loc)
					throw ReplayError(
						"thread " + std::to_string(tid) + " event " +
						std::to_string(consumed) +
						" does not match the read instruction at index " +
						std::to_string(pc));
				state.regs[instr.reg] = e.value;
				++consumed;
				++pc;
				break;
			}
			state.pc = pc;
			state.status = ThreadStatus::Running;
			state.pending = PendingEvent{tid, static_cast<Idx>(consumed),
						     OpKind::Read, instr.loc, 0, false};
			return state;
		}
		case Instruction::Kind::Write: {
			Val value = eval_expr(instr.expr, state.regs);
			if (consumed < recorded.size()) {
				const Event &e = recorded[consumed];
				if (e.op != OpKind::Write || e.loc != instr.loc ||
				    e.value != value)
					throw ReplayError(
						"thread " + std::to_string(tid) + " event " +
						std::to_string(consumed) +
						" does not match the write instruction at index " +
						std::to_string(pc));
				++consumed;
				++pc;
				break;
			}
			state.pc = pc;
			state.status = ThreadStatus::Running;
			state.pending = PendingEvent{tid, static_cast<Idx>(consumed),
						     OpKind::Write, instr.loc, value, true};
			return state;
		}
		case Instruction::Kind::Branch:
			pc = eval_cond(instr.cond, state.regs) ? instr.target : pc + 1;
			break;
		case Instruction::Kind::Assume:
			if (!eval_cond(instr.cond, state.regs)) {
				state.pc = pc;
				state.status = ThreadStatus::Blocked;
				return state;
			}
			++pc;
			break;
		}
	}
	if (consumed != recorded.size())
		throw ReplayError("thread " + std::to_string(tid) + " has " +
				  std::to_string(recorded.size()) +
				  " events but replays only " + std::to_string(consumed));
	state.pc = pc;
	state.status = ThreadStatus::Done;
	return state;
}

std::vector<PendingEvent> next_events(const Program &p, const ExecutionGraph &g)
{
	std::vector<PendingEvent> result;
	for (const Thread &t : p.threads) {
		ThreadReplayState state = replay_thread(p, t.tid, g);
		if (state.status == ThreadStatus::Running)
			result.push_back(*state.pending);
	}
	return result;
}

} // namespace estor
