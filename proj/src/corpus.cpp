#include "estor/harness.hpp"

#include <sstream>

namespace estor::corpus {

std::string r_w_w()
{
	return "thread 1\n"
	       "  b = read x\n"
	       "thread 2\n"
	       "  write x 1\n"
	       "thread 3\n"
	       "  write x 2\n";
}

std::string r_r_r(std::size_t readers)
{
	std::ostringstream out;
	for (std::size_t t = 1; t <= readers; ++t)
		out << "thread " << t << "\n  a = read x\n";
	return out.str();
}

std::string r_rr()
{
	return "thread 1\n"
	       "  a1 = read y\n"
	       "thread 2\n"
	       "  a2 = read x\n"
	       "  a3 = read x\n";
}

std::string r_nr(std::size_t reads)
{
	std::ostringstream out;
	out << "thread 1\n  a = read y\n";
	out << "thread 2\n";
	for (std::size_t i = 0; i < reads; ++i)
		out << "  b = read x\n";
	return out.str();
}

std::string wrww_rr()
{
	return "thread 1\n"
	       "  write x 1\n"
	       "  a1 = read x\n"
	       "  write x 2\n"
	       "  write y 1\n"
	       "thread 2\n"
	       "  a2 = read x\n"
	       "  if a2 != 2 goto end\n"
	       "  a2 = read y\n"
	       "  end:\n";
}

std::string hairbrush(std::size_t writes)
{
	std::ostringstream out;
	out << "thread 1\n  a = read x\n";
	out << "thread 2\n";
	for (std::size_t i = 1; i <= writes; ++i)
		out << "  write x " << i << "\n";
	return out.str();
}

std::string incrementor(std::size_t threads)
{
	std::ostringstream out;
	for (std::size_t t = 1; t <= threads; ++t)
		out << "thread " << t << "\n"
		    << "  a = read x\n"
		    << "  write x a + 1\n";
	return out.str();
}

std::string fine_counter(std::size_t threads)
{
	std::ostringstream out;
	for (std::size_t t = 1; t <= threads; ++t)
		out << "thread " << t << "\n"
		    << "  a = read x" << t << "\n"
		    << "  write x" << t << " a + 1\n"
		    << "  write flag " << t << "\n";
	return out.str();
}

std::string writers(std::size_t threads)
{
	std::ostringstream out;
	for (std::size_t t = 1; t <= threads; ++t)
		out << "thread " << t << "\n"
		    << "  write flag " << t << "\n";
	return out.str();
}

std::string readers_writers(std::size_t readers, std::size_t writers)
{
	std::ostringstream out;
	std::size_t tid = 1;
	for (std::size_t i = 0; i < readers; ++i)
		out << "thread " << tid++ << "\n  a = read x\n";
	for (std::size_t i = 1; i <= writers; ++i)
		out << "thread " << tid++ << "\n  write x " << i << "\n";
	return out.str();
}

std::string assume_last_writer(std::size_t readers, std::size_t writers)
{
	std::ostringstream out;
	std::size_t tid = 1;
	for (std::size_t i = 0; i < readers; ++i)
		out << "thread " << tid++ << "\n"
		    << "  a = read x\n"
		    << "  assume a == " << writers << "\n";
	for (std::size_t i = 1; i <= writers; ++i)
		out << "thread " << tid++ << "\n  write x " << i << "\n";
	return out.str();
}

std::vector<BenchmarkSpec> paper_micro_suite()
{
	std::vector<BenchmarkSpec> suite = {
		{"r+w+w", r_w_w()},
		{"r+r+r", r_r_r()},
		{"r+rr", r_rr()},
		{"wrww+rr", wrww_rr()},
	};
	for (std::size_t n = 1; n <= 8; ++n)
		suite.push_back({"hairbrush-" + std::to_string(n), hairbrush(n)});
	return suite;
}

std::vector<BenchmarkSpec> parametric_suite()
{
	return {
		{"incrementor-5", incrementor(5)},
		{"fine-counter-7", fine_counter(7)},
		{"writers-7", writers(7)},
		{"readers-writers-4-4", readers_writers(4, 4)},
		{"readers-writers-3-5", readers_writers(3, 5)},
		{"hairbrush-16", hairbrush(16)},
		{"r+nr-8", r_nr(8)},
	};
}

std::vector<BenchmarkSpec> all_suites()
{
	std::vector<BenchmarkSpec> suite = paper_micro_suite();
	for (BenchmarkSpec &b : parametric_suite())
		suite.push_back(std::move(b));
	return suite;
}

} // namespace estor::corpus
