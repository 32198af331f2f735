#ifndef ESTOR_RNG_HPP
#define ESTOR_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace estor {

/// splitmix64 finalizer; the only hashing primitive used for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x)
{
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

/// Seed for trial i of a run with the given base seed. Trials are
/// independent streams; the mapping is fixed so that reruns and parallel
/// schedules produce identical per-trial results.
inline std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t trial)
{
	return splitmix64(splitmix64(base_seed) ^ splitmix64(trial + 0x51ed2701ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform index in [0, n). n must be positive.
inline std::size_t pick_index(Rng &rng, std::size_t n)
{
	std::uniform_int_distribution<std::size_t> dist(0, n - 1);
	return dist(rng);
}

/// Uniformly chosen k-subset of [0, n), by partial Fisher-Yates.
/// The returned indices are in shuffle order, not sorted.
inline std::vector<std::size_t> sample_indices(Rng &rng, std::size_t n, std::size_t k)
{
	std::vector<std::size_t> idx(n);
	for (std::size_t i = 0; i < n; ++i)
		idx[i] = i;
	for (std::size_t i = 0; i < k; ++i) {
		std::uniform_int_distribution<std::size_t> dist(i, n - 1);
		std::swap(idx[i], idx[dist(rng)]);
	}
	idx.resize(k);
	return idx;
}

} // namespace estor

#endif
