#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dreid {

// mt19937_64's output sequence is fixed by the standard; the distributions in
// <random> are not. Everything that has to be bit-reproducible across
// toolchains draws through these helpers instead.
using Engine = std::mt19937_64;

Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0);

// Uniform integer in [0, n). n must be > 0.
std::size_t uniform_index(Engine& rng, std::size_t n);

// Uniform double in [0, 1) with 53 random bits.
double uniform01(Engine& rng);

// Standard normal via Box-Muller.
double standard_normal(Engine& rng);

template <class T>
void shuffle(std::span<T> values, Engine& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

// k distinct indices from [0, n) in draw order; requires k <= n.
std::vector<std::size_t> sample_without_replacement(Engine& rng, std::size_t n,
                                                    std::size_t k);

}  // namespace dreid
