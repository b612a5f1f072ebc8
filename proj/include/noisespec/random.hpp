#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace noisespec {

/// Independent engine for stream `stream` under `seed`. Draw i of a Monte
/// Carlo run always uses substream(seed, i), so results do not depend on
/// how work is split across threads.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream);

/// NOISESPEC_THREADS if set, else hardware concurrency.
std::size_t default_thread_count();

/// Calls body(chunk, begin, end) for consecutive chunks of `chunk_size`
/// items, distributed over up to `threads` workers.
void parallel_chunks(std::size_t count, std::size_t chunk_size, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Fixed-shape pairwise tree reduction (order independent of thread count).
template <class T, class Combine>
T pairwise_reduce(std::vector<T> parts, Combine combine) {
  if (parts.empty()) return T{};
  while (parts.size() > 1) {
    std::vector<T> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(combine(parts[i], parts[i + 1]));
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

}  // namespace noisespec
