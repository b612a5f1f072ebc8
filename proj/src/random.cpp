#include "noisespec/random.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace noisespec {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("NOISESPEC_THREADS")) {
    try {
      auto n = std::stoul(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_chunks(std::size_t count, std::size_t chunk_size, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  chunk_size = std::max<std::size_t>(1, chunk_size);
  const std::size_t chunks = (count + chunk_size - 1) / chunk_size;
  auto run_chunk = [&](std::size_t c) {
    std::size_t begin = c * chunk_size;
    body(c, begin, std::min(count, begin + chunk_size));
  };
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        try {
          run_chunk(c);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace noisespec
