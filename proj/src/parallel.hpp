#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dpviz::detail {

struct Chunk {
  std::size_t index;
  std::size_t begin;
  std::size_t end;
};

/// Contiguous split of [0, n) into min(threads, n) chunks, earlier chunks larger.
inline std::vector<Chunk> make_chunks(std::size_t n, unsigned threads) {
  const std::size_t parts = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  std::vector<Chunk> chunks;
  chunks.reserve(parts);
  const std::size_t base = n / parts, extra = n % parts;
  std::size_t start = 0;
  for (std::size_t c = 0; c < parts; ++c) {
    const std::size_t len = base + (c < extra ? 1 : 0);
    chunks.push_back({c, start, start + len});
    start += len;
  }
  return chunks;
}

/// Runs fn(chunk) for each chunk; chunk 0 runs on the calling thread.
/// The first exception thrown by any chunk is rethrown after all joined.
template <typename Fn>
void for_each_chunk(const std::vector<Chunk>& chunks, Fn&& fn) {
  if (chunks.size() == 1) {
    fn(chunks.front());
    return;
  }
  std::vector<std::exception_ptr> errors(chunks.size());
  std::vector<std::thread> workers;
  workers.reserve(chunks.size() - 1);
  for (std::size_t c = 1; c < chunks.size(); ++c)
    workers.emplace_back([&, c] {
      try {
        fn(chunks[c]);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  try {
    fn(chunks[0]);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace dpviz::detail
