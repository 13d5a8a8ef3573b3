#pragma once

// Seeded parallel units. Results never depend on how many threads run them.

#include <cstddef>
#include <cstdint>
#include <functional>

namespace acx::parallel {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Independent seed for unit `index` of a run seeded with `master`.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) noexcept;

// ACX_THREADS when set to a positive integer, otherwise the hardware concurrency (at least 1).
unsigned thread_limit();

// Calls body(i) for i in [0, n) on up to thread_limit() threads. If any call
// throws, the exception of the lowest failing index is rethrown after all
// threads have stopped.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace acx::parallel
