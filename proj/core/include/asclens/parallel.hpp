#pragma once

#include <cstddef>
#include <functional>

namespace asclens {

/// Caps the number of worker threads used by parallel_for. 0 restores the
/// hardware default. Results never depend on this value.
void set_thread_limit(std::size_t threads) noexcept;
std::size_t thread_limit() noexcept;

/// Runs body(i) for i in [0, n). Iterations must write disjoint outputs;
/// callers reduce afterwards in index order so results are schedule-free.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace asclens
