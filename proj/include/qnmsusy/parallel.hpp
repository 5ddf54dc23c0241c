#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace qnmsusy {

/// Worker count: QNM_SUSY_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
inline std::size_t thread_count() {
  if (const char* env = std::getenv("QNM_SUSY_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// out[i] = f(in[i]) evaluated on up to thread_count() threads. The result
/// order is the input order; if any call throws, the exception of the lowest
/// failing index is rethrown after all workers finish.
template <typename T, typename F>
auto parallel_map(const std::vector<T>& in, F f) -> std::vector<decltype(f(in.front()))> {
  using R = decltype(f(in.front()));
  const std::size_t n = in.size();
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    std::vector<R> out;
    out.reserve(n);
    for (const auto& x : in) out.push_back(f(x));
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(in[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace qnmsusy
