#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace cylproc {

/// Runs f(i) for every i < n_reps on up to `workers` threads and
/// returns the results in index order. Worker w handles indices
/// w, w + workers, ...; nothing depends on scheduling.
template <class F>
auto run_replicates(std::uint64_t n_reps, unsigned workers, F&& f) {
  using R = std::invoke_result_t<F&, std::uint64_t>;
  std::vector<R> out(n_reps);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::uint64_t>(n_reps, 1))));
  if (workers == 1) {
    for (std::uint64_t r = 0; r < n_reps; ++r) out[r] = f(r);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t r = w; r < n_reps; r += workers) out[r] = f(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace cylproc
