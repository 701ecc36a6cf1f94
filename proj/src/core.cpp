// core.cpp

#include "core.hpp"

#include <algorithm>

namespace ep {

namespace {
int g_threads = 1;
}

int thread_count() { return g_threads; }

void set_thread_count(int n) {
  if (n <= 0)
    n = static_cast<int>(std::thread::hardware_concurrency());
  g_threads = std::max(1, n);
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)> &chunk_body) {
  const int nt = g_threads;
  if (nt <= 1 || n < 2048) {
    chunk_body(0, n);
    return;
  }
  const std::int64_t chunk = (n + nt - 1) / nt;
  std::vector<std::thread> workers;
  workers.reserve(nt - 1);
  for (int t = 1; t < nt; ++t) {
    const std::int64_t b = std::min<std::int64_t>(t * chunk, n);
    const std::int64_t e = std::min<std::int64_t>(b + chunk, n);
    if (b < e)
      workers.emplace_back(chunk_body, b, e);
  }
  chunk_body(0, std::min<std::int64_t>(chunk, n));
  for (auto &w : workers)
    w.join();
}

double parallel_sum(std::int64_t n, const std::function<double(std::int64_t, std::int64_t)> &chunk_sum) {
  const int nt = g_threads;
  if (nt <= 1 || n < 2048)
    return chunk_sum(0, n);
  const std::int64_t chunk = (n + nt - 1) / nt;
  std::vector<double> partial(nt, 0.0);
  std::vector<std::thread> workers;
  workers.reserve(nt - 1);
  for (int t = 1; t < nt; ++t) {
    const std::int64_t b = std::min<std::int64_t>(t * chunk, n);
    const std::int64_t e = std::min<std::int64_t>(b + chunk, n);
    if (b < e)
      workers.emplace_back([&partial, &chunk_sum, t, b, e] { partial[t] = chunk_sum(b, e); });
  }
  partial[0] = chunk_sum(0, std::min<std::int64_t>(chunk, n));
  for (auto &w : workers)
    w.join();
  double total = 0.0;
  for (double p : partial)
    total += p;
  return total;
}

}  // namespace ep
