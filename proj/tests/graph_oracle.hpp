#pragma once

// Cycle features from all-pairs shortest paths (Floyd-Warshall), written
// independently of the BFS in the library.

#include <array>
#include <cstddef>
#include <vector>

namespace oracle {

inline std::array<double, 4> cycle_features(std::size_t n, const std::vector<bool>& adj) {
  const int inf = 1 << 20;
  std::vector<int> d(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) {
    d[i * n + i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && adj[i * n + j]) d[i * n + j] = 1;
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i * n + k] + d[k * n + j] < d[i * n + j]) d[i * n + j] = d[i * n + k] + d[k * n + j];

  std::array<int, 4> count{0, 0, 0, 0};
  double tail = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !adj[i * n + j] || d[j * n + i] >= inf) continue;
      const int len = d[j * n + i] + 1;
      if (len <= 4) {
        ++count[len - 2];
      } else {
        tail += 1.0 / len;
      }
    }
  }
  return {count[0] / 2.0, count[1] / 3.0, count[2] / 4.0, tail};
}

}  // namespace oracle
