#include "mitk/random_tables.hpp"

#include <numeric>

namespace mitk::discrete {

std::vector<double> random_simplex_point(CounterRng& rng, std::size_t n) {
  std::vector<double> v(n);
  double total = 0.0;
  for (auto& x : v) {
    x = rng.exponential();
    total += x;
  }
  for (auto& x : v) x /= total;
  return v;
}

Pmf random_pmf(CounterRng& rng, std::size_t n) { return Pmf(random_simplex_point(rng, n)); }

JointPmf2 random_joint2(CounterRng& rng, std::size_t rows, std::size_t cols) {
  return JointPmf2(rows, cols, random_simplex_point(rng, rows * cols));
}

JointPmfN random_joint(CounterRng& rng, const std::vector<std::size_t>& shape) {
  const std::size_t cells = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  return JointPmfN(shape, random_simplex_point(rng, cells));
}

CondPmf random_channel(CounterRng& rng, std::size_t given, std::size_t target) {
  std::vector<double> cells;
  cells.reserve(given * target);
  for (std::size_t g = 0; g < given; ++g) {
    const auto row = random_simplex_point(rng, target);
    cells.insert(cells.end(), row.begin(), row.end());
  }
  return CondPmf(given, target, std::move(cells));
}

}  // namespace mitk::discrete
