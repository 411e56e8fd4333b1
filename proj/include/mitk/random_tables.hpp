#pragma once

#include <cstddef>
#include <vector>

#include "mitk/discrete.hpp"
#include "mitk/rng.hpp"

// Random probability tables for property tests and probes. Entries are
// Exp(1) draws normalized to unit mass, so every cell has positive mass.
namespace mitk::discrete {

std::vector<double> random_simplex_point(CounterRng& rng, std::size_t n);
Pmf random_pmf(CounterRng& rng, std::size_t n);
JointPmf2 random_joint2(CounterRng& rng, std::size_t rows, std::size_t cols);
JointPmfN random_joint(CounterRng& rng, const std::vector<std::size_t>& shape);
CondPmf random_channel(CounterRng& rng, std::size_t given, std::size_t target);

}  // namespace mitk::discrete
