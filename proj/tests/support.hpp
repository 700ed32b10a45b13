#pragma once

// Shared fixtures for the unit tests: small hand-built chains and a random
// theta helper.

#include "tdsvrg/mdp.hpp"
#include "tdsvrg/rng.hpp"

namespace tdsvrg::testing {

// Two-state deterministic flip chain: P = [[0,1],[1,0]], r = 1, gamma = 0.5,
// identity features. Periodic, so it exercises the null-space stationary
// solve.
Mdp flip_chain();

// Single absorbing state, r = 1, unit feature.
Mdp one_state(double gamma);

// Aperiodic two-state chain P = [[0.1,0.9],[0.9,0.1]], r = 1, gamma = 0.5.
Mdp lazy_flip();

Vector random_theta(std::size_t dim, double scale, Rng& rng);

} // namespace tdsvrg::testing
