// Random instances: Haar unitaries, Hilbert-Schmidt states, Hermitian observables.
#pragma once

#include "qtc/linalg.hpp"

#include <cstdint>
#include <random>

namespace qtc {

using Rng = std::mt19937_64;

// Counter-based seed derivation so that parallel sweeps do not depend on scheduling.
std::uint64_t splitmix64(std::uint64_t x);
Rng stream_rng(std::uint64_t seed, std::uint64_t index);

double uniform01(Rng& rng);
double normal(Rng& rng);

Matrix ginibre(Rng& rng, int rows, int cols);
Matrix haar_unitary(Rng& rng, int d);
Matrix random_hermitian(Rng& rng, int d);
// Hilbert-Schmidt uniform state.
DensityMatrix random_density(Rng& rng, int d);
// Hilbert-Schmidt state mixed with I/d at weight 1e-3.
DensityMatrix random_full_rank_state(Rng& rng, int d, double mix = 1e-3);
DensityMatrix random_diagonal_state(Rng& rng, int d, double mix = 1e-3);

}  // namespace qtc
