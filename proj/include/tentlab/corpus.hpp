#pragma once

#include <cstdint>

#include "tentlab/banach.hpp"
#include "tentlab/tent_function.hpp"

namespace tentlab {

// Deterministic generators for test corpora.  Everything is a pure function
// of the seed and the index.

// Scatter function: `target` nodes with Gaussian values in R^m, at least
// half of them below the diameter scale so cones see them.
TentFunction<double> random_tent_function(const std::shared_ptr<const HalfGrid>& hg, int m,
                                          std::uint64_t seed, int target);

// Single node carrying a given value.
TentFunction<double> point_mass(const std::shared_ptr<const HalfGrid>& hg, int point, int level,
                                const Eigen::VectorXd& value);

// Union of a couple of cones and a tent over a random box set.
Region random_region(const std::shared_ptr<const HalfGrid>& hg, std::uint64_t seed);

// Union of `boxes` axis-aligned boxes whose corners sit on the lattice of
// side/align steps, so the same physical set exists on refinements.
// Guaranteed proper (nonempty, not everything).
SetM random_box_union(const SpaceGrid& space, std::uint64_t seed, int boxes, int align);

// Random l^q target space with 1 <= dim <= 4; occasionally weighted when the
// exponent is 2.
BanachSpace random_banach(std::uint64_t seed, std::uint64_t index, bool hilbert_only = false);

struct GammaTriple {
  TentFunction<double> u;
  Region R;
  BanachSpace X;
};

// Triple for Gaussian-norm comparisons.  The restriction keeps at least 8
// effective nodes, and sampled (non-Hilbert) targets additionally keep an
// effective coordinate rank of at least 3.5, which caps the sampling error
// of the 4096-sample estimate below one percent of the value.
GammaTriple gamma_corpus_triple(const std::shared_ptr<const HalfGrid>& hg, std::uint64_t seed,
                                std::uint64_t index, bool hilbert_only = false);

// Effective degrees of freedom (sum w)^2 / sum w^2 of the node energies of u
// inside R (Hilbert energies, unit coordinate weights).
double effective_nodes(const TentFunction<double>& u, const Region& R);

}  // namespace tentlab
