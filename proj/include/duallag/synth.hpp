#pragma once

#include "duallag/dataset.hpp"

#include <cstdint>

namespace duallag {

/// Default feature-noise scale for synthetic graphs: one unit of class
/// signal plus N(0, noise^2) per dimension.
inline constexpr double kSynthDefaultNoise = 0.3;

/// Stochastic-block-style generator. Classes are assigned round-robin; an
/// edge joins a same-class pair with probability proportional to
/// `homophily` and a cross-class pair otherwise, scaled so the expected
/// mean degree equals `avg_degree` and the expected edge homophily ratio
/// equals `homophily`. Features are a one-hot class signal plus seeded
/// Gaussian noise, rounded to f32 so containers round-trip bitwise.
///
/// Requires n >= num_classes and avg_degree < n.
GraphDataset synth_graph(std::size_t n, std::size_t num_classes,
                         double homophily, double avg_degree,
                         std::size_t feature_dim, std::uint64_t seed,
                         double noise = kSynthDefaultNoise);

/// Fraction of edges joining same-class endpoints (0 for an edgeless graph).
double edge_homophily_ratio(const GraphDataset& ds);

}  // namespace duallag
