#pragma once

#include "duallag/dataset.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace duallag {

/// Generates k independent random train/val/test splits with the given
/// fractions, deterministic under `seed`. When `labels` is non-null the
/// splits are per-class stratified via proportional interleaving, which
/// keeps the global sizes exact (they match llround of fraction * n). If any
/// class has fewer members than k, stratification degrades to plain
/// shuffling and a note is appended to `warnings` (when provided).
std::vector<SplitSet> make_folds(std::size_t num_nodes, std::size_t k,
                                 std::array<double, 3> fractions,
                                 std::uint64_t seed,
                                 const std::vector<std::uint32_t>* labels = nullptr,
                                 std::vector<std::string>* warnings = nullptr);

}  // namespace duallag
