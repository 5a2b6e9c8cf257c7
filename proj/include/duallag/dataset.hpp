#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace duallag {

/// One named train/val/test split. Id sets are sorted, pairwise disjoint and
/// non-empty.
struct SplitSet {
    std::vector<std::uint32_t> train_ids;
    std::vector<std::uint32_t> val_ids;
    std::vector<std::uint32_t> test_ids;
};

/// An undirected node-classification dataset. Edges are canonical: each
/// undirected edge stored once with u < v, no self-loops, no duplicates.
/// Features are row-major num_nodes x feature_dim doubles (widened from the
/// f32 container representation).
struct GraphDataset {
    std::size_t num_nodes = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::vector<double> features;
    std::size_t feature_dim = 0;
    std::vector<std::uint32_t> labels;
    std::size_t num_classes = 0;
    std::vector<SplitSet> splits;

    double feature(std::size_t node, std::size_t dim) const {
        return features[node * feature_dim + dim];
    }

    /// Throws std::runtime_error on any invariant violation (out-of-range
    /// edge or label, non-finite feature, malformed split).
    void validate() const;
};

/// Symmetrize, drop self-loops, orient u < v, sort and dedupe. Throws if an
/// endpoint is out of range; `context` names the source in the message.
std::vector<std::pair<std::uint32_t, std::uint32_t>> canonicalize_edges(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& raw,
    std::size_t num_nodes, const std::string& context = "edge list");

/// Reads the canonical container directory:
///   graph.json     -- shape + split metadata
///   edges.u32le    -- 2E little-endian u32 pairs
///   features.f32le -- N*F little-endian f32, row-major
///   labels.u32le   -- N little-endian u32
/// The result is validated; errors name the offending file and index.
GraphDataset load_dataset(const std::filesystem::path& dir);

/// Writes the canonical container. load_dataset(save_dataset(ds)) reproduces
/// ds exactly (features must already be f32-representable, which holds for
/// everything produced by this library).
void save_dataset(const GraphDataset& ds, const std::filesystem::path& dir);

}  // namespace duallag
