#include "duallag/synth.hpp"

#include "duallag/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace duallag {

GraphDataset synth_graph(std::size_t n, std::size_t num_classes,
                         double homophily, double avg_degree,
                         std::size_t feature_dim, std::uint64_t seed,
                         double noise) {
    if (num_classes < 1 || n < num_classes) {
        throw std::invalid_argument("synth_graph: need n >= num_classes >= 1");
    }
    if (homophily < 0.0 || homophily > 1.0) {
        throw std::invalid_argument("synth_graph: homophily must be in [0,1]");
    }
    if (avg_degree >= static_cast<double>(n)) {
        throw std::invalid_argument("synth_graph: avg_degree must be < n");
    }
    if (avg_degree < 0.0 || feature_dim < 1) {
        throw std::invalid_argument("synth_graph: bad avg_degree or feature_dim");
    }

    GraphDataset ds;
    ds.num_nodes = n;
    ds.num_classes = num_classes;
    ds.feature_dim = feature_dim;

    // Balanced round-robin class assignment.
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ds.labels[i] = static_cast<std::uint32_t>(i % num_classes);
    }

    // Pair counts for same-class vs cross-class, then per-pair Bernoulli
    // probabilities chosen so the expected edge count is n*avg_degree/2 and
    // the expected fraction of same-class edges equals `homophily`.
    double same_pairs = 0.0;
    double cross_pairs = 0.0;
    {
        std::vector<std::size_t> class_size(num_classes, 0);
        for (std::uint32_t l : ds.labels) ++class_size[l];
        for (std::size_t c = 0; c < num_classes; ++c) {
            const double m = static_cast<double>(class_size[c]);
            same_pairs += m * (m - 1.0) / 2.0;
        }
        const double all_pairs = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
        cross_pairs = all_pairs - same_pairs;
    }
    const double target_edges = static_cast<double>(n) * avg_degree / 2.0;
    const double p_same =
        same_pairs > 0.0 ? std::min(1.0, homophily * target_edges / same_pairs) : 0.0;
    const double p_cross =
        cross_pairs > 0.0
            ? std::min(1.0, (1.0 - homophily) * target_edges / cross_pairs)
            : 0.0;

    RngStream rng(seed);
    for (std::uint32_t u = 0; u + 1 < n; ++u) {
        for (std::uint32_t v = u + 1; v < n; ++v) {
            const double p = (ds.labels[u] == ds.labels[v]) ? p_same : p_cross;
            if (p > 0.0 && rng.uniform() < p) {
                ds.edges.emplace_back(u, v);
            }
        }
    }

    // One-hot class signal plus Gaussian noise, rounded to f32 so containers
    // round-trip bitwise.
    ds.features.resize(n * feature_dim);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t hot = ds.labels[i] % feature_dim;
        for (std::size_t j = 0; j < feature_dim; ++j) {
            double v = (j == hot ? 1.0 : 0.0) + noise * rng.normal();
            ds.features[i * feature_dim + j] = static_cast<double>(static_cast<float>(v));
        }
    }

    ds.validate();
    return ds;
}

double edge_homophily_ratio(const GraphDataset& ds) {
    if (ds.edges.empty()) return 0.0;
    std::size_t same = 0;
    for (auto [u, v] : ds.edges) {
        if (ds.labels[u] == ds.labels[v]) ++same;
    }
    return static_cast<double>(same) / static_cast<double>(ds.edges.size());
}

}  // namespace duallag
