#include "duallag/folds.hpp"

#include "duallag/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace duallag {

namespace {

// Proportionally interleaves per-class shuffles: member ranked r of a class
// with m members gets key (r + 0.5)/m, and the merged ordering is cut at the
// global fraction boundaries. Any prefix then holds a near-proportional
// share of every class while the global sizes stay exact.
std::vector<std::uint32_t> stratified_order(
    const std::vector<std::uint32_t>& labels, RngStream& rng) {
    std::map<std::uint32_t, std::vector<std::uint32_t>> by_class;
    for (std::uint32_t id = 0; id < labels.size(); ++id) {
        by_class[labels[id]].push_back(id);
    }
    struct Keyed {
        double key;
        std::uint32_t cls;
        std::uint32_t id;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(labels.size());
    for (auto& [cls, members] : by_class) {
        rng.shuffle(members);
        const double m = static_cast<double>(members.size());
        for (std::size_t r = 0; r < members.size(); ++r) {
            keyed.push_back({(static_cast<double>(r) + 0.5) / m, cls, members[r]});
        }
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.key != b.key) return a.key < b.key;
        if (a.cls != b.cls) return a.cls < b.cls;
        return a.id < b.id;
    });
    std::vector<std::uint32_t> order;
    order.reserve(keyed.size());
    for (const auto& k : keyed) order.push_back(k.id);
    return order;
}

}  // namespace

std::vector<SplitSet> make_folds(std::size_t num_nodes, std::size_t k,
                                 std::array<double, 3> fractions,
                                 std::uint64_t seed,
                                 const std::vector<std::uint32_t>* labels,
                                 std::vector<std::string>* warnings) {
    if (k < 1) throw std::invalid_argument("make_folds: k must be >= 1");
    const double total = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("make_folds: fractions must sum to 1");
    }
    for (double f : fractions) {
        if (f < 0.0) throw std::invalid_argument("make_folds: negative fraction");
    }
    if (labels && labels->size() != num_nodes) {
        throw std::invalid_argument("make_folds: label count mismatch");
    }

    const auto n = static_cast<double>(num_nodes);
    const std::size_t n_train = static_cast<std::size_t>(std::llround(fractions[0] * n));
    const std::size_t n_train_val =
        static_cast<std::size_t>(std::llround((fractions[0] + fractions[1]) * n));
    if (n_train == 0 || n_train_val <= n_train || n_train_val >= num_nodes) {
        std::ostringstream msg;
        msg << "make_folds: fractions leave an empty set for " << num_nodes
            << " nodes";
        throw std::invalid_argument(msg.str());
    }

    bool stratify = labels != nullptr;
    if (stratify) {
        std::map<std::uint32_t, std::size_t> counts;
        for (std::uint32_t l : *labels) ++counts[l];
        for (const auto& [cls, count] : counts) {
            if (count < k) {
                stratify = false;
                if (warnings) {
                    std::ostringstream msg;
                    msg << "class " << cls << " has " << count << " members < "
                        << k << " folds; stratification disabled";
                    warnings->push_back(msg.str());
                }
                break;
            }
        }
    }

    RngStream rng(seed);
    std::vector<SplitSet> folds;
    folds.reserve(k);
    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<std::uint32_t> order;
        if (stratify) {
            order = stratified_order(*labels, rng);
        } else {
            order.resize(num_nodes);
            for (std::uint32_t i = 0; i < num_nodes; ++i) order[i] = i;
            rng.shuffle(order);
        }
        SplitSet s;
        s.train_ids.assign(order.begin(), order.begin() + n_train);
        s.val_ids.assign(order.begin() + n_train, order.begin() + n_train_val);
        s.test_ids.assign(order.begin() + n_train_val, order.end());
        std::sort(s.train_ids.begin(), s.train_ids.end());
        std::sort(s.val_ids.begin(), s.val_ids.end());
        std::sort(s.test_ids.begin(), s.test_ids.end());
        folds.push_back(std::move(s));
    }
    return folds;
}

}  // namespace duallag
