// Python bindings for the duallag core: dataset containers, spectral
// operators, the scalar recurrence oracle, and the training harness.

#include "duallag/dataset.hpp"
#include "duallag/experiments.hpp"
#include "duallag/filters.hpp"
#include "duallag/folds.hpp"
#include "duallag/laplacian.hpp"
#include "duallag/model.hpp"
#include "duallag/synth.hpp"
#include "duallag/train.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace duallag;

namespace {

py::array_t<double> features_array(const GraphDataset& ds) {
    py::array_t<double> arr({ds.num_nodes, ds.feature_dim});
    std::copy(ds.features.begin(), ds.features.end(), arr.mutable_data());
    return arr;
}

py::array_t<double> dense_array(const CsrMatrix& m) {
    py::array_t<double> arr({m.rows, m.cols});
    auto dense = m.densify();
    std::copy(dense.begin(), dense.end(), arr.mutable_data());
    return arr;
}

TrainConfig config_from_kwargs(const std::string& variant, int epochs, double lr,
                               double weight_decay, double dropout, int k,
                               int hidden, std::uint64_t seed, int patience) {
    TrainConfig cfg;
    cfg.variant = parse_variant(variant);
    cfg.epochs = epochs;
    cfg.lr = lr;
    cfg.weight_decay = weight_decay;
    cfg.dropout_p = dropout;
    cfg.num_terms = k;
    cfg.hidden = hidden;
    cfg.seed = seed;
    cfg.patience = patience;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Dual adaptive Laguerre spectral-filter GNN engine";

    py::class_<SplitSet>(m, "SplitSet")
        .def(py::init<>())
        .def_readwrite("train_ids", &SplitSet::train_ids)
        .def_readwrite("val_ids", &SplitSet::val_ids)
        .def_readwrite("test_ids", &SplitSet::test_ids);

    py::class_<GraphDataset>(m, "GraphDataset")
        .def(py::init<>())
        .def_readonly("num_nodes", &GraphDataset::num_nodes)
        .def_readonly("num_classes", &GraphDataset::num_classes)
        .def_readonly("feature_dim", &GraphDataset::feature_dim)
        .def_readonly("edges", &GraphDataset::edges)
        .def_readonly("labels", &GraphDataset::labels)
        .def_readonly("splits", &GraphDataset::splits)
        .def_property_readonly("features", &features_array)
        .def("validate", &GraphDataset::validate)
        .def("__repr__", [](const GraphDataset& ds) {
            std::ostringstream os;
            os << "GraphDataset(num_nodes=" << ds.num_nodes << ", edges="
               << ds.edges.size() << ", feature_dim=" << ds.feature_dim
               << ", num_classes=" << ds.num_classes << ")";
            return os.str();
        });

    py::class_<CsrMatrix>(m, "CsrMatrix")
        .def_readonly("rows", &CsrMatrix::rows)
        .def_readonly("cols", &CsrMatrix::cols)
        .def_readonly("row_ptr", &CsrMatrix::row_ptr)
        .def_readonly("col_idx", &CsrMatrix::col_idx)
        .def_readonly("values", &CsrMatrix::values)
        .def_property_readonly("nnz", &CsrMatrix::nnz)
        .def("densify", &dense_array);

    py::class_<GraphOperators>(m, "GraphOperators")
        .def_readonly("sym", &GraphOperators::sym)
        .def_readonly("low", &GraphOperators::low)
        .def_readonly("high", &GraphOperators::high);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("train_loss", &RunResult::train_loss)
        .def_readonly("val_acc", &RunResult::val_acc)
        .def_readonly("test_acc", &RunResult::test_acc)
        .def_readonly("best_val_epoch", &RunResult::best_val_epoch)
        .def_readonly("test_at_best_val", &RunResult::test_at_best_val)
        .def_readonly("learned_alpha_low", &RunResult::learned_alpha_low)
        .def_readonly("learned_alpha_high", &RunResult::learned_alpha_high)
        .def_readonly("wall_time_sec", &RunResult::wall_time_sec);

    py::class_<FoldSummary>(m, "FoldSummary")
        .def_readonly("folds", &FoldSummary::folds)
        .def_readonly("mean_acc", &FoldSummary::mean_acc)
        .def_readonly("std_acc", &FoldSummary::std_acc)
        .def_readonly("mean_alpha_low", &FoldSummary::mean_alpha_low)
        .def_readonly("mean_alpha_high", &FoldSummary::mean_alpha_high);

    m.def("load_dataset", &load_dataset, py::arg("path"));
    m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));
    m.def("synth_graph", &synth_graph, py::arg("n"), py::arg("num_classes"),
          py::arg("homophily"), py::arg("avg_degree"), py::arg("feature_dim"),
          py::arg("seed"), py::arg("noise") = kSynthDefaultNoise);
    m.def("edge_homophily_ratio", &edge_homophily_ratio, py::arg("dataset"));
    m.def(
        "make_folds",
        [](std::size_t num_nodes, std::size_t k, double train_frac,
           double val_frac, double test_frac, std::uint64_t seed,
           const std::optional<std::vector<std::uint32_t>>& labels) {
            return make_folds(num_nodes, k, {train_frac, val_frac, test_frac},
                              seed, labels ? &*labels : nullptr);
        },
        py::arg("num_nodes"), py::arg("k"), py::arg("train_frac") = 0.6,
        py::arg("val_frac") = 0.2, py::arg("test_frac") = 0.2,
        py::arg("seed") = 0, py::arg("labels") = std::nullopt);
    m.def("build_operators", &build_operators, py::arg("dataset"));
    m.def("build_sym_laplacian", &build_sym_laplacian, py::arg("dataset"));
    m.def("build_l_low", &build_l_low, py::arg("l_sym"));
    m.def("build_l_high", &build_l_high, py::arg("l_sym"));

    m.def("laguerre_poly_scalar", &laguerre_poly_scalar, py::arg("x"),
          py::arg("alpha"), py::arg("k"));
    m.def("alpha_of", py::overload_cast<double>(&alpha_of), py::arg("theta"));
    m.def("theta_for_alpha", &theta_for_alpha, py::arg("alpha"));

    m.def(
        "train_run",
        [](const GraphDataset& ds, const SplitSet& split, const std::string& variant,
           int epochs, double lr, double weight_decay, double dropout, int k,
           int hidden, std::uint64_t seed, int patience) {
            return train_run(ds, split,
                             config_from_kwargs(variant, epochs, lr, weight_decay,
                                                dropout, k, hidden, seed, patience));
        },
        py::arg("dataset"), py::arg("split"), py::arg("variant") = "dual_laguerre",
        py::arg("epochs") = 200, py::arg("lr") = 0.01,
        py::arg("weight_decay") = 5e-4, py::arg("dropout") = 0.5, py::arg("k") = 3,
        py::arg("hidden") = 16, py::arg("seed") = 0, py::arg("patience") = 0,
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "cross_validate",
        [](const GraphDataset& ds, const std::vector<SplitSet>& folds,
           const std::string& variant, int epochs, double lr, double weight_decay,
           double dropout, int k, int hidden, std::uint64_t seed, int patience,
           bool parallel) {
            return cross_validate(ds, folds,
                                  config_from_kwargs(variant, epochs, lr,
                                                     weight_decay, dropout, k,
                                                     hidden, seed, patience),
                                  parallel);
        },
        py::arg("dataset"), py::arg("folds"), py::arg("variant") = "dual_laguerre",
        py::arg("epochs") = 200, py::arg("lr") = 0.01,
        py::arg("weight_decay") = 5e-4, py::arg("dropout") = 0.5, py::arg("k") = 3,
        py::arg("hidden") = 16, py::arg("seed") = 0, py::arg("patience") = 0,
        py::arg("parallel") = false, py::call_guard<py::gil_scoped_release>());
}
