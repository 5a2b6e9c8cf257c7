#include "duallag/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

static_assert(std::endian::native == std::endian::little,
              "container i/o assumes a little-endian host");

namespace duallag {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error(what);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(p.filename().string() + ": missing or unreadable");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::filesystem::path& p, const void* data, std::size_t n) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(p.string() + ": unwritable");
    if (n > 0) {
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    }
    if (!out) fail(p.string() + ": short write");
}

void check_split(const SplitSet& s, std::size_t num_nodes, std::size_t index) {
    const std::vector<std::uint32_t>* parts[] = {&s.train_ids, &s.val_ids, &s.test_ids};
    const char* names[] = {"train", "val", "test"};
    std::unordered_set<std::uint32_t> seen;
    for (int p = 0; p < 3; ++p) {
        if (parts[p]->empty()) {
            std::ostringstream msg;
            msg << "split " << index << ": empty " << names[p] << " set";
            fail(msg.str());
        }
        for (std::uint32_t id : *parts[p]) {
            if (id >= num_nodes) {
                std::ostringstream msg;
                msg << "split " << index << ": " << names[p] << " id " << id
                    << " out of range [0," << num_nodes << ")";
                fail(msg.str());
            }
            if (!seen.insert(id).second) {
                std::ostringstream msg;
                msg << "split " << index << ": node " << id
                    << " appears in more than one set";
                fail(msg.str());
            }
        }
    }
}

}  // namespace

void GraphDataset::validate() const {
    if (features.size() != num_nodes * feature_dim) {
        fail("dataset: feature buffer size mismatch");
    }
    if (labels.size() != num_nodes) {
        fail("dataset: label count mismatch");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        if (u >= num_nodes || v >= num_nodes) {
            std::ostringstream msg;
            msg << "dataset: edge " << i << " (" << u << "," << v
                << ") endpoint out of range [0," << num_nodes << ")";
            fail(msg.str());
        }
        if (u >= v) {
            std::ostringstream msg;
            msg << "dataset: edge " << i << " not canonical (want u < v)";
            fail(msg.str());
        }
        if (i > 0 && edges[i - 1] >= edges[i]) {
            fail("dataset: edges not sorted/deduped");
        }
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) {
            std::ostringstream msg;
            msg << "dataset: label at index " << i << " = " << labels[i]
                << " out of range [0," << num_classes << ")";
            fail(msg.str());
        }
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!std::isfinite(features[i])) {
            std::ostringstream msg;
            msg << "dataset: non-finite feature at row " << i / feature_dim
                << " col " << i % feature_dim;
            fail(msg.str());
        }
    }
    for (std::size_t s = 0; s < splits.size(); ++s) {
        check_split(splits[s], num_nodes, s);
    }
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> canonicalize_edges(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& raw,
    std::size_t num_nodes, const std::string& context) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto [u, v] = raw[i];
        if (u >= num_nodes || v >= num_nodes) {
            std::ostringstream msg;
            msg << context << ": edge " << i << " (" << u << "," << v
                << ") endpoint out of range [0," << num_nodes << ")";
            fail(msg.str());
        }
        if (u == v) continue;  // self-loops dropped silently
        if (u > v) std::swap(u, v);
        out.emplace_back(u, v);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

GraphDataset load_dataset(const std::filesystem::path& dir) {
    const auto json_path = dir / "graph.json";
    std::ifstream meta_in(json_path);
    if (!meta_in) fail("graph.json: missing or unreadable in " + dir.string());
    json meta;
    try {
        meta = json::parse(meta_in);
    } catch (const json::parse_error& e) {
        fail("graph.json: parse error: " + std::string(e.what()));
    }

    GraphDataset ds;
    std::size_t num_edges = 0;
    try {
        ds.num_nodes = meta.at("num_nodes").get<std::size_t>();
        num_edges = meta.at("num_edges").get<std::size_t>();
        ds.feature_dim = meta.at("feature_dim").get<std::size_t>();
        ds.num_classes = meta.at("num_classes").get<std::size_t>();
    } catch (const json::exception& e) {
        fail("graph.json: bad or missing field: " + std::string(e.what()));
    }

    // edges.u32le: 2E u32 pairs.
    {
        auto bytes = read_file(dir / "edges.u32le");
        if (bytes.size() != num_edges * 8) {
            std::ostringstream msg;
            msg << "edges.u32le: expected " << num_edges * 8 << " bytes for "
                << num_edges << " edges, got " << bytes.size();
            fail(msg.str());
        }
        std::vector<std::uint32_t> flat(num_edges * 2);
        if (!bytes.empty()) std::memcpy(flat.data(), bytes.data(), bytes.size());
        std::vector<std::pair<std::uint32_t, std::uint32_t>> raw(num_edges);
        for (std::size_t e = 0; e < num_edges; ++e) {
            raw[e] = {flat[2 * e], flat[2 * e + 1]};
        }
        ds.edges = canonicalize_edges(raw, ds.num_nodes, "edges.u32le");
    }

    // features.f32le: N*F f32, widened to double.
    {
        auto bytes = read_file(dir / "features.f32le");
        const std::size_t want = ds.num_nodes * ds.feature_dim * 4;
        if (bytes.size() != want) {
            std::ostringstream msg;
            msg << "features.f32le: expected " << want << " bytes for "
                << ds.num_nodes << "x" << ds.feature_dim << " f32, got "
                << bytes.size();
            fail(msg.str());
        }
        std::vector<float> raw(ds.num_nodes * ds.feature_dim);
        std::memcpy(raw.data(), bytes.data(), bytes.size());
        ds.features.resize(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (!std::isfinite(raw[i])) {
                std::ostringstream msg;
                msg << "features.f32le: non-finite value at row "
                    << i / ds.feature_dim << " col " << i % ds.feature_dim;
                fail(msg.str());
            }
            ds.features[i] = static_cast<double>(raw[i]);
        }
    }

    // labels.u32le.
    {
        auto bytes = read_file(dir / "labels.u32le");
        if (bytes.size() != ds.num_nodes * 4) {
            std::ostringstream msg;
            msg << "labels.u32le: expected " << ds.num_nodes * 4
                << " bytes, got " << bytes.size();
            fail(msg.str());
        }
        ds.labels.resize(ds.num_nodes);
        std::memcpy(ds.labels.data(), bytes.data(), bytes.size());
        for (std::size_t i = 0; i < ds.labels.size(); ++i) {
            if (ds.labels[i] >= ds.num_classes) {
                std::ostringstream msg;
                msg << "labels.u32le: label at index " << i << " = "
                    << ds.labels[i] << " out of range [0," << ds.num_classes << ")";
                fail(msg.str());
            }
        }
    }

    if (meta.contains("splits")) {
        try {
            for (const auto& js : meta.at("splits")) {
                SplitSet s;
                s.train_ids = js.at("train").get<std::vector<std::uint32_t>>();
                s.val_ids = js.at("val").get<std::vector<std::uint32_t>>();
                s.test_ids = js.at("test").get<std::vector<std::uint32_t>>();
                ds.splits.push_back(std::move(s));
            }
        } catch (const json::exception& e) {
            fail("graph.json: bad splits field: " + std::string(e.what()));
        }
    }

    ds.validate();
    return ds;
}

void save_dataset(const GraphDataset& ds, const std::filesystem::path& dir) {
    ds.validate();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(dir.string() + ": cannot create directory: " + ec.message());

    json meta;
    meta["num_nodes"] = ds.num_nodes;
    meta["num_edges"] = ds.edges.size();
    meta["feature_dim"] = ds.feature_dim;
    meta["num_classes"] = ds.num_classes;
    if (!ds.splits.empty()) {
        json splits = json::array();
        for (const auto& s : ds.splits) {
            splits.push_back(json{{"train", s.train_ids},
                                  {"val", s.val_ids},
                                  {"test", s.test_ids}});
        }
        meta["splits"] = std::move(splits);
    }
    {
        std::ofstream out(dir / "graph.json", std::ios::trunc);
        if (!out) fail((dir / "graph.json").string() + ": unwritable");
        out << meta.dump(2) << "\n";
        if (!out) fail((dir / "graph.json").string() + ": short write");
    }

    std::vector<std::uint32_t> flat;
    flat.reserve(ds.edges.size() * 2);
    for (auto [u, v] : ds.edges) {
        flat.push_back(u);
        flat.push_back(v);
    }
    write_file(dir / "edges.u32le", flat.data(), flat.size() * 4);

    std::vector<float> feats(ds.features.size());
    for (std::size_t i = 0; i < feats.size(); ++i) {
        feats[i] = static_cast<float>(ds.features[i]);
    }
    write_file(dir / "features.f32le", feats.data(), feats.size() * 4);

    write_file(dir / "labels.u32le", ds.labels.data(), ds.labels.size() * 4);
}

}  // namespace duallag
