#include <pybind11/eigen.h>
#include <pybind11/gil_safe_call_once.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "scesame/affinity.hpp"
#include "scesame/edge.hpp"
#include "scesame/error.hpp"
#include "scesame/evaluation.hpp"
#include "scesame/fixtures.hpp"
#include "scesame/io.hpp"
#include "scesame/pipeline.hpp"
#include "scesame/spectral.hpp"
#include "scesame/tms.hpp"

namespace py = pybind11;
using namespace scesame;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

template <typename T, typename A>
Grid<T> to_grid(const A& a, const char* what) {
    if (a.ndim() != 2) throw Error(ErrorKind::Shape, std::string(what) + " must be a 2-D array");
    Grid<T> g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), g.data.begin());
    return g;
}

BinaryMask to_mask(const ByteArray& a, const char* what) {
    auto g = to_grid<std::uint8_t>(a, what);
    for (auto& v : g.data) v = v ? 1 : 0;
    return g;
}

template <typename T>
py::array_t<T> to_array(const Grid<T>& g) {
    py::array_t<T> a({g.height, g.width});
    std::copy(g.data.begin(), g.data.end(), a.mutable_data());
    return a;
}

std::vector<Point2> to_points(const DoubleArray& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) throw Error(ErrorKind::Shape, "points must have shape (n, 2)");
    std::vector<Point2> pts(static_cast<std::size_t>(a.shape(0)));
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {a.data()[2 * i], a.data()[2 * i + 1]};
    return pts;
}

DoubleArray from_points(const std::vector<Point2>& pts) {
    DoubleArray a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        a.mutable_data()[2 * i] = pts[i].x;
        a.mutable_data()[2 * i + 1] = pts[i].y;
    }
    return a;
}

PipelineConfig config_from(const std::optional<std::string>& preset, const py::kwargs& overrides) {
    PipelineConfig cfg = preset ? preset_config(*preset) : PipelineConfig{};
    if (overrides.size() > 0) {
        const auto json_mod = py::module_::import("json");
        const auto text = json_mod.attr("dumps")(overrides).cast<std::string>();
        apply_config_json(nlohmann::json::parse(text), cfg);
    }
    return cfg;
}

py::dict report_dict(const MetricsReport& r) {
    const auto json_mod = py::module_::import("json");
    return json_mod.attr("loads")(metrics_to_json(r).dump());
}

GroundTruth to_ground_truth(const std::vector<ByteArray>& annotations) {
    GroundTruth gt;
    for (const auto& a : annotations) gt.annotations.push_back(to_mask(a, "annotation"));
    return gt;
}

}  // namespace

PYBIND11_MODULE(_scesame, m) {
    m.doc() = "Mask filtering, spectral mask ensembling and BSDS-style edge evaluation";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result(
        [&]() { return py::exception<Error>(m, "ScesameError", PyExc_RuntimeError); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const auto& type = error_type.get_stored();
            py::object err = type(e.what());
            err.attr("kind") = to_string(e.kind());
            py::set_error(type, err);
        }
    });

    py::class_<MaskSet>(m, "MaskSet")
        .def_property_readonly("height", [](const MaskSet& s) { return s.image_height; })
        .def_property_readonly("width", [](const MaskSet& s) { return s.image_width; })
        .def_readwrite("file_name", &MaskSet::file_name)
        .def_property_readonly("ids", [](const MaskSet& s) {
            std::vector<int> ids;
            for (const auto& r : s.masks) ids.push_back(r.id);
            return ids;
        })
        .def_property_readonly("areas", [](const MaskSet& s) {
            std::vector<std::int64_t> a;
            for (const auto& r : s.masks) a.push_back(r.area);
            return a;
        })
        .def("mask", [](const MaskSet& s, std::size_t i) {
            if (i >= s.masks.size()) throw py::index_error();
            return to_array(rle_decode(s.masks[i].segmentation));
        }, py::arg("index"))
        .def("__len__", [](const MaskSet& s) { return s.masks.size(); })
        .def("to_json", [](const MaskSet& s) { return mask_set_to_json(s).dump(); });

    m.def("mask_set", [](const std::vector<ByteArray>& masks, std::optional<std::vector<double>> scores,
                         std::optional<std::vector<FloatArray>> logits, std::optional<std::vector<int>> ids,
                         const std::string& file_name) {
        if (masks.empty()) throw Error(ErrorKind::EmptySelection, "no masks given");
        MaskSet set;
        set.file_name = file_name;
        for (std::size_t i = 0; i < masks.size(); ++i) {
            const auto grid = to_mask(masks[i], "mask");
            if (i == 0) {
                set.image_height = grid.height;
                set.image_width = grid.width;
            }
            if (std::none_of(grid.data.begin(), grid.data.end(), [](std::uint8_t v) { return v != 0; })) continue;
            const int id = ids ? ids->at(i) : static_cast<int>(i);
            std::optional<double> score;
            if (scores) score = scores->at(i);
            auto rec = make_mask_record(id, rle_encode(grid), score);
            if (logits) rec.logits = to_grid<float>(logits->at(i), "logits");
            set.masks.push_back(std::move(rec));
        }
        if (set.masks.empty()) throw Error(ErrorKind::EmptySelection, "every mask is empty");
        validate_mask_set(set);
        return set;
    }, py::arg("masks"), py::arg("scores") = py::none(), py::arg("logits") = py::none(), py::arg("ids") = py::none(),
       py::arg("file_name") = "", "Build a validated mask set from binary (H, W) arrays. Empty masks are dropped.");

    m.def("load_masks", [](const fs::path& path) { return load_mask_json(path).masks; }, py::arg("path"));
    m.def("save_masks", [](const fs::path& path, const MaskSet& s) { write_mask_json(path, s); }, py::arg("path"),
          py::arg("masks"));

    m.def("rle_encode", [](const ByteArray& a) {
        const auto r = rle_encode(to_mask(a, "mask"));
        return std::vector<std::uint32_t>(r.counts.begin(), r.counts.end());
    }, py::arg("mask"), "Column-major run lengths, starting with a background run.");
    m.def("rle_decode", [](std::vector<std::uint32_t> counts, int height, int width) {
        return to_array(rle_decode(Rle{height, width, std::move(counts)}));
    }, py::arg("counts"), py::arg("height"), py::arg("width"));

    m.def("tms_keep_count", &tms_keep_count, py::arg("n"), py::arg("t"));
    m.def("cluster_count", &cluster_count, py::arg("n"), py::arg("c"));
    m.def("box_nms", &box_nms, py::arg("masks"), py::arg("iou_threshold") = 0.7);
    m.def("top_mask_selection", [](const MaskSet& s, int t) { return top_mask_selection(s, TmsConfig{t}); },
          py::arg("masks"), py::arg("t") = 3);

    m.def("scesame_affinity", [](const MaskSet& s, double tau, int scale_neighbor) {
        return scesame_affinity(s, AffinityParams{tau, scale_neighbor, 1e-6}).w;
    }, py::arg("masks"), py::arg("tau") = 0.5, py::arg("scale_neighbor") = 7);
    m.def("knn_affinity", [](const DoubleArray& pts, int k) { return knn_affinity(to_points(pts), k).w; },
          py::arg("points"), py::arg("k"));
    m.def("laplacian", [](const Eigen::MatrixXd& w, const std::string& variant) {
        return build_laplacian(AffinityMatrix{w}, parse_laplacian_variant(variant)).matrix;
    }, py::arg("w"), py::arg("variant") = "normalized");
    m.def("spectral_cluster", [](const Eigen::MatrixXd& w, int k, const std::string& variant, bool row_normalize,
                                 std::uint64_t seed) {
        SpectralOptions opts;
        opts.variant = parse_laplacian_variant(variant);
        opts.row_normalize = row_normalize;
        opts.kmeans.seed = seed;
        return spectral_cluster(AffinityMatrix{w}, k, opts).labels;
    }, py::arg("w"), py::arg("k"), py::arg("variant") = "normalized", py::arg("row_normalize") = false,
       py::arg("seed") = 0);
    m.def("kmeans", [](const Eigen::MatrixXd& points, int k, std::uint64_t seed) {
        KMeansOptions opts;
        opts.seed = seed;
        return kmeans(points, k, opts).labels;
    }, py::arg("points"), py::arg("k"), py::arg("seed") = 0);
    m.def("adjusted_rand_index", [](const std::vector<int>& a, const std::vector<int>& b) {
        return adjusted_rand_index(a, b);
    }, py::arg("a"), py::arg("b"));

    m.def("aggregate_normalize", [](const std::vector<DoubleArray>& maps) {
        std::vector<EdgeMap> grids;
        for (const auto& a : maps) grids.push_back(to_grid<double>(a, "edge map"));
        return to_array(aggregate_normalize(grids));
    }, py::arg("maps"));
    m.def("boundary_zero_padding", [](const DoubleArray& e, int p) {
        return to_array(boundary_zero_padding(to_grid<double>(e, "edge map"), p));
    }, py::arg("edges"), py::arg("p") = 5);
    m.def("gaussian_blur", [](const DoubleArray& e, int kernel) {
        return to_array(gaussian_blur(to_grid<double>(e, "edge map"), kernel));
    }, py::arg("edges"), py::arg("kernel") = 3);
    m.def("edge_nms", [](const DoubleArray& e, double low_suppress) {
        return to_array(edge_nms(to_grid<double>(e, "edge map"), low_suppress));
    }, py::arg("edges"), py::arg("low_suppress") = 0.0);

    m.def("detect_edges", [](const MaskSet& s, std::optional<std::string> preset, py::kwargs overrides) {
        const auto cfg = config_from(preset, overrides);
        const auto r = detect_edges(s, cfg);
        py::dict counts;
        counts["input"] = r.counts.input;
        counts["after_nms"] = r.counts.after_nms;
        counts["after_tms"] = r.counts.after_tms;
        counts["after_sc"] = r.counts.after_sc;
        py::dict out;
        out["edges"] = to_array(r.edges);
        out["counts"] = counts;
        out["variant"] = variant_name(cfg);
        out["members"] = r.final_members;
        out["warnings"] = r.warnings;
        return out;
    }, py::arg("masks"), py::arg("preset") = py::none(),
       "Edge map of a mask set. Keyword arguments override config keys (tms_t, sc_c, tau, bzp_p, ...).");

    m.def("prf_at_threshold", [](const DoubleArray& pred, const std::vector<ByteArray>& gt, double threshold,
                                 double tolerance, bool thin) {
        const auto e = to_grid<double>(pred, "prediction");
        const auto p = prf_at_threshold(e, to_ground_truth(gt), threshold,
                                        match_radius(e.height, e.width, tolerance), thin);
        return py::make_tuple(p.precision, p.recall, p.f1);
    }, py::arg("pred"), py::arg("gt"), py::arg("threshold"), py::arg("tolerance") = kBsdsTolerance,
       py::arg("thin") = false);
    m.def("evaluate", [](const std::vector<DoubleArray>& preds, const std::vector<std::vector<ByteArray>>& gts,
                         double tolerance, bool thin, int jobs) {
        std::vector<EdgeMap> maps;
        std::vector<GroundTruth> truth;
        for (const auto& p : preds) maps.push_back(to_grid<double>(p, "prediction"));
        for (const auto& g : gts) truth.push_back(to_ground_truth(g));
        MetricsReport r;
        {
            py::gil_scoped_release release;
            r = evaluate_dataset(maps, truth, EvalOptions{tolerance, thin, jobs});
        }
        return report_dict(r);
    }, py::arg("preds"), py::arg("gts"), py::arg("tolerance") = kBsdsTolerance, py::arg("thin") = false,
       py::arg("jobs") = 1, "ODS/OIS/AP of soft edge maps against per-image lists of annotator masks.");

    m.def("gen_circles", [](std::uint64_t seed, double noise) {
        const auto ds = gen_circles(seed, noise);
        return py::make_tuple(from_points(ds.points), ds.labels);
    }, py::arg("seed") = 0, py::arg("noise") = kDefaultCircleNoise);
    m.def("cluster_demo", [](std::uint64_t seed, double noise, int neighbors) {
        const auto d = cluster_demo(seed, noise, neighbors);
        py::dict out;
        out["points"] = from_points(d.data.points);
        out["labels"] = d.data.labels;
        out["spectral_labels"] = d.spectral_labels;
        out["kmeans_labels"] = d.kmeans_labels;
        out["spectral_ari"] = d.spectral_ari;
        out["kmeans_ari"] = d.kmeans_ari;
        return out;
    }, py::arg("seed") = 0, py::arg("noise") = kDefaultCircleNoise, py::arg("neighbors") = 10);
    m.def("synthetic_scene", [](std::uint64_t seed) {
        auto s = gen_synthetic_scene(seed);
        std::vector<py::array_t<std::uint8_t>> gt;
        for (const auto& a : s.ground_truth.annotations) gt.push_back(to_array(a));
        py::dict out;
        out["masks"] = s.masks;
        out["ground_truth"] = gt;
        out["shape_mask_ids"] = s.shape_mask_ids;
        out["noise_ids"] = s.noise_ids;
        out["background_id"] = s.background_id;
        return out;
    }, py::arg("seed") = 0);

    m.def("read_pfm", [](const fs::path& p) { return to_array(read_pfm(p)); }, py::arg("path"));
    m.def("write_pfm", [](const fs::path& p, const DoubleArray& e) { write_pfm(p, to_grid<double>(e, "edge map")); },
          py::arg("path"), py::arg("edges"));
    m.def("read_ground_truth", [](const fs::path& dir) {
        std::vector<py::array_t<std::uint8_t>> out;
        for (const auto& a : load_ground_truth_dir(dir).annotations) out.push_back(to_array(a));
        return out;
    }, py::arg("directory"));
}
