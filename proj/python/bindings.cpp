// Python bindings: geometry, corruptions, datasets, checkpoints and the
// experiment harness. Point clouds cross the boundary as float64 (N, 3) arrays.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>

#include "svwa/adaptation/adaptation.hpp"
#include "svwa/corruptions/corruption.hpp"
#include "svwa/data/dataset.hpp"
#include "svwa/data/shapes.hpp"
#include "svwa/error.hpp"
#include "svwa/geometry/sampling.hpp"
#include "svwa/harness/config.hpp"
#include "svwa/harness/experiment.hpp"
#include "svwa/harness/report.hpp"
#include "svwa/model/checkpoint.hpp"
#include "svwa/random.hpp"
#include "svwa/runtime.hpp"

namespace py = pybind11;
using namespace svwa;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw DimensionError("expected an (N, 3) array of points");
  PointCloud c;
  const auto r = a.unchecked<2>();
  c.points.resize(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) c.points[static_cast<std::size_t>(i)] = {r(i, 0), r(i, 1), r(i, 2)};
  return c;
}

Array to_array(const PointCloud& c) {
  Array out({static_cast<py::ssize_t>(c.size()), py::ssize_t{3}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (py::ssize_t k = 0; k < 3; ++k) w(static_cast<py::ssize_t>(i), k) = c.points[i][static_cast<std::size_t>(k)];
  return out;
}

harness::ExperimentConfig make_config(const py::dict& options) {
  harness::ExperimentConfig cfg;
  for (const auto& [key, value] : options) {
    std::string text;
    if (py::isinstance<py::list>(value) || py::isinstance<py::tuple>(value)) {
      for (const auto& item : value) text += (text.empty() ? "" : ",") + py::str(item).cast<std::string>();
    } else if (py::isinstance<py::bool_>(value)) {
      text = value.cast<bool>() ? "true" : "false";
    } else {
      text = py::str(value).cast<std::string>();
    }
    harness::set_option(cfg, key.cast<std::string>(), text);
  }
  cfg.validate();
  return cfg;
}

py::dict row_to_dict(const harness::ResultRow& r) {
  py::dict d;
  d["method"] = r.method;
  d["corruption"] = r.corruption;
  d["severity"] = r.severity;
  d["repeat"] = r.repeat;
  d["seed"] = r.seed;
  d["num_variations"] = r.num_variations;
  d["iterations"] = r.iterations;
  d["mode"] = r.mode;
  d["variation_source"] = r.variation_source;
  d["batch_size"] = r.batch_size;
  d["num_clouds"] = r.num_clouds;
  d["skipped_batches"] = r.skipped_batches;
  d["accuracy"] = r.accuracy;
  d["entropy_before"] = r.entropy_before;
  d["entropy_after"] = r.entropy_after;
  d["adaptable_fraction"] = r.adaptable_fraction;
  d["overhead_fraction"] = r.overhead_fraction;
  d["seconds"] = r.seconds;
  d["fingerprint"] = r.fingerprint;
  return d;
}

}  // namespace

PYBIND11_MODULE(svwa, m) {
  tune_allocator();
  m.doc() = "Sampling-variation weight averaging for point-cloud test-time adaptation";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<SizeError>(m, "SizeError", base.ptr());

  m.def("mix_seed", &mix_seed, py::arg("base"), py::arg("stream"));

  m.def(
      "farthest_point_sample",
      [](const Array& points, std::size_t count, std::size_t start) {
        return farthest_point_sample(to_cloud(points), count, start);
      },
      py::arg("points"), py::arg("count"), py::arg("start_index") = 0);
  m.def(
      "knn",
      [](const Array& points, std::array<double, 3> query, std::size_t k) { return knn(to_cloud(points), query, k); },
      py::arg("points"), py::arg("query"), py::arg("k"));
  m.def(
      "normalize_cloud", [](const Array& points) { return to_array(normalize_cloud(to_cloud(points))); },
      py::arg("points"));

  m.def("corruption_kinds", [] {
    std::vector<std::string> out;
    for (CorruptionKind k : all_corruption_kinds()) out.emplace_back(to_string(k));
    return out;
  });
  m.def(
      "apply_corruption",
      [](const Array& points, const std::string& spec, std::uint64_t seed) {
        return to_array(apply_corruption(to_cloud(points), CorruptionSpec::parse(spec, seed)));
      },
      py::arg("points"), py::arg("corruption"), py::arg("seed") = 0);

  m.def(
      "generate_shape",
      [](int shape, std::size_t n_points, std::uint64_t seed) {
        if (shape < 0 || shape >= static_cast<int>(kNumShapeClasses)) throw ConfigError("shape class out of range");
        return to_array(generate_shape(static_cast<ShapeClass>(shape), n_points, seed));
      },
      py::arg("shape"), py::arg("n_points"), py::arg("seed"));

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("num_classes", &Dataset::num_classes)
      .def_readonly("train_indices", &Dataset::train_indices)
      .def_readonly("test_indices", &Dataset::test_indices)
      .def("__len__", [](const Dataset& d) { return d.clouds.size(); })
      .def("points", [](const Dataset& d, std::size_t i) { return to_array(d.clouds.at(i)); })
      .def("label", [](const Dataset& d, std::size_t i) { return d.clouds.at(i).label.value_or(-1); })
      .def("save", [](const Dataset& d, const std::filesystem::path& p) { save_dataset(d, p); });
  m.def(
      "make_dataset",
      [](std::size_t train, std::size_t test, std::size_t n_points, std::uint64_t seed) {
        return make_dataset(train, test, n_points, seed);
      },
      py::arg("train_per_class"), py::arg("test_per_class"), py::arg("n_points"), py::arg("seed"));
  m.def("load_dataset", &load_dataset, py::arg("path"));

  py::class_<ModelState>(m, "Model")
      .def_property_readonly("num_classes", [](const ModelState& s) { return s.config.num_classes; })
      .def_property_readonly("fps_points", [](const ModelState& s) { return s.config.fps_points; })
      .def("adaptable_fraction", [](const ModelState& s) { return adaptable_fraction(s); })
      .def("param_counts",
           [](const ModelState& s) {
             const ParamCounts c = count_params(s.config);
             return py::make_tuple(c.total, c.adaptable);
           })
      .def("save", [](const ModelState& s, const std::filesystem::path& p) { save_checkpoint(s, p); })
      .def("to_bytes", [](const ModelState& s) {
        const auto b = encode_checkpoint(s);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      });
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
  m.def("reference_pointnet_counts", [] {
    const ParamCounts c = reference_pointnet_counts();
    return py::make_tuple(c.total, c.adaptable);
  });

  m.def(
      "config_text", [](const py::dict& options) { return harness::to_text(make_config(options)); },
      py::arg("options") = py::dict());
  m.def(
      "pretrain",
      [](const Dataset& dataset, const py::dict& options) {
        const harness::ExperimentConfig cfg = make_config(options);
        std::optional<harness::PretrainResult> r;
        {
          py::gil_scoped_release release;
          r = harness::run_pretrain(dataset, cfg);
        }
        return py::make_tuple(std::move(r->state), r->clean_accuracy);
      },
      py::arg("dataset"), py::arg("options") = py::dict(),
      "Returns (model, clean_accuracy). Options are config keys, e.g. {'epochs': 3}.");
  m.def(
      "evaluate",
      [](const ModelState& model, const Dataset& dataset, const py::dict& options) {
        const harness::ExperimentConfig cfg = make_config(options);
        std::vector<harness::ResultRow> rows;
        {
          py::gil_scoped_release release;
          rows = harness::run_grid(model, dataset, cfg);
        }
        py::list out;
        for (const auto& r : rows) out.append(row_to_dict(r));
        return out;
      },
      py::arg("model"), py::arg("dataset"), py::arg("options") = py::dict(),
      "Runs every (method, corruption, V, mode, source) cell and returns one dict per repeat.");
}
