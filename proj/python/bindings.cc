#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "blindspot/discretizer.h"
#include "blindspot/error.h"
#include "blindspot/gbdt.h"
#include "blindspot/ingest.h"
#include "blindspot/lime.h"
#include "blindspot/predictor.h"
#include "blindspot/regions.h"
#include "blindspot/report.h"
#include "blindspot/synth.h"

namespace py = pybind11;
using namespace blindspot;

namespace {

// Wraps a Python callable `f(table) -> sequence of float`.
class CallablePredictor final : public Predictor {
 public:
  explicit CallablePredictor(py::function fn) : fn_(std::move(fn)) {}
  ~CallablePredictor() override {
    py::gil_scoped_acquire gil;
    fn_ = py::function();
  }

  std::vector<double> predict_proba(const LabeledTable& rows) const override {
    py::gil_scoped_acquire gil;
    auto out = fn_(py::cast(rows, py::return_value_policy::reference)).cast<std::vector<double>>();
    if (out.size() != rows.n_rows()) {
      throw Error(ErrorKind::kInvalidArgument, "predictor returned the wrong number of probabilities");
    }
    return out;
  }

 private:
  py::function fn_;
};

std::vector<Cell> to_cells(const py::sequence& values) {
  std::vector<Cell> cells;
  for (const auto& v : values) {
    if (py::isinstance<py::str>(v)) {
      cells.emplace_back(v.cast<std::string>());
    } else {
      cells.emplace_back(v.cast<double>());
    }
  }
  return cells;
}

py::object cell_to_py(const Cell& cell) {
  if (const auto* x = std::get_if<double>(&cell)) return py::float_(*x);
  return py::str(std::get<std::string>(cell));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Misclassification region mining with LIME explanations";

  static py::exception<Error> error(m, "BlindspotError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::enum_<FeatureKind>(m, "FeatureKind")
      .value("CONTINUOUS", FeatureKind::kContinuous)
      .value("CATEGORICAL", FeatureKind::kCategorical);

  py::class_<FeatureSpec>(m, "FeatureSpec")
      .def(py::init<std::string, FeatureKind>(), py::arg("name"),
           py::arg("kind") = FeatureKind::kContinuous)
      .def_readwrite("name", &FeatureSpec::name)
      .def_readwrite("kind", &FeatureSpec::kind);

  py::class_<LabeledTable>(m, "LabeledTable")
      .def(py::init<Schema>(), py::arg("schema"))
      .def(
          "add_row",
          [](LabeledTable& t, const py::sequence& values, int label, std::string row_id) {
            t.add_row(to_cells(values), label, std::move(row_id));
          },
          py::arg("values"), py::arg("label"), py::arg("row_id"))
      .def_property_readonly("n_rows", &LabeledTable::n_rows)
      .def_property_readonly("n_features", &LabeledTable::n_features)
      .def_property_readonly("schema", &LabeledTable::schema)
      .def_property_readonly("feature_names",
                             [](const LabeledTable& t) {
                               std::vector<std::string> names;
                               for (const auto& f : t.schema()) names.push_back(f.name);
                               return names;
                             })
      .def_property_readonly(
          "labels", [](const LabeledTable& t) { return std::vector<int>(t.labels().begin(), t.labels().end()); })
      .def_property_readonly("row_ids",
                             [](const LabeledTable& t) {
                               return std::vector<std::string>(t.row_ids().begin(), t.row_ids().end());
                             })
      .def("row",
           [](const LabeledTable& t, size_t r) {
             if (r >= t.n_rows()) throw py::index_error("row index out of range");
             py::list out;
             for (const auto& c : t.row(r)) out.append(cell_to_py(c));
             return out;
           })
      .def("column",
           [](const LabeledTable& t, const std::string& name) {
             const auto j = t.feature_index(name);
             if (!j) throw Error(ErrorKind::kUnknownFeature, name);
             py::list out;
             for (size_t r = 0; r < t.n_rows(); ++r) out.append(cell_to_py(t.cell(r, *j)));
             return out;
           })
      .def("__len__", &LabeledTable::n_rows);

  m.def("load_csv", &load_csv, py::arg("path"), py::arg("schema"), py::arg("label_column") = "label",
        py::arg("id_column") = std::nullopt);
  m.def("write_csv", &write_csv, py::arg("table"), py::arg("path"), py::arg("label_column") = "label",
        py::arg("id_column") = "row_id");
  m.def(
      "split",
      [](const LabeledTable& t, double fraction, uint64_t seed) {
        auto s = split(t, fraction, seed);
        return py::make_tuple(std::move(s.train), std::move(s.test));
      },
      py::arg("table"), py::arg("test_fraction"), py::arg("seed"));

  py::class_<Predictor>(m, "Predictor")
      .def("predict_proba", &Predictor::predict_proba, py::arg("rows"));

  py::class_<CallablePredictor, Predictor>(m, "CallablePredictor")
      .def(py::init<py::function>(), py::arg("fn"));

  py::class_<ExternalPredictor, Predictor>(m, "ExternalPredictor");
  m.def("load_external_predictions", &load_external_predictions, py::arg("path"), py::arg("table"));

  py::class_<GbdtParams>(m, "GbdtParams")
      .def(py::init<>())
      .def_readwrite("rounds", &GbdtParams::rounds)
      .def_readwrite("max_depth", &GbdtParams::max_depth)
      .def_readwrite("learning_rate", &GbdtParams::learning_rate)
      .def_readwrite("min_leaf_count", &GbdtParams::min_leaf_count)
      .def_readwrite("l2", &GbdtParams::l2)
      .def_readwrite("seed", &GbdtParams::seed);

  py::class_<GbdtModel, Predictor>(m, "GbdtModel")
      .def_property_readonly("base_score", &GbdtModel::base_score)
      .def_property_readonly("n_trees", [](const GbdtModel& g) { return g.trees().size(); })
      .def("to_json", [](const GbdtModel& g) { return render_json(g.to_json()); })
      .def_static("from_json",
                  [](const std::string& text) { return GbdtModel::from_json(nlohmann::json::parse(text)); });

  m.def(
      "train_gbdt",
      [](const LabeledTable& t, const GbdtParams& p) { return train_gbdt(t, p); },
      py::arg("train"), py::arg("params") = GbdtParams{}, py::call_guard<py::gil_scoped_release>());

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("tp", &Metrics::tp)
      .def_readonly("fp", &Metrics::fp)
      .def_readonly("tn", &Metrics::tn)
      .def_readonly("fn", &Metrics::fn)
      .def_readonly("recall", &Metrics::recall)
      .def_readonly("precision", &Metrics::precision)
      .def_readonly("accuracy", &Metrics::accuracy)
      .def_readonly("error_rate", &Metrics::error_rate);
  m.def("evaluate", &evaluate, py::arg("predictor"), py::arg("table"), py::arg("threshold") = 0.5,
        py::call_guard<py::gil_scoped_release>());

  py::class_<Condition>(m, "Condition")
      .def_property_readonly("feature", &Condition::feature)
      .def_property_readonly("text", &Condition::text)
      .def("holds", py::overload_cast<const LabeledTable&, size_t>(&Condition::holds, py::const_))
      .def("__repr__", &Condition::text);

  py::class_<Discretizer>(m, "Discretizer")
      .def_static("fit", &Discretizer::fit, py::arg("train"))
      .def("edges", [](const Discretizer& d, size_t j) { return d.feature(j).edges; })
      .def(
          "condition_for",
          [](const Discretizer& d, const std::string& feature, const py::object& value) {
            if (py::isinstance<py::str>(value)) return d.condition_for(feature, Cell{value.cast<std::string>()});
            return d.condition_for(feature, Cell{value.cast<double>()});
          },
          py::arg("feature"), py::arg("value"));

  py::class_<LimeConfig>(m, "LimeConfig")
      .def(py::init<>())
      .def_readwrite("n_samples", &LimeConfig::n_samples)
      .def_readwrite("kernel_width", &LimeConfig::kernel_width)
      .def_readwrite("ridge_lambda", &LimeConfig::ridge_lambda)
      .def_readwrite("top_k", &LimeConfig::top_k)
      .def_readwrite("seed", &LimeConfig::seed);

  py::class_<Explanation>(m, "Explanation")
      .def_readonly("row_id", &Explanation::row_id)
      .def_readonly("predicted_probability", &Explanation::predicted_probability)
      .def_readonly("predicted_label", &Explanation::predicted_label)
      .def_readonly("true_label", &Explanation::true_label)
      .def_readonly("intercept", &Explanation::intercept)
      .def_readonly("surrogate_r2", &Explanation::surrogate_r2)
      .def_property_readonly("terms",
                             [](const Explanation& e) {
                               py::list out;
                               for (const auto& t : e.terms) out.append(py::make_tuple(t.condition.text(), t.weight));
                               return out;
                             })
      .def("to_json", [](const Explanation& e) { return e.to_json().dump(); });

  m.def("explain", &explain, py::arg("predictor"), py::arg("discretizer"), py::arg("table"), py::arg("row"),
        py::arg("config") = LimeConfig{}, py::arg("threshold") = 0.5,
        py::call_guard<py::gil_scoped_release>());

  py::class_<SynthSpec>(m, "SynthSpec")
      .def_static("planted_quartile", &SynthSpec::planted_quartile, py::arg("n_rows") = 5000,
                  py::arg("d") = 6, py::arg("flip_rate") = 0.4, py::arg("seed") = 0)
      .def_readwrite("n_rows", &SynthSpec::n_rows)
      .def_readwrite("flip_rate", &SynthSpec::flip_rate)
      .def_readwrite("seed", &SynthSpec::seed);
  m.def(
      "generate",
      [](const SynthSpec& spec) {
        auto data = generate(spec);
        return py::make_tuple(std::move(data.table), data.truth.flipped_row_ids);
      },
      py::arg("spec"));

  py::class_<RegionConfig>(m, "RegionConfig")
      .def(py::init<>())
      .def_readwrite("lime", &RegionConfig::lime)
      .def_readwrite("min_support_fraction", &RegionConfig::min_support_fraction)
      .def_readwrite("threshold", &RegionConfig::threshold)
      .def_readwrite("n_threads", &RegionConfig::n_threads);

  py::class_<ConditionStats>(m, "ConditionStats")
      .def_property_readonly("condition", [](const ConditionStats& s) { return s.condition.text(); })
      .def_readonly("support", &ConditionStats::support)
      .def_readonly("support_fraction", &ConditionStats::support_fraction)
      .def_readonly("coverage", &ConditionStats::coverage)
      .def_readonly("errors_in_region", &ConditionStats::errors_in_region)
      .def_readonly("error_rate", &ConditionStats::error_rate);

  py::class_<RegionReport>(m, "RegionReport")
      .def_property_readonly("split", [](const RegionReport& r) { return std::string(split_tag_name(r.split)); })
      .def_readonly("baseline_error_rate", &RegionReport::baseline_error_rate)
      .def_readonly("n_total", &RegionReport::n_total)
      .def_readonly("n_misclassified", &RegionReport::n_misclassified)
      .def_readonly("regions", &RegionReport::regions)
      .def("to_json", [](const RegionReport& r) { return render_json(r.to_json()); })
      .def("text_table", &render_text_table)
      .def("svg", [](const RegionReport& r) { return render_error_plot_svg(r); });

  m.def(
      "build_report",
      [](const Predictor& predictor, const Discretizer& disc, const LabeledTable& table,
         const std::string& split, const RegionConfig& config) {
        return build_report(predictor, disc, table, parse_split_tag(split), config);
      },
      py::arg("predictor"), py::arg("discretizer"), py::arg("table"), py::arg("split") = "test",
      py::arg("config") = RegionConfig{}, py::call_guard<py::gil_scoped_release>());

  m.def(
      "write_report_files",
      [](const RegionReport& r, const std::string& out_dir, const std::string& stem) {
        auto p = write_report_files(r, out_dir, stem);
        return std::vector<std::string>{p.json, p.csv, p.svg, p.table};
      },
      py::arg("report"), py::arg("out_dir"), py::arg("stem") = "report");
}
