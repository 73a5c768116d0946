#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "interdyn/cli.hpp"
#include "interdyn/error.hpp"
#include "interdyn/interaction.hpp"
#include "interdyn/masking.hpp"
#include "interdyn/model.hpp"
#include "interdyn/saliency.hpp"
#include "interdyn/sparsify.hpp"
#include "interdyn/synthetic.hpp"

namespace py = pybind11;
using namespace interdyn;

namespace {

MaskedOutputTable make_table(std::vector<double> values) {
  MaskedOutputTable t;
  t.n = variables_for_length(values.size());
  t.values = std::move(values);
  t.validate();
  return t;
}

GammaVector make_gamma(const std::optional<std::vector<double>>& gamma, std::size_t n) {
  return gamma ? GammaVector{*gamma} : GammaVector::zeros(n);
}

SparsifyConfig make_config(std::size_t max_iters, const std::string& method) {
  SparsifyConfig c;
  c.max_iters = max_iters;
  c.method = parse_sparsify_method(method);
  return c;
}

py::dict salient_dict(const SalientInteraction& s) {
  py::dict d;
  d["mask"] = s.mask.bits;
  d["kind"] = to_string(s.kind);
  d["effect"] = s.effect;
  d["order"] = s.order;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse AND-OR interaction analysis of small classifiers";
  m.attr("__version__") = cli::version();

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<InteractionDecomposition>(m, "Decomposition")
      .def_readonly("n", &InteractionDecomposition::n)
      .def_readonly("bias", &InteractionDecomposition::bias)
      .def_readonly("i_and", &InteractionDecomposition::i_and)
      .def_readonly("i_or", &InteractionDecomposition::i_or)
      .def_property_readonly("gamma", [](const InteractionDecomposition& d) { return d.gamma.values; })
      .def(
          "reconstruct",
          [](const InteractionDecomposition& d, std::uint32_t mask) { return reconstruct(d, SubsetMask(mask, d.n)); },
          py::arg("mask"))
      .def("reconstruct_all", [](const InteractionDecomposition& d) { return reconstruct_all(d); })
      .def("to_json", [](const InteractionDecomposition& d) { return decomposition_to_json(d).dump(); });

  py::class_<Model>(m, "Model")
      .def_property_readonly("epoch", [](const Model& model) { return model.epoch; })
      .def_property_readonly("input_dim", [](const Model& model) { return model.spec.input_dim; })
      .def("logits", [](const Model& model, const std::vector<double>& x) { return model.logits(x); })
      .def(
          "score", [](const Model& model, const std::vector<double>& x, std::size_t label) { return score(model, x, label); },
          py::arg("x"), py::arg("label"));

  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
  m.def(
      "masked_output_table",
      [](const Model& model, const std::vector<double>& x, std::size_t label, std::vector<double> baseline) {
        return masked_output_table(model, x, label, BaselineVector{std::move(baseline)}).values;
      },
      py::arg("model"), py::arg("x"), py::arg("label"), py::arg("baseline"));

  m.def("mobius_and", [](const std::vector<double>& o) { return mobius_and(o); }, py::arg("o_and"));
  m.def("mobius_or", [](const std::vector<double>& o) { return mobius_or(o); }, py::arg("o_or"));
  m.def(
      "decompose",
      [](std::vector<double> table, const std::optional<std::vector<double>>& gamma) {
        const auto t = make_table(std::move(table));
        return decompose(t, make_gamma(gamma, t.n));
      },
      py::arg("table"), py::arg("gamma") = py::none());
  m.def(
      "objective",
      [](std::vector<double> table, const std::optional<std::vector<double>>& gamma) {
        const auto t = make_table(std::move(table));
        return objective(t, make_gamma(gamma, t.n));
      },
      py::arg("table"), py::arg("gamma") = py::none());
  m.def(
      "sparsify",
      [](std::vector<double> table, std::size_t max_iters, const std::string& method) {
        const SparsifyResult r = sparsify(make_table(std::move(table)), make_config(max_iters, method));
        py::dict d;
        d["gamma"] = r.gamma.values;
        d["objective_trace"] = r.objective_trace;
        d["final_objective"] = r.final_objective;
        d["converged"] = r.converged;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("table"), py::arg("max_iters") = 5000, py::arg("method") = "admm");
  m.def(
      "decompose_sparse",
      [](std::vector<double> table, std::size_t max_iters, const std::string& method) {
        return decompose_sparse(make_table(std::move(table)), make_config(max_iters, method));
      },
      py::arg("table"), py::arg("max_iters") = 5000, py::arg("method") = "admm");
  m.def(
      "extract_salient",
      [](const InteractionDecomposition& d, double alpha) {
        py::list items;
        for (const auto& s : extract_salient(d, ThresholdPolicy::relative(alpha)).items) items.append(salient_dict(s));
        return items;
      },
      py::arg("decomposition"), py::arg("alpha") = 0.05);
  m.def(
      "match_json",
      [](const InteractionDecomposition& v, const InteractionDecomposition& base, double alpha) {
        const auto policy = ThresholdPolicy::relative(alpha);
        return report_to_json(match_generalization(extract_salient(v, policy), base, policy.tau_for(base))).dump();
      },
      py::arg("decomposition"), py::arg("base"), py::arg("alpha") = 0.05);
  m.def(
      "planted_table",
      [](std::size_t n, const std::vector<std::tuple<std::uint32_t, std::string, double>>& terms, double bias) {
        PlantedSpec spec;
        spec.n = n;
        spec.bias = bias;
        for (const auto& [mask, kind, coefficient] : terms) {
          if (kind != "AND" && kind != "OR") throw InvalidArgument("kind must be AND or OR");
          spec.planted.push_back({mask, kind == "AND" ? InteractionKind::kAnd : InteractionKind::kOr, coefficient});
        }
        return planted_table(spec).values;
      },
      py::arg("n"), py::arg("terms"), py::arg("bias") = 0.0);
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
