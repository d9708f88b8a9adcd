#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "kaid/error.hpp"
#include "kaid/experiments.hpp"
#include "kaid/generators.hpp"
#include "kaid/kolmogorov_arnold.hpp"
#include "kaid/ridge.hpp"
#include "kaid/serialization.hpp"
#include "kaid/urysohn.hpp"

namespace py = pybind11;
using namespace kaid;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) {
  return {a.data(), a.data() + a.size()};
}

std::span<const double> row(const Array& x) {
  if (x.ndim() != 1) throw py::value_error("expected a 1-d input vector");
  return {x.data(), static_cast<std::size_t>(x.size())};
}

Dataset make_dataset(const Array& x, const Array& y) {
  if (x.ndim() != 2 || y.ndim() != 1 || x.shape(0) != y.shape(0)) {
    throw py::value_error("expected X of shape (N, m) and y of shape (N,)");
  }
  const auto m = static_cast<std::size_t>(x.shape(1));
  Dataset d(m);
  d.reserve(static_cast<std::size_t>(y.size()));
  for (py::ssize_t i = 0; i < y.size(); ++i) d.push_back({x.data(i, 0), m}, y.data()[i]);
  return d;
}

// Evaluates a model over every row of X.
template <class Model>
Array predict(const Model& model, const Array& x) {
  if (x.ndim() == 1) return to_array(std::vector<double>{model.eval(row(x))});
  if (x.ndim() != 2) throw py::value_error("expected X of shape (N, m)");
  Array out(x.shape(0));
  const auto m = static_cast<std::size_t>(x.shape(1));
  for (py::ssize_t i = 0; i < x.shape(0); ++i) out.mutable_data()[i] = model.eval({x.data(i, 0), m});
  return out;
}

FitConfig make_config(double mu, std::size_t passes, double epsilon, std::size_t patience, bool shuffle,
                      std::uint64_t seed) {
  FitConfig c;
  c.mu = mu;
  c.passes = passes;
  c.epsilon = epsilon;
  c.patience = patience;
  c.shuffle = shuffle;
  c.seed = seed;
  return c;
}

}  // namespace

PYBIND11_MODULE(_kaid, m) {
  m.doc() = "Urysohn, Kolmogorov-Arnold and ridge models identified by Kaczmarz-type row actions";

  py::register_exception<Error>(m, "KaidError", PyExc_ValueError);

  py::enum_<Stream>(m, "Stream")
      .value("DATA", Stream::Data)
      .value("INIT", Stream::Init)
      .value("SHUFFLE", Stream::Shuffle);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t, Stream>(), py::arg("seed"), py::arg("stream") = Stream::Data)
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("uniform", py::overload_cast<double, double>(&Rng::uniform), py::arg("lo"), py::arg("hi"))
      .def_property_readonly_static("algorithm", [](py::object) { return std::string(Rng::algorithm()); });

  py::class_<PwlBasis>(m, "PwlBasis")
      .def(py::init<double, double, std::size_t>(), py::arg("lo"), py::arg("hi"), py::arg("count"))
      .def_property_readonly("lo", &PwlBasis::lo)
      .def_property_readonly("hi", &PwlBasis::hi)
      .def_property_readonly("nodes", [](const PwlBasis& b) { return to_array(b.nodes()); })
      .def("__len__", &PwlBasis::size)
      .def("eval", [](const PwlBasis& b, double x) {
        const SparseEval e = b.eval(x);
        return py::make_tuple(e.indices, to_array(e.values), to_array(e.derivs));
      });

  py::class_<GaussBasis>(m, "GaussBasis")
      .def(py::init<std::vector<double>>(), py::arg("centers"))
      .def_property_readonly("centers", [](const GaussBasis& b) { return to_array(b.centers()); })
      .def("__len__", &GaussBasis::size)
      .def("eval", [](const GaussBasis& b, double t) {
        const SparseEval e = b.eval(t);
        return py::make_tuple(to_array(e.values), to_array(e.derivs));
      })
      .def("second_deriv", [](const GaussBasis& b, double t) { return to_array(b.second_deriv(t)); });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("X"), py::arg("y"))
      .def("__len__", &Dataset::size)
      .def_property_readonly("dim", &Dataset::dim)
      .def_property_readonly("y_min", &Dataset::y_min)
      .def_property_readonly("y_max", &Dataset::y_max)
      .def_property_readonly("X", [](const Dataset& d) {
        Array out({static_cast<py::ssize_t>(d.size()), static_cast<py::ssize_t>(d.dim())});
        std::copy(d.inputs().begin(), d.inputs().end(), out.mutable_data());
        return out;
      })
      .def_property_readonly("y", [](const Dataset& d) { return to_array(d.outputs()); })
      .def("save_csv", [](const Dataset& d, const std::filesystem::path& p) { save_csv(d, p); })
      .def_static("load_csv", [](const std::filesystem::path& p) { return load_csv(p); });

  py::class_<RunReport>(m, "RunReport")
      .def_property_readonly("rmse_history", [](const RunReport& r) { return to_array(r.rmse_history); })
      .def_readonly("skipped_steps", &RunReport::skipped_steps)
      .def_readonly("failed", &RunReport::failed)
      .def_readonly("failure", &RunReport::failure)
      .def_readonly("stopped_early", &RunReport::stopped_early)
      .def_readonly("parameter_norm", &RunReport::parameter_norm)
      .def_readonly("rng", &RunReport::rng)
      .def("to_json", [](const RunReport& r) { return to_json(r); });

  py::class_<UrysohnModel>(m, "UrysohnModel")
      .def(py::init([](std::size_t inputs, const PwlBasis& b, std::optional<Array> u) {
             return u ? UrysohnModel(inputs, b, to_vector(*u)) : UrysohnModel(inputs, b);
           }),
           py::arg("m"), py::arg("basis"), py::arg("U") = py::none())
      .def_property_readonly("m", &UrysohnModel::m)
      .def_property_readonly("n", &UrysohnModel::n)
      .def_property_readonly("U", [](const UrysohnModel& u) {
        Array out({static_cast<py::ssize_t>(u.m()), static_cast<py::ssize_t>(u.n())});
        std::copy(u.params().begin(), u.params().end(), out.mutable_data());
        return out;
      })
      .def("eval", &predict<UrysohnModel>, py::arg("X"))
      .def("kaczmarz_step", [](UrysohnModel& u, const Array& x, double y, double mu) {
        u.kaczmarz_step(row(x), y, mu);
      }, py::arg("x"), py::arg("y"), py::arg("mu") = 1.0)
      .def("to_json", [](const UrysohnModel& u) { return to_json(u); });

  py::class_<KaModel>(m, "KaModel")
      .def_property_readonly("m", &KaModel::m)
      .def_property_readonly("addends", &KaModel::addends)
      .def_property_readonly("n", &KaModel::n)
      .def_property_readonly("s", &KaModel::s)
      .def_property_readonly("H", [](const KaModel& k) {
        Array out({static_cast<py::ssize_t>(k.addends()), static_cast<py::ssize_t>(k.m()),
                   static_cast<py::ssize_t>(k.n())});
        std::copy(k.h().begin(), k.h().end(), out.mutable_data());
        return out;
      })
      .def_property_readonly("G", [](const KaModel& k) {
        Array out({static_cast<py::ssize_t>(k.addends()), static_cast<py::ssize_t>(k.s())});
        std::copy(k.g().begin(), k.g().end(), out.mutable_data());
        return out;
      })
      .def("theta", [](const KaModel& k, const Array& x) { return to_array(k.theta(row(x))); })
      .def("eval", &predict<KaModel>, py::arg("X"))
      .def("nk_step", [](KaModel& k, const Array& x, double y, double mu) {
        return k.nk_step(row(x), y, mu) == StepOutcome::Applied;
      }, py::arg("x"), py::arg("y"), py::arg("mu") = 1.0)
      .def("to_json", [](const KaModel& k) { return to_json(k); });

  m.def("ka_init", &ka_init, py::arg("m"), py::arg("addends"), py::arg("n"), py::arg("s"), py::arg("x_min"),
        py::arg("x_max"), py::arg("y_min"), py::arg("y_max"), py::arg("rng"));

  py::class_<RidgeModel>(m, "RidgeModel")
      .def(py::init([](std::vector<double> c, std::vector<double> g, std::vector<double> centers) {
             return RidgeModel(std::move(c), std::move(g), GaussBasis(std::move(centers)));
           }),
           py::arg("c"), py::arg("G"), py::arg("centers"))
      .def_property_readonly("c", [](const RidgeModel& r) { return to_array(r.c()); })
      .def_property_readonly("G", [](const RidgeModel& r) { return to_array(r.g()); })
      .def("eval", &predict<RidgeModel>, py::arg("X"))
      .def("nk_step", [](RidgeModel& r, const Array& x, double y, double mu) { return r.nk_step(row(x), y, mu); },
           py::arg("x"), py::arg("y"), py::arg("mu") = 0.1)
      .def("to_json", [](const RidgeModel& r) { return to_json(r); });

  m.def("reference_ridge_model", &reference_ridge_model);
  m.def("perturbed_ridge_model", &perturbed_ridge_model, py::arg("exact"), py::arg("alpha"), py::arg("rng"));

  m.def("fit_urysohn",
        [](const Dataset& data, const PwlBasis& basis, double mu, std::size_t passes, double epsilon,
           std::size_t patience, bool shuffle, std::uint64_t seed) {
          UrysohnFit f = fit_urysohn(data, basis, make_config(mu, passes, epsilon, patience, shuffle, seed));
          return py::make_tuple(std::move(f.model), std::move(f.report));
        },
        py::arg("data"), py::arg("basis"), py::arg("mu") = 1.0, py::arg("passes") = 100, py::arg("epsilon") = 1e-6,
        py::arg("patience") = 20, py::arg("shuffle") = false, py::arg("seed") = 0);

  m.def("fit_ka",
        [](const Dataset& train, std::optional<Dataset> val, std::size_t addends, std::size_t n, std::size_t s,
           double x_min, double x_max, double mu, std::size_t passes, double epsilon, std::size_t patience,
           bool shuffle, std::uint64_t seed) {
          KaShape shape;
          shape.addends = addends;
          shape.n = n;
          shape.s = s;
          shape.x_min = x_min;
          shape.x_max = x_max;
          KaFit f = fit_ka(train, val ? *val : Dataset(train.dim()), shape,
                           make_config(mu, passes, epsilon, patience, shuffle, seed));
          return py::make_tuple(std::move(f.model), std::move(f.report));
        },
        py::arg("train"), py::arg("val") = py::none(), py::arg("addends") = 0, py::arg("n") = 5, py::arg("s") = 7,
        py::arg("x_min") = 0.0, py::arg("x_max") = 0.0, py::arg("mu") = 1.0, py::arg("passes") = 100,
        py::arg("epsilon") = 1e-6, py::arg("patience") = 20, py::arg("shuffle") = false, py::arg("seed") = 0);

  m.def("fit_ridge_gn",
        [](const Dataset& data, RidgeModel init, double delta, std::size_t max_iterations, bool strict) {
          GnOptions o;
          o.delta = delta;
          o.max_iterations = max_iterations;
          o.require_small_gradient = strict;
          GnResult r = fit_ridge_gn(data, std::move(init), o);
          py::dict info;
          info["converged"] = r.converged;
          info["failed"] = r.failed;
          info["failure"] = r.failure;
          info["iterations"] = r.iterations;
          return py::make_tuple(std::move(r.model), info);
        },
        py::arg("data"), py::arg("init"), py::arg("delta") = 1e-12, py::arg("max_iterations") = 100,
        py::arg("strict") = false);

  m.def("fit_ridge_nk",
        [](const Dataset& data, RidgeModel init, double mu, std::size_t steps) {
          RidgeNkResult r = fit_ridge_nk(data, std::move(init), mu, steps);
          py::dict info;
          info["skipped_steps"] = r.skipped_steps;
          info["failed"] = r.failed;
          return py::make_tuple(std::move(r.model), info);
        },
        py::arg("data"), py::arg("init"), py::arg("mu") = 0.1, py::arg("steps") = 10000);

  m.def("gen_ridge_data", &gen_ridge_data, py::arg("records"), py::arg("rng"));
  m.def("gen_formula2_data", &gen_formula2_data, py::arg("records"), py::arg("rng"));
  m.def("formula2", [](const Array& x) { return formula2(row(x)); }, py::arg("x"));
  m.def("rmse_normalized",
        [](const Array& y, const Array& yhat, double y_min, double y_max) {
          return rmse_normalized(row(y), row(yhat), y_min, y_max);
        },
        py::arg("y"), py::arg("yhat"), py::arg("y_min"), py::arg("y_max"));

  m.def("load_model", [](const std::filesystem::path& p) {
    return std::visit([](auto&& model) { return py::cast(model); }, load_model(p));
  });
  m.def("save_model", [](const py::object& model, const std::filesystem::path& p) {
    if (py::isinstance<UrysohnModel>(model)) return save_model(model.cast<UrysohnModel>(), p);
    if (py::isinstance<KaModel>(model)) return save_model(model.cast<KaModel>(), p);
    if (py::isinstance<RidgeModel>(model)) return save_model(model.cast<RidgeModel>(), p);
    throw py::type_error("expected a UrysohnModel, KaModel or RidgeModel");
  });

  m.def("run_ensemble",
        [](const std::string& method, std::vector<double> alphas, std::size_t runs, std::size_t ensembles,
           std::uint64_t seed, std::size_t jobs) {
          EnsembleSpec spec;
          if (method != "nk" && method != "gn") throw py::value_error("method must be 'nk' or 'gn'");
          spec.method = method == "nk" ? Method::NewtonKaczmarz : Method::GaussNewton;
          spec.alphas = std::move(alphas);
          spec.runs = runs;
          spec.ensembles = ensembles;
          spec.base_seed = seed;
          spec.jobs = jobs;
          EnsembleResult r;
          {
            py::gil_scoped_release release;
            r = run_ensemble(spec);
          }
          py::list out;
          for (const AlphaSummary& s : r.summary) {
            py::dict d;
            d["alpha"] = s.alpha;
            py::list below;
            for (const Stat& b : s.below) below.append(py::make_tuple(b.mean, b.stddev));
            d["below"] = below;
            d["converged"] = py::make_tuple(s.converged.mean, s.converged.stddev);
            d["converged_rmse"] = py::make_tuple(s.converged_rmse.mean, s.converged_rmse.stddev);
            out.append(d);
          }
          return out;
        },
        py::arg("method"), py::arg("alphas"), py::arg("runs") = 100, py::arg("ensembles") = 5,
        py::arg("seed") = 0, py::arg("jobs") = 1);
}
