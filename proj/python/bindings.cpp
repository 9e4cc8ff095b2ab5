#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "teamprod/bootstrap.hpp"
#include "teamprod/config.hpp"
#include "teamprod/errors.hpp"
#include "teamprod/gmm.hpp"
#include "teamprod/io.hpp"
#include "teamprod/jtest.hpp"
#include "teamprod/moments.hpp"
#include "teamprod/montecarlo.hpp"
#include "teamprod/naive.hpp"
#include "teamprod/report.hpp"
#include "teamprod/simulation.hpp"
#include "teamprod/stats.hpp"
#include "teamprod/triplets.hpp"

namespace py = pybind11;
using namespace teamprod;

namespace {

// Results cross the boundary as JSON text; the Python wrapper decodes them.
nlohmann::json parse(const std::string& text) {
  return text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text);
}

py::array_t<double> triplet_array(const std::vector<Triplet>& t) {
  py::array_t<double> out({static_cast<py::ssize_t>(t.size()), py::ssize_t{3}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t r = 0; r < t.size(); ++r) {
    m(r, 0) = t[r].y_i;
    m(r, 1) = t[r].y_j;
    m(r, 2) = t[r].y_ij;
  }
  return out;
}

std::vector<Triplet> triplets_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw InvalidInput("triplets: expected an n x 3 array (y_i, y_j, y_ij)");
  auto m = a.unchecked<2>();
  std::vector<Triplet> t(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t r = 0; r < t.size(); ++r) {
    t[r].y_i = m(r, 0);
    t[r].y_j = m(r, 1);
    t[r].y_ij = m(r, 2);
  }
  return t;
}

GmmOptions gmm_options(const std::vector<int>& moments, const std::string& weighting) {
  GmmOptions g;
  g.moment_orders = moments;
  g.weighting = weighting_from_string(weighting);
  return g;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Team production on partially observed networks";
  m.attr("__version__") = TEAMPROD_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::enum_<NetworkView>(m, "NetworkView")
      .value("latent", NetworkView::latent)
      .value("observed", NetworkView::observed);

  py::class_<TeamNetwork>(m, "TeamNetwork")
      .def_property_readonly("num_nodes", &TeamNetwork::num_nodes)
      .def_property_readonly("num_projects", &TeamNetwork::num_projects)
      .def_property_readonly("node_ids", &TeamNetwork::node_ids)
      .def("__repr__", [](const TeamNetwork& n) {
        return "<TeamNetwork nodes=" + std::to_string(n.num_nodes()) +
               " projects=" + std::to_string(n.num_projects()) + ">";
      });

  py::class_<SimulatedNetworks>(m, "SimulatedNetworks")
      .def_readonly("latent", &SimulatedNetworks::latent)
      .def_readonly("observed", &SimulatedNetworks::observed)
      .def_readonly("node_ids", &SimulatedNetworks::node_ids)
      .def_readonly("true_alphas", &SimulatedNetworks::true_alphas);

  m.def("_simulate", [](const std::string& config) { return simulate(dgp_from_json(parse(config))); },
        py::arg("config_json"));
  m.def("_dgp_defaults", [] { return to_json(DgpConfig{}).dump(); });

  m.def("read_network", [](const std::string& path, NetworkView view) {
    return TeamNetwork::build(read_projects_csv(path, view), view);
  }, py::arg("path"), py::arg("view") = NetworkView::observed);
  m.def("write_network", [](const std::string& path, const TeamNetwork& net) {
    write_projects_csv(path, net);
  }, py::arg("path"), py::arg("network"));

  m.def("triplets", [](const TeamNetwork& net, bool unique_pairs) {
    auto t = build_triplets(net);
    if (unique_pairs) t = select_unique_pairs(t);
    return triplet_array(t);
  }, py::arg("network"), py::arg("unique_pairs") = false,
     "Matched (y_i, y_j, y_ij) outcomes as an n x 3 array.");

  m.def("naive_lambda", py::overload_cast<const TeamNetwork&>(&naive_lambda), py::arg("network"));
  m.def("collaboration_premium", &collaboration_premium, py::arg("lambda_"));

  m.def("_gmm", [](py::array_t<double, py::array::c_style | py::array::forcecast> trip,
                   std::vector<int> moments, std::string weighting, std::size_t bootstrap,
                   double level, std::uint64_t seed, unsigned threads) {
    auto t = triplets_from(trip);
    py::gil_scoped_release release;
    auto opts = gmm_options(moments, weighting);
    auto sys = MomentSystem::baseline(t, opts.moment_orders);
    auto fit = gmm_fit(sys, opts);
    std::optional<BootstrapResult> boot;
    if (bootstrap > 0) {
      BootstrapOptions b;
      b.reps = bootstrap;
      b.level = level;
      b.seed = seed;
      b.threads = threads;
      boot = bootstrap_gmm(sys, fit, opts, b);
    }
    return gmm_report("gmm", fit, boot).dump();
  });

  m.def("_jtest", [](const TeamNetwork& net, std::vector<std::string> stats) {
    auto t = select_unique_pairs(build_triplets(net));
    py::gil_scoped_release release;
    return jtest_report(jtest(net, t, stats)).dump();
  });

  m.def("_montecarlo", [](const std::string& preset, const std::string& overrides,
                          std::uint64_t seed, unsigned threads) {
    McCell cell = preset.empty() ? McCell{} : preset_cell(preset);
    auto j = parse(overrides);
    if (!j.empty()) cell = mc_cell_from_json(j, cell);
    py::gil_scoped_release release;
    auto s = run_cell(cell, seed, threads);
    return montecarlo_report(s, to_json(cell)).dump();
  });
  m.def("preset_names", &preset_names);

  m.def("moment_mk", &moment_mk, py::arg("lambda_"), py::arg("sigma"), py::arg("y_i"),
        py::arg("y_j"), py::arg("y_ij"), py::arg("k"));
  m.def("trunc_normal_moment", &trunc_normal_moment, py::arg("alpha"), py::arg("sigma"), py::arg("k"));
  m.def("chi2_upper_tail", &chi2_upper_tail, py::arg("x"), py::arg("dof"));
}
