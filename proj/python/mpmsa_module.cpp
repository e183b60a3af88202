#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "mpmsa/experiment.hpp"
#include "mpmsa/subharmonic.hpp"

namespace py = pybind11;
using namespace mpmsa;

PYBIND11_MODULE(mpmsa, m) {
  m.doc() = "fixed-energy multi-particle multi-scale localization laboratory";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<CapacityError>(m, "CapacityError");
  py::register_exception<DomainError>(m, "DomainError");
  py::register_exception<InternalCheckError>(m, "InternalCheckError");
  py::register_exception<ResonanceError>(m, "ResonanceError");

  py::enum_<LaplacianKind>(m, "LaplacianKind")
      .value("Dirichlet", LaplacianKind::Dirichlet)
      .value("Neumann", LaplacianKind::Neumann);

  py::class_<Graph, std::shared_ptr<Graph>>(m, "Graph")
      .def_static("lattice_segment", &Graph::lattice_segment, py::arg("dim"),
                  py::arg("half_width"))
      .def_static("from_adjacency", &Graph::from_adjacency, py::arg("adj"),
                  py::arg("declared_dim") = 1)
      .def_static("load", &Graph::load, py::arg("path"))
      .def("save", &Graph::save, py::arg("path"))
      .def("size", &Graph::size)
      .def("dim", &Graph::dim)
      .def("is_box", &Graph::is_box)
      .def("growth_constant", &Graph::growth_constant)
      .def("neighbors", &Graph::neighbors, py::arg("v"))
      .def("distance", &Graph::distance, py::arg("u"), py::arg("v"))
      .def("coord", &Graph::coord, py::arg("v"))
      .def("vertex_at", &Graph::vertex_at, py::arg("coord"))
      .def("ball", &Graph::ball, py::arg("center"), py::arg("radius"))
      .def("diameter_of", &Graph::diameter_of, py::arg("subset"));

  m.def("rho", &rho, py::arg("g"), py::arg("x"), py::arg("y"),
        "max-distance metric on particle configurations");
  m.def("rho_sym", &rho_sym, py::arg("g"), py::arg("x"), py::arg("y"),
        "symmetrized distance (min over particle permutations)");
  m.def("support_diameter", &support_diameter, py::arg("g"), py::arg("x"));

  py::class_<MpBall>(m, "MpBall")
      .def(py::init([](std::shared_ptr<Graph> world, ParticleConfig center, int radius) {
             return MpBall(std::move(world), std::move(center), radius);
           }),
           py::arg("world"), py::arg("center"), py::arg("radius"))
      .def("size", &MpBall::size)
      .def("particles", &MpBall::particles)
      .def("radius", &MpBall::radius)
      .def("center", &MpBall::center)
      .def("center_index", &MpBall::center_index)
      .def("config_at", &MpBall::config_at, py::arg("idx"))
      .def("index_of", &MpBall::index_of, py::arg("x"))
      .def("contains", &MpBall::contains, py::arg("x"))
      .def("boundary_edge_count", &MpBall::boundary_edge_count)
      .def("inner_boundary_indices", &MpBall::inner_boundary_indices);

  py::class_<Ensemble>(m, "Ensemble")
      .def_static("uniform", &Ensemble::uniform, py::arg("a"), py::arg("b"))
      .def_static("gaussian", &Ensemble::gaussian, py::arg("mu"), py::arg("sigma"))
      .def_static("bernoulli", &Ensemble::bernoulli, py::arg("p"))
      .def("cdf_sup_increment", &Ensemble::cdf_sup_increment, py::arg("s"))
      .def("describe", &Ensemble::describe);

  py::class_<PotentialSample, std::shared_ptr<PotentialSample>>(m, "PotentialSample")
      .def_readonly("values", &PotentialSample::values)
      .def_readonly("seed", &PotentialSample::seed)
      .def("__len__", &PotentialSample::size)
      .def("__getitem__", [](const PotentialSample& s, int v) { return s[v]; });

  m.def(
      "sample_potential",
      [](const Graph& g, const Ensemble& e, std::uint64_t seed) {
        return std::make_shared<PotentialSample>(sample_potential(g, e, seed));
      },
      py::arg("graph"), py::arg("ensemble"), py::arg("seed"));

  py::class_<Interaction>(m, "Interaction")
      .def_static("none", &Interaction::none)
      .def_static("contact", &Interaction::contact, py::arg("amplitude"), py::arg("range"))
      .def("at_distance", &Interaction::at_distance, py::arg("r"))
      .def("trivial", &Interaction::trivial);

  py::class_<MsaParams>(m, "MsaParams")
      .def(py::init<>())
      .def_readwrite("alpha", &MsaParams::alpha)
      .def_readwrite("beta", &MsaParams::beta)
      .def_readwrite("tau", &MsaParams::tau)
      .def_readwrite("varrho", &MsaParams::varrho)
      .def_readwrite("kappa", &MsaParams::kappa)
      .def_readwrite("theta", &MsaParams::theta)
      .def_readwrite("m", &MsaParams::m)
      .def_readwrite("n_hat", &MsaParams::n_hat)
      .def_readwrite("d", &MsaParams::d)
      .def_readwrite("c_d", &MsaParams::c_d)
      .def_readwrite("L0", &MsaParams::L0)
      .def_readwrite("g", &MsaParams::g)
      .def_readwrite("r0", &MsaParams::r0)
      .def("kappa_floor", &MsaParams::kappa_floor)
      .def("theta_ceiling", &MsaParams::theta_ceiling)
      .def("validate", &MsaParams::validate);

  py::class_<Interval>(m, "Interval")
      .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"))
      .def_readwrite("lo", &Interval::lo)
      .def_readwrite("hi", &Interval::hi)
      .def("length", &Interval::length)
      .def("contains", &Interval::contains, py::arg("x"));

  py::enum_<GreenMethod>(m, "GreenMethod")
      .value("Solve", GreenMethod::Solve)
      .value("Eigen", GreenMethod::Eigen);

  py::class_<BallOperator>(m, "BallOperator")
      .def(py::init([](std::shared_ptr<Graph> world, ParticleConfig center, int radius,
                       std::shared_ptr<PotentialSample> sample, double g, const Interaction& u,
                       LaplacianKind kind) {
             return BallOperator(MpBall(std::move(world), std::move(center), radius),
                                 std::move(sample), g, u, kind);
           }),
           py::arg("world"), py::arg("center"), py::arg("radius"), py::arg("sample"),
           py::arg("g"), py::arg("interaction") = Interaction::none(),
           py::arg("kind") = LaplacianKind::Dirichlet)
      .def("dim", &BallOperator::dim)
      .def("g", &BallOperator::g)
      .def("matrix", &BallOperator::matrix, py::return_value_policy::copy)
      .def(
          "spectrum", [](const BallOperator& op) { return op.spectrum(); },
          py::return_value_policy::copy)
      .def("spectral_distance", &BallOperator::spectral_distance, py::arg("E"))
      .def(
          "ball", [](const BallOperator& op) { return op.ball(); },
          py::return_value_policy::copy);

  m.def("green", &green, py::arg("op"), py::arg("x"), py::arg("y"), py::arg("E"),
        py::arg("method") = GreenMethod::Eigen);
  m.def("green_matrix", &green_matrix, py::arg("op"), py::arg("E"));
  m.def("ef_correlator", &ef_correlator, py::arg("op"), py::arg("interval"), py::arg("x"),
        py::arg("y"));
  m.def("propagator_element", &propagator_element, py::arg("op"), py::arg("interval"),
        py::arg("t"), py::arg("x"), py::arg("y"));

  py::class_<RationalGreen>(m, "RationalGreen")
      .def_readonly("poles", &RationalGreen::poles)
      .def_readonly("kappa", &RationalGreen::kappa)
      .def("eval", &RationalGreen::eval, py::arg("E"))
      .def("derivative", &RationalGreen::derivative, py::arg("E"))
      .def("kappa_abs_sum", &RationalGreen::kappa_abs_sum);
  m.def("rational_green", &rational_green, py::arg("op"), py::arg("x"), py::arg("y"));

  m.def("gamma_factor", &gamma_factor, py::arg("m"), py::arg("L"), py::arg("tau"));
  m.def("gamma_graded", &gamma_graded, py::arg("m"), py::arg("L"), py::arg("tau"), py::arg("n"),
        py::arg("n_hat"));
  m.def("pair_threshold", &pair_threshold, py::arg("L"), py::arg("varrho"), py::arg("alpha"));
  m.def("scale_sequence", &scale_sequence, py::arg("L0"), py::arg("alpha"), py::arg("k_max"));
  m.def("target_exponent", &target_exponent, py::arg("params"), py::arg("n"), py::arg("k"));
  m.def(
      "is_e_resonant",
      [](double dist, long long L, double beta) { return is_e_resonant(dist, L, beta); },
      py::arg("spectral_dist"), py::arg("L"), py::arg("beta"));

  py::class_<NsReport>(m, "NsReport")
      .def_readonly("ns", &NsReport::ns)
      .def_readonly("resonant", &NsReport::resonant)
      .def_readonly("vacuous", &NsReport::vacuous)
      .def_readonly("qualifying_pairs", &NsReport::qualifying_pairs)
      .def_readonly("worst_margin", &NsReport::worst_margin)
      .def_readonly("spectral_dist", &NsReport::spectral_dist);
  m.def("is_em_nonsingular", &is_em_nonsingular, py::arg("op"), py::arg("E"), py::arg("params"));

  py::class_<EnergyProfile>(m, "EnergyProfile")
      .def_readonly("ball_size", &EnergyProfile::ball_size)
      .def("eval", &EnergyProfile::eval, py::arg("E"));
  m.def("energy_profile", &energy_profile, py::arg("op"));

  py::class_<IntervalCover>(m, "IntervalCover")
      .def_property_readonly("intervals",
                             [](const IntervalCover& c) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& iv : c.intervals) out.emplace_back(iv.lo, iv.hi);
                               return out;
                             })
      .def_readonly("total_length", &IntervalCover::total_length)
      .def_readonly("count", &IntervalCover::count)
      .def_readonly("full", &IntervalCover::full)
      .def("contains", &IntervalCover::contains, py::arg("E"));
  m.def("singular_energy_set", &singular_energy_set, py::arg("profile"), py::arg("a"),
        py::arg("interval"));

  py::class_<SubharmonicCertificate>(m, "SubharmonicCertificate")
      .def_readonly("verified", &SubharmonicCertificate::verified)
      .def_readonly("checked", &SubharmonicCertificate::checked)
      .def_readonly("q", &SubharmonicCertificate::q)
      .def_readonly("L", &SubharmonicCertificate::L)
      .def_readonly("ell", &SubharmonicCertificate::ell);
  m.def(
      "check_lq_subharmonic",
      [](const std::function<double(int)>& f, const Graph& g, int center, int L, int ell,
         double q) { return check_lq_subharmonic(f, g, center, L, ell, q); },
      py::arg("f"), py::arg("graph"), py::arg("center"), py::arg("L"), py::arg("ell"),
      py::arg("q"));
  m.def("radial_bound", &radial_bound, py::arg("cert"), py::arg("M"));
  m.def("two_point_bound", &two_point_bound, py::arg("center_distance"), py::arg("r1"),
        py::arg("r2"), py::arg("ell"), py::arg("q"), py::arg("M"));

  // config plumbing: parse/serialize round trip and full experiment runs
  py::class_<ConfigMap>(m, "ConfigMap")
      .def(py::init<>())
      .def("has", &ConfigMap::has)
      .def("get", &ConfigMap::get, py::return_value_policy::copy)
      .def("set", &ConfigMap::set)
      .def("entries", &ConfigMap::entries)
      .def("__eq__", [](const ConfigMap& a, const ConfigMap& b) { return a == b; });
  m.def("parse_config_text", &parse_config_text, py::arg("text"));
  m.def("serialize_config", &serialize_config, py::arg("config"));
  m.def(
      "run_config_text",
      [](const std::string& text) {
        return run_experiment(experiment_from_map(parse_config_text(text))).to_json();
      },
      py::arg("text"), "parse a config, run the experiment, return the manifest JSON");
}
