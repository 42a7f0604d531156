#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "oamqkd/cli.hpp"
#include "oamqkd/decoy_keyrate.hpp"
#include "oamqkd/errors.hpp"
#include "oamqkd/link_simulator.hpp"
#include "oamqkd/optics.hpp"
#include "oamqkd/secure_distance.hpp"
#include "oamqkd/turbulence.hpp"

namespace py = pybind11;
using namespace oamqkd;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> argv_store{"oamqkd"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    argv.push_back(nullptr);
    return cli::run(static_cast<int>(argv_store.size()), argv.data());
}

py::dict simulate(const SimulationConfig& cfg, std::uint64_t seed) {
    SessionTally session;
    {
        py::gil_scoped_release release;
        session = simulate_session(cfg, seed);
    }
    py::dict out;
    out["observables"] = estimate_observables(session);
    out["blocks"] = session.blocks.size();
    out["true_q1"] = session.true_single_photon_gain();
    out["true_e1"] = session.true_single_photon_error();
    py::list classes;
    for (const auto& t : session.pooled()) {
        py::dict c;
        c["sent"] = t.sent;
        c["detected"] = t.detected;
        c["sifted"] = t.sifted;
        c["errors"] = t.errors;
        classes.append(c);
    }
    out["classes"] = classes;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hybrid polarization-OAM QKD link simulation and analysis";

    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_RuntimeError);
    py::register_exception<ThresholdUndefinedError>(m, "ThresholdUndefinedError", PyExc_RuntimeError);
    py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);

    py::enum_<Encoding>(m, "Encoding").value("POLARIZATION", Encoding::Polarization).value("HYBRID", Encoding::Hybrid);
    py::enum_<BasisLabel>(m, "Basis").value("Z", BasisLabel::Z).value("X", BasisLabel::X);

    m.def("polarization_qber_theory", &polarization_qber_theory, py::arg("theta"));
    m.def("flip_probability", &flip_probability, py::arg("encoding"), py::arg("tx_basis"), py::arg("bit"),
          py::arg("rx_basis"), py::arg("theta"));
    m.def(
        "qplate_roundtrip",
        [](std::complex<double> r, std::complex<double> l) {
            const auto p = qplate_inverse(qplate_map(PolarizationState{r, l}));
            return std::make_pair(p.amp_r, p.amp_l);
        },
        py::arg("amp_r"), py::arg("amp_l"));

    py::class_<DecoyObservables>(m, "DecoyObservables")
        .def(py::init([](double mu, double nu, double q_mu, double q_nu, double e_mu, double e_nu, double y0) {
                 return DecoyObservables{mu, nu, q_mu, q_nu, e_mu, e_nu, y0};
             }),
             py::kw_only(), py::arg("mu"), py::arg("nu"), py::arg("q_mu"), py::arg("q_nu"), py::arg("e_mu"),
             py::arg("e_nu"), py::arg("y0"))
        .def_readwrite("mu", &DecoyObservables::mu)
        .def_readwrite("nu", &DecoyObservables::nu)
        .def_readwrite("q_mu", &DecoyObservables::q_mu)
        .def_readwrite("q_nu", &DecoyObservables::q_nu)
        .def_readwrite("e_mu", &DecoyObservables::e_mu)
        .def_readwrite("e_nu", &DecoyObservables::e_nu)
        .def_readwrite("y0", &DecoyObservables::y0);

    py::class_<ECModel>(m, "ECModel")
        .def(py::init([](double f, double e0) { return ECModel{f, e0}; }), py::arg("f") = 1.05, py::arg("e0") = 0.5)
        .def_readwrite("f", &ECModel::f)
        .def_readwrite("e0", &ECModel::e0);

    py::class_<KeyRateBreakdown>(m, "KeyRateBreakdown")
        .def_readonly("q1_lower", &KeyRateBreakdown::q1_lower)
        .def_readonly("e1_upper", &KeyRateBreakdown::e1_upper)
        .def_readonly("q0", &KeyRateBreakdown::q0)
        .def_readonly("leak_ec", &KeyRateBreakdown::leak_ec)
        .def_readonly("rate", &KeyRateBreakdown::rate)
        .def_readonly("secure", &KeyRateBreakdown::secure)
        .def_readonly("q1_clamped", &KeyRateBreakdown::q1_clamped)
        .def_readonly("e1_clamped", &KeyRateBreakdown::e1_clamped)
        .def_readonly("e1_undefined", &KeyRateBreakdown::e1_undefined);

    m.def("binary_entropy", &binary_entropy, py::arg("x"));
    m.def("secret_key_rate", &secret_key_rate, py::arg("obs"), py::arg("ec") = ECModel{});
    m.def("single_photon_rate", &single_photon_rate, py::arg("e_mu"), py::arg("ec") = ECModel{});
    m.def("qber_threshold", &qber_threshold, py::arg("f"));

    py::class_<LinkBudgetParams>(m, "LinkBudgetParams")
        .def(py::init<>())
        .def_readwrite("mu", &LinkBudgetParams::mu)
        .def_readwrite("nu", &LinkBudgetParams::nu)
        .def_readwrite("e_ch", &LinkBudgetParams::e_ch)
        .def_readwrite("y0", &LinkBudgetParams::y0)
        .def_readwrite("f", &LinkBudgetParams::f)
        .def_readwrite("e0", &LinkBudgetParams::e0)
        .def_readwrite("dark_rate_hz", &LinkBudgetParams::dark_rate_hz)
        .def_readwrite("gate_s", &LinkBudgetParams::gate_s);

    py::class_<RatePoint>(m, "RatePoint")
        .def_readonly("q_mu", &RatePoint::q_mu)
        .def_readonly("e_mu_star", &RatePoint::e_mu_star)
        .def_readonly("e_nu_star", &RatePoint::e_nu_star)
        .def_readonly("dark_dominated", &RatePoint::dark_dominated)
        .def_readonly("keyrate", &RatePoint::keyrate);

    m.def("dark_yield", &dark_yield, py::arg("dark_rate_hz"), py::arg("gate_s"));
    m.def(
        "rate_vs_gain",
        [](const std::vector<double>& grid, const LinkBudgetParams& p, double extra_loss) {
            return rate_vs_gain(grid, p, extra_loss);
        },
        py::arg("grid"), py::arg("params") = LinkBudgetParams{}, py::arg("extra_loss") = 1.0);
    m.def("gain_threshold", &gain_threshold, py::arg("params") = LinkBudgetParams{});
    m.def("loss_margin_db", &loss_margin_db, py::arg("measured_gain"), py::arg("g_star"));

    py::class_<LinkGeometry>(m, "LinkGeometry")
        .def(py::init([](double length_m, double wavelength_m) { return LinkGeometry{length_m, wavelength_m}; }),
             py::arg("length_m") = 210.0, py::arg("wavelength_m") = 850e-9)
        .def_readwrite("length_m", &LinkGeometry::length_m)
        .def_readwrite("wavelength_m", &LinkGeometry::wavelength_m);

    py::class_<TurbulenceEstimate>(m, "TurbulenceEstimate")
        .def_readonly("sigma_m", &TurbulenceEstimate::sigma_m)
        .def_readonly("r0", &TurbulenceEstimate::r0)
        .def_readonly("cn2", &TurbulenceEstimate::cn2)
        .def_readonly("weak", &TurbulenceEstimate::weak);

    m.def("fried_parameter", &fried_parameter, py::arg("sigma_m"), py::arg("geometry") = LinkGeometry{});
    m.def("cn2_from_fried", &cn2_from_fried, py::arg("r0"), py::arg("geometry") = LinkGeometry{});
    m.def("estimate_turbulence", &estimate_turbulence, py::arg("sigma_m"), py::arg("geometry") = LinkGeometry{},
          py::arg("beam_radius_m") = 0.015);
    m.def(
        "wander_sigma",
        [](const std::vector<std::pair<double, double>>& xy_mm) {
            std::vector<CentroidSample> s;
            for (auto [x, y] : xy_mm) s.push_back({x, y});
            return wander_sigma(s);
        },
        py::arg("centroids_mm"));

    py::class_<SourceParams>(m, "SourceParams")
        .def(py::init<>())
        .def_readwrite("mu", &SourceParams::mu)
        .def_readwrite("nu", &SourceParams::nu)
        .def_readwrite("p_mu", &SourceParams::p_mu)
        .def_readwrite("p_nu", &SourceParams::p_nu)
        .def_readwrite("p_vac", &SourceParams::p_vac);

    py::class_<ChannelParams>(m, "ChannelParams")
        .def(py::init<>())
        .def_readwrite("eta_ch", &ChannelParams::eta_ch)
        .def_readwrite("eta_c", &ChannelParams::eta_c)
        .def_readwrite("eta_d", &ChannelParams::eta_d)
        .def_readwrite("e_ch", &ChannelParams::e_ch)
        .def_readwrite("y0", &ChannelParams::y0)
        .def_readwrite("theta", &ChannelParams::theta)
        .def_readwrite("encoding", &ChannelParams::encoding)
        .def_readwrite("block_scintillation_sigma", &ChannelParams::block_scintillation_sigma);

    py::class_<SimulationConfig>(m, "SimulationConfig")
        .def(py::init<>())
        .def_readwrite("source", &SimulationConfig::source)
        .def_readwrite("channel", &SimulationConfig::channel)
        .def_readwrite("pulses", &SimulationConfig::pulses)
        .def_readwrite("block_size", &SimulationConfig::block_size)
        .def_readwrite("workers", &SimulationConfig::workers);

    m.def("simulate", &simulate, py::arg("config"), py::arg("seed"));
    m.def("run_cli", &run_cli, py::arg("args"), "Runs the command-line tool in-process and returns its exit code.");
}
