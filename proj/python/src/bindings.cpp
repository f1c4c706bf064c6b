// Copyright 2026 The pulsegrad Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <tuple>
#include <vector>

#include "pulsegrad/errors.hpp"
#include "pulsegrad/experiments.hpp"
#include "pulsegrad/gradients.hpp"
#include "pulsegrad/io.hpp"

namespace py = pybind11;
using namespace pulsegrad;

namespace {

PauliSum make_sum(std::size_t n, const std::vector<std::pair<double, std::string>> &terms) {
    PauliSum sum(n);
    for (const auto &[c, w] : terms) sum.add(c, PauliWord(w));
    return sum;
}

TransmonSpec make_spec(const std::vector<double> &frequencies,
                       const std::vector<std::tuple<std::size_t, std::size_t, double>> &couplings) {
    TransmonSpec spec;
    spec.frequencies = frequencies;
    for (const auto &[q, p, j] : couplings) spec.couplings.push_back(Coupling{q, p, j});
    return spec;
}

SpsConfig make_sps(std::size_t n_samples, std::uint64_t seed, bool dense) {
    return SpsConfig{n_samples, seed, dense ? SplitMode::DenseGrid : SplitMode::MonteCarlo};
}

GradMethod method_from(const std::string &name) {
    if (name == "odegen") return GradMethod::Odegen;
    if (name == "sps") return GradMethod::Sps;
    if (name == "exact") return GradMethod::Exact;
    throw Error(ErrorKind::InvalidArgument, "method must be odegen, sps or exact");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pulse-level gradients: ODEgen, stochastic parameter shift and exact oracles";

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error &e) {
            py::set_error(error, e.what());
        }
    });

    py::class_<PauliSum>(m, "PauliSum")
        .def(py::init(&make_sum), py::arg("n_qubits"), py::arg("terms"))
        .def_property_readonly("n_qubits", &PauliSum::n_qubits)
        .def("terms",
             [](const PauliSum &s) {
                 std::vector<std::pair<double, std::string>> out;
                 for (const auto &[w, c] : s.terms()) out.emplace_back(c, w.label());
                 return out;
             })
        .def("coefficient",
             [](const PauliSum &s, const std::string &w) { return s.coefficient(PauliWord(w)); })
        .def("to_matrix", &PauliSum::to_matrix)
        .def("__len__", &PauliSum::size)
        .def("__eq__", [](const PauliSum &a, const PauliSum &b) { return a == b; })
        .def("__repr__", [](const PauliSum &s) { return "PauliSum(" + serialize_hamiltonian(s) + ")"; });

    m.def("parse_hamiltonian", [](const std::string &text) { return parse_hamiltonian(text); });
    m.def("read_hamiltonian_file", &read_hamiltonian_file);
    m.def("serialize_hamiltonian", &serialize_hamiltonian);
    m.def("toy_hamiltonian", &toy_hamiltonian);
    m.def("ground_energy", &ground_energy);
    m.def("pauli_decompose",
          [](const DenseOperator &op, std::size_t n) {
              std::vector<std::pair<std::string, double>> out;
              for (const auto &[w, c] : pauli_decompose(op, n).coeffs) out.emplace_back(w.label(), c);
              return out;
          },
          py::arg("op"), py::arg("n_qubits"));
    m.def("dla_closure", [](const std::vector<std::string> &words) {
        std::vector<PauliWord> gens;
        for (const auto &w : words) gens.emplace_back(w);
        std::vector<std::string> basis;
        for (const auto &w : dla_closure(gens).basis) basis.push_back(w.label());
        return basis;
    });

    py::class_<Circuit>(m, "Circuit")
        .def_property_readonly("n_qubits", &Circuit::n_qubits)
        .def_property_readonly("n_params", &Circuit::n_params)
        .def("unitary",
             [](const Circuit &c, const std::vector<double> &theta) { return circuit_unitary(c, theta); })
        .def("state", [](const Circuit &c, const std::vector<double> &theta) { return run(c, theta); })
        .def("expectation",
             [](const Circuit &c, const std::vector<double> &theta, const PauliSum &obs,
                std::size_t shots, std::uint64_t seed) {
                 return expectation(c, theta, obs, DeviceConfig{shots, seed});
             },
             py::arg("theta"), py::arg("observable"), py::arg("shots") = 0, py::arg("seed") = 0);

    m.def("legendre_pulse_circuit",
          [](const std::vector<double> &frequencies,
             const std::vector<std::tuple<std::size_t, std::size_t, double>> &couplings,
             const std::vector<double> &amplitudes, double duration, std::size_t degree) {
              LegendrePulseOptions opts;
              opts.max_amplitudes = amplitudes;
              opts.duration = duration;
              opts.degree = degree;
              return legendre_pulse_circuit(make_spec(frequencies, couplings), opts);
          },
          py::arg("frequencies"), py::arg("couplings"), py::arg("amplitudes"),
          py::arg("duration") = 20.0, py::arg("degree") = 4);
    m.def("constant_pulse_circuit", &constant_pulse_circuit, py::arg("qubit_frequency"),
          py::arg("duration"), py::arg("phase") = 0.0);
    m.def("echoed_cr_ansatz",
          [](const std::vector<double> &frequencies,
             const std::vector<std::tuple<std::size_t, std::size_t, double>> &couplings,
             std::size_t control, std::size_t target, std::size_t bins) {
              EchoedCrOptions opts;
              opts.bins = bins;
              return echoed_cr_ansatz(make_spec(frequencies, couplings), control, target, opts);
          },
          py::arg("frequencies"), py::arg("couplings"), py::arg("control") = 0,
          py::arg("target") = 1, py::arg("bins") = 10);
    m.def("build_program", [](const std::string &config_text) {
        auto cfg = Config::parse(config_text);
        auto prog = build_program(cfg);
        return py::make_tuple(prog.circuit, cfg.dump());
    });

    m.def("odegen_gradient",
          [](const Circuit &c, const std::vector<double> &theta, const PauliSum &obs,
             double atol_coeff) {
              Device dev;
              auto r = odegen_gradient(c, theta, obs, dev, OdegenOptions{atol_coeff, 0.0});
              return py::make_tuple(r.gradient, r.resources.expectation_values);
          },
          py::arg("circuit"), py::arg("theta"), py::arg("observable"), py::arg("atol_coeff") = 0.0);
    m.def("sps_gradient",
          [](const Circuit &c, const std::vector<double> &theta, const PauliSum &obs,
             std::size_t n_samples, std::uint64_t seed, bool dense) {
              Device dev;
              auto r = sps_gradient(c, theta, obs, dev, make_sps(n_samples, seed, dense));
              return py::make_tuple(r.gradient, r.resources.expectation_values);
          },
          py::arg("circuit"), py::arg("theta"), py::arg("observable"), py::arg("n_samples") = 8,
          py::arg("seed") = 0, py::arg("dense") = false);
    m.def("exact_gradient",
          [](const Circuit &c, const std::vector<double> &theta, const PauliSum &obs) {
              return exact_gradient(c, theta, obs);
          });
    m.def("finite_difference_gradient",
          [](const Circuit &c, const std::vector<double> &theta, const PauliSum &obs, double step) {
              return finite_difference_gradient(c, theta, obs, OdeConfig{}, step);
          },
          py::arg("circuit"), py::arg("theta"), py::arg("observable"), py::arg("step") = 1e-5);
    m.def("resources_sps", &resources_sps, py::arg("n_samples"), py::arg("n_generators"),
          py::arg("eigenvalue_gaps") = 1);
    m.def("gaussian_init", &gaussian_init, py::arg("n"), py::arg("seed"), py::arg("stddev") = 1.0);

    m.def("vqe",
          [](const Circuit &c, const PauliSum &obs, const std::string &method, std::size_t epochs,
             double learning_rate, std::uint64_t seed, std::size_t n_samples,
             std::uint64_t sps_seed) {
              VqeOptions opts;
              opts.method = method_from(method);
              opts.optimizer.epochs = epochs;
              opts.optimizer.learning_rate = learning_rate;
              opts.optimizer.init_seed = seed;
              opts.sps = SpsConfig{n_samples, sps_seed};
              Device dev;
              const auto t = vqe_run(c, obs, opts, dev);
              py::dict out;
              out["energy"] = t.energy;
              out["grad_norm"] = t.grad_norm;
              out["cumulative_expvals"] = t.cumulative_expvals;
              out["initial_theta"] = t.initial_theta;
              out["final_theta"] = t.final_theta;
              return out;
          },
          py::arg("circuit"), py::arg("observable"), py::arg("method") = "odegen",
          py::arg("epochs") = 100, py::arg("learning_rate") = 0.02, py::arg("seed") = 0,
          py::arg("n_samples") = 8, py::arg("sps_seed") = 0);
}
