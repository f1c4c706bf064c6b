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

#include "pulsegrad/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulsegrad/errors.hpp"

namespace pulsegrad {

namespace {

constexpr std::size_t kMaxCacheEntries = 4096;

void apply_word(const PauliWord &word, StateVector &psi) {
    StateVector out(psi.size());
    apply_pauli(word, std::span<const Complex>(psi.data(), static_cast<std::size_t>(psi.size())),
                std::span<Complex>(out.data(), static_cast<std::size_t>(out.size())));
    psi.swap(out);
}

void check_register(std::size_t n_qubits, std::size_t gate_qubits) {
    if (gate_qubits != n_qubits) {
        throw Error(ErrorKind::DimMismatch, "gate acts on " + std::to_string(gate_qubits) +
                                                " qubits in a " + std::to_string(n_qubits) +
                                                "-qubit circuit");
    }
}

DenseOperator direct_pulse_unitary(const PulseGate &gate, std::span<const double> theta,
                                   const OdeConfig &ode) {
    return evolve(*gate.hamiltonian, theta, gate.t0, gate.t1, ode).unitary;
}

} // namespace

DigitalRotation rotation(std::size_t n_qubits,
                         std::initializer_list<std::pair<std::size_t, char>> ops, double angle) {
    return DigitalRotation{PauliWord::from_ops(n_qubits, ops), angle, std::nullopt};
}

Circuit::Circuit(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits_ == 0 || n_qubits_ > kMaxDenseQubits) {
        throw Error(ErrorKind::TooLarge, "circuits support 1 to 6 qubits");
    }
}

Circuit &Circuit::add(Gate gate) {
    std::visit(
        [&](const auto &g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, DigitalRotation>) {
                check_register(n_qubits_, g.word.n_qubits());
                if (g.slot) n_params_ = std::max(n_params_, *g.slot + 1);
            } else if constexpr (std::is_same_v<T, PauliGate>) {
                check_register(n_qubits_, g.word.n_qubits());
            } else if constexpr (std::is_same_v<T, PulseGate>) {
                if (!g.hamiltonian) throw Error(ErrorKind::InvalidArgument, "pulse gate without Hamiltonian");
                check_register(n_qubits_, g.hamiltonian->n_qubits());
                if (!(g.t1 > g.t0)) throw Error(ErrorKind::InvalidArgument, "pulse gate needs t1 > t0");
                n_params_ = std::max(n_params_, g.hamiltonian->required_params());
            } else {
                const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits_);
                if (g.matrix.rows() != dim || g.matrix.cols() != dim) {
                    throw Error(ErrorKind::DimMismatch, "fixed unitary has the wrong shape");
                }
            }
        },
        gate);
    gates_.push_back(std::move(gate));
    return *this;
}

std::vector<std::size_t> Circuit::pulse_gate_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < gates_.size(); ++i) {
        if (std::holds_alternative<PulseGate>(gates_[i])) out.push_back(i);
    }
    return out;
}

const PulseGate &Circuit::pulse_gate(std::size_t gate_index) const {
    if (gate_index >= gates_.size() || !std::holds_alternative<PulseGate>(gates_[gate_index])) {
        throw Error(ErrorKind::BadIndex, "gate " + std::to_string(gate_index) + " is not a pulse gate");
    }
    return std::get<PulseGate>(gates_[gate_index]);
}

std::vector<std::size_t> Circuit::rotation_slots() const {
    std::vector<std::size_t> out;
    for (const auto &gate : gates_) {
        if (const auto *r = std::get_if<DigitalRotation>(&gate); r != nullptr && r->slot) {
            out.push_back(*r->slot);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Circuit split_pulse_gate(const Circuit &circuit, std::size_t gate_index, double tau,
                         Gate inserted) {
    const PulseGate &target = circuit.pulse_gate(gate_index);
    const double tol = 1e-12 * std::max(1.0, target.t1 - target.t0);
    if (!(tau > target.t0 + tol && tau < target.t1 - tol)) {
        throw Error(ErrorKind::TauOutOfRange, "split time " + std::to_string(tau) +
                                                  " not strictly inside the pulse window");
    }
    Circuit out(circuit.n_qubits());
    out.reserve_params(circuit.n_params());
    for (std::size_t i = 0; i < circuit.gates().size(); ++i) {
        if (i != gate_index) {
            out.add(circuit.gates()[i]);
            continue;
        }
        out.add(PulseGate{target.hamiltonian, target.t0, tau});
        out.add(std::move(inserted));
        out.add(PulseGate{target.hamiltonian, tau, target.t1});
    }
    return out;
}

Circuit insert_before_pulse(const Circuit &circuit, std::size_t gate_index, Gate gate) {
    (void)circuit.pulse_gate(gate_index);
    Circuit out(circuit.n_qubits());
    out.reserve_params(circuit.n_params());
    for (std::size_t i = 0; i < circuit.gates().size(); ++i) {
        if (i == gate_index) out.add(gate);
        out.add(circuit.gates()[i]);
    }
    return out;
}

StateVector zero_state(std::size_t n_qubits) {
    StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n_qubits));
    psi(0) = 1.0;
    return psi;
}

void apply_gate(const Gate &gate, std::span<const double> theta, StateVector &psi,
                const PulseUnitaryFn &pulse_unitary) {
    std::visit(
        [&](const auto &g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, DigitalRotation>) {
                double angle = g.angle;
                if (g.slot) {
                    if (*g.slot >= theta.size()) {
                        throw Error(ErrorKind::DimMismatch, "rotation slot outside parameter vector");
                    }
                    angle += theta[*g.slot];
                }
                StateVector flipped = psi;
                apply_word(g.word, flipped);
                psi = std::cos(0.5 * angle) * psi - Complex{0.0, std::sin(0.5 * angle)} * flipped;
            } else if constexpr (std::is_same_v<T, PauliGate>) {
                apply_word(g.word, psi);
            } else if constexpr (std::is_same_v<T, PulseGate>) {
                psi = pulse_unitary(g, theta) * psi;
            } else {
                psi = g.matrix * psi;
            }
        },
        gate);
}

StateVector run(const Circuit &circuit, std::span<const double> theta, const OdeConfig &ode) {
    if (theta.size() < circuit.n_params()) {
        throw Error(ErrorKind::DimMismatch, "parameter vector shorter than the circuit needs");
    }
    const PulseUnitaryFn direct = [&](const PulseGate &g, std::span<const double> th) {
        return direct_pulse_unitary(g, th, ode);
    };
    StateVector psi = zero_state(circuit.n_qubits());
    for (const auto &gate : circuit.gates()) apply_gate(gate, theta, psi, direct);
    return psi;
}

DenseOperator circuit_unitary(const Circuit &circuit, std::span<const double> theta,
                              const OdeConfig &ode) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << circuit.n_qubits());
    const PulseUnitaryFn direct = [&](const PulseGate &g, std::span<const double> th) {
        return direct_pulse_unitary(g, th, ode);
    };
    DenseOperator u(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        StateVector psi = StateVector::Zero(dim);
        psi(col) = 1.0;
        for (const auto &gate : circuit.gates()) apply_gate(gate, theta, psi, direct);
        u.col(col) = psi;
    }
    return u;
}

double exact_expectation(const StateVector &psi, const PauliSum &observable) {
    if (psi.size() != static_cast<Eigen::Index>(std::size_t{1} << observable.n_qubits())) {
        throw Error(ErrorKind::DimMismatch, "observable and state act on different registers");
    }
    double total = 0.0;
    StateVector tmp(psi.size());
    for (const auto &[word, coeff] : observable.terms()) {
        if (word.is_identity()) {
            total += coeff * psi.squaredNorm();
            continue;
        }
        tmp = psi;
        apply_word(word, tmp);
        total += coeff * psi.dot(tmp).real();
    }
    return total;
}

double phase_distance(const DenseOperator &a, const DenseOperator &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::DimMismatch, "phase_distance of differently shaped operators");
    }
    const Complex overlap = (b.adjoint() * a).trace();
    const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex{1.0, 0.0};
    return (a - phase * b).cwiseAbs().maxCoeff();
}

double ground_energy(const PauliSum &observable) {
    if (observable.n_qubits() > kMaxDenseQubits) {
        throw Error(ErrorKind::TooLarge, "ground_energy supports at most 6 qubits");
    }
    if (observable.empty()) return 0.0;
    Eigen::SelfAdjointEigenSolver<DenseOperator> eig(observable.to_matrix(),
                                                     Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

Device::Device(DeviceConfig cfg, OdeConfig ode) : cfg_(cfg), ode_(ode), rng_(cfg.seed) {
    ode_.validate();
}

DenseOperator Device::pulse_unitary(const PulseGate &gate, std::span<const double> theta) {
    CacheKey key{gate.hamiltonian.get(), gate.t0, gate.t1, {}};
    for (std::size_t slot : gate.hamiltonian->active_slots()) key.slots.push_back(theta[slot]);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second.unitary;
    DenseOperator u = direct_pulse_unitary(gate, theta, ode_);
    if (cache_.size() >= kMaxCacheEntries) cache_.clear();
    cache_.emplace(std::move(key), CacheEntry{gate.hamiltonian, u});
    return u;
}

StateVector Device::run(const Circuit &circuit, std::span<const double> theta) {
    if (theta.size() < circuit.n_params()) {
        throw Error(ErrorKind::DimMismatch, "parameter vector shorter than the circuit needs");
    }
    const PulseUnitaryFn cached = [this](const PulseGate &g, std::span<const double> th) {
        return pulse_unitary(g, th);
    };
    StateVector psi = zero_state(circuit.n_qubits());
    for (const auto &gate : circuit.gates()) apply_gate(gate, theta, psi, cached);
    return psi;
}

double Device::expectation(const Circuit &circuit, std::span<const double> theta,
                           const PauliSum &observable) {
    if (observable.n_qubits() != circuit.n_qubits()) {
        throw Error(ErrorKind::DimMismatch, "observable and circuit act on different registers");
    }
    const StateVector psi = run(circuit, theta);
    ++queries_;
    if (cfg_.shots == 0) return exact_expectation(psi, observable);

    double total = 0.0;
    StateVector tmp(psi.size());
    for (const auto &[word, coeff] : observable.terms()) {
        if (word.is_identity()) {
            total += coeff;
            continue;
        }
        tmp = psi;
        apply_word(word, tmp);
        const double mean = psi.dot(tmp).real();
        const double p_plus = std::clamp(0.5 * (1.0 + mean), 0.0, 1.0);
        std::binomial_distribution<std::size_t> outcomes(cfg_.shots, p_plus);
        const double plus = static_cast<double>(outcomes(rng_));
        total += coeff * (2.0 * plus / static_cast<double>(cfg_.shots) - 1.0);
    }
    return total;
}

double expectation(const Circuit &circuit, std::span<const double> theta,
                   const PauliSum &observable, const DeviceConfig &device, const OdeConfig &ode) {
    Device dev(device, ode);
    return dev.expectation(circuit, theta, observable);
}

} // namespace pulsegrad
