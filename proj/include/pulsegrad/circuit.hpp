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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "pulsegrad/evolution.hpp"
#include "pulsegrad/pauli.hpp"
#include "pulsegrad/pulse.hpp"

namespace pulsegrad {

/// exp(-i (angle + theta[slot]) / 2 * word); the slot is optional.
struct DigitalRotation {
    PauliWord word;
    double angle = 0.0;
    std::optional<std::size_t> slot;
};

/// The bare Pauli operator, e.g. the echo X gates of a cross-resonance block.
struct PauliGate {
    PauliWord word;
};

/// Time evolution under a parametrized Hamiltonian over [t0, t1].
struct PulseGate {
    std::shared_ptr<const ParametrizedHamiltonian> hamiltonian;
    double t0 = 0.0;
    double t1 = 0.0;
};

struct FixedUnitary {
    DenseOperator matrix;
};

using Gate = std::variant<DigitalRotation, PauliGate, PulseGate, FixedUnitary>;

/// Rotation helpers matching RZ_q(x) = exp(-i x/2 Z_q) and friends.
DigitalRotation rotation(std::size_t n_qubits, std::initializer_list<std::pair<std::size_t, char>> ops,
                         double angle);

class Circuit {
  public:
    explicit Circuit(std::size_t n_qubits);

    Circuit &add(Gate gate);

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] const std::vector<Gate> &gates() const noexcept { return gates_; }
    /// Length of the parameter vector the circuit reads.
    [[nodiscard]] std::size_t n_params() const noexcept { return n_params_; }
    /// Positions of PulseGate entries in gate order.
    [[nodiscard]] std::vector<std::size_t> pulse_gate_indices() const;
    [[nodiscard]] const PulseGate &pulse_gate(std::size_t gate_index) const;
    /// Slots consumed by DigitalRotation gates.
    [[nodiscard]] std::vector<std::size_t> rotation_slots() const;

    /// Declares the parameter count explicitly (>= what the gates read).
    void reserve_params(std::size_t n) { n_params_ = std::max(n_params_, n); }

  private:
    std::size_t n_qubits_;
    std::size_t n_params_ = 0;
    std::vector<Gate> gates_;
};

/// Replaces pulse gate `gate_index` by [U(tau, t0), inserted, U(t1, tau)].
Circuit split_pulse_gate(const Circuit &circuit, std::size_t gate_index, double tau,
                         Gate inserted);

/// Inserts `gate` directly in front of pulse gate `gate_index`.
Circuit insert_before_pulse(const Circuit &circuit, std::size_t gate_index, Gate gate);

using StateVector = Eigen::VectorXcd;

StateVector zero_state(std::size_t n_qubits);

/// Supplies pulse-gate unitaries; lets the device memoize propagators.
using PulseUnitaryFn =
    std::function<DenseOperator(const PulseGate &, std::span<const double> theta)>;

void apply_gate(const Gate &gate, std::span<const double> theta, StateVector &psi,
                const PulseUnitaryFn &pulse_unitary);

/// Applies the circuit to |0...0>.
StateVector run(const Circuit &circuit, std::span<const double> theta, const OdeConfig &ode = {});

/// Full circuit unitary, for small-register checks.
DenseOperator circuit_unitary(const Circuit &circuit, std::span<const double> theta,
                              const OdeConfig &ode = {});

double exact_expectation(const StateVector &psi, const PauliSum &observable);

/// min over global phase of max-abs(a - e^{i phi} b), with phi aligned by the
/// Hilbert-Schmidt overlap.
double phase_distance(const DenseOperator &a, const DenseOperator &b);

/// Smallest eigenvalue of a dense observable (n <= 6).
double ground_energy(const PauliSum &observable);

struct DeviceConfig {
    /// 0 means exact expectation values.
    std::size_t shots = 0;
    std::uint64_t seed = 0;
};

/// The quantum device the gradient engines talk to. Every call to
/// expectation() counts as one query. Shot sampling draws from an owned
/// generator, so a Device must not be shared across threads.
class Device {
  public:
    explicit Device(DeviceConfig cfg = {}, OdeConfig ode = {});

    double expectation(const Circuit &circuit, std::span<const double> theta,
                       const PauliSum &observable);

    /// Final state without counting a query.
    StateVector run(const Circuit &circuit, std::span<const double> theta);

    [[nodiscard]] DenseOperator pulse_unitary(const PulseGate &gate, std::span<const double> theta);

    [[nodiscard]] std::uint64_t queries() const noexcept { return queries_; }
    void reset_queries() noexcept { queries_ = 0; }
    [[nodiscard]] const DeviceConfig &config() const noexcept { return cfg_; }
    [[nodiscard]] const OdeConfig &ode() const noexcept { return ode_; }
    void clear_cache() { cache_.clear(); }

  private:
    struct CacheKey {
        const ParametrizedHamiltonian *hamiltonian;
        double t0;
        double t1;
        std::vector<double> slots;
        auto operator<=>(const CacheKey &) const = default;
    };
    struct CacheEntry {
        std::shared_ptr<const ParametrizedHamiltonian> owner;
        DenseOperator unitary;
    };

    DeviceConfig cfg_;
    OdeConfig ode_;
    std::mt19937_64 rng_;
    std::uint64_t queries_ = 0;
    std::map<CacheKey, CacheEntry> cache_;
};

/// One-shot convenience wrapper around a temporary Device.
double expectation(const Circuit &circuit, std::span<const double> theta,
                   const PauliSum &observable, const DeviceConfig &device,
                   const OdeConfig &ode = {});

} // namespace pulsegrad
