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
#include <span>
#include <variant>
#include <vector>

#include "pulsegrad/pauli.hpp"

namespace pulsegrad {

/// Parameter vectors are flat real arrays. Complex coefficients occupy two
/// consecutive slots (re, im).
using ParamVector = std::vector<double>;

/// u(t) = theta[0] * exp(i phase). One slot.
struct ConstantEnvelope {
    double duration = 0.0;
    double phase = 0.0;
};

/// Bins of equal width partitioning [0, duration]. Each bin owns two slots,
/// (amplitude, phase), giving u(t) = a_k exp(i phi_k) in bin k.
struct PiecewiseConstantEnvelope {
    std::size_t bins = 1;
    double duration = 0.0;
};

/// u(t) = N(sum_l c_l P_l(2t/T - 1)) with complex c_l stored as (re, im)
/// slot pairs. N saturates the modulus below one; it can be switched off.
struct LegendreEnvelope {
    std::size_t degree = 0;
    double duration = 0.0;
    bool normalized = true;
};

using Envelope = std::variant<ConstantEnvelope, PiecewiseConstantEnvelope, LegendreEnvelope>;

std::size_t slot_count(const Envelope &env);
double envelope_duration(const Envelope &env);
/// Interior points of [0, T] (local time) where the envelope jumps.
std::vector<double> envelope_discontinuities(const Envelope &env);

/// N(z) = (1 - e^{-|z|}) / (1 + e^{-|z|}) * e^{i arg z}, with N(0) = 0.
Complex normalize(Complex z);

/// Legendre polynomial P_l(x) via the Bonnet recurrence.
double legendre(std::size_t degree, double x);
/// Writes P_0(x) .. P_{out.size()-1}(x).
void legendre_all(double x, std::span<double> out);

/// Envelope value at local time t in [0, T]. `slots` holds only this
/// envelope's parameters.
Complex envelope_value(const Envelope &env, std::span<const double> slots, double t);

/// d u / d slot_k for every owned slot.
std::vector<Complex> envelope_param_grad(const Envelope &env, std::span<const double> slots,
                                         double t);

enum class DriveForm {
    /// f = Omega * Re(exp(i (nu t + phi)) u(t))
    Modulated,
    /// f = Omega * Re(u(t)) * sin(nu t + phi), for real envelopes
    Sine,
};

/// Scalar control f(theta, t) of one drive term. The carrier runs on the
/// global clock; the envelope is evaluated at t - t_start.
struct PulseShape {
    Envelope envelope;
    std::size_t slot_offset = 0;
    double amplitude = 1.0; // Omega, rad/ns
    double frequency = 0.0; // nu, rad/ns
    double phase = 0.0;     // phi, rad
    double t_start = 0.0;   // ns
    DriveForm form = DriveForm::Modulated;

    [[nodiscard]] std::size_t slots() const { return slot_count(envelope); }
    [[nodiscard]] double t_end() const { return t_start + envelope_duration(envelope); }

    [[nodiscard]] double value(std::span<const double> theta, double t) const;
    /// Writes df/dtheta for this shape's slots into `out` (size slots()).
    void param_grad(std::span<const double> theta, double t, std::span<double> out) const;
};

struct Drive {
    PulseShape shape;
    PauliSum generator;
};

/// H(theta, t) = H_drift + sum_j f_j(theta, t) H_j.
class ParametrizedHamiltonian {
  public:
    ParametrizedHamiltonian(std::size_t n_qubits, PauliSum drift, std::vector<Drive> drives = {});

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
    [[nodiscard]] const PauliSum &drift() const noexcept { return drift_; }
    [[nodiscard]] const std::vector<Drive> &drives() const noexcept { return drives_; }

    /// Sorted global slots read by at least one drive.
    [[nodiscard]] const std::vector<std::size_t> &active_slots() const noexcept {
        return active_slots_;
    }
    /// Minimum ParamVector length accepted by evaluate().
    [[nodiscard]] std::size_t required_params() const noexcept { return required_params_; }

    [[nodiscard]] DenseOperator evaluate(std::span<const double> theta, double t) const;
    [[nodiscard]] DenseOperator evaluate_param_derivative(std::span<const double> theta, double t,
                                                          std::size_t slot) const;

    /// Writes H(theta, t) and dH/dtheta for every active slot, in
    /// active_slots() order. Output matrices must be preallocated.
    void evaluate_with_derivatives(std::span<const double> theta, double t, DenseOperator &h,
                                   std::vector<DenseOperator> &dh) const;

    /// Scalar controls f_j(theta, t), one per drive.
    [[nodiscard]] std::vector<double> drive_values(std::span<const double> theta,
                                                   double t) const;

    /// Sorted points strictly inside (t0, t1) where some control jumps.
    [[nodiscard]] std::vector<double> breakpoints(double t0, double t1) const;

    [[nodiscard]] const DenseOperator &drift_matrix() const noexcept { return drift_matrix_; }
    [[nodiscard]] const DenseOperator &generator_matrix(std::size_t drive) const {
        return generator_matrices_.at(drive);
    }
    /// Position in active_slots() of each slot owned by `drive`.
    [[nodiscard]] const std::vector<std::size_t> &drive_slot_positions(std::size_t drive) const {
        return drive_slot_index_.at(drive);
    }

  private:
    void check_time(double t) const;
    void check_theta(std::span<const double> theta) const;

    std::size_t n_qubits_;
    Eigen::Index dim_;
    PauliSum drift_;
    std::vector<Drive> drives_;
    DenseOperator drift_matrix_;
    std::vector<DenseOperator> generator_matrices_;
    std::vector<std::size_t> active_slots_;
    // per drive, position in active_slots_ of each owned slot
    std::vector<std::vector<std::size_t>> drive_slot_index_;
    std::size_t required_params_ = 0;
};

struct Coupling {
    std::size_t q = 0;
    std::size_t p = 0;
    double strength = 0.0; // J_qp, rad/ns
};

struct TransmonSpec {
    std::vector<double> frequencies; // omega_q, rad/ns
    std::vector<Coupling> couplings;

    [[nodiscard]] std::size_t n_qubits() const noexcept { return frequencies.size(); }
    [[nodiscard]] bool coupled(std::size_t q, std::size_t p) const;
};

struct DriveChannel {
    std::size_t qubit = 0;
    PulseShape shape;
};

/// -sum_q omega_q/2 Z_q + sum_(q,p) J_qp (X_q X_p + Y_q Y_p).
PauliSum transmon_drift(const TransmonSpec &spec);

/// Drift plus one Y_q drive per channel.
ParametrizedHamiltonian transmon_hamiltonian(const TransmonSpec &spec,
                                             const std::vector<DriveChannel> &channels);

} // namespace pulsegrad
