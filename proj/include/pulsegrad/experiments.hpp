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
#include <optional>
#include <span>
#include <vector>

#include "pulsegrad/circuit.hpp"
#include "pulsegrad/gradients.hpp"
#include "pulsegrad/pulse.hpp"

namespace pulsegrad {

enum class OptimizerKind { GradientDescent, Adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 0.02;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 100;
    std::uint64_t init_seed = 0;
    double init_stddev = 1.0;

    void validate() const;
};

class Optimizer {
  public:
    Optimizer(const OptimizerConfig &cfg, std::size_t n_params);

    void step(std::vector<double> &theta, std::span<const double> grad);

  private:
    OptimizerConfig cfg_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t t_ = 0;
};

/// theta_k ~ N(0, stddev^2), reproducible from `seed`.
ParamVector gaussian_init(std::size_t n, std::uint64_t seed, double stddev = 1.0);

enum class GradMethod { Odegen, Sps, Exact };

struct VqeOptions {
    GradMethod method = GradMethod::Odegen;
    OptimizerConfig optimizer;
    SpsConfig sps;
    OdegenOptions odegen;
    /// Overrides the Gaussian initialization.
    std::optional<ParamVector> initial;
};

/// Row e holds the energy at theta_e, the norm of the gradient that produced
/// theta_e (0 for the first row), and the gradient queries spent so far.
struct TrainingTrace {
    std::vector<double> energy;
    std::vector<double> grad_norm;
    std::vector<std::uint64_t> cumulative_expvals;
    ParamVector initial_theta;
    ParamVector final_theta;
};

TrainingTrace vqe_run(const Circuit &circuit, const PauliSum &observable, const VqeOptions &opts,
                      Device &device);

struct SnrRow {
    std::size_t n_samples = 0;
    std::size_t param = 0;
    double mean = 0.0;
    double std = 0.0;
    double snr = 0.0;

    bool operator==(const SnrRow &) const = default;
};

/// Statistics over parameters of |mean| / std for one sample count.
struct SnrSummary {
    std::size_t n_samples = 0;
    double mean_snr = 0.0;
    double p05_snr = 0.0;
    double p90_snr = 0.0;
    double p95_snr = 0.0;
    double median_std = 0.0;
};

struct SnrTable {
    std::vector<SnrRow> rows;
    std::vector<SnrSummary> summary;
};

/// Draws `batches` independent SPS gradients per sample count at fixed theta.
SnrTable snr_study(const Circuit &circuit, const PauliSum &observable,
                   std::span<const double> theta, std::span<const std::size_t> sample_counts,
                   std::size_t batches, Device &device, SplitMode mode, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

double percentile(std::vector<double> values, double q);

/// 1 - |tr(U^dagger target)| / 2^n
double gate_infidelity(const DenseOperator &u, const DenseOperator &target);

/// Single resonant-style drive on qubit 0 of a one-qubit transmon with one
/// (amplitude, phase) bin over [0, duration].
ParametrizedHamiltonian single_qubit_gate_program(double qubit_frequency, double max_amplitude,
                                                  double drive_frequency, double duration);

struct CalibrationResult {
    ParamVector theta;
    double infidelity = 1.0;
    std::vector<double> loss;
};

/// Minimizes gate_infidelity(U(theta), target) with the configured optimizer
/// on exact sensitivity gradients.
CalibrationResult calibrate_gate(const ParametrizedHamiltonian &h, double t0, double t1,
                                 const DenseOperator &target, ParamVector theta0,
                                 const OptimizerConfig &opt, const OdeConfig &ode);

struct SweepPoint {
    double nu = 0.0;
    double infidelity = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> curve;
    double argmin_nu = 0.0;
    double min_infidelity = 1.0;
};

/// Infidelity of the calibrated single-qubit pulse as the drive frequency
/// moves across `nu_grid`.
SweepResult frequency_sweep(double qubit_frequency, double max_amplitude, double duration,
                            const DenseOperator &target, std::span<const double> nu_grid,
                            std::span<const double> theta, const OdeConfig &ode);

struct LegendrePulseOptions {
    /// Omega_q per qubit, rad/ns
    std::vector<double> max_amplitudes;
    double duration = 20.0;
    std::size_t degree = 4;
};

/// One pulse gate with a resonant Legendre drive on every qubit; qubit q owns
/// slots [q * 2(d+1), (q+1) * 2(d+1)).
Circuit legendre_pulse_circuit(const TransmonSpec &spec, const LegendrePulseOptions &opts);

/// One qubit, constant sine-form drive at resonance whose amplitude (rad/ns)
/// is the single trainable slot.
Circuit constant_pulse_circuit(double qubit_frequency, double duration, double phase = 0.0);

/// 0.5 Z0 + 0.25 Z0 Z1 + 0.3 X0 X1
PauliSum toy_hamiltonian();

enum class EchoPlacement { Control, Target };

struct EchoedCrOptions {
    double resonant_duration = 20.0;
    double cross_resonant_duration = 100.0;
    std::size_t bins = 10;
    double resonant_amplitude = 0.2; // rad/ns
    double cross_resonant_amplitude = 0.2;
    EchoPlacement echo = EchoPlacement::Control;
};

/// [resonant drives on both qubits] [CR: control driven at target frequency]
/// [X] [same CR, negated, sharing slots] [X] [resonant drives on both qubits].
Circuit echoed_cr_ansatz(const TransmonSpec &spec, std::size_t control, std::size_t target,
                         const EchoedCrOptions &opts = {});

/// Random transmon program: Legendre drives on every qubit between random
/// RX layers and a final RY on qubit 0, Gaussian parameters, and a random
/// four-term observable.
struct RandomProgram {
    Circuit circuit{1};
    ParamVector theta;
    PauliSum observable;
};

RandomProgram random_transmon_program(std::uint64_t seed, std::size_t n_qubits,
                                      std::size_t degree = 4, double duration = 10.0);

struct OracleTriangleOptions {
    std::size_t programs = 20;
    std::size_t max_qubits = 2;
    std::size_t degree = 4;
    double duration = 10.0;
    /// Dense-grid SPS nodes; 0 skips the SPS leg.
    std::size_t dense_nodes = 0;
    std::uint64_t seed = 0;
    OdeConfig ode;
};

struct OracleTriangleCase {
    std::size_t n_qubits = 0;
    std::size_t n_params = 0;
    double odegen_vs_exact = 0.0;
    double exact_vs_fd = 0.0;
    /// NaN when the SPS leg is skipped.
    double sps_vs_exact = 0.0;
    std::uint64_t odegen_queries = 0;
};

/// Max-abs disagreements between ODEgen, the sensitivity chain rule, central
/// differences and (optionally) dense-grid SPS on random programs with 1 to
/// max_qubits qubits.
std::vector<OracleTriangleCase> oracle_triangle(const OracleTriangleOptions &opts);

} // namespace pulsegrad
