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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pulsegrad/circuit.hpp"
#include "pulsegrad/evolution.hpp"
#include "pulsegrad/pauli.hpp"

namespace pulsegrad {

/// Hermitian H_j with dU/dtheta_j = -i U H_j.
struct EffectiveGenerator {
    std::size_t param = 0;
    DenseOperator matrix;
    /// Anti-Hermitian residue before symmetrization.
    double residue = 0.0;
};

/// Generator tolerance 1e-6 at rtol 1e-8, proportional to rtol.
double default_gen_tol(const OdeConfig &ode);

/// H_j = i U^dagger dU/dtheta_j, symmetrized, for every listed parameter.
std::vector<EffectiveGenerator> effective_generators(const PropagatorResult &prop,
                                                     std::span<const std::size_t> params,
                                                     double gen_tol);
/// Same, for every parameter the propagator carries a sensitivity for.
std::vector<EffectiveGenerator> effective_generators(const PropagatorResult &prop,
                                                     double gen_tol);

/// Shift words and coefficients for one pulse gate.
struct OdegenPlan {
    std::size_t pulse_gate = 0;
    std::size_t n_qubits = 0;
    std::vector<PauliWord> words;
    /// param -> coefficient per entry of `words`
    std::map<std::size_t, std::vector<double>> coefficients;
    double atol_coeff = 0.0;
    /// Shift words lying outside the closure of the drive generators alone.
    std::vector<PauliWord> outside_drive_dla;

    [[nodiscard]] std::size_t expected_queries() const noexcept { return 2 * words.size(); }
};

OdegenPlan build_odegen_plan(std::span<const EffectiveGenerator> generators, std::size_t n_qubits,
                             double atol_coeff = 0.0);

struct OdegenOptions {
    double atol_coeff = 0.0;
    /// 0 selects default_gen_tol(device ODE config).
    double gen_tol = 0.0;
};

/// Integrates the pulse gate with sensitivities and builds its plan.
OdegenPlan plan_pulse_gate(const Circuit &circuit, std::size_t gate_index,
                           std::span<const double> theta, const OdeConfig &ode,
                           const OdegenOptions &opts = {});

struct ResourceCount {
    std::uint64_t expectation_values = 0;
    std::vector<std::pair<std::string, std::uint64_t>> breakdown;

    void record(std::string label, std::uint64_t count);
};

struct GradientResult {
    std::vector<double> gradient;
    ResourceCount resources;
};

/// Shifted-expectation gradient from precomputed plans. Each shifted value
/// L_l(+-pi/2) is measured once and reused for every parameter.
GradientResult odegen_gradient(const Circuit &circuit, std::span<const double> theta,
                               const PauliSum &observable, Device &device,
                               std::span<const OdegenPlan> plans);

/// Plans every pulse gate at theta, then measures.
GradientResult odegen_gradient(const Circuit &circuit, std::span<const double> theta,
                               const PauliSum &observable, Device &device,
                               const OdegenOptions &opts = {});

enum class SplitMode {
    MonteCarlo, ///< tau ~ U[t0, t1]
    DenseGrid,  ///< midpoint rule, deterministic
};

struct SpsConfig {
    std::size_t n_samples = 8;
    std::uint64_t seed = 0;
    SplitMode mode = SplitMode::MonteCarlo;

    void validate() const;
};

/// Stochastic parameter-shift gradient. Every drive generator must be a
/// single Pauli word.
GradientResult sps_gradient(const Circuit &circuit, std::span<const double> theta,
                            const PauliSum &observable, Device &device, const SpsConfig &cfg);

/// (loss(theta + pi/2 e_j) - loss(theta - pi/2 e_j)) / 2
double two_term_shift(const std::function<double(std::span<const double>)> &loss,
                      std::span<const double> theta, std::size_t j);

/// Chain rule through the integrator sensitivities; no shift rules involved.
std::vector<double> exact_gradient(const Circuit &circuit, std::span<const double> theta,
                                   const PauliSum &observable, const OdeConfig &ode = {});

/// Central differences of the exact loss.
std::vector<double> finite_difference_gradient(const Circuit &circuit,
                                               std::span<const double> theta,
                                               const PauliSum &observable,
                                               const OdeConfig &ode = {}, double step = 1e-5);

std::uint64_t resources_sps(std::uint64_t n_samples, std::uint64_t n_generators,
                            std::uint64_t eigenvalue_gaps = 1);
std::uint64_t resources_odegen(const OdegenPlan &plan);
std::uint64_t resources_odegen(std::span<const OdegenPlan> plans);

/// Decorrelated child seed for batch or epoch `salt`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

/// Number of drive terms over all pulse gates (N_g).
std::size_t count_drive_generators(const Circuit &circuit);

} // namespace pulsegrad
