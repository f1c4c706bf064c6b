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
#include <vector>

#include "pulsegrad/pulse.hpp"

namespace pulsegrad {

struct OdeConfig {
    double rtol = 1e-8;
    double atol = 1e-8;
    std::size_t max_steps = 2'000'000;
    /// First trial step in ns; 0 selects one automatically.
    double initial_step = 0.0;
    /// Polar-project U onto the unitary group after integration. Sensitivities
    /// are left untouched.
    bool renormalize_unitary = false;
    /// Step in the interaction picture of the (constant) drift, which is
    /// removed exactly. The lab frame is kept for cross-checks.
    bool interaction_frame = true;

    void validate() const;
};

struct PropagatorResult {
    DenseOperator unitary;
    /// dU/dtheta_k for k < theta.size(); empty when not requested.
    std::vector<DenseOperator> sensitivities;
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;

    [[nodiscard]] bool has_sensitivities() const noexcept { return !sensitivities.empty(); }
};

/// Solves dU/dt = -i H(theta, t) U from U(t0) = I with Dormand-Prince 5(4).
/// Integration restarts at every envelope discontinuity.
PropagatorResult evolve(const ParametrizedHamiltonian &h, std::span<const double> theta, double t0,
                        double t1, const OdeConfig &cfg = {});

/// Integrates U together with the forward sensitivities
///   d(dU/dtheta_k)/dt = -i dH/dtheta_k U - i H dU/dtheta_k
/// under a single error controller applied to the augmented state.
PropagatorResult evolve_with_sensitivity(const ParametrizedHamiltonian &h,
                                         std::span<const double> theta, double t0, double t1,
                                         const OdeConfig &cfg = {});

/// Independent check of dU/dtheta_slot through the Duhamel integral
///   -i int_{t0}^{t1} U(t1, tau) dH/dtheta(tau) U(tau, t0) dtau
/// using `n_panels` composite Gauss-Legendre panels.
DenseOperator gradient_quadrature_oracle(const ParametrizedHamiltonian &h,
                                         std::span<const double> theta, double t0, double t1,
                                         std::size_t slot, std::size_t n_panels,
                                         const OdeConfig &cfg = {});

/// max-abs of U^dagger U - I.
double unitarity_error(const DenseOperator &u);

/// U (U^dagger U)^{-1/2}.
DenseOperator polar_unitary(const DenseOperator &u);

/// Product formula of time-ordered matrix exponentials at n midpoints.
DenseOperator trotter_propagator(const ParametrizedHamiltonian &h, std::span<const double> theta,
                                 double t0, double t1, std::size_t n_steps);

/// exp(-i dt H) for Hermitian H via eigendecomposition.
DenseOperator hermitian_exp(const DenseOperator &h, double dt);

} // namespace pulsegrad
