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

#include "pulsegrad/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "pulsegrad/errors.hpp"

namespace pulsegrad {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

StateVector apply_observable(const PauliSum &observable, const StateVector &psi) {
    StateVector out = StateVector::Zero(psi.size());
    StateVector tmp(psi.size());
    for (const auto &[word, coeff] : observable.terms()) {
        apply_pauli(word, std::span<const Complex>(psi.data(), static_cast<std::size_t>(psi.size())),
                    std::span<Complex>(tmp.data(), static_cast<std::size_t>(tmp.size())));
        out += coeff * tmp;
    }
    return out;
}

Circuit shift_rotation(const Circuit &circuit, std::size_t gate_index, double delta) {
    Circuit out(circuit.n_qubits());
    out.reserve_params(circuit.n_params());
    for (std::size_t i = 0; i < circuit.gates().size(); ++i) {
        Gate gate = circuit.gates()[i];
        if (i == gate_index) std::get<DigitalRotation>(gate).angle += delta;
        out.add(std::move(gate));
    }
    return out;
}

// Trainable digital rotations are differentiated with the two-term rule.
void add_rotation_terms(const Circuit &circuit, std::span<const double> theta,
                        const PauliSum &observable, Device &device, GradientResult &out) {
    const std::uint64_t before = device.queries();
    for (std::size_t i = 0; i < circuit.gates().size(); ++i) {
        const auto *rot = std::get_if<DigitalRotation>(&circuit.gates()[i]);
        if (rot == nullptr || !rot->slot) continue;
        const double plus = device.expectation(shift_rotation(circuit, i, kHalfPi), theta, observable);
        const double minus = device.expectation(shift_rotation(circuit, i, -kHalfPi), theta, observable);
        out.gradient[*rot->slot] += 0.5 * (plus - minus);
    }
    const std::uint64_t used = device.queries() - before;
    if (used > 0) out.resources.record("digital rotations", used);
}

std::vector<PauliWord> generator_words(const ParametrizedHamiltonian &h, bool include_drift) {
    std::set<PauliWord> words;
    for (const auto &drive : h.drives()) {
        for (const auto &[word, coeff] : drive.generator.terms()) {
            if (!word.is_identity() && coeff != 0.0) words.insert(word);
        }
    }
    if (include_drift) {
        for (const auto &[word, coeff] : h.drift().terms()) {
            if (!word.is_identity() && coeff != 0.0) words.insert(word);
        }
    }
    return {words.begin(), words.end()};
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double default_gen_tol(const OdeConfig &ode) { return 1e-6 * ode.rtol / 1e-8; }

std::vector<EffectiveGenerator> effective_generators(const PropagatorResult &prop,
                                                     std::span<const std::size_t> params,
                                                     double gen_tol) {
    if (!prop.has_sensitivities()) {
        throw Error(ErrorKind::MissingSensitivities, "propagator carries no sensitivities");
    }
    const DenseOperator u_dag = prop.unitary.adjoint();
    std::vector<EffectiveGenerator> out;
    out.reserve(params.size());
    for (std::size_t j : params) {
        if (j >= prop.sensitivities.size()) {
            throw Error(ErrorKind::BadIndex, "no sensitivity for parameter " + std::to_string(j));
        }
        DenseOperator gen = Complex{0.0, 1.0} * (u_dag * prop.sensitivities[j]);
        const double residue = anti_hermitian_residue(gen);
        if (residue > gen_tol) {
            throw Error(ErrorKind::GeneratorNotHermitian,
                        "effective generator " + std::to_string(j) + " has anti-Hermitian residue " +
                            std::to_string(residue));
        }
        DenseOperator sym = 0.5 * (gen + gen.adjoint());
        out.push_back(EffectiveGenerator{j, std::move(sym), residue});
    }
    return out;
}

std::vector<EffectiveGenerator> effective_generators(const PropagatorResult &prop, double gen_tol) {
    std::vector<std::size_t> params(prop.sensitivities.size());
    for (std::size_t j = 0; j < params.size(); ++j) params[j] = j;
    return effective_generators(prop, params, gen_tol);
}

OdegenPlan build_odegen_plan(std::span<const EffectiveGenerator> generators, std::size_t n_qubits,
                             double atol_coeff) {
    OdegenPlan plan;
    plan.n_qubits = n_qubits;
    plan.atol_coeff = atol_coeff;
    std::vector<std::pair<std::size_t, PauliDecomposition>> decomps;
    std::set<PauliWord> words;
    for (const auto &gen : generators) {
        // Generators are symmetrized already; the tolerance only guards shape.
        PauliDecomposition d = pauli_decompose(gen.matrix, n_qubits, 1e-6);
        std::erase_if(d.coeffs, [&](const auto &entry) {
            return entry.first.is_identity() || !(std::abs(entry.second) > atol_coeff);
        });
        for (const auto &[word, coeff] : d.coeffs) words.insert(word);
        decomps.emplace_back(gen.param, std::move(d));
    }
    plan.words.assign(words.begin(), words.end());
    for (const auto &[param, d] : decomps) {
        std::vector<double> row(plan.words.size(), 0.0);
        for (std::size_t l = 0; l < plan.words.size(); ++l) {
            const auto it = d.coeffs.find(plan.words[l]);
            if (it != d.coeffs.end()) row[l] = it->second;
        }
        auto &slot = plan.coefficients[param];
        if (slot.empty()) {
            slot = std::move(row);
        } else {
            for (std::size_t l = 0; l < row.size(); ++l) slot[l] += row[l];
        }
    }
    return plan;
}

OdegenPlan plan_pulse_gate(const Circuit &circuit, std::size_t gate_index,
                           std::span<const double> theta, const OdeConfig &ode,
                           const OdegenOptions &opts) {
    const PulseGate &gate = circuit.pulse_gate(gate_index);
    const auto &h = *gate.hamiltonian;
    const PropagatorResult prop = evolve_with_sensitivity(h, theta, gate.t0, gate.t1, ode);
    const double gen_tol = opts.gen_tol > 0.0 ? opts.gen_tol : default_gen_tol(ode);
    const auto gens = effective_generators(prop, h.active_slots(), gen_tol);
    OdegenPlan plan = build_odegen_plan(gens, circuit.n_qubits(), opts.atol_coeff);
    plan.pulse_gate = gate_index;

    const auto drive_words = generator_words(h, false);
    if (!drive_words.empty()) {
        const DLAResult drive_dla = dla_closure(drive_words);
        for (const auto &w : plan.words) {
            if (!drive_dla.contains(w)) plan.outside_drive_dla.push_back(w);
        }
    } else {
        plan.outside_drive_dla = plan.words;
    }
    return plan;
}

void ResourceCount::record(std::string label, std::uint64_t count) {
    expectation_values += count;
    breakdown.emplace_back(std::move(label), count);
}

GradientResult odegen_gradient(const Circuit &circuit, std::span<const double> theta,
                               const PauliSum &observable, Device &device,
                               std::span<const OdegenPlan> plans) {
    GradientResult out;
    out.gradient.assign(std::max(theta.size(), circuit.n_params()), 0.0);
    for (const auto &plan : plans) {
        const std::uint64_t before = device.queries();
        for (std::size_t l = 0; l < plan.words.size(); ++l) {
            const PauliWord &word = plan.words[l];
            const double plus = device.expectation(
                insert_before_pulse(circuit, plan.pulse_gate, DigitalRotation{word, kHalfPi, {}}),
                theta, observable);
            const double minus = device.expectation(
                insert_before_pulse(circuit, plan.pulse_gate, DigitalRotation{word, -kHalfPi, {}}),
                theta, observable);
            const double diff = plus - minus;
            for (const auto &[param, row] : plan.coefficients) out.gradient[param] += row[l] * diff;
        }
        out.resources.record("odegen gate " + std::to_string(plan.pulse_gate),
                             device.queries() - before);
    }
    add_rotation_terms(circuit, theta, observable, device, out);
    return out;
}

GradientResult odegen_gradient(const Circuit &circuit, std::span<const double> theta,
                               const PauliSum &observable, Device &device,
                               const OdegenOptions &opts) {
    std::vector<OdegenPlan> plans;
    for (std::size_t g : circuit.pulse_gate_indices()) {
        plans.push_back(plan_pulse_gate(circuit, g, theta, device.ode(), opts));
    }
    return odegen_gradient(circuit, theta, observable, device, plans);
}

void SpsConfig::validate() const {
    if (n_samples == 0) throw Error(ErrorKind::InvalidArgument, "SPS needs at least one sample");
}

GradientResult sps_gradient(const Circuit &circuit, std::span<const double> theta,
                            const PauliSum &observable, Device &device, const SpsConfig &cfg) {
    cfg.validate();
    GradientResult out;
    out.gradient.assign(std::max(theta.size(), circuit.n_params()), 0.0);

    const auto pulse_gates = circuit.pulse_gate_indices();
    for (std::size_t g_pos = 0; g_pos < pulse_gates.size(); ++g_pos) {
        const std::size_t g = pulse_gates[g_pos];
        const PulseGate &gate = circuit.pulse_gate(g);
        const auto &h = *gate.hamiltonian;
        std::vector<std::pair<PauliWord, double>> shift_words;
        for (const auto &drive : h.drives()) {
            if (drive.generator.size() != 1 || drive.generator.terms().begin()->first.is_identity()) {
                throw Error(ErrorKind::NonPauliGenerator,
                            "stochastic parameter shift needs single Pauli-word drive generators");
            }
            const auto &[word, coeff] = *drive.generator.terms().begin();
            shift_words.emplace_back(word, coeff);
        }

        const double span = gate.t1 - gate.t0;
        std::vector<double> taus(cfg.n_samples);
        if (cfg.mode == SplitMode::DenseGrid) {
            for (std::size_t s = 0; s < cfg.n_samples; ++s) {
                taus[s] = gate.t0 + (static_cast<double>(s) + 0.5) * span /
                                        static_cast<double>(cfg.n_samples);
            }
        } else {
            std::mt19937_64 rng(derive_seed(cfg.seed, g_pos));
            std::uniform_real_distribution<double> uniform(gate.t0, gate.t1);
            for (auto &tau : taus) {
                do {
                    tau = uniform(rng);
                } while (!(tau > gate.t0 && tau < gate.t1));
            }
        }

        const std::uint64_t before = device.queries();
        const double weight = span / static_cast<double>(cfg.n_samples);
        std::vector<double> grad;
        for (double tau : taus) {
            for (std::size_t j = 0; j < h.drives().size(); ++j) {
                const auto &[word, coeff] = shift_words[j];
                const double plus = device.expectation(
                    split_pulse_gate(circuit, g, tau, DigitalRotation{word, kHalfPi, {}}), theta,
                    observable);
                const double minus = device.expectation(
                    split_pulse_gate(circuit, g, tau, DigitalRotation{word, -kHalfPi, {}}), theta,
                    observable);
                const auto &shape = h.drives()[j].shape;
                grad.assign(shape.slots(), 0.0);
                shape.param_grad(theta, tau, grad);
                for (std::size_t k = 0; k < grad.size(); ++k) {
                    out.gradient[shape.slot_offset + k] += weight * coeff * grad[k] * (plus - minus);
                }
            }
        }
        out.resources.record("sps gate " + std::to_string(g), device.queries() - before);
    }
    add_rotation_terms(circuit, theta, observable, device, out);
    return out;
}

double two_term_shift(const std::function<double(std::span<const double>)> &loss,
                      std::span<const double> theta, std::size_t j) {
    if (j >= theta.size()) throw Error(ErrorKind::BadIndex, "shift index outside parameters");
    std::vector<double> shifted(theta.begin(), theta.end());
    shifted[j] = theta[j] + kHalfPi;
    const double plus = loss(shifted);
    shifted[j] = theta[j] - kHalfPi;
    const double minus = loss(shifted);
    return 0.5 * (plus - minus);
}

std::vector<double> exact_gradient(const Circuit &circuit, std::span<const double> theta,
                                   const PauliSum &observable, const OdeConfig &ode) {
    if (theta.size() < circuit.n_params()) {
        throw Error(ErrorKind::DimMismatch, "parameter vector shorter than the circuit needs");
    }
    const auto &gates = circuit.gates();
    const PulseUnitaryFn direct = [&](const PulseGate &g, std::span<const double> th) {
        return evolve(*g.hamiltonian, th, g.t0, g.t1, ode).unitary;
    };
    auto apply_rest = [&](std::size_t from, StateVector &v) {
        for (std::size_t i = from; i < gates.size(); ++i) apply_gate(gates[i], theta, v, direct);
    };

    const StateVector final_state = run(circuit, theta, ode);
    const StateVector h_final = apply_observable(observable, final_state);
    std::vector<double> grad(theta.size(), 0.0);

    StateVector psi = zero_state(circuit.n_qubits());
    for (std::size_t i = 0; i < gates.size(); ++i) {
        if (const auto *pulse = std::get_if<PulseGate>(&gates[i])) {
            const auto prop =
                evolve_with_sensitivity(*pulse->hamiltonian, theta, pulse->t0, pulse->t1, ode);
            for (std::size_t slot : pulse->hamiltonian->active_slots()) {
                StateVector d = prop.sensitivities[slot] * psi;
                apply_rest(i + 1, d);
                grad[slot] += 2.0 * d.dot(h_final).real();
            }
            psi = prop.unitary * psi;
            continue;
        }
        if (const auto *rot = std::get_if<DigitalRotation>(&gates[i]); rot != nullptr && rot->slot) {
            StateVector after = psi;
            apply_gate(gates[i], theta, after, direct);
            StateVector d(after.size());
            apply_pauli(rot->word,
                        std::span<const Complex>(after.data(), static_cast<std::size_t>(after.size())),
                        std::span<Complex>(d.data(), static_cast<std::size_t>(d.size())));
            d *= Complex{0.0, -0.5};
            apply_rest(i + 1, d);
            grad[*rot->slot] += 2.0 * d.dot(h_final).real();
            psi = std::move(after);
            continue;
        }
        apply_gate(gates[i], theta, psi, direct);
    }
    return grad;
}

std::vector<double> finite_difference_gradient(const Circuit &circuit,
                                               std::span<const double> theta,
                                               const PauliSum &observable, const OdeConfig &ode,
                                               double step) {
    std::vector<double> grad(theta.size(), 0.0);
    std::vector<double> shifted(theta.begin(), theta.end());
    for (std::size_t j = 0; j < theta.size(); ++j) {
        shifted[j] = theta[j] + step;
        const double plus = exact_expectation(run(circuit, shifted, ode), observable);
        shifted[j] = theta[j] - step;
        const double minus = exact_expectation(run(circuit, shifted, ode), observable);
        shifted[j] = theta[j];
        grad[j] = (plus - minus) / (2.0 * step);
    }
    return grad;
}

std::uint64_t resources_sps(std::uint64_t n_samples, std::uint64_t n_generators,
                            std::uint64_t eigenvalue_gaps) {
    return n_samples * n_generators * 2 * eigenvalue_gaps;
}

std::uint64_t resources_odegen(const OdegenPlan &plan) { return 2 * plan.words.size(); }

std::uint64_t resources_odegen(std::span<const OdegenPlan> plans) {
    std::uint64_t total = 0;
    for (const auto &p : plans) total += resources_odegen(p);
    return total;
}

std::size_t count_drive_generators(const Circuit &circuit) {
    std::size_t total = 0;
    for (std::size_t g : circuit.pulse_gate_indices()) {
        total += circuit.pulse_gate(g).hamiltonian->drives().size();
    }
    return total;
}

} // namespace pulsegrad
