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

#include "pulsegrad/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "pulsegrad/errors.hpp"

namespace pulsegrad {

namespace {

double l2_norm(std::span<const double> v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

} // namespace

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "adam epsilon must be > 0");
    if (init_stddev < 0.0) throw Error(ErrorKind::InvalidArgument, "init stddev must be >= 0");
}

Optimizer::Optimizer(const OptimizerConfig &cfg, std::size_t n_params)
    : cfg_(cfg), m_(n_params, 0.0), v_(n_params, 0.0) {
    cfg_.validate();
}

void Optimizer::step(std::vector<double> &theta, std::span<const double> grad) {
    if (grad.size() < theta.size()) {
        throw Error(ErrorKind::DimMismatch, "gradient shorter than parameter vector");
    }
    if (cfg_.kind == OptimizerKind::GradientDescent) {
        for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= cfg_.learning_rate * grad[k];
        return;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < theta.size(); ++k) {
        m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * grad[k];
        v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * grad[k] * grad[k];
        const double m_hat = m_[k] / c1;
        const double v_hat = v_[k] / c2;
        theta[k] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
}

ParamVector gaussian_init(std::size_t n, std::uint64_t seed, double stddev) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ParamVector theta(n);
    for (auto &t : theta) t = stddev * normal(rng);
    return theta;
}

TrainingTrace vqe_run(const Circuit &circuit, const PauliSum &observable, const VqeOptions &opts,
                      Device &device) {
    opts.optimizer.validate();
    TrainingTrace trace;
    ParamVector theta = opts.initial ? *opts.initial
                                     : gaussian_init(circuit.n_params(), opts.optimizer.init_seed,
                                                     opts.optimizer.init_stddev);
    if (theta.size() < circuit.n_params()) {
        throw Error(ErrorKind::DimMismatch, "initial parameters shorter than the circuit needs");
    }
    trace.initial_theta = theta;
    Optimizer optimizer(opts.optimizer, theta.size());

    std::uint64_t spent = 0;
    trace.energy.push_back(device.expectation(circuit, theta, observable));
    trace.grad_norm.push_back(0.0);
    trace.cumulative_expvals.push_back(0);

    for (std::size_t epoch = 0; epoch < opts.optimizer.epochs; ++epoch) {
        std::vector<double> grad;
        switch (opts.method) {
        case GradMethod::Odegen: {
            auto result = odegen_gradient(circuit, theta, observable, device, opts.odegen);
            spent += result.resources.expectation_values;
            grad = std::move(result.gradient);
            break;
        }
        case GradMethod::Sps: {
            SpsConfig sps = opts.sps;
            sps.seed = derive_seed(opts.sps.seed, epoch);
            auto result = sps_gradient(circuit, theta, observable, device, sps);
            spent += result.resources.expectation_values;
            grad = std::move(result.gradient);
            break;
        }
        case GradMethod::Exact:
            grad = exact_gradient(circuit, theta, observable, device.ode());
            break;
        }
        optimizer.step(theta, grad);
        trace.energy.push_back(device.expectation(circuit, theta, observable));
        trace.grad_norm.push_back(l2_norm(grad));
        trace.cumulative_expvals.push_back(spent);
    }
    trace.final_theta = std::move(theta);
    return trace;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorKind::InvalidArgument, "percentile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

SnrTable snr_study(const Circuit &circuit, const PauliSum &observable,
                   std::span<const double> theta, std::span<const std::size_t> sample_counts,
                   std::size_t batches, Device &device, SplitMode mode, std::uint64_t seed) {
    if (batches < 2) throw Error(ErrorKind::InvalidArgument, "SNR study needs at least 2 batches");
    SnrTable table;
    const std::size_t n = circuit.n_params();
    for (std::size_t ns : sample_counts) {
        std::vector<std::vector<double>> draws;
        draws.reserve(batches);
        for (std::size_t b = 0; b < batches; ++b) {
            SpsConfig cfg{ns, derive_seed(derive_seed(seed, ns), b), mode};
            draws.push_back(sps_gradient(circuit, theta, observable, device, cfg).gradient);
        }
        std::vector<double> abs_snr;
        std::vector<double> stds;
        for (std::size_t k = 0; k < n; ++k) {
            // shifted by the first draw so identical draws give exactly zero spread
            const double ref = draws[0][k];
            double shift = 0.0;
            for (const auto &g : draws) shift += g[k] - ref;
            shift /= static_cast<double>(batches);
            const double mean = ref + shift;
            double var = 0.0;
            for (const auto &g : draws) var += (g[k] - ref - shift) * (g[k] - ref - shift);
            var /= static_cast<double>(batches - 1);
            const double sd = std::sqrt(var);
            double snr = 0.0;
            if (sd > 0.0) {
                snr = mean / sd;
            } else if (mean != 0.0) {
                snr = std::copysign(std::numeric_limits<double>::infinity(), mean);
            }
            table.rows.push_back(SnrRow{ns, k, mean, sd, snr});
            abs_snr.push_back(std::abs(snr));
            stds.push_back(sd);
        }
        SnrSummary s;
        s.n_samples = ns;
        if (n > 0) {
            s.mean_snr = std::accumulate(abs_snr.begin(), abs_snr.end(), 0.0) /
                         static_cast<double>(n);
            s.p05_snr = percentile(abs_snr, 0.05);
            s.p90_snr = percentile(abs_snr, 0.90);
            s.p95_snr = percentile(abs_snr, 0.95);
            s.median_std = percentile(stds, 0.5);
        }
        table.summary.push_back(s);
    }
    return table;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "slope fit needs two equally long series");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

double gate_infidelity(const DenseOperator &u, const DenseOperator &target) {
    if (u.rows() != target.rows() || u.cols() != target.cols()) {
        throw Error(ErrorKind::DimMismatch, "gate and target differ in shape");
    }
    return 1.0 - std::abs((u.adjoint() * target).trace()) / static_cast<double>(u.rows());
}

ParametrizedHamiltonian single_qubit_gate_program(double qubit_frequency, double max_amplitude,
                                                  double drive_frequency, double duration) {
    TransmonSpec spec{{qubit_frequency}, {}};
    PulseShape shape;
    shape.envelope = PiecewiseConstantEnvelope{1, duration};
    shape.amplitude = max_amplitude;
    shape.frequency = drive_frequency;
    return transmon_hamiltonian(spec, {DriveChannel{0, shape}});
}

CalibrationResult calibrate_gate(const ParametrizedHamiltonian &h, double t0, double t1,
                                 const DenseOperator &target, ParamVector theta0,
                                 const OptimizerConfig &opt, const OdeConfig &ode) {
    CalibrationResult out;
    Optimizer optimizer(opt, theta0.size());
    ParamVector theta = std::move(theta0);
    const double dim = static_cast<double>(target.rows());
    out.theta = theta;
    for (std::size_t epoch = 0; epoch <= opt.epochs; ++epoch) {
        const auto prop = evolve_with_sensitivity(h, theta, t0, t1, ode);
        const Complex overlap = (prop.unitary.adjoint() * target).trace();
        const double loss = 1.0 - std::abs(overlap) / dim;
        out.loss.push_back(loss);
        if (loss < out.infidelity) {
            out.infidelity = loss;
            out.theta = theta;
        }
        if (epoch == opt.epochs) break;
        std::vector<double> grad(theta.size(), 0.0);
        const double mag = std::abs(overlap);
        if (mag > 0.0) {
            for (std::size_t k = 0; k < theta.size(); ++k) {
                const Complex d = (prop.sensitivities[k].adjoint() * target).trace();
                grad[k] = -(std::conj(overlap) * d).real() / (mag * dim);
            }
        }
        optimizer.step(theta, grad);
    }
    return out;
}

SweepResult frequency_sweep(double qubit_frequency, double max_amplitude, double duration,
                            const DenseOperator &target, std::span<const double> nu_grid,
                            std::span<const double> theta, const OdeConfig &ode) {
    SweepResult out;
    for (double nu : nu_grid) {
        const auto h = single_qubit_gate_program(qubit_frequency, max_amplitude, nu, duration);
        const double inf = gate_infidelity(evolve(h, theta, 0.0, duration, ode).unitary, target);
        out.curve.push_back(SweepPoint{nu, inf});
        if (out.curve.size() == 1 || inf < out.min_infidelity) {
            out.min_infidelity = inf;
            out.argmin_nu = nu;
        }
    }
    return out;
}

Circuit legendre_pulse_circuit(const TransmonSpec &spec, const LegendrePulseOptions &opts) {
    const std::size_t n = spec.n_qubits();
    if (opts.max_amplitudes.size() != n) {
        throw Error(ErrorKind::DimMismatch, "need one maximum amplitude per qubit");
    }
    const std::size_t per_qubit = 2 * (opts.degree + 1);
    std::vector<DriveChannel> channels;
    for (std::size_t q = 0; q < n; ++q) {
        PulseShape shape;
        shape.envelope = LegendreEnvelope{opts.degree, opts.duration, true};
        shape.slot_offset = q * per_qubit;
        shape.amplitude = opts.max_amplitudes[q];
        shape.frequency = spec.frequencies[q];
        channels.push_back(DriveChannel{q, shape});
    }
    auto h = std::make_shared<const ParametrizedHamiltonian>(transmon_hamiltonian(spec, channels));
    Circuit circuit(n);
    circuit.add(PulseGate{h, 0.0, opts.duration});
    return circuit;
}

Circuit constant_pulse_circuit(double qubit_frequency, double duration, double phase) {
    TransmonSpec spec{{qubit_frequency}, {}};
    PulseShape shape;
    shape.envelope = ConstantEnvelope{duration, 0.0};
    shape.amplitude = 1.0;
    shape.frequency = qubit_frequency;
    shape.phase = phase;
    shape.form = DriveForm::Sine;
    auto h = std::make_shared<const ParametrizedHamiltonian>(
        transmon_hamiltonian(spec, {DriveChannel{0, shape}}));
    Circuit circuit(1);
    circuit.add(PulseGate{h, 0.0, duration});
    return circuit;
}

PauliSum toy_hamiltonian() { return PauliSum(2, {{0.5, "ZI"}, {0.25, "ZZ"}, {0.3, "XX"}}); }

Circuit echoed_cr_ansatz(const TransmonSpec &spec, std::size_t control, std::size_t target,
                         const EchoedCrOptions &opts) {
    const std::size_t n = spec.n_qubits();
    if (control >= n || target >= n || control == target) {
        throw Error(ErrorKind::BadQubitIndex, "invalid cross-resonance pair");
    }
    if (!spec.coupled(control, target)) {
        throw Error(ErrorKind::UncoupledPair, "qubits " + std::to_string(control) + " and " +
                                                  std::to_string(target) + " are not coupled");
    }
    if (opts.bins == 0) throw Error(ErrorKind::InvalidArgument, "echoed CR needs >= 1 bin");
    const std::size_t per_drive = 2 * opts.bins;
    const double tr = opts.resonant_duration;
    const double tc = opts.cross_resonant_duration;

    auto drive = [&](std::size_t qubit, double nu, double amplitude, double start, double duration,
                     std::size_t offset, double phase) {
        PulseShape shape;
        shape.envelope = PiecewiseConstantEnvelope{opts.bins, duration};
        shape.slot_offset = offset;
        shape.amplitude = amplitude;
        shape.frequency = nu;
        shape.phase = phase;
        shape.t_start = start;
        return DriveChannel{qubit, shape};
    };
    auto gate = [&](std::vector<DriveChannel> channels, double start, double duration) {
        return PulseGate{
            std::make_shared<const ParametrizedHamiltonian>(transmon_hamiltonian(spec, channels)),
            start, start + duration};
    };
    const double wc = spec.frequencies[control];
    const double wt = spec.frequencies[target];
    const double ar = opts.resonant_amplitude;
    const double ac = opts.cross_resonant_amplitude;
    const std::size_t echo_qubit = opts.echo == EchoPlacement::Control ? control : target;
    const PauliGate echo{PauliWord::single(n, echo_qubit, 'X')};

    double t = 0.0;
    Circuit circuit(n);
    circuit.add(gate({drive(control, wc, ar, t, tr, 0, 0.0),
                      drive(target, wt, ar, t, tr, per_drive, 0.0)},
                     t, tr));
    t += tr;
    circuit.add(gate({drive(control, wt, ac, t, tc, 2 * per_drive, 0.0)}, t, tc));
    t += tc;
    circuit.add(echo);
    // A carrier phase of pi flips the sign of the whole control term.
    circuit.add(gate({drive(control, wt, ac, t, tc, 2 * per_drive, std::numbers::pi)}, t, tc));
    t += tc;
    circuit.add(echo);
    circuit.add(gate({drive(control, wc, ar, t, tr, 3 * per_drive, 0.0),
                      drive(target, wt, ar, t, tr, 4 * per_drive, 0.0)},
                     t, tr));
    return circuit;
}

RandomProgram random_transmon_program(std::uint64_t seed, std::size_t n_qubits,
                                      std::size_t degree, double duration) {
    if (n_qubits == 0) throw Error(ErrorKind::InvalidArgument, "need at least one qubit");
    const double tp = 2.0 * std::numbers::pi;
    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    TransmonSpec spec;
    for (std::size_t q = 0; q < n_qubits; ++q) spec.frequencies.push_back(tp * uniform(4.6, 5.4));
    for (std::size_t q = 0; q + 1 < n_qubits; ++q) {
        spec.couplings.push_back(Coupling{q, q + 1, tp * uniform(0.01, 0.03)});
    }
    LegendrePulseOptions opts;
    opts.duration = duration;
    opts.degree = degree;
    for (std::size_t q = 0; q < n_qubits; ++q) opts.max_amplitudes.push_back(tp * uniform(0.05, 0.3));
    const Circuit pulse = legendre_pulse_circuit(spec, opts);

    RandomProgram out;
    out.circuit = Circuit(n_qubits);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        out.circuit.add(rotation(n_qubits, {{q, 'X'}}, uniform(-3.0, 3.0)));
    }
    for (const auto &g : pulse.gates()) out.circuit.add(g);
    out.circuit.add(rotation(n_qubits, {{0, 'Y'}}, uniform(-3.0, 3.0)));

    std::normal_distribution<double> normal(0.0, 1.0);
    out.theta.resize(out.circuit.n_params());
    for (auto &t : out.theta) t = normal(rng);

    out.observable = PauliSum(n_qubits);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int k = 0; k < 4; ++k) {
        std::string label(n_qubits, 'I');
        for (auto &c : label) c = "IXYZ"[pick(rng)];
        if (label == std::string(n_qubits, 'I')) label[0] = 'Z';
        out.observable.add(uniform(-1.0, 1.0), PauliWord(label));
    }
    return out;
}

std::vector<OracleTriangleCase> oracle_triangle(const OracleTriangleOptions &opts) {
    if (opts.max_qubits == 0) throw Error(ErrorKind::InvalidArgument, "max_qubits must be >= 1");
    std::vector<OracleTriangleCase> cases;
    auto max_diff = [](std::span<const double> a, std::span<const double> b) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    };
    for (std::size_t k = 0; k < opts.programs; ++k) {
        const std::size_t n = 1 + k % opts.max_qubits;
        const auto prog = random_transmon_program(derive_seed(opts.seed, k), n, opts.degree,
                                                  opts.duration);
        const auto exact = exact_gradient(prog.circuit, prog.theta, prog.observable, opts.ode);
        const auto fd =
            finite_difference_gradient(prog.circuit, prog.theta, prog.observable, opts.ode);
        Device dev(DeviceConfig{}, opts.ode);
        const auto ode = odegen_gradient(prog.circuit, prog.theta, prog.observable, dev);

        OracleTriangleCase c;
        c.n_qubits = n;
        c.n_params = prog.theta.size();
        c.odegen_vs_exact = max_diff(ode.gradient, exact);
        c.exact_vs_fd = max_diff(exact, fd);
        c.odegen_queries = ode.resources.expectation_values;
        c.sps_vs_exact = std::numeric_limits<double>::quiet_NaN();
        if (opts.dense_nodes > 0) {
            const SpsConfig dense{opts.dense_nodes, 0, SplitMode::DenseGrid};
            const auto sps = sps_gradient(prog.circuit, prog.theta, prog.observable, dev, dense);
            c.sps_vs_exact = max_diff(sps.gradient, exact);
        }
        cases.push_back(c);
    }
    return cases;
}

} // namespace pulsegrad
