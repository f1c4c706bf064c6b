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

#include "pulsegrad/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulsegrad/errors.hpp"

namespace pulsegrad {

namespace {

constexpr Complex kI{0.0, 1.0};

double time_tolerance(double duration) { return 1e-9 * std::max(1.0, duration); }

double checked_local_time(double t, double duration) {
    const double tol = time_tolerance(duration);
    if (!(t >= -tol && t <= duration + tol)) {
        throw Error(ErrorKind::TimeOutOfRange, "t = " + std::to_string(t) +
                                                   " outside envelope window [0, " +
                                                   std::to_string(duration) + "]");
    }
    return std::clamp(t, 0.0, duration);
}

void require_slots(const Envelope &env, std::span<const double> slots) {
    if (slots.size() < slot_count(env)) {
        throw Error(ErrorKind::DimMismatch, "envelope needs " + std::to_string(slot_count(env)) +
                                                " parameter slots, got " +
                                                std::to_string(slots.size()));
    }
}

std::size_t active_bin(const PiecewiseConstantEnvelope &env, double t) {
    const double scaled = t / env.duration * static_cast<double>(env.bins);
    const auto bin = static_cast<std::size_t>(std::max(0.0, std::floor(scaled)));
    return std::min(bin, env.bins - 1);
}

// tanh(r/2)/r and its derivative divided by r; both regular at r = 0.
void saturation_factors(double r, double &h, double &k) {
    if (r < 1e-3) {
        const double r2 = r * r;
        h = 0.5 - r2 / 24.0;
        k = -1.0 / 12.0 + r2 / 60.0;
        return;
    }
    const double th = std::tanh(0.5 * r);
    const double sech2 = 1.0 - th * th;
    h = th / r;
    k = (0.5 * r * sech2 - th) / (r * r * r);
}

Complex legendre_series(const LegendreEnvelope &env, std::span<const double> slots, double x,
                        std::vector<double> &poly) {
    poly.resize(env.degree + 1);
    legendre_all(x, poly);
    Complex z{0.0, 0.0};
    for (std::size_t l = 0; l <= env.degree; ++l) {
        z += Complex{slots[2 * l], slots[2 * l + 1]} * poly[l];
    }
    return z;
}

} // namespace

std::size_t slot_count(const Envelope &env) {
    return std::visit(
        [](const auto &e) -> std::size_t {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ConstantEnvelope>) {
                return 1;
            } else if constexpr (std::is_same_v<T, PiecewiseConstantEnvelope>) {
                return 2 * e.bins;
            } else {
                return 2 * (e.degree + 1);
            }
        },
        env);
}

double envelope_duration(const Envelope &env) {
    return std::visit([](const auto &e) { return e.duration; }, env);
}

std::vector<double> envelope_discontinuities(const Envelope &env) {
    std::vector<double> out;
    if (const auto *pw = std::get_if<PiecewiseConstantEnvelope>(&env)) {
        for (std::size_t k = 1; k < pw->bins; ++k) {
            out.push_back(pw->duration * static_cast<double>(k) / static_cast<double>(pw->bins));
        }
    }
    return out;
}

Complex normalize(Complex z) {
    const double r = std::abs(z);
    if (r == 0.0) return {0.0, 0.0};
    const Complex u = z * (std::tanh(0.5 * r) / r);
    // tanh rounds to 1 for large |z|; keep the modulus bound exact
    const double m = std::abs(u);
    return m > 1.0 ? u / m : u;
}

double legendre(std::size_t degree, double x) {
    double prev = 1.0;
    if (degree == 0) return prev;
    double cur = x;
    for (std::size_t l = 1; l < degree; ++l) {
        const double ld = static_cast<double>(l);
        const double next = ((2.0 * ld + 1.0) * x * cur - ld * prev) / (ld + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

void legendre_all(double x, std::span<double> out) {
    if (out.empty()) return;
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = x;
    for (std::size_t l = 1; l + 1 < out.size(); ++l) {
        const double ld = static_cast<double>(l);
        out[l + 1] = ((2.0 * ld + 1.0) * x * out[l] - ld * out[l - 1]) / (ld + 1.0);
    }
}

Complex envelope_value(const Envelope &env, std::span<const double> slots, double t) {
    require_slots(env, slots);
    t = checked_local_time(t, envelope_duration(env));
    return std::visit(
        [&](const auto &e) -> Complex {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ConstantEnvelope>) {
                return slots[0] * std::exp(kI * e.phase);
            } else if constexpr (std::is_same_v<T, PiecewiseConstantEnvelope>) {
                const std::size_t k = active_bin(e, t);
                return slots[2 * k] * std::exp(kI * slots[2 * k + 1]);
            } else {
                thread_local std::vector<double> poly;
                const Complex z = legendre_series(e, slots, 2.0 * t / e.duration - 1.0, poly);
                return e.normalized ? normalize(z) : z;
            }
        },
        env);
}

std::vector<Complex> envelope_param_grad(const Envelope &env, std::span<const double> slots,
                                         double t) {
    require_slots(env, slots);
    t = checked_local_time(t, envelope_duration(env));
    std::vector<Complex> grad(slot_count(env), Complex{0.0, 0.0});
    std::visit(
        [&](const auto &e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ConstantEnvelope>) {
                grad[0] = std::exp(kI * e.phase);
            } else if constexpr (std::is_same_v<T, PiecewiseConstantEnvelope>) {
                const std::size_t k = active_bin(e, t);
                const Complex carrier = std::exp(kI * slots[2 * k + 1]);
                grad[2 * k] = carrier;
                grad[2 * k + 1] = kI * slots[2 * k] * carrier;
            } else {
                thread_local std::vector<double> poly;
                const Complex z = legendre_series(e, slots, 2.0 * t / e.duration - 1.0, poly);
                Complex d_re{1.0, 0.0};
                Complex d_im = kI;
                if (e.normalized) {
                    double h = 0.0;
                    double k = 0.0;
                    saturation_factors(std::abs(z), h, k);
                    d_re = h + k * z.real() * z;
                    d_im = kI * h + k * z.imag() * z;
                }
                for (std::size_t l = 0; l <= e.degree; ++l) {
                    grad[2 * l] = d_re * poly[l];
                    grad[2 * l + 1] = d_im * poly[l];
                }
            }
        },
        env);
    return grad;
}

double PulseShape::value(std::span<const double> theta, double t) const {
    const Complex u = envelope_value(envelope, theta.subspan(slot_offset, slots()), t - t_start);
    const double arg = frequency * t + phase;
    if (form == DriveForm::Sine) return amplitude * u.real() * std::sin(arg);
    return amplitude * (std::exp(kI * arg) * u).real();
}

void PulseShape::param_grad(std::span<const double> theta, double t, std::span<double> out) const {
    const auto grad = envelope_param_grad(envelope, theta.subspan(slot_offset, slots()), t - t_start);
    const double arg = frequency * t + phase;
    if (form == DriveForm::Sine) {
        const double s = amplitude * std::sin(arg);
        for (std::size_t k = 0; k < grad.size(); ++k) out[k] = s * grad[k].real();
        return;
    }
    const Complex carrier = amplitude * std::exp(kI * arg);
    for (std::size_t k = 0; k < grad.size(); ++k) out[k] = (carrier * grad[k]).real();
}

ParametrizedHamiltonian::ParametrizedHamiltonian(std::size_t n_qubits, PauliSum drift,
                                                 std::vector<Drive> drives)
    : n_qubits_(n_qubits), drift_(std::move(drift)), drives_(std::move(drives)) {
    if (n_qubits_ == 0 || n_qubits_ > kMaxDenseQubits) {
        throw Error(ErrorKind::TooLarge, "pulse Hamiltonians support 1 to 6 qubits");
    }
    dim_ = static_cast<Eigen::Index>(std::size_t{1} << n_qubits_);
    if (!drift_.empty() && drift_.n_qubits() != n_qubits_) {
        throw Error(ErrorKind::DimMismatch, "drift acts on the wrong number of qubits");
    }
    drift_matrix_ = drift_.empty() ? DenseOperator::Zero(dim_, dim_) : drift_.to_matrix();

    std::vector<std::size_t> slots;
    for (const auto &drive : drives_) {
        if (drive.generator.n_qubits() != n_qubits_) {
            throw Error(ErrorKind::DimMismatch, "drive generator acts on the wrong register");
        }
        if (!(envelope_duration(drive.shape.envelope) > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "envelope duration must be positive");
        }
        if (const auto *pw = std::get_if<PiecewiseConstantEnvelope>(&drive.shape.envelope);
            pw != nullptr && pw->bins == 0) {
            throw Error(ErrorKind::InvalidArgument, "piecewise envelope needs at least one bin");
        }
        generator_matrices_.push_back(drive.generator.to_matrix());
        for (std::size_t k = 0; k < drive.shape.slots(); ++k) {
            slots.push_back(drive.shape.slot_offset + k);
        }
        required_params_ =
            std::max(required_params_, drive.shape.slot_offset + drive.shape.slots());
    }
    std::sort(slots.begin(), slots.end());
    slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
    active_slots_ = std::move(slots);
    for (const auto &drive : drives_) {
        std::vector<std::size_t> index;
        for (std::size_t k = 0; k < drive.shape.slots(); ++k) {
            const auto it = std::lower_bound(active_slots_.begin(), active_slots_.end(),
                                             drive.shape.slot_offset + k);
            index.push_back(static_cast<std::size_t>(it - active_slots_.begin()));
        }
        drive_slot_index_.push_back(std::move(index));
    }
}

void ParametrizedHamiltonian::check_time(double t) const {
    for (const auto &drive : drives_) {
        const double tol = time_tolerance(envelope_duration(drive.shape.envelope));
        if (!(t >= drive.shape.t_start - tol && t <= drive.shape.t_end() + tol)) {
            throw Error(ErrorKind::TimeOutOfRange,
                        "t = " + std::to_string(t) + " outside drive window");
        }
    }
}

void ParametrizedHamiltonian::check_theta(std::span<const double> theta) const {
    if (theta.size() < required_params_) {
        throw Error(ErrorKind::DimMismatch, "parameter vector shorter than the program needs");
    }
}

DenseOperator ParametrizedHamiltonian::evaluate(std::span<const double> theta, double t) const {
    check_theta(theta);
    check_time(t);
    DenseOperator h = drift_matrix_;
    for (std::size_t j = 0; j < drives_.size(); ++j) {
        h += drives_[j].shape.value(theta, t) * generator_matrices_[j];
    }
    return h;
}

DenseOperator ParametrizedHamiltonian::evaluate_param_derivative(std::span<const double> theta,
                                                                 double t,
                                                                 std::size_t slot) const {
    check_theta(theta);
    check_time(t);
    DenseOperator dh = DenseOperator::Zero(dim_, dim_);
    std::vector<double> grad;
    for (std::size_t j = 0; j < drives_.size(); ++j) {
        const auto &shape = drives_[j].shape;
        if (slot < shape.slot_offset || slot >= shape.slot_offset + shape.slots()) continue;
        grad.assign(shape.slots(), 0.0);
        shape.param_grad(theta, t, grad);
        dh += grad[slot - shape.slot_offset] * generator_matrices_[j];
    }
    return dh;
}

void ParametrizedHamiltonian::evaluate_with_derivatives(std::span<const double> theta, double t,
                                                        DenseOperator &h,
                                                        std::vector<DenseOperator> &dh) const {
    check_theta(theta);
    check_time(t);
    h = drift_matrix_;
    for (auto &m : dh) m.setZero();
    thread_local std::vector<double> grad;
    for (std::size_t j = 0; j < drives_.size(); ++j) {
        const auto &shape = drives_[j].shape;
        h += shape.value(theta, t) * generator_matrices_[j];
        if (dh.empty()) continue;
        grad.assign(shape.slots(), 0.0);
        shape.param_grad(theta, t, grad);
        for (std::size_t k = 0; k < grad.size(); ++k) {
            if (grad[k] != 0.0) dh[drive_slot_index_[j][k]] += grad[k] * generator_matrices_[j];
        }
    }
}

std::vector<double> ParametrizedHamiltonian::drive_values(std::span<const double> theta,
                                                          double t) const {
    check_theta(theta);
    check_time(t);
    std::vector<double> out;
    out.reserve(drives_.size());
    for (const auto &drive : drives_) out.push_back(drive.shape.value(theta, t));
    return out;
}

std::vector<double> ParametrizedHamiltonian::breakpoints(double t0, double t1) const {
    std::vector<double> points;
    const double tol = 1e-12 * std::max(1.0, std::abs(t1 - t0));
    auto consider = [&](double p) {
        if (p > t0 + tol && p < t1 - tol) points.push_back(p);
    };
    for (const auto &drive : drives_) {
        consider(drive.shape.t_start);
        consider(drive.shape.t_end());
        for (double local : envelope_discontinuities(drive.shape.envelope)) {
            consider(drive.shape.t_start + local);
        }
    }
    std::sort(points.begin(), points.end());
    std::vector<double> merged;
    for (double p : points) {
        if (merged.empty() || p - merged.back() > tol) merged.push_back(p);
    }
    return merged;
}

bool TransmonSpec::coupled(std::size_t q, std::size_t p) const {
    return std::any_of(couplings.begin(), couplings.end(), [&](const Coupling &c) {
        return (c.q == q && c.p == p) || (c.q == p && c.p == q);
    });
}

PauliSum transmon_drift(const TransmonSpec &spec) {
    const std::size_t n = spec.n_qubits();
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "transmon system without qubits");
    PauliSum drift(n);
    for (std::size_t q = 0; q < n; ++q) {
        drift.add(-0.5 * spec.frequencies[q], PauliWord::single(n, q, 'Z'));
    }
    for (const auto &c : spec.couplings) {
        if (c.q >= n || c.p >= n || c.q == c.p) {
            throw Error(ErrorKind::BadQubitIndex, "coupling (" + std::to_string(c.q) + ", " +
                                                      std::to_string(c.p) + ") is invalid");
        }
        drift.add(c.strength, PauliWord::from_ops(n, {{c.q, 'X'}, {c.p, 'X'}}));
        drift.add(c.strength, PauliWord::from_ops(n, {{c.q, 'Y'}, {c.p, 'Y'}}));
    }
    return drift;
}

ParametrizedHamiltonian transmon_hamiltonian(const TransmonSpec &spec,
                                             const std::vector<DriveChannel> &channels) {
    const std::size_t n = spec.n_qubits();
    PauliSum drift = transmon_drift(spec);
    std::vector<Drive> drives;
    for (const auto &ch : channels) {
        if (ch.qubit >= n) {
            throw Error(ErrorKind::BadQubitIndex,
                        "drive on qubit " + std::to_string(ch.qubit) + " of " + std::to_string(n));
        }
        if (ch.shape.amplitude < 0.0) {
            throw Error(ErrorKind::InvalidArgument, "maximum drive amplitude must be >= 0");
        }
        PauliSum generator(n);
        generator.add(1.0, PauliWord::single(n, ch.qubit, 'Y'));
        drives.push_back(Drive{ch.shape, std::move(generator)});
    }
    return ParametrizedHamiltonian(n, std::move(drift), std::move(drives));
}

} // namespace pulsegrad
