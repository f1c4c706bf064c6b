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

#include "pulsegrad/evolution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "pulsegrad/errors.hpp"

namespace pulsegrad {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - 0.75 * kBeta;

using State = Eigen::MatrixXcd;

// Right-hand side of the augmented system Y = [U | dU_1 | ... | dU_K].
class AugmentedSystem {
  public:
    AugmentedSystem(const ParametrizedHamiltonian &h, std::span<const double> theta,
                    bool with_sensitivity, double t0, bool interaction_frame)
        : h_(h), theta_(theta), dim_(h.dim()),
          n_sens_(with_sensitivity ? h.active_slots().size() : 0), t0_(t0),
          frame_(interaction_frame) {
        hmat_ = DenseOperator::Zero(dim_, dim_);
        work_ = DenseOperator::Zero(dim_, dim_);
        const std::size_t n_drives = h.drives().size();
        if (frame_) {
            Eigen::SelfAdjointEigenSolver<DenseOperator> eig(h.drift_matrix());
            basis_ = eig.eigenvectors();
            energies_ = eig.eigenvalues();
            phase_.resize(dim_);
            for (std::size_t j = 0; j < n_drives; ++j) {
                rotated_.push_back(basis_.adjoint() * h.generator_matrix(j) * basis_);
            }
            generators_.assign(n_drives, DenseOperator::Zero(dim_, dim_));
        } else {
            for (std::size_t j = 0; j < n_drives; ++j) generators_.push_back(h.generator_matrix(j));
        }
        grads_.resize(n_drives);
        for (std::size_t j = 0; j < n_drives; ++j) grads_[j].assign(h.drives()[j].shape.slots(), 0.0);
    }

    [[nodiscard]] Eigen::Index dim() const { return dim_; }
    [[nodiscard]] std::size_t n_sens() const { return n_sens_; }

    void operator()(double t, const State &y, State &dy) {
        const auto &drives = h_.drives();
        if (frame_) {
            hmat_.setZero();
            for (Eigen::Index a = 0; a < dim_; ++a) {
                phase_(a) = std::exp(Complex{0.0, energies_(a) * (t - t0_)});
            }
            for (std::size_t j = 0; j < drives.size(); ++j) {
                generators_[j] = rotated_[j].cwiseProduct(phase_ * phase_.adjoint());
            }
        } else {
            hmat_ = h_.drift_matrix();
        }
        for (std::size_t j = 0; j < drives.size(); ++j) {
            const double f = drives[j].shape.value(theta_, t);
            if (f != 0.0) hmat_ += f * generators_[j];
        }
        dy.noalias() = hmat_ * y;
        if (n_sens_ > 0) {
            const auto u = y.leftCols(dim_);
            for (std::size_t j = 0; j < drives.size(); ++j) {
                auto &grad = grads_[j];
                std::fill(grad.begin(), grad.end(), 0.0);
                drives[j].shape.param_grad(theta_, t, grad);
                if (std::all_of(grad.begin(), grad.end(), [](double g) { return g == 0.0; })) {
                    continue;
                }
                work_.noalias() = generators_[j] * u;
                const auto &pos = h_.drive_slot_positions(j);
                for (std::size_t k = 0; k < grad.size(); ++k) {
                    if (grad[k] == 0.0) continue;
                    dy.middleCols(static_cast<Eigen::Index>(pos[k] + 1) * dim_, dim_) +=
                        grad[k] * work_;
                }
            }
        }
        dy *= kMinusI;
    }

    // Maps every block of the state back to the lab frame at time t.
    void to_lab(State &y, double t) const {
        if (!frame_) return;
        Eigen::VectorXcd back(dim_);
        for (Eigen::Index a = 0; a < dim_; ++a) {
            back(a) = std::exp(kMinusI * (energies_(a) * (t - t0_)));
        }
        const DenseOperator left = basis_ * back.asDiagonal();
        for (Eigen::Index b = 0; b * dim_ < y.cols(); ++b) {
            auto block = y.middleCols(b * dim_, dim_);
            block = (left * block * basis_.adjoint()).eval();
        }
    }

  private:
    const ParametrizedHamiltonian &h_;
    std::span<const double> theta_;
    Eigen::Index dim_;
    std::size_t n_sens_;
    double t0_;
    bool frame_;
    DenseOperator hmat_;
    DenseOperator work_;
    // drive generators in the integration frame at the current stage time
    std::vector<DenseOperator> generators_;
    std::vector<std::vector<double>> grads_;
    DenseOperator basis_;
    Eigen::VectorXd energies_;
    std::vector<DenseOperator> rotated_;
    Eigen::VectorXcd phase_;
};

double error_norm(const State &err, const State &y0, const State &y1, double atol, double rtol) {
    const Eigen::Index n = err.size();
    const Complex *e = err.data();
    const Complex *p = y0.data();
    const Complex *q = y1.data();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sr = atol + rtol * std::max(std::abs(p[i].real()), std::abs(q[i].real()));
        const double si = atol + rtol * std::max(std::abs(p[i].imag()), std::abs(q[i].imag()));
        const double xr = e[i].real() / sr;
        const double xi = e[i].imag() / si;
        sum = std::max({sum, std::abs(xr), std::abs(xi)});
    }
    return sum;
}

double scaled_norm(const State &v, const State &y, double atol, double rtol) {
    return error_norm(v, y, y, atol, rtol);
}

class Integrator {
  public:
    Integrator(AugmentedSystem &sys, const OdeConfig &cfg) : sys_(sys), cfg_(cfg) {}

    void integrate(State &y, double t0, double t1, const std::vector<double> &breaks) {
        std::vector<double> nodes;
        nodes.push_back(t0);
        nodes.insert(nodes.end(), breaks.begin(), breaks.end());
        nodes.push_back(t1);
        for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
            segment(y, nodes[s], nodes[s + 1]);
        }
    }

    std::size_t accepted = 0;
    std::size_t rejected = 0;

  private:
    // Stage times at a segment edge are pulled inside so that piecewise
    // envelopes use the bin belonging to this segment.
    void eval(double t, const State &y, State &dy) {
        const double lo = a_ + edge_;
        const double hi = b_ - edge_;
        sys_(std::clamp(t, lo, hi), y, dy);
    }

    double initial_step(const State &y, const State &f0, double span) {
        if (cfg_.initial_step > 0.0) return std::min(cfg_.initial_step, span);
        const double d0 = scaled_norm(y, y, cfg_.atol, cfg_.rtol);
        const double d1 = scaled_norm(f0, y, cfg_.atol, cfg_.rtol);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        State y1 = y + h0 * f0;
        State f1(y.rows(), y.cols());
        eval(a_ + h0, y1, f1);
        const double d2 = scaled_norm(State(f1 - f0), y, cfg_.atol, cfg_.rtol) / h0;
        const double dmax = std::max(d1, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        return std::min({100.0 * h0, h1, span});
    }

    void segment(State &y, double a, double b) {
        a_ = a;
        b_ = b;
        edge_ = 1e-10 * (b - a);
        const Eigen::Index rows = y.rows();
        const Eigen::Index cols = y.cols();
        State k1(rows, cols), k2(rows, cols), k3(rows, cols), k4(rows, cols), k5(rows, cols),
            k6(rows, cols), k7(rows, cols), tmp(rows, cols), ynew(rows, cols), err(rows, cols);
        eval(a, y, k1);
        double h = step_ > 0.0 ? std::min(step_, b - a) : initial_step(y, k1, b - a);
        double t = a;
        double err_old = 1e-4;
        bool last_rejected = false;
        while (t < b) {
            if (accepted + rejected >= cfg_.max_steps) {
                throw Error(ErrorKind::StepLimitExceeded,
                            "exceeded " + std::to_string(cfg_.max_steps) + " integrator steps");
            }
            bool final_step = false;
            if (t + h >= b || (b - (t + h)) < 1e-12 * (b - a)) {
                h = b - t;
                final_step = true;
            }
            tmp = y + h * a21 * k1;
            eval(t + c2 * h, tmp, k2);
            tmp = y + h * (a31 * k1 + a32 * k2);
            eval(t + c3 * h, tmp, k3);
            tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            eval(t + c4 * h, tmp, k4);
            tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            eval(t + c5 * h, tmp, k5);
            tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            eval(t + h, tmp, k6);
            ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const double t_new = final_step ? b : t + h;
            eval(t_new, ynew, k7);
            err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double norm = error_norm(err, y, ynew, cfg_.atol, cfg_.rtol);
            if (!std::isfinite(norm) || !ynew.allFinite()) {
                throw Error(ErrorKind::NonFiniteState, "non-finite value in propagator state");
            }
            if (norm <= 1.0) {
                ++accepted;
                t = t_new;
                y.swap(ynew);
                k1.swap(k7);
                double factor = norm == 0.0
                                    ? kMaxFactor
                                    : kSafety * std::pow(norm, -kAlpha) * std::pow(err_old, kBeta);
                factor = std::clamp(factor, kMinFactor, kMaxFactor);
                if (last_rejected) factor = std::min(factor, 1.0);
                err_old = std::max(norm, 1e-4);
                h *= factor;
                if (!final_step) step_ = h;
                last_rejected = false;
            } else {
                ++rejected;
                h *= std::max(kMinFactor, kSafety * std::pow(norm, -0.2));
                last_rejected = true;
                if (h < 1e-14 * std::max(1.0, std::abs(b))) {
                    throw Error(ErrorKind::StepLimitExceeded, "step size underflow");
                }
            }
        }
    }

    AugmentedSystem &sys_;
    const OdeConfig &cfg_;
    double a_ = 0.0;
    double b_ = 0.0;
    double edge_ = 0.0;
    double step_ = 0.0;
};

PropagatorResult propagate(const ParametrizedHamiltonian &h, std::span<const double> theta,
                           double t0, double t1, const OdeConfig &cfg, bool with_sensitivity) {
    cfg.validate();
    if (!(t1 > t0)) {
        throw Error(ErrorKind::InvalidArgument, "propagation window needs t1 > t0");
    }
    if (theta.size() < h.required_params()) {
        throw Error(ErrorKind::DimMismatch, "parameter vector shorter than the program needs");
    }
    AugmentedSystem sys(h, theta, with_sensitivity, t0, cfg.interaction_frame);
    const Eigen::Index dim = sys.dim();
    const auto blocks = static_cast<Eigen::Index>(1 + sys.n_sens());
    State y = State::Zero(dim, dim * blocks);
    y.leftCols(dim).setIdentity();

    Integrator integrator(sys, cfg);
    integrator.integrate(y, t0, t1, h.breakpoints(t0, t1));
    sys.to_lab(y, t1);

    PropagatorResult out;
    out.unitary = y.leftCols(dim);
    out.steps_accepted = integrator.accepted;
    out.steps_rejected = integrator.rejected;
    if (with_sensitivity) {
        out.sensitivities.assign(theta.size(), DenseOperator::Zero(dim, dim));
        const auto &slots = h.active_slots();
        for (std::size_t k = 0; k < slots.size(); ++k) {
            out.sensitivities[slots[k]] = y.middleCols(static_cast<Eigen::Index>(k + 1) * dim, dim);
        }
    }
    if (cfg.renormalize_unitary) out.unitary = polar_unitary(out.unitary);
    return out;
}

struct GaussRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

GaussRule gauss_legendre(std::size_t n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t l = 1; l < n; ++l) {
                const double ld = static_cast<double>(l);
                const double p2 = ((2.0 * ld + 1.0) * x * p1 - ld * p0) / (ld + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

} // namespace

void OdeConfig::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "ODE tolerances must be positive");
    }
    if (max_steps < 1) throw Error(ErrorKind::InvalidArgument, "max_steps must be >= 1");
    if (initial_step < 0.0) throw Error(ErrorKind::InvalidArgument, "initial_step must be >= 0");
}

PropagatorResult evolve(const ParametrizedHamiltonian &h, std::span<const double> theta, double t0,
                        double t1, const OdeConfig &cfg) {
    return propagate(h, theta, t0, t1, cfg, false);
}

PropagatorResult evolve_with_sensitivity(const ParametrizedHamiltonian &h,
                                         std::span<const double> theta, double t0, double t1,
                                         const OdeConfig &cfg) {
    return propagate(h, theta, t0, t1, cfg, true);
}

DenseOperator gradient_quadrature_oracle(const ParametrizedHamiltonian &h,
                                         std::span<const double> theta, double t0, double t1,
                                         std::size_t slot, std::size_t n_panels,
                                         const OdeConfig &cfg) {
    if (n_panels < 2) throw Error(ErrorKind::InvalidArgument, "quadrature needs >= 2 panels");
    if (!(t1 > t0)) throw Error(ErrorKind::InvalidArgument, "propagation window needs t1 > t0");
    const Eigen::Index dim = h.dim();
    const auto &slots = h.active_slots();
    if (!std::binary_search(slots.begin(), slots.end(), slot)) {
        return DenseOperator::Zero(dim, dim);
    }

    // Panels never straddle a discontinuity.
    std::vector<double> edges{t0};
    for (double b : h.breakpoints(t0, t1)) edges.push_back(b);
    edges.push_back(t1);
    std::vector<double> panel_edges{t0};
    std::size_t used = 0;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double len = edges[s + 1] - edges[s];
        std::size_t count = s + 2 == edges.size()
                                ? std::max<std::size_t>(1, n_panels > used ? n_panels - used : 1)
                                : std::max<std::size_t>(
                                      1, static_cast<std::size_t>(std::llround(
                                             static_cast<double>(n_panels) * len / (t1 - t0))));
        used += count;
        for (std::size_t p = 1; p <= count; ++p) {
            panel_edges.push_back(edges[s] + len * static_cast<double>(p) /
                                                 static_cast<double>(count));
        }
    }
    panel_edges.back() = t1;

    const GaussRule rule = gauss_legendre(8);
    std::vector<double> taus;
    std::vector<double> weights;
    for (std::size_t p = 0; p + 1 < panel_edges.size(); ++p) {
        const double lo = panel_edges[p];
        const double half = 0.5 * (panel_edges[p + 1] - lo);
        for (std::size_t i = rule.nodes.size(); i-- > 0;) {
            taus.push_back(lo + half * (rule.nodes[i] + 1.0));
            weights.push_back(half * rule.weights[i]);
        }
    }

    std::vector<DenseOperator> forward; // U(tau_i, t0)
    forward.reserve(taus.size());
    DenseOperator current = DenseOperator::Identity(dim, dim);
    double t_prev = t0;
    for (double tau : taus) {
        if (tau > t_prev) current = evolve(h, theta, t_prev, tau, cfg).unitary * current;
        forward.push_back(current);
        t_prev = tau;
    }
    const DenseOperator total = evolve(h, theta, t_prev, t1, cfg).unitary * current;

    DenseOperator acc = DenseOperator::Zero(dim, dim);
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const DenseOperator back = total * forward[i].adjoint(); // U(t1, tau)
        acc += weights[i] * (back * h.evaluate_param_derivative(theta, taus[i], slot) * forward[i]);
    }
    return kMinusI * acc;
}

double unitarity_error(const DenseOperator &u) {
    return (u.adjoint() * u - DenseOperator::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

DenseOperator polar_unitary(const DenseOperator &u) {
    Eigen::SelfAdjointEigenSolver<DenseOperator> eig(u.adjoint() * u);
    const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseSqrt().cwiseInverse();
    return u * eig.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() *
           eig.eigenvectors().adjoint();
}

DenseOperator hermitian_exp(const DenseOperator &h, double dt) {
    Eigen::SelfAdjointEigenSolver<DenseOperator> eig(h);
    Eigen::VectorXcd phases(eig.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
        phases(i) = std::exp(kMinusI * (dt * eig.eigenvalues()(i)));
    }
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

DenseOperator trotter_propagator(const ParametrizedHamiltonian &h, std::span<const double> theta,
                                 double t0, double t1, std::size_t n_steps) {
    if (n_steps == 0) throw Error(ErrorKind::InvalidArgument, "n_steps must be positive");
    const double dt = (t1 - t0) / static_cast<double>(n_steps);
    DenseOperator u = DenseOperator::Identity(h.dim(), h.dim());
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = t0 + (static_cast<double>(k) + 0.5) * dt;
        u = hermitian_exp(h.evaluate(theta, t), dt) * u;
    }
    return u;
}

} // namespace pulsegrad
