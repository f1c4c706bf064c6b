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

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "pulsegrad/errors.hpp"
#include "pulsegrad/experiments.hpp"
#include "pulsegrad/gradients.hpp"
#include "support/programs.hpp"

using namespace pulsegrad;
using Catch::Matchers::WithinAbs;
using testing::max_abs;
using testing::max_abs_diff;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.kind();
    }
    FAIL("expected pulsegrad::Error");
    return ErrorKind::InvalidArgument;
}

// H = theta * amplitude * word over [0, duration], no drift.
std::shared_ptr<const ParametrizedHamiltonian> linear_pulse(std::size_t n, const std::string &word,
                                                            double amplitude, double duration) {
    PulseShape shape;
    shape.envelope = ConstantEnvelope{duration, 0.0};
    shape.amplitude = amplitude;
    Drive d{shape, PauliSum(n, {{1.0, word}})};
    return std::make_shared<const ParametrizedHamiltonian>(n, PauliSum(n), std::vector<Drive>{d});
}

EffectiveGenerator generator_of(std::size_t param, const DenseOperator &m) {
    return EffectiveGenerator{param, m, 0.0};
}

} // namespace

TEST_CASE("effective generators: closed forms", "[gradients]") {
    const double T = 3.0;
    const auto h = linear_pulse(1, "X", 1.0, T);
    const std::vector<double> theta{0.37};
    const auto prop = evolve_with_sensitivity(*h, theta, 0.0, T);
    const auto gens = effective_generators(prop, default_gen_tol({}));
    REQUIRE(gens.size() == 1);
    CHECK(max_abs(gens[0].matrix - T * to_matrix(PauliWord("X"))) < 1e-8);

    PropagatorResult still;
    still.unitary = DenseOperator::Identity(2, 2);
    still.sensitivities = {DenseOperator::Zero(2, 2)};
    const auto zero = effective_generators(still, 1e-6);
    CHECK(max_abs(zero[0].matrix) == 0.0);
    CHECK(zero[0].residue == 0.0);
}

TEST_CASE("effective generators: errors", "[gradients]") {
    const auto h = linear_pulse(1, "X", 1.0, 1.0);
    const std::vector<double> theta{0.2};
    const auto plain = evolve(*h, theta, 0.0, 1.0);
    CHECK(kind_of([&] { (void)effective_generators(plain, 1e-6); }) ==
          ErrorKind::MissingSensitivities);

    PropagatorResult bad;
    bad.unitary = DenseOperator::Identity(2, 2);
    bad.sensitivities = {DenseOperator::Identity(2, 2)};
    CHECK(kind_of([&] { (void)effective_generators(bad, 1e-6); }) ==
          ErrorKind::GeneratorNotHermitian);
    const std::vector<std::size_t> out_of_range{3};
    CHECK(kind_of([&] { (void)effective_generators(bad, out_of_range, 1e-6); }) ==
          ErrorKind::BadIndex);
}

TEST_CASE("effective generators of transmon pulses reproduce sensitivities", "[gradients][oracle]") {
    CHECK(default_gen_tol({}) == 1e-6);
    OdeConfig loose;
    loose.rtol = 1e-6;
    CHECK_THAT(default_gen_tol(loose), WithinAbs(1e-4, 1e-18));

    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 3; ++rep) {
        auto prog = testing::random_legendre_program(rng, 2, 3, 10.0, false);
        const auto &gate = prog.circuit.pulse_gate(prog.circuit.pulse_gate_indices()[0]);
        const auto prop = evolve_with_sensitivity(*gate.hamiltonian, prog.theta, gate.t0, gate.t1);
        const auto gens = effective_generators(prop, default_gen_tol({}));
        REQUIRE(gens.size() == prog.theta.size());
        for (const auto &g : gens) {
            CHECK(g.residue < 1e-6);
            CHECK(anti_hermitian_residue(g.matrix) == 0.0);
            const DenseOperator rebuilt = Complex(0.0, -1.0) * prop.unitary * g.matrix;
            CHECK(max_abs(rebuilt - prop.sensitivities[g.param]) < 1e-6);
        }
    }
}

TEST_CASE("effective generators of commuting programs", "[gradients][property]") {
    // Z drift plus Legendre drives on Z and ZZ: everything commutes, so
    // H_j = (int df/dtheta_j dt) G.
    const std::size_t n = 2;
    const double T = 4.0;
    std::vector<Drive> drives;
    const char *words[] = {"ZI", "ZZ"};
    for (int k = 0; k < 2; ++k) {
        PulseShape s;
        s.envelope = LegendreEnvelope{2, T, false};
        s.slot_offset = static_cast<std::size_t>(k) * 6;
        s.amplitude = 0.7 + 0.2 * k;
        s.frequency = 1.3 - k;
        drives.push_back(Drive{s, PauliSum(n, {{1.0, words[k]}})});
    }
    const ParametrizedHamiltonian h(n, PauliSum(n, {{-2.0, "ZI"}, {-1.5, "IZ"}}), drives);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal(0.0, 0.5);
    std::vector<double> theta(12);
    for (auto &t : theta) t = normal(rng);

    const auto prop = evolve_with_sensitivity(h, theta, 0.0, T);
    const auto gens = effective_generators(prop, default_gen_tol({}));

    // composite Simpson on the control derivatives
    const int panels = 4000;
    std::vector<double> integral(12, 0.0);
    std::vector<double> g(6);
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i <= panels; ++i) {
            const double t = std::min(T * i / panels, T);
            const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            drives[k].shape.param_grad(theta, t, g);
            for (std::size_t s = 0; s < 6; ++s) {
                integral[k * 6 + s] += w * g[s] * T / (3.0 * panels);
            }
        }
    }
    for (const auto &gen : gens) {
        const DenseOperator expected =
            integral[gen.param] * to_matrix(PauliWord(words[gen.param / 6]));
        CHECK(max_abs(gen.matrix - expected) < 1e-8);
    }
}

TEST_CASE("build_odegen_plan", "[gradients]") {
    const DenseOperator zero = DenseOperator::Zero(2, 2);
    const std::vector<EffectiveGenerator> none{generator_of(0, zero), generator_of(1, zero)};
    const auto empty = build_odegen_plan(none, 1);
    CHECK(empty.words.empty());
    CHECK(empty.expected_queries() == 0);
    CHECK(resources_odegen(empty) == 0);

    const DenseOperator x = to_matrix(PauliWord("X"));
    const std::vector<EffectiveGenerator> shared{generator_of(0, 0.3 * x), generator_of(1, 0.7 * x)};
    const auto one = build_odegen_plan(shared, 1);
    REQUIRE(one.words.size() == 1);
    CHECK(one.words[0] == PauliWord("X"));
    CHECK(one.expected_queries() == 2);
    CHECK_THAT(one.coefficients.at(0)[0], WithinAbs(0.3, 1e-15));
    CHECK_THAT(one.coefficients.at(1)[0], WithinAbs(0.7, 1e-15));

    // identity component never reaches the shift set
    const DenseOperator shifted = 2.0 * DenseOperator::Identity(2, 2) + 0.5 * x;
    const std::vector<EffectiveGenerator> with_id{generator_of(0, shifted)};
    CHECK(build_odegen_plan(with_id, 1).words == std::vector<PauliWord>{PauliWord("X")});

    // every two-qubit word present
    std::mt19937_64 rng(17);
    DenseOperator dense = DenseOperator::Zero(4, 4);
    const char ops[] = {'I', 'X', 'Y', 'Z'};
    for (char a : ops) {
        for (char b : ops) {
            dense += testing::uniform(rng, 0.1, 1.0) * to_matrix(PauliWord(std::string{a, b}));
        }
    }
    const std::vector<EffectiveGenerator> full{generator_of(0, dense)};
    const auto plan = build_odegen_plan(full, 2);
    CHECK(plan.words.size() == 15);
    CHECK(plan.expected_queries() == 30);
    CHECK(resources_odegen(plan) == 30);

    // truncation
    const DenseOperator mixed = 1e-3 * x + 0.4 * to_matrix(PauliWord("Z"));
    const std::vector<EffectiveGenerator> small{generator_of(0, mixed)};
    const auto cut = build_odegen_plan(small, 1, 1e-2);
    CHECK(cut.words == std::vector<PauliWord>{PauliWord("Z")});
    for (const auto &[param, row] : cut.coefficients) {
        for (double w : row) CHECK(std::abs(w) > cut.atol_coeff);
    }

    const DenseOperator skew = Complex(0.0, 1.0) * x;
    const std::vector<EffectiveGenerator> not_herm{generator_of(0, skew)};
    CHECK(kind_of([&] { (void)build_odegen_plan(not_herm, 1); }) == ErrorKind::NotHermitian);
}

TEST_CASE("odegen closed form for a single X drive", "[gradients]") {
    const double omega = 0.8;
    const double T = 2.5;
    Circuit c(1);
    c.add(PulseGate{linear_pulse(1, "X", omega / 2, T), 0.0, T});
    const PauliSum z(1, {{1.0, "Z"}});
    for (double th : {0.0, 0.3, -1.1, 2.0}) {
        const std::vector<double> theta{th};
        Device dev;
        CHECK_THAT(dev.expectation(c, theta, z), WithinAbs(std::cos(th * omega * T), 1e-8));
        const auto res = odegen_gradient(c, theta, z, dev);
        CHECK_THAT(res.gradient[0], WithinAbs(-omega * T * std::sin(th * omega * T), 1e-7));
        CHECK(res.resources.expectation_values == 2);
    }
}

TEST_CASE("oracle triangle on random programs", "[gradients][oracle]") {
    std::mt19937_64 rng(2024);
    double worst_odegen = 0.0;
    double worst_sps = 0.0;
    double worst_fd = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = rep % 2 ? 2 : 1;
        auto prog = testing::random_legendre_program(rng, n, 2, 4.0, true);
        const auto exact = exact_gradient(prog.circuit, prog.theta, prog.observable);
        const auto fd = finite_difference_gradient(prog.circuit, prog.theta, prog.observable);
        Device dev;
        const auto ode = odegen_gradient(prog.circuit, prog.theta, prog.observable, dev);
        SpsConfig dense{512, 0, SplitMode::DenseGrid};
        const auto sps = sps_gradient(prog.circuit, prog.theta, prog.observable, dev, dense);
        worst_odegen = std::max(worst_odegen, max_abs_diff(ode.gradient, exact));
        worst_sps = std::max(worst_sps, max_abs_diff(sps.gradient, exact));
        worst_fd = std::max(worst_fd, max_abs_diff(fd, exact));
    }
    INFO("odegen " << worst_odegen << " sps " << worst_sps << " fd " << worst_fd);
    CHECK(worst_odegen <= 1e-6);
    CHECK(worst_sps <= 1e-3);
    CHECK(worst_fd <= 1e-4);
}

TEST_CASE("odegen is unchanged by truncating true zeros", "[gradients][property]") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 3; ++rep) {
        auto prog = testing::random_legendre_program(rng, 2, 2, 5.0, true);
        Device dev;
        const auto a = odegen_gradient(prog.circuit, prog.theta, prog.observable, dev,
                                       OdegenOptions{0.0, 0.0});
        const auto b = odegen_gradient(prog.circuit, prog.theta, prog.observable, dev,
                                       OdegenOptions{1e-14, 0.0});
        CHECK(max_abs_diff(a.gradient, b.gradient) <= 1e-12);
    }
}

TEST_CASE("odegen query count equals the plan resources", "[gradients][property]") {
    std::mt19937_64 rng(41);
    for (std::size_t degree : {1u, 3u, 5u}) {
        auto prog = testing::random_legendre_program(rng, 2, degree, 5.0, false);
        const std::size_t g = prog.circuit.pulse_gate_indices()[0];
        const auto plan = plan_pulse_gate(prog.circuit, g, prog.theta, OdeConfig{});
        Device dev;
        const std::vector<OdegenPlan> plans{plan};
        const auto res = odegen_gradient(prog.circuit, prog.theta, prog.observable, dev, plans);
        CHECK(dev.queries() == resources_odegen(plan));
        CHECK(res.resources.expectation_values == resources_odegen(plans));
        CHECK(plan.words.size() <= 15);
    }
}

TEST_CASE("odegen shift words lie in the drift-inclusive closure", "[gradients][property]") {
    std::mt19937_64 rng(53);
    auto prog = testing::random_legendre_program(rng, 2, 3, 10.0, false);
    const std::size_t g = prog.circuit.pulse_gate_indices()[0];
    const auto &h = *prog.circuit.pulse_gate(g).hamiltonian;
    std::vector<PauliWord> drive_words;
    std::vector<PauliWord> all_words;
    for (const auto &d : h.drives()) {
        for (const auto &[w, c] : d.generator.terms()) drive_words.push_back(w);
    }
    all_words = drive_words;
    for (const auto &[w, c] : h.drift().terms()) all_words.push_back(w);
    const auto closure = dla_closure(all_words);
    const auto drive_only = dla_closure(drive_words);
    const auto plan = plan_pulse_gate(prog.circuit, g, prog.theta, OdeConfig{});
    REQUIRE_FALSE(plan.words.empty());
    for (const auto &w : plan.words) CHECK(closure.contains(w));
    CHECK(plan.words.size() <= closure.dimension);
    for (const auto &w : plan.outside_drive_dla) CHECK_FALSE(drive_only.contains(w));
    // the coupled system leaves the span of {YI, IY}
    CHECK_FALSE(plan.outside_drive_dla.empty());
}

TEST_CASE("sps with a silent drive gives zero gradient", "[gradients]") {
    const auto h = linear_pulse(1, "X", 0.0, 2.0);
    Circuit c(1);
    c.add(rotation(1, {{0, 'Y'}}, 0.4));
    c.add(PulseGate{h, 0.0, 2.0});
    const std::vector<double> theta{0.9};
    const PauliSum obs(1, {{1.0, "Z"}, {0.5, "X"}});
    for (std::uint64_t seed : {0u, 1u, 99u}) {
        Device dev;
        const auto res = sps_gradient(c, theta, obs, dev, SpsConfig{8, seed});
        CHECK(res.gradient[0] == 0.0);
        CHECK(res.resources.expectation_values == 16);
    }
}

TEST_CASE("sps monte carlo is unbiased", "[gradients][statistics]") {
    std::mt19937_64 rng(61);
    auto prog = testing::random_legendre_program(rng, 1, 1, 3.0, true);
    const auto exact = exact_gradient(prog.circuit, prog.theta, prog.observable);
    const std::size_t p = exact.size();
    std::vector<double> sum(p, 0.0);
    std::vector<double> sum_sq(p, 0.0);
    const int seeds = 1000;
    Device dev;
    for (int s = 0; s < seeds; ++s) {
        const auto res = sps_gradient(prog.circuit, prog.theta, prog.observable, dev,
                                      SpsConfig{8, static_cast<std::uint64_t>(s)});
        CHECK(res.resources.expectation_values == resources_sps(8, 1));
        for (std::size_t k = 0; k < p; ++k) {
            sum[k] += res.gradient[k];
            sum_sq[k] += res.gradient[k] * res.gradient[k];
        }
    }
    for (std::size_t k = 0; k < p; ++k) {
        const double mean = sum[k] / seeds;
        const double var = (sum_sq[k] - seeds * mean * mean) / (seeds - 1);
        const double se = std::sqrt(var / seeds);
        INFO("param " << k << " mean " << mean << " exact " << exact[k] << " se " << se);
        CHECK(std::abs(mean - exact[k]) <= 3.0 * se + 1e-9);
    }
}

TEST_CASE("sps standard deviation falls as one over root N_s", "[gradients][statistics]") {
    std::mt19937_64 rng(67);
    auto prog = testing::random_legendre_program(rng, 1, 1, 3.0, true);
    const std::vector<std::size_t> counts{4, 8, 16, 32, 64, 128};
    const auto table = snr_study(prog.circuit, prog.observable, prog.theta, counts, 100,
                                 *std::make_unique<Device>(), SplitMode::MonteCarlo, 7);
    for (std::size_t k = 0; k < prog.theta.size(); ++k) {
        std::vector<double> x;
        std::vector<double> y;
        for (const auto &row : table.rows) {
            if (row.param != k) continue;
            x.push_back(static_cast<double>(row.n_samples));
            y.push_back(row.std);
        }
        REQUIRE(x.size() == counts.size());
        const double slope = loglog_slope(x, y);
        INFO("param " << k << " slope " << slope);
        CHECK(slope >= -0.6);
        CHECK(slope <= -0.4);
    }
}

TEST_CASE("sps rejects non-Pauli drive generators", "[gradients]") {
    PulseShape shape;
    shape.envelope = ConstantEnvelope{1.0, 0.0};
    Drive d{shape, PauliSum(1, {{0.5, "X"}, {0.5, "Y"}})};
    auto h = std::make_shared<const ParametrizedHamiltonian>(1, PauliSum(1), std::vector<Drive>{d});
    Circuit c(1);
    c.add(PulseGate{h, 0.0, 1.0});
    Device dev;
    const std::vector<double> theta{0.1};
    CHECK(kind_of([&] {
              (void)sps_gradient(c, theta, PauliSum(1, {{1.0, "Z"}}), dev, SpsConfig{});
          }) == ErrorKind::NonPauliGenerator);
    CHECK(kind_of([&] {
              (void)sps_gradient(c, theta, PauliSum(1, {{1.0, "Z"}}), dev, SpsConfig{0});
          }) == ErrorKind::InvalidArgument);
    // ODEgen has no such restriction
    const auto res = odegen_gradient(c, theta, PauliSum(1, {{1.0, "Z"}}), dev);
    const auto exact = exact_gradient(c, theta, PauliSum(1, {{1.0, "Z"}}));
    CHECK_THAT(res.gradient[0], WithinAbs(exact[0], 1e-7));
}

TEST_CASE("two_term_shift", "[gradients]") {
    const auto cosine = [](std::span<const double> t) { return std::cos(t[0]); };
    const std::vector<double> zero{0.0};
    const std::vector<double> quarter{kPi / 2};
    CHECK(std::abs(two_term_shift(cosine, zero, 0)) < 1e-16);
    CHECK_THAT(two_term_shift(cosine, quarter, 0), WithinAbs(-1.0, 1e-15));
    CHECK(kind_of([&] { (void)two_term_shift(cosine, zero, 1); }) == ErrorKind::BadIndex);

    Circuit ry(1);
    DigitalRotation r = rotation(1, {{0, 'Y'}}, 0.0);
    r.slot = 0;
    ry.add(r);
    const PauliSum z(1, {{1.0, "Z"}});
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        const std::vector<double> theta{testing::uniform(rng, -kPi, kPi)};
        Device dev;
        const auto loss = [&](std::span<const double> t) { return dev.expectation(ry, t, z); };
        CHECK_THAT(two_term_shift(loss, theta, 0), WithinAbs(-std::sin(theta[0]), 1e-12));
        // gradients engines route trainable rotations through the same rule
        CHECK_THAT(odegen_gradient(ry, theta, z, dev).gradient[0],
                   WithinAbs(-std::sin(theta[0]), 1e-12));
        CHECK_THAT(sps_gradient(ry, theta, z, dev, SpsConfig{}).gradient[0],
                   WithinAbs(-std::sin(theta[0]), 1e-12));
    }
}

TEST_CASE("resource formulas", "[gradients]") {
    CHECK(resources_sps(8, 2) == 32);
    CHECK(resources_sps(20, 2) == 80);
    CHECK(resources_sps(1, 1, 1) == 2);
    CHECK(resources_odegen(OdegenPlan{}) == 0);

    const TransmonSpec spec{{2 * kPi * 5.0, 2 * kPi * 4.8}, {Coupling{0, 1, 2 * kPi * 0.02}}};
    LegendrePulseOptions opts;
    opts.max_amplitudes = {2 * kPi * 0.2, 2 * kPi * 0.2};
    const auto c = legendre_pulse_circuit(spec, opts);
    CHECK(count_drive_generators(c) == 2);
    Device dev;
    const auto theta = gaussian_init(c.n_params(), 1);
    const auto res = sps_gradient(c, theta, toy_hamiltonian(), dev, SpsConfig{8, 3});
    CHECK(res.resources.expectation_values == 32);
    CHECK(dev.queries() == 32);
}

TEST_CASE("derive_seed decorrelates children", "[gradients][determinism]") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}
