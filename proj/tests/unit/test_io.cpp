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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "pulsegrad/errors.hpp"
#include "pulsegrad/io.hpp"

using namespace pulsegrad;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t parse_error_line(std::string_view text) {
    try {
        (void)parse_hamiltonian(text);
    } catch (const ParseError &e) {
        return e.line();
    }
    FAIL("expected ParseError");
    return 0;
}

std::string first_line(const std::string &s) { return s.substr(0, s.find('\n')); }

std::size_t count_lines(const std::string &s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("parse_hamiltonian", "[io]") {
    const auto h = parse_hamiltonian("qubits 2\n1.0 ZZ\n\xE2\x88\x92" "0.5 XI\n");
    CHECK(h.n_qubits() == 2);
    CHECK(h.size() == 2);
    CHECK(h.coefficient(PauliWord("ZZ")) == 1.0);
    CHECK(h.coefficient(PauliWord("XI")) == -0.5);

    const auto merged = parse_hamiltonian("qubits 1\n0.3 Z\n0.2 Z\n");
    CHECK(merged.size() == 1);
    CHECK_THAT(merged.coefficient(PauliWord("Z")), WithinAbs(0.5, 1e-16));

    const auto commented = parse_hamiltonian(
        "# H2 at 0.74 A\n\n  qubits 2   # header\n -1.05 II\n+0.39 ZI # onsite\n\t0.18 XX\n");
    CHECK(commented.size() == 3);
    CHECK(commented.coefficient(PauliWord("II")) == -1.05);
    CHECK(commented.coefficient(PauliWord("ZI")) == 0.39);
    CHECK(parse_hamiltonian("qubits 1\r\n1e-3 X\r\n").coefficient(PauliWord("X")) == 1e-3);
}

TEST_CASE("parse_hamiltonian errors carry the line", "[io]") {
    CHECK(parse_error_line("qubits 1\n1.0 ZZ") == 2);
    CHECK(parse_error_line("qubits 2\n1.0 ZZ\nabc XX\n") == 3);
    CHECK(parse_error_line("qubits 2\n\n1.0 ZQ\n") == 3);
    CHECK(parse_error_line("1.0 Z\n") == 1);
    CHECK(parse_error_line("qubits 0\n") == 1);
    CHECK(parse_error_line("qubits 1.5\n") == 1);
    CHECK(parse_error_line("qubits 1\n1.0\n") == 2);
    CHECK(parse_error_line("qubits 1\n1.0 Z extra\n") == 2);
    CHECK(parse_error_line("qubits 1\ninf Z\n") == 2);
    CHECK(parse_error_line("# nothing\n") >= 1);
    try {
        (void)parse_hamiltonian("qubits 1\n1.0 ZZ");
    } catch (const ParseError &e) {
        CHECK_THAT(std::string(e.what()), ContainsSubstring("word length"));
        CHECK(e.kind() == ErrorKind::ParseError);
    }
}

TEST_CASE("hamiltonian round trip", "[io][property]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coeff(-3.0, 3.0);
    std::uniform_int_distribution<int> op(0, 3);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + rep % 4;
        PauliSum sum(n);
        for (int k = 0; k < 6; ++k) {
            std::string label(n, 'I');
            for (auto &c : label) c = "IXYZ"[op(rng)];
            sum.add(coeff(rng) * std::pow(10.0, op(rng) - 2), PauliWord(label));
        }
        const std::string text = serialize_hamiltonian(sum);
        const auto back = parse_hamiltonian(text);
        CHECK(back == sum);
        CHECK(serialize_hamiltonian(back) == text);
    }
    const auto canonical = serialize_hamiltonian(PauliSum(2, {{1.0, "ZZ"}, {0.5, "XI"}, {-2.0, "IY"}}));
    CHECK(canonical == "qubits 2\n-2 IY\n0.5 XI\n1 ZZ\n");
}

TEST_CASE("hamiltonian files", "[io]") {
    const std::string path = "test_io_hamiltonian.txt";
    {
        std::ofstream f(path);
        f << "qubits 2\n0.5 ZI\n0.25 ZZ\n0.3 XX\n";
    }
    const auto h = read_hamiltonian_file(path);
    CHECK(h == toy_hamiltonian());
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_hamiltonian_file("definitely/not/here.txt"), Error);
}

TEST_CASE("numbers", "[io]") {
    CHECK(parse_number("1.5") == 1.5);
    CHECK(parse_number(" -2e-3 ") == -2e-3);
    CHECK(parse_number("2pi*5.0") == kTwoPi * 5.0);
    CHECK_THAT(parse_number("2pi*4.472"), WithinAbs(28.098405, 1e-6));
    CHECK(parse_number_list("2pi*5.0, 2pi*4.8") == std::vector<double>{kTwoPi * 5.0, kTwoPi * 4.8});
    CHECK(parse_number_list("").empty());
    CHECK_THROWS_AS(parse_number("five"), Error);
    CHECK_THROWS_AS(parse_number("1.0x"), Error);
    CHECK_THROWS_AS(parse_number_list("1, , 2"), Error);
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(-2.0) == "-2");
    CHECK(parse_number(format_number(std::numbers::pi)) == std::numbers::pi);
}

TEST_CASE("Config parsing and recorded defaults", "[io]") {
    auto cfg = Config::parse(
        "# run\n[system]\nfrequencies = 2pi*5.0, 2pi*4.8\n\n[circuit]\nkind = \"legendre\"\n"
        "degree = 2   # low\n[ode]\nrtol = 1e-9\n");
    CHECK(cfg.has("system", "frequencies"));
    CHECK_FALSE(cfg.has("system", "couplings"));
    CHECK(cfg.get_string("circuit", "kind", "constant") == "legendre");
    CHECK(cfg.get_uint("circuit", "degree", 4) == 2);
    CHECK(cfg.get_double("ode", "rtol", 1e-8) == 1e-9);
    CHECK(cfg.get_double("ode", "atol", 1e-8) == 1e-8);
    CHECK(cfg.has("ode", "atol"));
    CHECK(cfg.get_bool("ode", "interaction_frame", true));
    CHECK(cfg.get_list("params", "values", {1.0, 2.0}) == std::vector<double>{1.0, 2.0});
    CHECK(cfg.sections() == std::vector<std::string>{"circuit", "ode", "params", "system"});
    const std::string dump = cfg.dump();
    CHECK_THAT(dump, ContainsSubstring("[ode]\natol = 1e-08\ninteraction_frame = true\nrtol = 1e-9\n"));
    CHECK_THAT(dump, ContainsSubstring("values = 1, 2"));
    // dump parses back to the same settings
    auto again = Config::parse(dump);
    CHECK(again.dump() == dump);

    CHECK_THROWS_AS(cfg.require("vqe", "epochs"), Error);
    cfg.set("vqe", "epochs", "-3");
    CHECK_THROWS_AS(cfg.get_uint("vqe", "epochs", 1), Error);
    cfg.set("vqe", "lr", "0");
    CHECK_THROWS_AS(cfg.get_positive("vqe", "lr", 0.02), Error);
    cfg.set("vqe", "flag", "maybe");
    CHECK_THROWS_AS(cfg.get_bool("vqe", "flag", false), Error);

    auto bad = [](std::string_view text) {
        try {
            (void)Config::parse(text);
        } catch (const ParseError &e) {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(bad("[system\n") == 1);
    CHECK(bad("[a]\nno equals sign\n") == 2);
    CHECK(bad("[a]\n = 3\n") == 2);
}

TEST_CASE("build_program", "[io]") {
    SECTION("defaults are the two-qubit Legendre program") {
        Config cfg;
        const auto prog = build_program(cfg);
        CHECK(prog.kind == "legendre");
        CHECK(prog.spec.frequencies == std::vector<double>{kTwoPi * 5.0, kTwoPi * 4.8});
        REQUIRE(prog.spec.couplings.size() == 1);
        CHECK_THAT(prog.spec.couplings[0].strength, WithinAbs(kTwoPi * 0.02, 1e-15));
        CHECK(prog.circuit.n_params() == 20);
        CHECK_FALSE(prog.target.has_value());
        CHECK_THAT(cfg.dump(), ContainsSubstring("degree = 4"));
        CHECK_THAT(cfg.dump(), ContainsSubstring("couplings = 0-1:"));
    }
    SECTION("constant") {
        auto cfg = Config::parse("[system]\nfrequencies = 2pi*4.472\n[circuit]\nkind = constant\n");
        const auto prog = build_program(cfg);
        CHECK(prog.circuit.n_params() == 1);
        CHECK(prog.spec.couplings.empty());
    }
    SECTION("single pulse with target") {
        auto cfg = Config::parse("[circuit]\nkind = single_pulse\ntarget = h\n");
        const auto prog = build_program(cfg);
        REQUIRE(prog.target.has_value());
        CHECK(prog.circuit.n_params() == 2);
        CHECK(prog.target->rows() == 2);
    }
    SECTION("echoed cr") {
        auto cfg = Config::parse("[circuit]\nkind = echoed_cr\nbins = 3\necho = target\n");
        const auto prog = build_program(cfg);
        CHECK(prog.circuit.n_params() == 30);
    }
    SECTION("explicit couplings") {
        auto cfg = Config::parse(
            "[system]\nfrequencies = 30, 31, 32\ncouplings = 0-1:0.1, 1-2:2pi*0.01\n");
        const auto prog = build_program(cfg);
        REQUIRE(prog.spec.couplings.size() == 2);
        CHECK(prog.spec.couplings[1].q == 1);
        CHECK(prog.spec.couplings[1].p == 2);
        CHECK_THAT(prog.spec.couplings[1].strength, WithinAbs(kTwoPi * 0.01, 1e-15));
        CHECK(prog.circuit.n_params() == 30);
    }
    SECTION("errors") {
        auto unknown = Config::parse("[circuit]\nkind = spline\n");
        CHECK_THROWS_AS(build_program(unknown), Error);
        auto shape = Config::parse("[system]\nfrequencies = 1, 2\n[circuit]\nkind = constant\n");
        CHECK_THROWS_AS(build_program(shape), Error);
        auto coupling = Config::parse("[system]\ncouplings = 0:1\n");
        CHECK_THROWS_AS(build_program(coupling), Error);
        auto target = Config::parse("[circuit]\nkind = single_pulse\ntarget = t\n");
        CHECK_THROWS_AS(build_program(target), Error);
    }
}

TEST_CASE("ode_config and initial_parameters", "[io]") {
    auto cfg = Config::parse("[ode]\nrtol = 1e-7\n[params]\ninit = values\nvalues = 0.1, 0.2\n");
    const auto ode = ode_config(cfg);
    CHECK(ode.rtol == 1e-7);
    CHECK(ode.atol == 1e-8);
    CHECK(initial_parameters(cfg, 2) == std::vector<double>{0.1, 0.2});
    CHECK_THROWS_AS(initial_parameters(cfg, 3), Error);

    Config gauss;
    const auto a = initial_parameters(gauss, 5);
    CHECK(a == gaussian_init(5, 0, 1.0));
    CHECK_THAT(gauss.dump(), ContainsSubstring("seed = 0"));
    Config zeros = Config::parse("[params]\ninit = zeros\n");
    CHECK(initial_parameters(zeros, 3) == std::vector<double>(3, 0.0));
    Config neg = Config::parse("[ode]\natol = -1\n");
    CHECK_THROWS_AS(ode_config(neg), Error);
}

TEST_CASE("CSV headers and rows", "[io]") {
    TrainingTrace trace;
    trace.energy = {0.5, 0.25};
    trace.grad_norm = {0.0, 1.5};
    trace.cumulative_expvals = {0, 30};
    std::ostringstream vqe;
    write_vqe_csv(vqe, trace);
    CHECK(vqe.str() == "epoch,energy,grad_norm,cumulative_expvals\n0,0.5,0,0\n1,0.25,1.5,30\n");

    SnrTable table;
    table.rows = {SnrRow{8, 0, 0.1, 0.2, 0.5}};
    std::ostringstream snr;
    write_snr_csv(snr, table);
    CHECK(first_line(snr.str()) == "n_samples,param_index,mean,std,snr");
    CHECK(count_lines(snr.str()) == 2);

    SweepResult sweep;
    sweep.curve = {SweepPoint{1.0, 0.1}, SweepPoint{2.0, 0.2}};
    std::ostringstream sw;
    write_sweep_csv(sw, sweep);
    CHECK(first_line(sw.str()) == "nu,infidelity");
    CHECK(count_lines(sw.str()) == 3);

    std::ostringstream grad;
    write_gradient_csv(grad, {GradientRow{"sps", 32, {1.0, -0.5}}, GradientRow{"odegen", 30, {1.0, -0.5}}});
    CHECK(grad.str() == "method,resources,g0,g1\nsps,32,1,-0.5\nodegen,30,1,-0.5\n");

    std::ostringstream u;
    write_unitary_csv(u, to_matrix(PauliWord("Y")));
    CHECK(u.str() == "row,col,re,im\n0,0,0,0\n0,1,0,-1\n1,0,0,1\n1,1,0,0\n");
}

TEST_CASE("Bloch trajectory", "[io]") {
    // resonant flip: Omega T = pi for the sine-form drive
    const double w = kTwoPi * 5.0;
    const double T = 20.0;
    const auto c = constant_pulse_circuit(w, T);
    const auto &h = *c.pulse_gate(0).hamiltonian;
    const std::vector<double> theta{std::numbers::pi / T};
    std::ostringstream out;
    write_bloch_csv(out, h, theta, 0.0, T, 50, OdeConfig{});
    const std::string csv = out.str();
    CHECK(first_line(csv) == "t,x,y,z,p1");
    CHECK(count_lines(csv) == 52);
    const std::string last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
    const double p1 = std::stod(last.substr(last.rfind(',') + 1));
    CHECK(p1 >= 0.99);

    const auto two = parse_hamiltonian("qubits 2\n1 ZZ\n");
    const ParametrizedHamiltonian h2(2, two);
    std::ostringstream sink;
    CHECK_THROWS_AS(write_bloch_csv(sink, h2, {}, 0.0, 1.0, 4, OdeConfig{}), Error);
}
