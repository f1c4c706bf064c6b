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

// pulsegrad command-line driver.
//
//   pulsegrad evolve   --program p.cfg [--format unitary|bloch] [--points N]
//   pulsegrad grad     --program p.cfg [--observable h.txt] --method odegen --method sps
//   pulsegrad vqe      --program p.cfg [--epochs N] [--method odegen|sps|exact]
//   pulsegrad snr      --program p.cfg --seed S [--ns 4,8,16] [--batches B]
//   pulsegrad sweep    --program p.cfg [--span 0.5] [--points 41]
//   pulsegrad validate [--programs 20] [--seed S]
//
// Every flag also has a config key; flags win. The resolved configuration,
// defaults included, goes to stderr as '# ' lines. Exit status: 0 ok,
// 1 usage error, 2 runtime error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pulsegrad/errors.hpp"
#include "pulsegrad/experiments.hpp"
#include "pulsegrad/gradients.hpp"
#include "pulsegrad/io.hpp"

namespace pg = pulsegrad;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string program;
    std::string observable;
    std::string output;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> shots;
    std::optional<std::uint64_t> shot_seed;
};

void apply_override(pg::Config &cfg, const std::string &item) {
    const auto eq = item.find('=');
    const auto dot = item.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw UsageError("--set expects section.key=value, got '" + item + "'");
    }
    cfg.set(item.substr(0, dot), item.substr(dot + 1, eq - dot - 1), item.substr(eq + 1));
}

pg::Config load_config(const Common &c) {
    pg::Config cfg = c.program.empty() ? pg::Config{} : pg::Config::read_file(c.program);
    for (const auto &o : c.overrides) apply_override(cfg, o);
    if (c.shots) cfg.set("device", "shots", std::to_string(*c.shots));
    if (c.shot_seed) cfg.set("device", "seed", std::to_string(*c.shot_seed));
    return cfg;
}

template <class T> void set_if(pg::Config &cfg, const char *section, const char *key,
                               const std::optional<T> &v) {
    if (!v) return;
    if constexpr (std::is_same_v<T, std::string>) {
        cfg.set(section, key, *v);
    } else if constexpr (std::is_floating_point_v<T>) {
        cfg.set(section, key, pg::format_number(*v));
    } else {
        cfg.set(section, key, std::to_string(*v));
    }
}

pg::PauliSum load_observable(pg::Config &cfg, const Common &c, std::size_t n) {
    std::string path = c.observable;
    if (path.empty() && cfg.has("observable", "file")) path = cfg.get_string("observable", "file", "");
    if (!path.empty()) {
        cfg.set("observable", "file", path);
        auto h = pg::read_hamiltonian_file(path);
        if (h.n_qubits() != n) {
            throw pg::Error(pg::ErrorKind::DimMismatch,
                            "observable acts on " + std::to_string(h.n_qubits()) +
                                " qubits, program has " + std::to_string(n));
        }
        return h;
    }
    if (n == 1) {
        cfg.set("observable", "builtin", "Z");
        return pg::PauliSum(1, {{1.0, "Z"}});
    }
    if (n == 2) {
        cfg.set("observable", "builtin", "toy");
        return pg::toy_hamiltonian();
    }
    throw UsageError("--observable is required for programs with more than 2 qubits");
}

pg::Device make_device(pg::Config &cfg, const pg::OdeConfig &ode) {
    pg::DeviceConfig dc;
    dc.shots = cfg.get_uint("device", "shots", 0);
    if (dc.shots > 0) {
        if (!cfg.has("device", "seed")) throw UsageError("shot-mode runs need a seed (--shot-seed)");
        dc.seed = cfg.get_uint("device", "seed", 0);
    }
    return pg::Device(dc, ode);
}

pg::SplitMode split_mode(pg::Config &cfg) {
    const std::string m = cfg.get_string("sps", "mode", "monte_carlo");
    if (m == "monte_carlo") return pg::SplitMode::MonteCarlo;
    if (m == "dense_grid") return pg::SplitMode::DenseGrid;
    throw UsageError("[sps] mode must be monte_carlo or dense_grid");
}

void print_config(const pg::Config &cfg, const std::string &command) {
    std::cerr << "# pulsegrad " << command << "\n";
    std::istringstream in(cfg.dump());
    for (std::string line; std::getline(in, line);) std::cerr << "# " << line << "\n";
}

class Output {
  public:
    explicit Output(const std::string &path) {
        if (path.empty() || path == "-") return;
        file_.open(path);
        if (!file_) throw pg::Error(pg::ErrorKind::InvalidArgument, "cannot write " + path);
    }
    std::ostream &stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

// evolve ---------------------------------------------------------------------

struct EvolveArgs {
    std::optional<std::string> format;
    std::optional<std::uint64_t> points;
};

int run_evolve(const Common &c, const EvolveArgs &a) {
    auto cfg = load_config(c);
    set_if(cfg, "evolve", "format", a.format);
    set_if(cfg, "evolve", "points", a.points);
    auto prog = pg::build_program(cfg);
    const auto ode = pg::ode_config(cfg);
    const auto theta = pg::initial_parameters(cfg, prog.circuit.n_params());
    const std::string format = cfg.get_string("evolve", "format", "unitary");
    const auto points = cfg.get_uint("evolve", "points", 200);
    if (format != "unitary" && format != "bloch") {
        throw UsageError("--format must be unitary or bloch");
    }
    print_config(cfg, "evolve");
    Output out(c.output);
    if (format == "unitary") {
        pg::write_unitary_csv(out.stream(), pg::circuit_unitary(prog.circuit, theta, ode));
        return 0;
    }
    const auto &gates = prog.circuit.gates();
    if (gates.size() != 1 || !std::holds_alternative<pg::PulseGate>(gates[0])) {
        throw UsageError("bloch output needs a circuit made of one pulse gate");
    }
    const auto &gate = std::get<pg::PulseGate>(gates[0]);
    pg::write_bloch_csv(out.stream(), *gate.hamiltonian, theta, gate.t0, gate.t1, points, ode);
    return 0;
}

// grad -----------------------------------------------------------------------

struct GradArgs {
    std::vector<std::string> methods;
    std::optional<std::uint64_t> ns;
    std::optional<std::uint64_t> seed;
    std::optional<double> atol_coeff;
};

int run_grad(const Common &c, const GradArgs &a) {
    auto cfg = load_config(c);
    set_if(cfg, "sps", "ns", a.ns);
    set_if(cfg, "sps", "seed", a.seed);
    set_if(cfg, "odegen", "atol_coeff", a.atol_coeff);
    std::vector<std::string> methods = a.methods;
    if (methods.empty()) {
        std::string joined = cfg.get_string("grad", "methods", "odegen");
        std::stringstream ss(joined);
        for (std::string m; std::getline(ss, m, ',');) {
            m.erase(0, m.find_first_not_of(' '));
            m.erase(m.find_last_not_of(' ') + 1);
            if (!m.empty()) methods.push_back(m);
        }
    } else {
        std::string joined;
        for (const auto &m : methods) joined += (joined.empty() ? "" : ",") + m;
        cfg.set("grad", "methods", joined);
    }
    for (const auto &m : methods) {
        if (m != "odegen" && m != "sps" && m != "exact" && m != "fd") {
            throw UsageError("unknown gradient method '" + m + "' (odegen, sps, exact, fd)");
        }
    }
    auto prog = pg::build_program(cfg);
    const auto ode = pg::ode_config(cfg);
    const auto theta = pg::initial_parameters(cfg, prog.circuit.n_params());
    const auto obs = load_observable(cfg, c, prog.circuit.n_qubits());
    auto device = make_device(cfg, ode);
    pg::SpsConfig sps{cfg.get_uint("sps", "ns", 8), cfg.get_uint("sps", "seed", 0), split_mode(cfg)};
    pg::OdegenOptions og{cfg.get_double("odegen", "atol_coeff", 0.0), 0.0};
    print_config(cfg, "grad");

    std::vector<pg::GradientRow> rows;
    for (const auto &m : methods) {
        pg::GradientRow row{m, 0, {}};
        if (m == "odegen") {
            auto r = pg::odegen_gradient(prog.circuit, theta, obs, device, og);
            row.resources = r.resources.expectation_values;
            row.gradient = std::move(r.gradient);
        } else if (m == "sps") {
            auto r = pg::sps_gradient(prog.circuit, theta, obs, device, sps);
            row.resources = r.resources.expectation_values;
            row.gradient = std::move(r.gradient);
        } else if (m == "exact") {
            row.gradient = pg::exact_gradient(prog.circuit, theta, obs, ode);
        } else {
            row.gradient = pg::finite_difference_gradient(prog.circuit, theta, obs, ode);
        }
        rows.push_back(std::move(row));
    }
    Output out(c.output);
    pg::write_gradient_csv(out.stream(), rows);
    return 0;
}

// vqe ------------------------------------------------------------------------

struct VqeArgs {
    std::optional<std::uint64_t> epochs;
    std::optional<std::string> method;
    std::optional<std::string> optimizer;
    std::optional<double> lr;
    std::optional<std::uint64_t> ns;
    std::optional<std::uint64_t> seed;
};

int run_vqe(const Common &c, const VqeArgs &a) {
    auto cfg = load_config(c);
    set_if(cfg, "vqe", "epochs", a.epochs);
    set_if(cfg, "vqe", "method", a.method);
    set_if(cfg, "vqe", "optimizer", a.optimizer);
    set_if(cfg, "vqe", "learning_rate", a.lr);
    set_if(cfg, "sps", "ns", a.ns);
    set_if(cfg, "sps", "seed", a.seed);
    auto prog = pg::build_program(cfg);
    const auto ode = pg::ode_config(cfg);
    const auto theta = pg::initial_parameters(cfg, prog.circuit.n_params());
    const auto obs = load_observable(cfg, c, prog.circuit.n_qubits());

    pg::VqeOptions opts;
    const std::string method = cfg.get_string("vqe", "method", "odegen");
    if (method == "odegen") {
        opts.method = pg::GradMethod::Odegen;
    } else if (method == "sps") {
        opts.method = pg::GradMethod::Sps;
    } else if (method == "exact") {
        opts.method = pg::GradMethod::Exact;
    } else {
        throw UsageError("[vqe] method must be odegen, sps or exact");
    }
    const std::string kind = cfg.get_string("vqe", "optimizer", "adam");
    if (kind == "adam") {
        opts.optimizer.kind = pg::OptimizerKind::Adam;
    } else if (kind == "gd") {
        opts.optimizer.kind = pg::OptimizerKind::GradientDescent;
    } else {
        throw UsageError("[vqe] optimizer must be adam or gd");
    }
    opts.optimizer.learning_rate = cfg.get_positive("vqe", "learning_rate", 0.02);
    opts.optimizer.epochs = cfg.get_uint("vqe", "epochs", 100);
    opts.sps = pg::SpsConfig{cfg.get_uint("sps", "ns", 8), cfg.get_uint("sps", "seed", 0),
                             split_mode(cfg)};
    opts.odegen.atol_coeff = cfg.get_double("odegen", "atol_coeff", 0.0);
    opts.initial = theta;
    auto device = make_device(cfg, ode);
    print_config(cfg, "vqe");

    const auto trace = pg::vqe_run(prog.circuit, obs, opts, device);
    Output out(c.output);
    pg::write_vqe_csv(out.stream(), trace);
    if (prog.circuit.n_qubits() <= 6) {
        std::cerr << "# ground_energy = " << pg::format_number(pg::ground_energy(obs)) << "\n";
    }
    std::cerr << "# final_energy = " << pg::format_number(trace.energy.back()) << "\n";
    return 0;
}

// snr ------------------------------------------------------------------------

struct SnrArgs {
    std::optional<std::string> ns;
    std::optional<std::uint64_t> batches;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
};

int run_snr(const Common &c, const SnrArgs &a) {
    auto cfg = load_config(c);
    set_if(cfg, "snr", "ns", a.ns);
    set_if(cfg, "snr", "batches", a.batches);
    set_if(cfg, "snr", "seed", a.seed);
    set_if(cfg, "sps", "mode", a.mode);
    if (!cfg.has("snr", "seed")) throw UsageError("snr needs an explicit seed (--seed)");
    auto prog = pg::build_program(cfg);
    const auto ode = pg::ode_config(cfg);
    const auto theta = pg::initial_parameters(cfg, prog.circuit.n_params());
    const auto obs = load_observable(cfg, c, prog.circuit.n_qubits());
    std::vector<std::size_t> counts;
    for (double v : cfg.get_list("snr", "ns", {4, 8, 16, 32, 64, 128})) {
        if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("[snr] ns must be positive integers");
        counts.push_back(static_cast<std::size_t>(v));
    }
    const auto batches = cfg.get_uint("snr", "batches", 100);
    const auto seed = cfg.get_uint("snr", "seed", 0);
    const auto mode = split_mode(cfg);
    auto device = make_device(cfg, ode);
    print_config(cfg, "snr");

    const auto table = pg::snr_study(prog.circuit, obs, theta, counts, batches, device, mode, seed);
    Output out(c.output);
    pg::write_snr_csv(out.stream(), table);
    for (const auto &s : table.summary) {
        std::cerr << "# summary n_samples=" << s.n_samples
                  << " mean_snr=" << pg::format_number(s.mean_snr)
                  << " p05_snr=" << pg::format_number(s.p05_snr)
                  << " p90_snr=" << pg::format_number(s.p90_snr)
                  << " p95_snr=" << pg::format_number(s.p95_snr)
                  << " median_std=" << pg::format_number(s.median_std) << "\n";
    }
    return 0;
}

// sweep ----------------------------------------------------------------------

struct SweepArgs {
    std::optional<double> span;
    std::optional<std::uint64_t> points;
    std::optional<std::uint64_t> calib_epochs;
};

int run_sweep(const Common &c, const SweepArgs &a) {
    auto cfg = load_config(c);
    set_if(cfg, "sweep", "span", a.span);
    set_if(cfg, "sweep", "points", a.points);
    set_if(cfg, "sweep", "calibration_epochs", a.calib_epochs);
    if (!cfg.has("circuit", "kind")) cfg.set("circuit", "kind", "single_pulse");
    if (!cfg.has("params", "init")) {
        cfg.set("params", "init", "values");
        cfg.set("params", "values", "0.5, 0");
    }
    auto prog = pg::build_program(cfg);
    if (!prog.target) throw UsageError("sweep needs [circuit] kind = single_pulse");
    if (!cfg.has("ode", "rtol")) cfg.set("ode", "rtol", "1e-9");
    if (!cfg.has("ode", "atol")) cfg.set("ode", "atol", "1e-9");
    const auto ode = pg::ode_config(cfg);
    const auto theta0 = pg::initial_parameters(cfg, prog.circuit.n_params());
    const double w = prog.spec.frequencies[0];
    const double duration = cfg.get_positive("circuit", "duration", 20.0);
    const double amplitude = cfg.get_positive("circuit", "amplitude", 2.0 * std::numbers::pi * 0.05);
    const double span = cfg.get_positive("sweep", "span", 0.5);
    const auto points = cfg.get_uint("sweep", "points", 41);
    if (points < 2) throw UsageError("[sweep] points must be >= 2");
    pg::OptimizerConfig opt;
    opt.learning_rate = cfg.get_positive("sweep", "calibration_lr", 0.05);
    opt.epochs = cfg.get_uint("sweep", "calibration_epochs", 200);
    print_config(cfg, "sweep");

    const auto h = pg::single_qubit_gate_program(w, amplitude, w, duration);
    const auto cal = pg::calibrate_gate(h, 0.0, duration, *prog.target, theta0, opt, ode);
    std::vector<double> grid;
    for (std::uint64_t i = 0; i < points; ++i) {
        const double x = -span + 2.0 * span * static_cast<double>(i) / static_cast<double>(points - 1);
        grid.push_back(w * (1.0 + x));
    }
    const auto sweep = pg::frequency_sweep(w, amplitude, duration, *prog.target, grid, cal.theta, ode);
    Output out(c.output);
    pg::write_sweep_csv(out.stream(), sweep);
    std::cerr << "# calibration_infidelity = " << pg::format_number(cal.infidelity) << "\n"
              << "# calibrated_theta = " << pg::format_number(cal.theta[0]) << ", "
              << pg::format_number(cal.theta[1]) << "\n"
              << "# argmin_nu = " << pg::format_number(sweep.argmin_nu) << "\n";
    return 0;
}

// validate -------------------------------------------------------------------

struct ValidateArgs {
    std::optional<std::uint64_t> programs;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> dense;
};

int run_validate(const Common &c, const ValidateArgs &a) {
    auto cfg = load_config(c);
    set_if(cfg, "validate", "programs", a.programs);
    set_if(cfg, "validate", "seed", a.seed);
    set_if(cfg, "validate", "dense_nodes", a.dense);
    pg::OracleTriangleOptions opts;
    opts.programs = cfg.get_uint("validate", "programs", 20);
    opts.max_qubits = cfg.get_uint("validate", "max_qubits", 2);
    opts.degree = cfg.get_uint("validate", "degree", 4);
    opts.duration = cfg.get_positive("validate", "duration", 10.0);
    opts.dense_nodes = cfg.get_uint("validate", "dense_nodes", 0);
    opts.seed = cfg.get_uint("validate", "seed", 0);
    opts.ode = pg::ode_config(cfg);
    const double tol_odegen = cfg.get_positive("validate", "tol_odegen", 1e-6);
    const double tol_fd = cfg.get_positive("validate", "tol_fd", 1e-4);
    const double tol_sps = cfg.get_positive("validate", "tol_sps", 1e-3);
    print_config(cfg, "validate");

    const auto cases = pg::oracle_triangle(opts);
    Output out(c.output);
    auto &os = out.stream();
    os << "case,n_qubits,n_params,odegen_queries,odegen_vs_exact,exact_vs_fd,sps_vs_exact\n";
    bool ok = true;
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const auto &r = cases[k];
        os << k << ',' << r.n_qubits << ',' << r.n_params << ',' << r.odegen_queries << ','
           << pg::format_number(r.odegen_vs_exact) << ',' << pg::format_number(r.exact_vs_fd) << ','
           << (std::isnan(r.sps_vs_exact) ? std::string("nan") : pg::format_number(r.sps_vs_exact))
           << '\n';
        ok = ok && r.odegen_vs_exact <= tol_odegen && r.exact_vs_fd <= tol_fd &&
             (std::isnan(r.sps_vs_exact) || r.sps_vs_exact <= tol_sps);
    }
    std::cerr << (ok ? "# validate: PASS\n" : "# validate: FAIL\n");
    return ok ? 0 : 2;
}

void add_common(CLI::App *sub, Common &c, bool needs_program) {
    auto *p = sub->add_option("-p,--program", c.program, "program/config file");
    if (needs_program) p->check(CLI::ExistingFile);
    sub->add_option("--observable", c.observable, "Hamiltonian file (qubits N / coeff word lines)")
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--output", c.output, "CSV destination (default stdout)");
    sub->add_option("--set", c.overrides, "override a config key: section.key=value");
    sub->add_option("--shots", c.shots, "shots per expectation value (0 = exact)");
    sub->add_option("--shot-seed", c.shot_seed, "sampling seed, required with --shots");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Pulse-level gradient simulator: ODEgen, stochastic parameter shift, exact oracles"};
    app.require_subcommand(1);

    Common common;
    EvolveArgs ev;
    GradArgs gr;
    VqeArgs vq;
    SnrArgs sn;
    SweepArgs sw;
    ValidateArgs va;

    auto *evolve = app.add_subcommand("evolve", "propagate a program; unitary or Bloch CSV");
    add_common(evolve, common, true);
    evolve->add_option("--format", ev.format, "unitary | bloch");
    evolve->add_option("--points", ev.points, "Bloch time steps");

    auto *grad = app.add_subcommand("grad", "gradient by one or more methods");
    add_common(grad, common, true);
    grad->add_option("-m,--method", gr.methods, "odegen | sps | exact | fd (repeatable)");
    grad->add_option("--ns", gr.ns, "SPS samples per generator");
    grad->add_option("--seed", gr.seed, "SPS seed");
    grad->add_option("--atol-coeff", gr.atol_coeff, "ODEgen coefficient truncation");

    auto *vqe = app.add_subcommand("vqe", "training trace CSV");
    add_common(vqe, common, true);
    vqe->add_option("--epochs", vq.epochs);
    vqe->add_option("-m,--method", vq.method, "odegen | sps | exact");
    vqe->add_option("--optimizer", vq.optimizer, "adam | gd");
    vqe->add_option("--lr", vq.lr, "learning rate");
    vqe->add_option("--ns", vq.ns, "SPS samples per generator");
    vqe->add_option("--seed", vq.seed, "SPS seed");

    auto *snr = app.add_subcommand("snr", "SPS signal-to-noise table");
    add_common(snr, common, true);
    snr->add_option("--ns", sn.ns, "comma-separated sample counts");
    snr->add_option("--batches", sn.batches);
    snr->add_option("--seed", sn.seed, "base seed (required)");
    snr->add_option("--mode", sn.mode, "monte_carlo | dense_grid");

    auto *sweep = app.add_subcommand("sweep", "calibrate a gate at resonance, then sweep nu");
    add_common(sweep, common, false);
    sweep->add_option("--span", sw.span, "relative half-width of the nu grid");
    sweep->add_option("--points", sw.points);
    sweep->add_option("--calibration-epochs", sw.calib_epochs);

    auto *validate = app.add_subcommand("validate", "oracle-triangle self-test");
    add_common(validate, common, false);
    validate->add_option("--programs", va.programs);
    validate->add_option("--seed", va.seed);
    validate->add_option("--dense-nodes", va.dense, "dense-grid SPS nodes (0 skips SPS)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (*evolve) return run_evolve(common, ev);
        if (*grad) return run_grad(common, gr);
        if (*vqe) return run_vqe(common, vq);
        if (*snr) return run_snr(common, sn);
        if (*sweep) return run_sweep(common, sw);
        if (*validate) return run_validate(common, va);
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
