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

#include "pulsegrad/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pulsegrad/errors.hpp"
#include "pulsegrad/evolution.hpp"

namespace pulsegrad {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view strip_comment(std::string_view line) {
    const auto hash = line.find('#');
    return trim(hash == std::string_view::npos ? line : line.substr(0, hash));
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        const std::size_t j = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > j) out.push_back(s.substr(j, i - j));
    }
    return out;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// U+2212 is accepted in place of '-'.
std::string normalize_minus(std::string_view s) {
    std::string out(s);
    const std::string minus = "\xE2\x88\x92";
    for (auto pos = out.find(minus); pos != std::string::npos; pos = out.find(minus, pos)) {
        out.replace(pos, minus.size(), "-");
    }
    return out;
}

std::optional<double> to_double(std::string_view s) {
    const std::string clean = normalize_minus(trim(s));
    if (clean.empty()) return std::nullopt;
    const char *first = clean.data();
    const char *last = first + clean.size();
    if (*first == '+') ++first;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::string section_key(const std::string &section, const std::string &key) {
    return "[" + section + "] " + key;
}

} // namespace

PauliSum parse_hamiltonian(std::string_view text) {
    std::optional<PauliSum> sum;
    std::size_t n = 0;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto line = strip_comment(lines[i]);
        if (line.empty()) continue;
        const auto fields = split_ws(line);
        if (!sum) {
            if (fields.size() != 2 || fields[0] != "qubits") {
                throw ParseError(line_no, "expected 'qubits N' before any term");
            }
            const auto count = to_double(fields[1]);
            if (!count || *count < 1 || *count != std::floor(*count) ||
                *count > static_cast<double>(kMaxDenseQubits)) {
                throw ParseError(line_no, "qubit count must be an integer in [1, " +
                                              std::to_string(kMaxDenseQubits) + "]");
            }
            n = static_cast<std::size_t>(*count);
            sum = PauliSum(n);
            continue;
        }
        if (fields.size() != 2) {
            throw ParseError(line_no, "expected '<coefficient> <word>'");
        }
        const auto coeff = to_double(fields[0]);
        if (!coeff) throw ParseError(line_no, "bad coefficient '" + std::string(fields[0]) + "'");
        const std::string word(fields[1]);
        if (word.size() != n) {
            throw ParseError(line_no, "word length " + std::to_string(word.size()) +
                                          " does not match qubits " + std::to_string(n));
        }
        if (word.find_first_not_of("IXYZ") != std::string::npos) {
            throw ParseError(line_no, "invalid character in word '" + word + "'");
        }
        sum->add(*coeff, PauliWord(word));
    }
    if (!sum) throw ParseError(lines.size(), "missing 'qubits N' header");
    return *sum;
}

PauliSum read_hamiltonian_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_hamiltonian(buf.str());
}

std::string serialize_hamiltonian(const PauliSum &sum) {
    std::string out = "qubits " + std::to_string(sum.n_qubits()) + "\n";
    for (const auto &[word, coeff] : sum.terms()) {
        out += format_number(coeff) + " " + word.label() + "\n";
    }
    return out;
}

double parse_number(std::string_view text) {
    std::string_view s = trim(text);
    double scale = 1.0;
    if (s.starts_with("2pi*")) {
        scale = 2.0 * std::numbers::pi;
        s.remove_prefix(4);
    }
    const auto value = to_double(s);
    if (!value) throw Error(ErrorKind::InvalidArgument, "not a number: '" + std::string(text) + "'");
    return scale * *value;
}

std::vector<double> parse_number_list(std::string_view text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (auto item : split_on(text, ',')) out.push_back(parse_number(item));
    return out;
}

Config Config::parse(std::string_view text) {
    Config cfg;
    std::string section;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = strip_comment(lines[i]);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ParseError(i + 1, "malformed section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(i + 1, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ParseError(i + 1, "empty key");
        std::string value(trim(line.substr(eq + 1)));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        cfg.values_[section][key] = std::move(value);
    }
    return cfg;
}

Config Config::read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool Config::has(const std::string &section, const std::string &key) const {
    const auto it = values_.find(section);
    return it != values_.end() && it->second.contains(key);
}

void Config::set(const std::string &section, const std::string &key, std::string value) {
    values_[section][key] = std::move(value);
}

std::string Config::get_string(const std::string &section, const std::string &key,
                               const std::string &fallback) {
    if (!has(section, key)) set(section, key, fallback);
    return values_[section][key];
}

double Config::get_double(const std::string &section, const std::string &key, double fallback) {
    if (!has(section, key)) set(section, key, format_number(fallback));
    try {
        return parse_number(values_[section][key]);
    } catch (const Error &e) {
        throw Error(ErrorKind::InvalidArgument, section_key(section, key) + ": " + e.what());
    }
}

double Config::get_positive(const std::string &section, const std::string &key, double fallback) {
    const double v = get_double(section, key, fallback);
    if (!(v > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, section_key(section, key) + " must be > 0");
    }
    return v;
}

std::uint64_t Config::get_uint(const std::string &section, const std::string &key,
                               std::uint64_t fallback) {
    if (!has(section, key)) set(section, key, std::to_string(fallback));
    const std::string raw(trim(values_[section][key]));
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (raw.empty() || ec != std::errc{} || ptr != raw.data() + raw.size()) {
        throw Error(ErrorKind::InvalidArgument,
                    section_key(section, key) + " must be a non-negative integer");
    }
    return v;
}

bool Config::get_bool(const std::string &section, const std::string &key, bool fallback) {
    if (!has(section, key)) set(section, key, fallback ? "true" : "false");
    const std::string &raw = values_[section][key];
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw Error(ErrorKind::InvalidArgument, section_key(section, key) + " must be true or false");
}

std::vector<double> Config::get_list(const std::string &section, const std::string &key,
                                     const std::vector<double> &fallback) {
    if (!has(section, key)) {
        std::string joined;
        for (std::size_t i = 0; i < fallback.size(); ++i) {
            if (i) joined += ", ";
            joined += format_number(fallback[i]);
        }
        set(section, key, joined);
    }
    try {
        return parse_number_list(values_[section][key]);
    } catch (const Error &e) {
        throw Error(ErrorKind::InvalidArgument, section_key(section, key) + ": " + e.what());
    }
}

std::string Config::require(const std::string &section, const std::string &key) {
    if (!has(section, key)) {
        throw Error(ErrorKind::InvalidArgument, "missing required " + section_key(section, key));
    }
    return values_[section][key];
}

std::vector<std::string> Config::sections() const {
    std::vector<std::string> out;
    for (const auto &[name, _] : values_) out.push_back(name);
    return out;
}

std::string Config::dump() const {
    std::string out;
    for (const auto &[section, keys] : values_) {
        if (!section.empty()) out += "[" + section + "]\n";
        for (const auto &[key, value] : keys) out += key + " = " + value + "\n";
    }
    return out;
}

namespace {

std::vector<Coupling> parse_couplings(const std::string &text) {
    std::vector<Coupling> out;
    if (trim(text).empty()) return out;
    for (auto item : split_on(text, ',')) {
        const auto colon = item.find(':');
        const auto dash = item.find('-');
        if (colon == std::string_view::npos || dash == std::string_view::npos || dash > colon) {
            throw Error(ErrorKind::InvalidArgument,
                        "coupling '" + std::string(item) + "' must look like q-p:J");
        }
        const double q = parse_number(item.substr(0, dash));
        const double p = parse_number(item.substr(dash + 1, colon - dash - 1));
        if (q < 0 || p < 0 || q != std::floor(q) || p != std::floor(p)) {
            throw Error(ErrorKind::InvalidArgument, "coupling qubit indices must be integers");
        }
        out.push_back(Coupling{static_cast<std::size_t>(q), static_cast<std::size_t>(p),
                               parse_number(item.substr(colon + 1))});
    }
    return out;
}

std::string format_couplings(const std::vector<Coupling> &couplings) {
    std::string out;
    for (std::size_t i = 0; i < couplings.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(couplings[i].q) + "-" + std::to_string(couplings[i].p) + ":" +
               format_number(couplings[i].strength);
    }
    return out;
}

DenseOperator named_target(const std::string &name) {
    if (name == "x") return to_matrix(PauliWord("X"));
    if (name == "y") return to_matrix(PauliWord("Y"));
    if (name == "z") return to_matrix(PauliWord("Z"));
    if (name == "i") return to_matrix(PauliWord("I"));
    if (name == "h") {
        return (to_matrix(PauliWord("X")) + to_matrix(PauliWord("Z"))) / std::sqrt(2.0);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown target gate '" + name + "' (x, y, z, h, i)");
}

std::size_t as_index(double v, const std::string &what) {
    if (v < 0 || v != std::floor(v)) {
        throw Error(ErrorKind::InvalidArgument, what + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

} // namespace

Program build_program(Config &cfg) {
    Program prog;
    const double two_pi = 2.0 * std::numbers::pi;
    prog.kind = cfg.get_string("circuit", "kind", "legendre");
    const bool single = prog.kind == "constant" || prog.kind == "single_pulse";
    const std::vector<double> default_freqs =
        single ? std::vector<double>{two_pi * 5.0} : std::vector<double>{two_pi * 5.0, two_pi * 4.8};
    prog.spec.frequencies = cfg.get_list("system", "frequencies", default_freqs);
    if (prog.spec.frequencies.empty()) {
        throw Error(ErrorKind::InvalidArgument, "[system] frequencies must list at least one qubit");
    }
    const std::size_t n = prog.spec.frequencies.size();
    if (!cfg.has("system", "couplings")) {
        std::vector<Coupling> chain;
        for (std::size_t q = 0; q + 1 < n; ++q) chain.push_back(Coupling{q, q + 1, two_pi * 0.02});
        cfg.set("system", "couplings", format_couplings(chain));
    }
    prog.spec.couplings = parse_couplings(cfg.get_string("system", "couplings", ""));

    if (prog.kind == "legendre") {
        LegendrePulseOptions opts;
        opts.duration = cfg.get_positive("circuit", "duration", 20.0);
        opts.degree = cfg.get_uint("circuit", "degree", 4);
        opts.max_amplitudes =
            cfg.get_list("circuit", "amplitudes", std::vector<double>(n, two_pi * 0.2));
        prog.circuit = legendre_pulse_circuit(prog.spec, opts);
    } else if (prog.kind == "constant") {
        if (n != 1) throw Error(ErrorKind::InvalidArgument, "constant circuit is single-qubit");
        const double duration = cfg.get_positive("circuit", "duration", 20.0);
        const double phase = cfg.get_double("circuit", "phase", 0.0);
        prog.circuit = constant_pulse_circuit(prog.spec.frequencies[0], duration, phase);
    } else if (prog.kind == "single_pulse") {
        if (n != 1) throw Error(ErrorKind::InvalidArgument, "single_pulse circuit is single-qubit");
        const double duration = cfg.get_positive("circuit", "duration", 20.0);
        const double amplitude = cfg.get_positive("circuit", "amplitude", two_pi * 0.05);
        const double nu = cfg.get_double("circuit", "nu", prog.spec.frequencies[0]);
        prog.target = named_target(cfg.get_string("circuit", "target", "x"));
        auto h = std::make_shared<const ParametrizedHamiltonian>(single_qubit_gate_program(
            prog.spec.frequencies[0], amplitude, nu, duration));
        prog.circuit = Circuit(1);
        prog.circuit.add(PulseGate{h, 0.0, duration});
    } else if (prog.kind == "echoed_cr") {
        EchoedCrOptions opts;
        const std::size_t control = as_index(cfg.get_double("circuit", "control", 0), "control");
        const std::size_t target = as_index(cfg.get_double("circuit", "target", 1), "target");
        opts.resonant_duration = cfg.get_positive("circuit", "resonant_duration", 20.0);
        opts.cross_resonant_duration = cfg.get_positive("circuit", "cross_resonant_duration", 100.0);
        opts.bins = cfg.get_uint("circuit", "bins", 10);
        opts.resonant_amplitude = cfg.get_positive("circuit", "resonant_amplitude", 0.2);
        opts.cross_resonant_amplitude = cfg.get_positive("circuit", "cross_resonant_amplitude", 0.2);
        const std::string echo = cfg.get_string("circuit", "echo", "control");
        if (echo != "control" && echo != "target") {
            throw Error(ErrorKind::InvalidArgument, "[circuit] echo must be control or target");
        }
        opts.echo = echo == "control" ? EchoPlacement::Control : EchoPlacement::Target;
        prog.circuit = echoed_cr_ansatz(prog.spec, control, target, opts);
    } else {
        throw Error(ErrorKind::InvalidArgument,
                    "unknown circuit kind '" + prog.kind +
                        "' (legendre, constant, single_pulse, echoed_cr)");
    }
    return prog;
}

OdeConfig ode_config(Config &cfg, double default_tol) {
    OdeConfig ode;
    ode.rtol = cfg.get_positive("ode", "rtol", default_tol);
    ode.atol = cfg.get_positive("ode", "atol", default_tol);
    ode.max_steps = cfg.get_uint("ode", "max_steps", ode.max_steps);
    ode.interaction_frame = cfg.get_bool("ode", "interaction_frame", true);
    ode.validate();
    return ode;
}

ParamVector initial_parameters(Config &cfg, std::size_t n_params) {
    const std::string init = cfg.get_string("params", "init", "gaussian");
    if (init == "gaussian") {
        const auto seed = cfg.get_uint("params", "seed", 0);
        const double stddev = cfg.get_double("params", "stddev", 1.0);
        if (stddev < 0.0) throw Error(ErrorKind::InvalidArgument, "[params] stddev must be >= 0");
        return gaussian_init(n_params, seed, stddev);
    }
    if (init == "zeros") return ParamVector(n_params, 0.0);
    if (init == "values") {
        auto values = parse_number_list(cfg.require("params", "values"));
        if (values.size() != n_params) {
            throw Error(ErrorKind::DimMismatch, "[params] values needs " +
                                                    std::to_string(n_params) + " entries, got " +
                                                    std::to_string(values.size()));
        }
        return values;
    }
    throw Error(ErrorKind::InvalidArgument, "[params] init must be gaussian, zeros or values");
}

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_vqe_csv(std::ostream &out, const TrainingTrace &trace) {
    out << "epoch,energy,grad_norm,cumulative_expvals\n";
    for (std::size_t e = 0; e < trace.energy.size(); ++e) {
        out << e << ',' << format_number(trace.energy[e]) << ','
            << format_number(trace.grad_norm[e]) << ',' << trace.cumulative_expvals[e] << '\n';
    }
}

void write_snr_csv(std::ostream &out, const SnrTable &table) {
    out << "n_samples,param_index,mean,std,snr\n";
    for (const auto &row : table.rows) {
        out << row.n_samples << ',' << row.param << ',' << format_number(row.mean) << ','
            << format_number(row.std) << ',' << format_number(row.snr) << '\n';
    }
}

void write_sweep_csv(std::ostream &out, const SweepResult &sweep) {
    out << "nu,infidelity\n";
    for (const auto &p : sweep.curve) {
        out << format_number(p.nu) << ',' << format_number(p.infidelity) << '\n';
    }
}

void write_gradient_csv(std::ostream &out, const std::vector<GradientRow> &rows) {
    const std::size_t width = rows.empty() ? 0 : rows.front().gradient.size();
    out << "method,resources";
    for (std::size_t k = 0; k < width; ++k) out << ",g" << k;
    out << '\n';
    for (const auto &row : rows) {
        out << row.method << ',' << row.resources;
        for (double g : row.gradient) out << ',' << format_number(g);
        out << '\n';
    }
}

void write_unitary_csv(std::ostream &out, const DenseOperator &u) {
    out << "row,col,re,im\n";
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
        for (Eigen::Index c = 0; c < u.cols(); ++c) {
            out << r << ',' << c << ',' << format_number(u(r, c).real()) << ','
                << format_number(u(r, c).imag()) << '\n';
        }
    }
}

void write_bloch_csv(std::ostream &out, const ParametrizedHamiltonian &h,
                     std::span<const double> theta, double t0, double t1, std::size_t n_points,
                     const OdeConfig &ode) {
    if (h.n_qubits() != 1) {
        throw Error(ErrorKind::DimMismatch, "Bloch trajectory needs a single-qubit program");
    }
    if (n_points == 0) throw Error(ErrorKind::InvalidArgument, "need at least one time step");
    out << "t,x,y,z,p1\n";
    StateVector psi = zero_state(1);
    double t_prev = t0;
    for (std::size_t i = 0; i <= n_points; ++i) {
        const double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n_points);
        if (t > t_prev) {
            psi = evolve(h, theta, t_prev, t, ode).unitary * psi;
            t_prev = t;
        }
        const Complex a = psi(0);
        const Complex b = psi(1);
        const Complex coh = std::conj(a) * b;
        out << format_number(t) << ',' << format_number(2.0 * coh.real()) << ','
            << format_number(2.0 * coh.imag()) << ','
            << format_number(std::norm(a) - std::norm(b)) << ',' << format_number(std::norm(b))
            << '\n';
    }
}

} // namespace pulsegrad
