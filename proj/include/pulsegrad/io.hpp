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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pulsegrad/circuit.hpp"
#include "pulsegrad/experiments.hpp"
#include "pulsegrad/pauli.hpp"

namespace pulsegrad {

// Hamiltonian files:
//   # comment
//   qubits 2
//   1.0  ZZ
//   -0.5 XI
// Duplicate words are summed.
PauliSum parse_hamiltonian(std::string_view text);
PauliSum read_hamiltonian_file(const std::string &path);
/// Canonical form, words in lexicographic order; parses back to the same sum.
std::string serialize_hamiltonian(const PauliSum &sum);

/// Reads a real number; a leading "2pi*" multiplies by 2*pi so that
/// frequencies can be written in GHz.
double parse_number(std::string_view text);
std::vector<double> parse_number_list(std::string_view text);

/// Flat `key = value` text with `[section]` headers and `#` comments.
/// Lookups that fall back to a default record it, so dump() shows the
/// configuration that was actually used.
class Config {
  public:
    Config() = default;
    static Config parse(std::string_view text);
    static Config read_file(const std::string &path);

    [[nodiscard]] bool has(const std::string &section, const std::string &key) const;
    void set(const std::string &section, const std::string &key, std::string value);

    std::string get_string(const std::string &section, const std::string &key,
                           const std::string &fallback);
    double get_double(const std::string &section, const std::string &key, double fallback);
    double get_positive(const std::string &section, const std::string &key, double fallback);
    std::uint64_t get_uint(const std::string &section, const std::string &key,
                           std::uint64_t fallback);
    bool get_bool(const std::string &section, const std::string &key, bool fallback);
    std::vector<double> get_list(const std::string &section, const std::string &key,
                                 const std::vector<double> &fallback);
    /// Throws InvalidArgument when the key is absent.
    std::string require(const std::string &section, const std::string &key);

    [[nodiscard]] std::vector<std::string> sections() const;
    /// Every key in section order, one `key = value` per line.
    [[nodiscard]] std::string dump() const;

  private:
    std::map<std::string, std::map<std::string, std::string>> values_;
};

/// A circuit described by the [system] and [circuit] sections.
struct Program {
    std::string kind;
    TransmonSpec spec;
    Circuit circuit{1};
    /// Set for kind = single_pulse (1 qubit, amplitude + phase bin).
    std::optional<DenseOperator> target;
};

Program build_program(Config &cfg);
OdeConfig ode_config(Config &cfg, double default_tol = 1e-8);
/// [params]: init = gaussian | zeros | values, seed, stddev, values.
ParamVector initial_parameters(Config &cfg, std::size_t n_params);

/// 17 significant digits with '.' as the decimal separator.
std::string format_number(double value);

void write_vqe_csv(std::ostream &out, const TrainingTrace &trace);
void write_snr_csv(std::ostream &out, const SnrTable &table);
void write_sweep_csv(std::ostream &out, const SweepResult &sweep);
/// One row per method: method, resources, g0, g1, ...
struct GradientRow {
    std::string method;
    std::uint64_t resources = 0;
    std::vector<double> gradient;
};
void write_gradient_csv(std::ostream &out, const std::vector<GradientRow> &rows);
/// Columns row, col, re, im.
void write_unitary_csv(std::ostream &out, const DenseOperator &u);
/// Bloch components of U(t, t0)|0> for a single qubit at `n_points` + 1
/// evenly spaced times: t, x, y, z, p1.
void write_bloch_csv(std::ostream &out, const ParametrizedHamiltonian &h,
                     std::span<const double> theta, double t0, double t1, std::size_t n_points,
                     const OdeConfig &ode);

} // namespace pulsegrad
