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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pulsegrad {

using Complex = std::complex<double>;
using DenseOperator = Eigen::MatrixXcd;

/// Largest register handled by the dense operator paths.
inline constexpr std::size_t kMaxDenseQubits = 6;

/// Tensor product of single-qubit Paulis. Character 0 of the label acts on
/// qubit 0, which is the most significant bit of a computational-basis index.
class PauliWord {
  public:
    PauliWord() = default;
    explicit PauliWord(std::string label);

    static PauliWord identity(std::size_t n_qubits);
    /// Word with `op` on `qubit` and identities elsewhere.
    static PauliWord single(std::size_t n_qubits, std::size_t qubit, char op);
    static PauliWord from_ops(std::size_t n_qubits,
                              std::initializer_list<std::pair<std::size_t, char>> ops);

    [[nodiscard]] const std::string &label() const noexcept { return label_; }
    [[nodiscard]] std::size_t n_qubits() const noexcept { return label_.size(); }
    [[nodiscard]] char op(std::size_t qubit) const { return label_.at(qubit); }
    [[nodiscard]] bool is_identity() const noexcept;
    [[nodiscard]] std::size_t weight() const noexcept;

    /// Bit masks over basis indices: X or Y flips a bit, Z or Y adds a sign.
    [[nodiscard]] std::uint64_t x_mask() const noexcept;
    [[nodiscard]] std::uint64_t z_mask() const noexcept;
    [[nodiscard]] std::size_t y_count() const noexcept;

    [[nodiscard]] bool commutes_with(const PauliWord &other) const;

    auto operator<=>(const PauliWord &) const = default;

  private:
    std::string label_;
};

/// Product of two words: `a * b == phase * word`.
std::pair<Complex, PauliWord> multiply(const PauliWord &a, const PauliWord &b);

/// Real linear combination of Pauli words, canonically ordered by label.
class PauliSum {
  public:
    PauliSum() = default;
    explicit PauliSum(std::size_t n_qubits) : n_qubits_(n_qubits) {}
    PauliSum(std::size_t n_qubits,
             std::initializer_list<std::pair<double, std::string>> terms);

    /// Adds `coeff * word`, merging into an existing entry.
    void add(double coeff, const PauliWord &word);
    void add(const PauliSum &other, double scale = 1.0);

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] const std::map<PauliWord, double> &terms() const noexcept {
        return terms_;
    }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
    [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }
    [[nodiscard]] double coefficient(const PauliWord &word) const;
    /// Sum of |c| over all terms; bounds every expectation value.
    [[nodiscard]] double one_norm() const;

    [[nodiscard]] DenseOperator to_matrix() const;

    bool operator==(const PauliSum &) const = default;

  private:
    std::size_t n_qubits_ = 0;
    std::map<PauliWord, double> terms_;
};

DenseOperator to_matrix(const PauliWord &word);

struct PauliDecomposition {
    std::size_t n_qubits = 0;
    std::map<PauliWord, double> coeffs;

    [[nodiscard]] DenseOperator reconstruct() const;
};

inline constexpr double kDefaultHermTol = 1e-9;

/// Max-abs entry of the anti-Hermitian part (A - A^dagger)/2.
double anti_hermitian_residue(const DenseOperator &op);

/// Expands a Hermitian operator in the Pauli basis with
/// w_P = tr(P op) / 2^n. Coefficients with |w_P| below `drop_tol` are omitted.
PauliDecomposition pauli_decompose(const DenseOperator &op, std::size_t n_qubits,
                                   double herm_tol = kDefaultHermTol,
                                   double drop_tol = 0.0);

DenseOperator commutator(const DenseOperator &a, const DenseOperator &b);

struct DLAResult {
    std::set<PauliWord> basis;
    std::size_t dimension = 0;

    [[nodiscard]] bool contains(const PauliWord &word) const {
        return basis.count(word) != 0;
    }
};

/// Commutator closure of a set of Pauli words with scalar phases stripped.
DLAResult dla_closure(std::span<const PauliWord> generators);

/// Applies `word` to a state vector in place of `out` (out = P * in).
void apply_pauli(const PauliWord &word, std::span<const Complex> in,
                 std::span<Complex> out);

} // namespace pulsegrad
