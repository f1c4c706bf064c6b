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

#include "pulsegrad/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>

#include "pulsegrad/errors.hpp"

namespace pulsegrad {

namespace {

std::uint64_t bit_of(std::size_t n_qubits, std::size_t qubit) {
    return std::uint64_t{1} << (n_qubits - 1 - qubit);
}

Complex i_power(std::size_t k) {
    switch (k % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

// Single-qubit product a*b = phase * result.
std::pair<Complex, char> multiply_single(char a, char b) {
    if (a == 'I') return {1.0, b};
    if (b == 'I') return {1.0, a};
    if (a == b) return {1.0, 'I'};
    const Complex i{0.0, 1.0};
    if (a == 'X' && b == 'Y') return {i, 'Z'};
    if (a == 'Y' && b == 'Z') return {i, 'X'};
    if (a == 'Z' && b == 'X') return {i, 'Y'};
    if (a == 'Y' && b == 'X') return {-i, 'Z'};
    if (a == 'Z' && b == 'Y') return {-i, 'X'};
    return {-i, 'Y'}; // X*Z
}

Complex word_phase(std::uint64_t basis, std::uint64_t z_mask, std::size_t y_count) {
    Complex phase = i_power(y_count);
    if (std::popcount(basis & z_mask) % 2 == 1) phase = -phase;
    return phase;
}

} // namespace

PauliWord::PauliWord(std::string label) : label_(std::move(label)) {
    if (label_.empty()) {
        throw Error(ErrorKind::InvalidArgument, "Pauli word must act on at least one qubit");
    }
    if (label_.size() > 63) {
        throw Error(ErrorKind::TooLarge, "Pauli word longer than 63 qubits");
    }
    for (char c : label_) {
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
            throw Error(ErrorKind::InvalidArgument,
                        "invalid Pauli character '" + std::string(1, c) + "' in " + label_);
        }
    }
}

PauliWord PauliWord::identity(std::size_t n_qubits) {
    return PauliWord(std::string(n_qubits, 'I'));
}

PauliWord PauliWord::single(std::size_t n_qubits, std::size_t qubit, char op) {
    return from_ops(n_qubits, {{qubit, op}});
}

PauliWord PauliWord::from_ops(std::size_t n_qubits,
                              std::initializer_list<std::pair<std::size_t, char>> ops) {
    std::string label(n_qubits, 'I');
    for (const auto &[qubit, op] : ops) {
        if (qubit >= n_qubits) {
            throw Error(ErrorKind::BadQubitIndex,
                        "qubit " + std::to_string(qubit) + " outside register of " +
                            std::to_string(n_qubits));
        }
        label[qubit] = op;
    }
    return PauliWord(std::move(label));
}

bool PauliWord::is_identity() const noexcept {
    return std::all_of(label_.begin(), label_.end(), [](char c) { return c == 'I'; });
}

std::size_t PauliWord::weight() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(label_.begin(), label_.end(), [](char c) { return c != 'I'; }));
}

std::uint64_t PauliWord::x_mask() const noexcept {
    std::uint64_t mask = 0;
    for (std::size_t q = 0; q < label_.size(); ++q) {
        if (label_[q] == 'X' || label_[q] == 'Y') mask |= bit_of(label_.size(), q);
    }
    return mask;
}

std::uint64_t PauliWord::z_mask() const noexcept {
    std::uint64_t mask = 0;
    for (std::size_t q = 0; q < label_.size(); ++q) {
        if (label_[q] == 'Z' || label_[q] == 'Y') mask |= bit_of(label_.size(), q);
    }
    return mask;
}

std::size_t PauliWord::y_count() const noexcept {
    return static_cast<std::size_t>(std::count(label_.begin(), label_.end(), 'Y'));
}

bool PauliWord::commutes_with(const PauliWord &other) const {
    if (other.n_qubits() != n_qubits()) {
        throw Error(ErrorKind::DimMismatch, "Pauli words of different lengths");
    }
    std::size_t anti = 0;
    for (std::size_t q = 0; q < label_.size(); ++q) {
        const char a = label_[q];
        const char b = other.label_[q];
        if (a != 'I' && b != 'I' && a != b) ++anti;
    }
    return anti % 2 == 0;
}

std::pair<Complex, PauliWord> multiply(const PauliWord &a, const PauliWord &b) {
    if (a.n_qubits() != b.n_qubits()) {
        throw Error(ErrorKind::DimMismatch, "Pauli words of different lengths");
    }
    Complex phase{1.0, 0.0};
    std::string label(a.n_qubits(), 'I');
    for (std::size_t q = 0; q < a.n_qubits(); ++q) {
        const auto [p, c] = multiply_single(a.op(q), b.op(q));
        phase *= p;
        label[q] = c;
    }
    return {phase, PauliWord(std::move(label))};
}

PauliSum::PauliSum(std::size_t n_qubits,
                   std::initializer_list<std::pair<double, std::string>> terms)
    : n_qubits_(n_qubits) {
    for (const auto &[coeff, label] : terms) add(coeff, PauliWord(label));
}

void PauliSum::add(double coeff, const PauliWord &word) {
    if (n_qubits_ == 0) n_qubits_ = word.n_qubits();
    if (word.n_qubits() != n_qubits_) {
        throw Error(ErrorKind::DimMismatch, "word " + word.label() + " does not act on " +
                                                std::to_string(n_qubits_) + " qubits");
    }
    terms_[word] += coeff;
}

void PauliSum::add(const PauliSum &other, double scale) {
    for (const auto &[word, coeff] : other.terms_) add(scale * coeff, word);
}

double PauliSum::coefficient(const PauliWord &word) const {
    const auto it = terms_.find(word);
    return it == terms_.end() ? 0.0 : it->second;
}

double PauliSum::one_norm() const {
    double total = 0.0;
    for (const auto &[word, coeff] : terms_) total += std::abs(coeff);
    return total;
}

DenseOperator PauliSum::to_matrix() const {
    if (n_qubits_ > kMaxDenseQubits) {
        throw Error(ErrorKind::TooLarge, "dense matrices are limited to 6 qubits");
    }
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits_);
    DenseOperator out = DenseOperator::Zero(dim, dim);
    for (const auto &[word, coeff] : terms_) {
        const std::uint64_t x = word.x_mask();
        const std::uint64_t z = word.z_mask();
        const std::size_t ny = word.y_count();
        for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b) {
            out(static_cast<Eigen::Index>(b ^ x), static_cast<Eigen::Index>(b)) +=
                coeff * word_phase(b, z, ny);
        }
    }
    return out;
}

DenseOperator to_matrix(const PauliWord &word) {
    PauliSum sum(word.n_qubits());
    sum.add(1.0, word);
    return sum.to_matrix();
}

DenseOperator PauliDecomposition::reconstruct() const {
    PauliSum sum(n_qubits);
    for (const auto &[word, coeff] : coeffs) sum.add(coeff, word);
    if (sum.empty()) {
        const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
        return DenseOperator::Zero(dim, dim);
    }
    return sum.to_matrix();
}

double anti_hermitian_residue(const DenseOperator &op) {
    if (op.size() == 0) return 0.0;
    return (0.5 * (op - op.adjoint())).cwiseAbs().maxCoeff();
}

PauliDecomposition pauli_decompose(const DenseOperator &op, std::size_t n_qubits,
                                   double herm_tol, double drop_tol) {
    if (n_qubits == 0 || n_qubits > kMaxDenseQubits) {
        throw Error(ErrorKind::TooLarge, "pauli_decompose supports 1 to 6 qubits");
    }
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
    if (op.rows() != dim || op.cols() != dim) {
        throw Error(ErrorKind::DimMismatch, "operator shape does not match qubit count");
    }
    const double residue = anti_hermitian_residue(op);
    if (residue > herm_tol) {
        throw Error(ErrorKind::NotHermitian,
                    "anti-Hermitian residue " + std::to_string(residue) + " exceeds tolerance");
    }

    PauliDecomposition out;
    out.n_qubits = n_qubits;
    const std::uint64_t n_words = std::uint64_t{1} << (2 * n_qubits);
    const double inv_dim = 1.0 / static_cast<double>(dim);
    std::string label(n_qubits, 'I');
    static constexpr char kOps[4] = {'I', 'X', 'Y', 'Z'};
    for (std::uint64_t code = 0; code < n_words; ++code) {
        for (std::size_t q = 0; q < n_qubits; ++q) {
            label[q] = kOps[(code >> (2 * (n_qubits - 1 - q))) & 3U];
        }
        const PauliWord word(label);
        const std::uint64_t x = word.x_mask();
        const std::uint64_t z = word.z_mask();
        const std::size_t ny = word.y_count();
        // tr(P A) = sum_c phase(c) A[c, c ^ x]
        Complex trace{0.0, 0.0};
        for (std::uint64_t c = 0; c < static_cast<std::uint64_t>(dim); ++c) {
            trace += word_phase(c, z, ny) *
                     op(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c ^ x));
        }
        const double coeff = trace.real() * inv_dim;
        if (coeff != 0.0 && std::abs(coeff) > drop_tol) out.coeffs.emplace(word, coeff);
    }
    return out;
}

DenseOperator commutator(const DenseOperator &a, const DenseOperator &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
        throw Error(ErrorKind::DimMismatch, "commutator of differently shaped operators");
    }
    return a * b - b * a;
}

DLAResult dla_closure(std::span<const PauliWord> generators) {
    DLAResult out;
    if (generators.empty()) return out;
    const std::size_t n = generators.front().n_qubits();
    std::vector<PauliWord> ordered;
    std::deque<PauliWord> pending;
    for (const auto &g : generators) {
        if (g.n_qubits() != n) {
            throw Error(ErrorKind::DimMismatch, "DLA generators act on different registers");
        }
        if (g.is_identity()) {
            throw Error(ErrorKind::IdentityGenerator, "identity word cannot generate a rotation");
        }
        if (out.basis.insert(g).second) pending.push_back(g);
    }
    // Each new element is commuted against everything already in the basis;
    // pairs among earlier elements were handled when the later one arrived.
    while (!pending.empty()) {
        const PauliWord current = pending.front();
        pending.pop_front();
        ordered.push_back(current);
        for (std::size_t k = 0; k + 1 < ordered.size(); ++k) {
            const PauliWord &other = ordered[k];
            if (current.commutes_with(other)) continue;
            const auto product = multiply(current, other).second;
            if (out.basis.insert(product).second) pending.push_back(product);
        }
    }
    out.dimension = out.basis.size();
    return out;
}

void apply_pauli(const PauliWord &word, std::span<const Complex> in, std::span<Complex> out) {
    const std::uint64_t x = word.x_mask();
    const std::uint64_t z = word.z_mask();
    const std::size_t ny = word.y_count();
    for (std::uint64_t b = 0; b < in.size(); ++b) {
        out[b ^ x] = word_phase(b, z, ny) * in[b];
    }
}

} // namespace pulsegrad
