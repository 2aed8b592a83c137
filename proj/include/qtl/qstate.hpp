#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "qtl/location.hpp"
#include "qtl/syntax.hpp"

namespace qtl {

/// Single-qubit gate matrix.
template <typename Real>
Eigen::Matrix<std::complex<Real>, 2, 2> gate_matrix(GateKind g) {
    using C = std::complex<Real>;
    const Real r = Real(1) / std::sqrt(Real(2));
    Eigen::Matrix<C, 2, 2> m;
    switch (g) {
        case GateKind::X: m << C(0), C(1), C(1), C(0); break;
        case GateKind::Z: m << C(1), C(0), C(0), C(-1); break;
        case GateKind::H: m << C(r), C(r), C(r), C(-r); break;
        case GateKind::S: m << C(1), C(0), C(0), C(0, 1); break;
    }
    return m;
}

/// |0><0| or |T><T| with |T> = (|0> + e^{i pi/4}|1>)/sqrt 2.
template <typename Real>
Eigen::Matrix<std::complex<Real>, 2, 2> initial_density(InitState s) {
    using C = std::complex<Real>;
    Eigen::Matrix<C, 2, 2> m;
    if (s == InitState::Zero) {
        m << C(1), C(0), C(0), C(0);
    } else {
        const Real pi = std::acos(Real(-1));
        Eigen::Matrix<C, 2, 1> ket;
        ket << C(1), std::polar(Real(1), pi / 4);
        ket /= std::sqrt(Real(2));
        m = ket * ket.adjoint();
    }
    return m;
}

/// Density matrix over labelled qubits. Labels are kept in allocation order and
/// the first label is the most significant bit of a basis index.
template <typename Real>
class BasicQState {
public:
    using Scalar = std::complex<Real>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    struct Target {
        Location loc;
        Basis basis;
    };

    BasicQState() : rho_(Matrix::Ones(1, 1)) {}

    const std::vector<Location>& labels() const noexcept { return labels_; }
    std::size_t qubit_count() const noexcept { return labels_.size(); }
    const Matrix& density() const noexcept { return rho_; }

    std::optional<std::size_t> index_of(const Location& l) const {
        auto it = std::find(labels_.begin(), labels_.end(), l);
        if (it == labels_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - labels_.begin());
    }
    bool contains(const Location& l) const { return index_of(l).has_value(); }

    /// rho (x) |s><s|_l
    void alloc(const Location& l, InitState s) {
        if (contains(l)) throw std::invalid_argument("qubit already allocated at " + l.name);
        Matrix next = Eigen::kroneckerProduct(rho_, initial_density<Real>(s)).eval();
        rho_ = std::move(next);
        labels_.push_back(l);
    }

    /// Partial trace over l's factor.
    void free(const Location& l) {
        const std::uint64_t mask = mask_of(l);
        const Eigen::Index half = rho_.rows() / 2;
        Matrix next(half, half);
        for (Eigen::Index j = 0; j < half; ++j) {
            for (Eigen::Index k = 0; k < half; ++k) {
                const auto j0 = insert_zero(static_cast<std::uint64_t>(j), mask);
                const auto k0 = insert_zero(static_cast<std::uint64_t>(k), mask);
                next(j, k) = at(j0, k0) + at(j0 | mask, k0 | mask);
            }
        }
        rho_ = std::move(next);
        labels_.erase(labels_.begin() + static_cast<std::ptrdiff_t>(*index_of(l)));
    }

    /// U_l rho U_l^dagger
    void apply(GateKind g, const Location& l) { apply(gate_matrix<Real>(g), l); }

    void apply(const Eigen::Matrix<Scalar, 2, 2>& u, const Location& l) {
        const std::uint64_t mask = mask_of(l);
        const auto n = static_cast<std::uint64_t>(rho_.rows());
        for (std::uint64_t r = 0; r < n; ++r) {
            if (r & mask) continue;
            for (std::uint64_t c = 0; c < n; ++c) {
                const Scalar a = at(r, c), b = at(r | mask, c);
                at(r, c) = u(0, 0) * a + u(0, 1) * b;
                at(r | mask, c) = u(1, 0) * a + u(1, 1) * b;
            }
        }
        for (std::uint64_t c = 0; c < n; ++c) {
            if (c & mask) continue;
            for (std::uint64_t r = 0; r < n; ++r) {
                const Scalar a = at(r, c), b = at(r, c | mask);
                at(r, c) = a * std::conj(u(0, 0)) + b * std::conj(u(0, 1));
                at(r, c | mask) = a * std::conj(u(1, 0)) + b * std::conj(u(1, 1));
            }
        }
    }

    /// Tr(M_s rho) for M_s = (I + (-1)^s P)/2, P the product of the target Paulis.
    Real probability(const std::vector<Target>& targets, int outcome) const {
        const auto [xmask, zmask] = pauli_masks(targets);
        Scalar expectation = 0;
        const auto n = static_cast<std::uint64_t>(rho_.rows());
        for (std::uint64_t r = 0; r < n; ++r) expectation += Real(sign(r, zmask)) * at(r ^ xmask, r);
        const Real s = outcome == 0 ? Real(1) : Real(-1);
        return (Real(1) + s * expectation.real()) / 2;
    }

    /// Projects onto the outcome and renormalises. Returns p_outcome; the state is
    /// left untouched when the outcome has probability below `zero_tolerance`.
    Real measure(const std::vector<Target>& targets, int outcome, Real zero_tolerance = Real(1e-12)) {
        const Real p = probability(targets, outcome);
        if (p <= zero_tolerance) return p;
        const auto [xmask, zmask] = pauli_masks(targets);
        const Real s = outcome == 0 ? Real(1) : Real(-1);
        const auto n = static_cast<std::uint64_t>(rho_.rows());
        Matrix next(rho_.rows(), rho_.cols());
        for (std::uint64_t r = 0; r < n; ++r) {
            const Real sr = Real(sign(r, zmask));
            for (std::uint64_t c = 0; c < n; ++c) {
                const Real sc = Real(sign(c, zmask));
                const Scalar v = at(r, c) + s * sr * at(r ^ xmask, c) + s * sc * at(r, c ^ xmask) +
                                 sr * sc * at(r ^ xmask, c ^ xmask);
                next(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v / (Real(4) * p);
            }
        }
        rho_ = std::move(next);
        return p;
    }

    Real trace_deviation() const { return std::abs(rho_.trace() - Scalar(1)); }
    Real hermiticity_deviation() const {
        return rho_.rows() == 0 ? Real(0) : (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    }
    Real min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    /// The state reduced to `keep`, in the given order.
    Matrix reduced(const std::vector<Location>& keep) const {
        BasicQState copy = *this;
        for (const auto& l : labels_) {
            if (std::find(keep.begin(), keep.end(), l) == keep.end()) copy.free(l);
        }
        return copy.permuted(keep);
    }

private:
    Scalar& at(std::uint64_t r, std::uint64_t c) {
        return rho_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    const Scalar& at(std::uint64_t r, std::uint64_t c) const {
        return rho_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }

    std::uint64_t mask_of(const Location& l) const {
        auto i = index_of(l);
        if (!i) throw std::invalid_argument("no qubit at " + l.name);
        return std::uint64_t{1} << (labels_.size() - 1 - *i);
    }

    static std::uint64_t insert_zero(std::uint64_t j, std::uint64_t mask) {
        return ((j & ~(mask - 1)) << 1) | (j & (mask - 1));
    }

    static int sign(std::uint64_t r, std::uint64_t zmask) {
        return (std::popcount(r & zmask) & 1) ? -1 : 1;
    }

    std::pair<std::uint64_t, std::uint64_t> pauli_masks(const std::vector<Target>& targets) const {
        std::uint64_t x = 0, z = 0;
        for (const auto& t : targets) {
            const std::uint64_t m = mask_of(t.loc);
            if ((x | z) & m) throw std::invalid_argument("measurement targets must be distinct");
            (t.basis == Basis::X ? x : z) |= m;
        }
        return {x, z};
    }

    // Matrix over `order` (a permutation of the labels).
    Matrix permuted(const std::vector<Location>& order) const {
        const std::size_t k = labels_.size();
        std::vector<std::size_t> from(k);
        for (std::size_t i = 0; i < k; ++i) from[i] = *index_of(order.at(i));
        auto map_index = [&](std::uint64_t idx) {
            std::uint64_t out = 0;
            for (std::size_t i = 0; i < k; ++i) {
                const std::uint64_t bit = (idx >> (k - 1 - from[i])) & 1;
                out |= bit << (k - 1 - i);
            }
            return out;
        };
        Matrix out(rho_.rows(), rho_.cols());
        const auto n = static_cast<std::uint64_t>(rho_.rows());
        for (std::uint64_t r = 0; r < n; ++r) {
            for (std::uint64_t c = 0; c < n; ++c) {
                out(static_cast<Eigen::Index>(map_index(r)), static_cast<Eigen::Index>(map_index(c))) =
                    at(r, c);
            }
        }
        return out;
    }

    std::vector<Location> labels_;
    Matrix rho_;
};

using QState = BasicQState<double>;

}  // namespace qtl
