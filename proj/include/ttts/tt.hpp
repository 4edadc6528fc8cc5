#pragma once

#include <Eigen/QR>

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "ttts/random.hpp"
#include "ttts/tensor.hpp"

namespace ttts {

/// Default cap on the number of entries tt_full / dense design matrices may materialize.
inline constexpr Index default_memory_cap = Index{1} << 27;

/**
 * Tensor train [[G_1, ..., G_d]]: core k has shape (r_{k-1}, n_k, r_k) with
 * r_0 = r_d = 1, and entry (i_1, ..., i_d) is the matrix product
 * G_1(i_1) G_2(i_2) ... G_d(i_d) of the middle-mode slices.
 */
template <typename Scalar>
class TensorTrain {
public:
    using core_type = DenseTensor<Scalar>;

    TensorTrain() = default;

    explicit TensorTrain(std::vector<core_type> cores) : cores_(std::move(cores)) {
        if (cores_.empty()) throw DomainError("TensorTrain: needs at least one core");
        for (std::size_t k = 0; k < cores_.size(); ++k) {
            if (cores_[k].order() != 3)
                throw DomainError("TensorTrain: core " + std::to_string(k) + " is not order 3");
            if (k + 1 < cores_.size() && cores_[k].dim(2) != cores_[k + 1].dim(0))
                throw DomainError("TensorTrain: rank mismatch between cores " + std::to_string(k) + " and " +
                                  std::to_string(k + 1));
        }
        if (cores_.front().dim(0) != 1 || cores_.back().dim(2) != 1)
            throw DomainError("TensorTrain: boundary ranks must be 1");
    }

    Index order() const noexcept { return static_cast<Index>(cores_.size()); }
    const core_type& core(Index k) const { return cores_.at(static_cast<std::size_t>(k)); }
    const std::vector<core_type>& cores() const noexcept { return cores_; }

    /// Replace core k by a core of identical shape.
    void set_core(Index k, core_type g) {
        const auto& old = core(k);
        if (g.dims() != old.dims())
            throw DomainError("TensorTrain::set_core: shape " + dims_string(g.dims()) + " differs from " +
                              dims_string(old.dims()));
        cores_[static_cast<std::size_t>(k)] = std::move(g);
    }

    Dims dims() const {
        Dims out;
        for (const auto& g : cores_) out.push_back(g.dim(1));
        return out;
    }

    /// (r_0, ..., r_d)
    Dims ranks() const {
        Dims out{1};
        for (const auto& g : cores_) out.push_back(g.dim(2));
        return out;
    }

    /// Number of stored scalars, sum_k r_{k-1} n_k r_k.
    Index storage() const {
        Index s = 0;
        for (const auto& g : cores_) s += g.size();
        return s;
    }

private:
    std::vector<core_type> cores_;
};

using TT = TensorTrain<double>;

namespace detail {

// Slice G(i) of an (r1, n, r2) core as an r1 x r2 matrix.
template <typename Scalar>
Matrix<Scalar> core_slice(const DenseTensor<Scalar>& g, Index i) {
    const Index r1 = g.dim(0), n = g.dim(1), r2 = g.dim(2);
    Matrix<Scalar> s(r1, r2);
    const Scalar* p = g.data().data();
    for (Index b = 0; b < r2; ++b)
        for (Index a = 0; a < r1; ++a) s(a, b) = p[a + r1 * (i + n * b)];
    return s;
}

/**
 * Thin QR with a deterministic gauge: R has a nonnegative diagonal, and a
 * zero input gives Q = leading identity columns, R = 0. When rows < cols,
 * Q is padded with zero columns and R with zero rows so that Q is rows x cols
 * and R is cols x cols.
 */
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> thin_qr(const Matrix<Scalar>& a) {
    const Index rows = a.rows(), cols = a.cols();
    const Index p = std::min(rows, cols);
    Eigen::HouseholderQR<Matrix<Scalar>> qr(a);
    Matrix<Scalar> q = Matrix<Scalar>::Zero(rows, cols);
    q.leftCols(p) = qr.householderQ() * Matrix<Scalar>::Identity(rows, p);
    Matrix<Scalar> r = Matrix<Scalar>::Zero(cols, cols);
    r.topRows(p) = qr.matrixQR().topRows(p).template triangularView<Eigen::Upper>();
    for (Index i = 0; i < p; ++i) {
        if (r(i, i) < Scalar(0)) {
            r.row(i) *= Scalar(-1);
            q.col(i) *= Scalar(-1);
        }
    }
    return {std::move(q), std::move(r)};
}

}  // namespace detail

/// Entry at a zero-based multi-index.
template <typename Scalar>
Scalar tt_entry(const TensorTrain<Scalar>& t, std::span<const Index> idx) {
    if (static_cast<Index>(idx.size()) != t.order()) throw DomainError("tt_entry: index has wrong order");
    Matrix<Scalar> row = Matrix<Scalar>::Ones(1, 1);
    for (Index k = 0; k < t.order(); ++k) {
        const auto i = idx[static_cast<std::size_t>(k)];
        if (i < 0 || i >= t.core(k).dim(1)) throw DomainError("tt_entry: index out of range in mode " + std::to_string(k));
        row = row * detail::core_slice(t.core(k), i);
    }
    return row(0, 0);
}

template <typename Scalar>
Scalar tt_entry(const TensorTrain<Scalar>& t, std::initializer_list<Index> idx) {
    return tt_entry(t, std::span<const Index>(idx.begin(), idx.size()));
}

/**
 * G_{<k} as a prod_{i<k} n_i x r_{k-1} matrix (1 x 1 ones for k = 0). Rows
 * follow the column-major multi-index over modes 0..k-1.
 */
template <typename Scalar>
Matrix<Scalar> interface_left(const TensorTrain<Scalar>& t, Index k) {
    detail::check_mode(t.order(), k, "interface_left");
    Matrix<Scalar> w = Matrix<Scalar>::Ones(1, 1);
    for (Index j = 0; j < k; ++j) {
        const auto& g = t.core(j);
        Matrix<Scalar> prod = w * right_unfold(g);  // N x (n r2)
        w = Eigen::Map<Matrix<Scalar>>(prod.data(), w.rows() * g.dim(1), g.dim(2));
    }
    return w;
}

/// G_{>k} as an r_k x prod_{i>k} n_i matrix (1 x 1 ones for the last mode).
template <typename Scalar>
Matrix<Scalar> interface_right(const TensorTrain<Scalar>& t, Index k) {
    detail::check_mode(t.order(), k, "interface_right");
    Matrix<Scalar> v = Matrix<Scalar>::Ones(1, 1);
    for (Index j = t.order() - 1; j > k; --j) {
        const auto& g = t.core(j);
        Matrix<Scalar> prod = left_unfold(g) * v;  // (r1 n) x N
        v = Eigen::Map<Matrix<Scalar>>(prod.data(), g.dim(0), g.dim(1) * v.cols());
    }
    return v;
}

/// Dense reconstruction. Throws ResourceError above `cap` entries.
template <typename Scalar>
DenseTensor<Scalar> tt_full(const TensorTrain<Scalar>& t, Index cap = default_memory_cap) {
    const Dims dims = t.dims();
    const Index total = dims_product(dims);
    if (total > cap)
        throw ResourceError("tt_full: " + std::to_string(total) + " entries exceed the cap of " + std::to_string(cap));
    Matrix<Scalar> w = interface_left(t, t.order() - 1);
    Matrix<Scalar> full = w * right_unfold(t.core(t.order() - 1));
    return DenseTensor<Scalar>(dims, Eigen::Map<const Vector<Scalar>>(full.data(), full.size()));
}

/**
 * Right-to-left orthogonalization. Afterwards cores 1..d-1 (zero based) have
 * orthonormal rows in their right unfolding; the norm is pushed into core 0.
 */
template <typename Scalar>
TensorTrain<Scalar> right_orthogonalize(TensorTrain<Scalar> t) {
    for (Index k = t.order() - 1; k > 0; --k) {
        const auto& g = t.core(k);
        const Index r1 = g.dim(0), n = g.dim(1), r2 = g.dim(2);
        auto [q, r] = detail::thin_qr<Scalar>(right_unfold(g).transpose());
        const auto& prev = t.core(k - 1);
        Matrix<Scalar> merged = left_unfold(prev) * r.transpose();
        t.set_core(k - 1, fold_core(merged, prev.dim(0), prev.dim(1), prev.dim(2)));
        t.set_core(k, fold_core(Matrix<Scalar>(q.transpose()), r1, n, r2));
    }
    return t;
}

/// QR of the left unfolding of core k; Q stays in core k and R moves into core k+1.
template <typename Scalar>
TensorTrain<Scalar> shift_core_qr(TensorTrain<Scalar> t, Index k) {
    if (k < 0 || k + 1 >= t.order()) throw DomainError("shift_core_qr: core index must be below the last core");
    const auto& g = t.core(k);
    const Index r1 = g.dim(0), n = g.dim(1), r2 = g.dim(2);
    auto [q, r] = detail::thin_qr<Scalar>(left_unfold(g));
    const auto& next = t.core(k + 1);
    Matrix<Scalar> merged = r * right_unfold(next);
    t.set_core(k + 1, fold_core(merged, next.dim(0), next.dim(1), next.dim(2)));
    t.set_core(k, fold_core(q, r1, n, r2));
    return t;
}

inline void check_rank_chain(std::span<const Index> dims, std::span<const Index> ranks) {
    if (dims.empty()) throw DomainError("rank chain: need at least one mode");
    if (ranks.size() != dims.size() + 1)
        throw DomainError("rank chain: expected " + std::to_string(dims.size() + 1) + " ranks, got " +
                          std::to_string(ranks.size()));
    if (ranks.front() != 1 || ranks.back() != 1) throw DomainError("rank chain: boundary ranks must be 1");
    for (Index r : ranks)
        if (r < 1) throw DomainError("rank chain: ranks must be positive");
    for (Index n : dims)
        if (n < 1) throw DomainError("rank chain: dimensions must be positive");
}

/// Uniform rank chain (1, r, ..., r, 1) for d modes.
inline Dims uniform_ranks(Index d, Index r) {
    Dims ranks(static_cast<std::size_t>(d + 1), r);
    ranks.front() = ranks.back() = 1;
    return ranks;
}

/// Cores with i.i.d. standard normal entries; deterministic per seed.
template <typename Scalar = double>
TensorTrain<Scalar> random_tt(std::span<const Index> dims, std::span<const Index> ranks, std::uint64_t seed) {
    check_rank_chain(dims, ranks);
    Rng rng(seed);
    std::normal_distribution<Scalar> normal;
    std::vector<DenseTensor<Scalar>> cores;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        Vector<Scalar> v(ranks[k] * dims[k] * ranks[k + 1]);
        for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
        cores.emplace_back(Dims{ranks[k], dims[k], ranks[k + 1]}, std::move(v));
    }
    return TensorTrain<Scalar>(std::move(cores));
}

/// All-zero cores of the given rank chain.
template <typename Scalar = double>
TensorTrain<Scalar> zero_tt(std::span<const Index> dims, std::span<const Index> ranks) {
    check_rank_chain(dims, ranks);
    std::vector<DenseTensor<Scalar>> cores;
    for (std::size_t k = 0; k < dims.size(); ++k) cores.emplace_back(Dims{ranks[k], dims[k], ranks[k + 1]});
    return TensorTrain<Scalar>(std::move(cores));
}

}  // namespace ttts
