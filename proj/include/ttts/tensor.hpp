#pragma once

#include <Eigen/Core>

#include <cmath>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ttts/errors.hpp"

namespace ttts {

using Index = Eigen::Index;
using Dims = std::vector<Index>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Product of dims[first, last).
inline Index dims_product(std::span<const Index> dims, std::size_t first, std::size_t last) {
    Index p = 1;
    for (std::size_t i = first; i < last; ++i) p *= dims[i];
    return p;
}

inline Index dims_product(std::span<const Index> dims) {
    return dims_product(dims, 0, dims.size());
}

inline std::string dims_string(std::span<const Index> dims) {
    std::string s = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(dims[i]);
    }
    return s + ")";
}

/**
 * Order-d real array with column-major storage: the first index varies
 * fastest, so entry (i_1, ..., i_d) (zero based) lives at
 * i_1 + n_1 (i_2 + n_2 (i_3 + ...)).
 *
 * Every matricization, unfolding and sketch ordering in the library derives
 * from this one convention.
 */
template <typename Scalar>
class DenseTensor {
    static_assert(std::is_floating_point_v<Scalar>, "DenseTensor needs a floating point scalar");

public:
    using scalar_type = Scalar;
    using vector_type = Vector<Scalar>;

    DenseTensor() : dims_{1}, data_(vector_type::Zero(1)) {}

    /// Zero-filled tensor.
    explicit DenseTensor(Dims dims) : dims_(std::move(dims)) {
        check_dims(dims_);
        data_ = vector_type::Zero(dims_product(dims_));
    }

    DenseTensor(Dims dims, vector_type data) : dims_(std::move(dims)), data_(std::move(data)) {
        check_dims(dims_);
        if (data_.size() != dims_product(dims_))
            throw DomainError("DenseTensor: data length " + std::to_string(data_.size()) +
                              " does not match dims " + dims_string(dims_));
    }

    DenseTensor(Dims dims, std::initializer_list<Scalar> values)
        : DenseTensor(std::move(dims), Eigen::Map<const vector_type>(values.begin(),
                                                                      static_cast<Index>(values.size()))) {}

    static DenseTensor Constant(Dims dims, Scalar value) {
        DenseTensor t(std::move(dims));
        t.data_.setConstant(value);
        return t;
    }

    const Dims& dims() const noexcept { return dims_; }
    Index order() const noexcept { return static_cast<Index>(dims_.size()); }
    Index dim(Index k) const { return dims_.at(static_cast<std::size_t>(k)); }
    Index size() const noexcept { return data_.size(); }
    const vector_type& data() const noexcept { return data_; }

    Scalar operator[](Index flat) const { return data_[flat]; }

    /// Zero-based multi-index access.
    Scalar operator()(std::span<const Index> idx) const { return data_[offset(idx)]; }
    Scalar operator()(std::initializer_list<Index> idx) const {
        return (*this)(std::span<const Index>(idx.begin(), idx.size()));
    }

    Index offset(std::span<const Index> idx) const {
        if (idx.size() != dims_.size())
            throw DomainError("DenseTensor: index has wrong order");
        Index flat = 0;
        for (std::size_t s = idx.size(); s-- > 0;) {
            if (idx[s] < 0 || idx[s] >= dims_[s])
                throw DomainError("DenseTensor: index out of range in mode " + std::to_string(s));
            flat = flat * dims_[s] + idx[s];
        }
        return flat;
    }

    template <typename Other>
    DenseTensor<Other> cast() const {
        return DenseTensor<Other>(dims_, data_.template cast<Other>());
    }

private:
    static void check_dims(const Dims& dims) {
        if (dims.empty()) throw DomainError("DenseTensor: order must be at least 1");
        for (Index n : dims)
            if (n < 1) throw DomainError("DenseTensor: every dimension must be positive, got " + dims_string(dims));
    }

    Dims dims_;
    vector_type data_;
};

using Tensor = DenseTensor<double>;

/**
 * One-based lexicographic bijection between a multi-index and a flat index,
 * i = 1 + sum_s (i_s - 1) prod_{t<s} n_t.
 */
inline Index linear_index(std::span<const Index> dims, std::span<const Index> multi) {
    if (dims.size() != multi.size()) throw DomainError("linear_index: order mismatch");
    Index i = 0;
    Index stride = 1;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (multi[s] < 1 || multi[s] > dims[s])
            throw DomainError("linear_index: component " + std::to_string(s + 1) + " out of range");
        i += (multi[s] - 1) * stride;
        stride *= dims[s];
    }
    return i + 1;
}

/// Inverse of linear_index; both sides one-based.
inline Dims multi_index(std::span<const Index> dims, Index i) {
    const Index total = dims_product(dims);
    if (i < 1 || i > total) throw DomainError("multi_index: flat index out of range");
    Dims out(dims.size());
    Index rem = i - 1;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        out[s] = rem % dims[s] + 1;
        rem /= dims[s];
    }
    return out;
}

namespace detail {

inline void check_mode(Index order, Index k, const char* who) {
    if (k < 0 || k >= order)
        throw DomainError(std::string(who) + ": mode " + std::to_string(k) + " out of range for order " +
                          std::to_string(order));
}

// (left, n_k, right) sizes around mode k
inline std::tuple<Index, Index, Index> split_at(std::span<const Index> dims, Index k) {
    const auto kk = static_cast<std::size_t>(k);
    return {dims_product(dims, 0, kk), dims[kk], dims_product(dims, kk + 1, dims.size())};
}

}  // namespace detail

/**
 * Mode-k matricization (k zero based). The result is n_k x prod_{i != k} n_i;
 * its columns enumerate the remaining modes in column-major order with the
 * earlier modes fastest.
 */
template <typename Scalar>
Matrix<Scalar> matricize(const DenseTensor<Scalar>& a, Index k) {
    detail::check_mode(a.order(), k, "matricize");
    const auto [left, nk, right] = detail::split_at(a.dims(), k);
    Matrix<Scalar> out(nk, left * right);
    const Scalar* src = a.data().data();
    for (Index r = 0; r < right; ++r)
        for (Index i = 0; i < nk; ++i)
            for (Index l = 0; l < left; ++l)
                out(i, l + left * r) = src[l + left * (i + nk * r)];
    return out;
}

/// Inverse of matricize: folds an n_k x prod_{i != k} n_i matrix back into dims.
template <typename Derived>
DenseTensor<typename Derived::Scalar> fold(const Eigen::MatrixBase<Derived>& m, Dims dims, Index k) {
    using Scalar = typename Derived::Scalar;
    detail::check_mode(static_cast<Index>(dims.size()), k, "fold");
    const auto [left, nk, right] = detail::split_at(dims, k);
    if (m.rows() != nk || m.cols() != left * right)
        throw DomainError("fold: matrix shape does not match dims " + dims_string(dims));
    Vector<Scalar> data(left * nk * right);
    for (Index r = 0; r < right; ++r)
        for (Index i = 0; i < nk; ++i)
            for (Index l = 0; l < left; ++l)
                data[l + left * (i + nk * r)] = m(i, l + left * r);
    return DenseTensor<Scalar>(std::move(dims), std::move(data));
}

/// k-mode product A x_k M: mode k of size n_k is replaced by M.rows().
template <typename Scalar, typename Derived>
DenseTensor<Scalar> mode_product(const DenseTensor<Scalar>& a, Index k, const Eigen::MatrixBase<Derived>& m) {
    detail::check_mode(a.order(), k, "mode_product");
    const auto [left, nk, right] = detail::split_at(a.dims(), k);
    if (m.cols() != nk)
        throw DomainError("mode_product: matrix has " + std::to_string(m.cols()) + " columns, mode has size " +
                          std::to_string(nk));
    const Index mk = m.rows();
    Dims out_dims = a.dims();
    out_dims[static_cast<std::size_t>(k)] = mk;
    Vector<Scalar> out(left * mk * right);
    const Matrix<Scalar> mt = m.transpose();
    for (Index r = 0; r < right; ++r) {
        Eigen::Map<const Matrix<Scalar>> block(a.data().data() + left * nk * r, left, nk);
        Eigen::Map<Matrix<Scalar>> dst(out.data() + left * mk * r, left, mk);
        dst.noalias() = block * mt;
    }
    return DenseTensor<Scalar>(std::move(out_dims), std::move(out));
}

namespace detail {
template <typename Scalar>
void check_core(const DenseTensor<Scalar>& g, const char* who) {
    if (g.order() != 3) throw DomainError(std::string(who) + ": expected an order-3 core");
}
}  // namespace detail

/// Left unfolding of an (r1, n, r2) core: (r1 n) x r2, row index i1 + i2 r1.
template <typename Scalar>
Matrix<Scalar> left_unfold(const DenseTensor<Scalar>& g) {
    detail::check_core(g, "left_unfold");
    return Eigen::Map<const Matrix<Scalar>>(g.data().data(), g.dim(0) * g.dim(1), g.dim(2));
}

/// Right unfolding of an (r1, n, r2) core: r1 x (n r2), column index i2 + i3 n.
template <typename Scalar>
Matrix<Scalar> right_unfold(const DenseTensor<Scalar>& g) {
    detail::check_core(g, "right_unfold");
    return Eigen::Map<const Matrix<Scalar>>(g.data().data(), g.dim(0), g.dim(1) * g.dim(2));
}

/// Inverse of left_unfold / right_unfold. Both unfoldings are plain column-major reshapes.
template <typename Derived>
DenseTensor<typename Derived::Scalar> fold_core(const Eigen::MatrixBase<Derived>& m, Index r1, Index n, Index r2) {
    using Scalar = typename Derived::Scalar;
    if (m.size() != r1 * n * r2) throw DomainError("fold_core: element count mismatch");
    Matrix<Scalar> tmp = m;
    return DenseTensor<Scalar>({r1, n, r2}, Eigen::Map<const Vector<Scalar>>(tmp.data(), tmp.size()));
}

template <typename Scalar>
Scalar frobenius_norm(const DenseTensor<Scalar>& a) {
    return a.data().norm();
}

/// Column-major reshape: the flat data is untouched.
template <typename Scalar>
DenseTensor<Scalar> reshape(const DenseTensor<Scalar>& a, Dims new_dims) {
    for (Index n : new_dims)
        if (n < 1) throw DomainError("reshape: dimensions must be positive");
    if (dims_product(new_dims) != a.size())
        throw DomainError("reshape: " + dims_string(a.dims()) + " cannot become " + dims_string(new_dims));
    return DenseTensor<Scalar>(std::move(new_dims), a.data());
}

}  // namespace ttts
