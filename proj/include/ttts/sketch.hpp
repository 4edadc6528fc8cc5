#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ttts/random.hpp"
#include "ttts/tensor.hpp"
#include "ttts/tt.hpp"

namespace ttts {

using Complex = std::complex<double>;

/// The Mersenne prime 2^61 - 1 that all polynomial hashes reduce by.
inline constexpr std::uint64_t hash_prime = (std::uint64_t{1} << 61) - 1;

/**
 * Polynomial hash x -> ((c_0 + c_1 x + ... + c_t x^t) mod p) mod range.
 * A degree-t polynomial with uniform coefficients in [0, p) is (t+1)-wise
 * independent on [0, p).
 */
class PolyHash {
public:
    PolyHash(int degree, std::uint64_t range, Rng& rng);
    PolyHash(std::vector<std::uint64_t> coefficients, std::uint64_t range);

    std::uint64_t operator()(std::uint64_t x) const;

    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    std::uint64_t range() const noexcept { return range_; }
    const std::vector<std::uint64_t>& coefficients() const noexcept { return coeffs_; }

private:
    std::vector<std::uint64_t> coeffs_;
    std::uint64_t range_;
};

/**
 * CountSketch S = Omega D of size m x n, stored as tables: column i has the
 * single entry sign[i] in row bucket[i]. Buckets are zero based.
 */
class CountSketch {
public:
    CountSketch(Index m, std::vector<Index> bucket, std::vector<double> sign);

    Index domain() const noexcept { return static_cast<Index>(bucket_.size()); }
    Index sketch_size() const noexcept { return m_; }
    Index bucket(Index i) const { return bucket_[static_cast<std::size_t>(i)]; }
    double sign(Index i) const { return sign_[static_cast<std::size_t>(i)]; }
    const std::vector<Index>& buckets() const noexcept { return bucket_; }
    const std::vector<double>& signs() const noexcept { return sign_; }

    /// S x for a length-n vector.
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd dense() const;

private:
    Index m_;
    std::vector<Index> bucket_;
    std::vector<double> sign_;
};

/// Buckets from a degree-2 hash (3-wise independent), signs from a degree-3 hash (4-wise).
CountSketch make_countsketch(Index n, Index m, Rng& rng);
CountSketch make_countsketch(Index n, Index m, std::uint64_t seed);

/// One CountSketch per mode, all of size m.
std::vector<CountSketch> make_countsketches(std::span<const Index> dims, Index m, Rng& rng);

/**
 * TensorSketch over an ordered list of modes (earlier modes fastest). The
 * combined bucket of (i_1, ..., i_q) is (sum_k h_k(i_k)) mod m and its sign
 * is prod_k v_k(i_k).
 */
class TensorSketch {
public:
    explicit TensorSketch(std::vector<CountSketch> modes);

    Index sketch_size() const noexcept { return m_; }
    Index num_modes() const noexcept { return static_cast<Index>(modes_.size()); }
    const CountSketch& mode(Index k) const { return modes_.at(static_cast<std::size_t>(k)); }
    const std::vector<CountSketch>& modes() const noexcept { return modes_; }
    Dims domain_dims() const;

private:
    std::vector<CountSketch> modes_;
    Index m_;
};

/// TensorSketch built from every sketch in `per_mode` except entry `skip`.
TensorSketch tensor_sketch_excluding(std::span<const CountSketch> per_mode, Index skip);

/// Zero-based combined bucket of a zero-based multi-index.
Index combined_hash(const TensorSketch& ts, std::span<const Index> idx);
double combined_sign(const TensorSketch& ts, std::span<const Index> idx);

/// Dense m x prod n_k matrix of the sketch. Intended for tests and small problems.
Eigen::MatrixXd materialize(const TensorSketch& ts, Index cap = Index{1} << 24);

/// S A for a matrix A with prod n_k rows, without forming S.
Eigen::MatrixXd sketch_rows(const TensorSketch& ts, const Eigen::MatrixXd& a);

/// Unnormalized DFT with kernel exp(-2 pi i jk / m); any length m >= 1.
Eigen::VectorXcd dft(const Eigen::VectorXcd& x);
/// Inverse of dft, including the 1/m factor.
Eigen::VectorXcd idft(const Eigen::VectorXcd& x);

/// A core after G x_2 (F S): slice s (s < m) is an r1 x r2 complex matrix.
struct SketchedCore {
    Index r1 = 1;
    Index r2 = 1;
    std::vector<Eigen::MatrixXcd> slices;

    Index sketch_size() const noexcept { return static_cast<Index>(slices.size()); }
};

/// G x_2 (F S): bucket accumulation in O(n r1 r2), then one length-m DFT per (a, b) fiber.
SketchedCore sketch_core(const Tensor& g, const CountSketch& cs);

/**
 * S (G_{>k}^T kron G_{<k}) for the TensorSketch generated by the per-mode
 * sketches of every mode except k, computed as
 * F^{-1}[(F S_{>k} G_{>k}^T) face-split (F S_{<k} G_{<k})].
 * Result is m x (r_{k-1} r_k), column a + b r_{k-1}.
 *
 * `per_mode` holds one sketch per mode of `t`; entry k is ignored.
 */
Eigen::MatrixXd sketch_kron_chain(const TT& t, Index k, std::span<const CountSketch> per_mode);

/// Same product from already sketched cores (entry k ignored).
Eigen::MatrixXd sketch_kron_chain(std::span<const SketchedCore> sketched, Index k);

/**
 * S A_(k)^T (m x n_k) in one pass over the entries of A, where `ts` sketches
 * the modes other than k in increasing order. Exact zeros are skipped.
 */
Eigen::MatrixXd sketch_mode_k_fibers(const Tensor& a, Index k, const TensorSketch& ts);

}  // namespace ttts
