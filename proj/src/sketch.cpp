#include "ttts/sketch.hpp"

#include <unsupported/Eigen/FFT>

#include <stdexcept>

namespace ttts {

namespace {

std::uint64_t mod_prime(unsigned __int128 x) {
    // x mod (2^61 - 1) by folding the high bits
    std::uint64_t lo = static_cast<std::uint64_t>(x & hash_prime);
    std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
    std::uint64_t r = lo + hi;
    while (r >= hash_prime) r -= hash_prime;
    return r;
}

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b) {
    return mod_prime(static_cast<unsigned __int128>(a) * b);
}

}  // namespace

PolyHash::PolyHash(int degree, std::uint64_t range, Rng& rng) : range_(range) {
    if (degree < 0) throw DomainError("PolyHash: negative degree");
    if (range < 1) throw DomainError("PolyHash: range must be positive");
    std::uniform_int_distribution<std::uint64_t> coeff(0, hash_prime - 1);
    coeffs_.resize(static_cast<std::size_t>(degree) + 1);
    for (auto& c : coeffs_) c = coeff(rng);
}

PolyHash::PolyHash(std::vector<std::uint64_t> coefficients, std::uint64_t range)
    : coeffs_(std::move(coefficients)), range_(range) {
    if (coeffs_.empty()) throw DomainError("PolyHash: needs at least one coefficient");
    if (range < 1) throw DomainError("PolyHash: range must be positive");
    for (auto& c : coeffs_) c %= hash_prime;
}

std::uint64_t PolyHash::operator()(std::uint64_t x) const {
    x %= hash_prime;
    std::uint64_t acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = mul_mod(acc, x) + *it;
        if (acc >= hash_prime) acc -= hash_prime;
    }
    return acc % range_;
}

CountSketch::CountSketch(Index m, std::vector<Index> bucket, std::vector<double> sign)
    : m_(m), bucket_(std::move(bucket)), sign_(std::move(sign)) {
    if (m_ < 1) throw DomainError("CountSketch: sketch size must be positive");
    if (bucket_.empty()) throw DomainError("CountSketch: empty domain");
    if (bucket_.size() != sign_.size()) throw DomainError("CountSketch: bucket and sign tables differ in length");
    for (Index b : bucket_)
        if (b < 0 || b >= m_) throw DomainError("CountSketch: bucket out of range");
    for (double s : sign_)
        if (s != 1.0 && s != -1.0) throw DomainError("CountSketch: signs must be +1 or -1");
}

Eigen::VectorXd CountSketch::apply(const Eigen::VectorXd& x) const {
    if (x.size() != domain()) throw DomainError("CountSketch::apply: length mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
    for (Index i = 0; i < domain(); ++i) y[bucket(i)] += sign(i) * x[i];
    return y;
}

Eigen::MatrixXd CountSketch::dense() const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m_, domain());
    for (Index i = 0; i < domain(); ++i) s(bucket(i), i) = sign(i);
    return s;
}

CountSketch make_countsketch(Index n, Index m, Rng& rng) {
    if (n < 1 || m < 1) throw DomainError("make_countsketch: n and m must be positive");
    PolyHash h(2, static_cast<std::uint64_t>(m), rng);
    PolyHash v(3, 2, rng);
    std::vector<Index> bucket(static_cast<std::size_t>(n));
    std::vector<double> sign(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        bucket[static_cast<std::size_t>(i)] = static_cast<Index>(h(static_cast<std::uint64_t>(i)));
        sign[static_cast<std::size_t>(i)] = v(static_cast<std::uint64_t>(i)) == 0 ? 1.0 : -1.0;
    }
    return CountSketch(m, std::move(bucket), std::move(sign));
}

CountSketch make_countsketch(Index n, Index m, std::uint64_t seed) {
    Rng rng(seed);
    return make_countsketch(n, m, rng);
}

std::vector<CountSketch> make_countsketches(std::span<const Index> dims, Index m, Rng& rng) {
    std::vector<CountSketch> out;
    out.reserve(dims.size());
    for (Index n : dims) out.push_back(make_countsketch(n, m, rng));
    return out;
}

TensorSketch::TensorSketch(std::vector<CountSketch> modes) : modes_(std::move(modes)), m_(0) {
    if (modes_.empty()) throw DomainError("TensorSketch: needs at least one mode");
    m_ = modes_.front().sketch_size();
    for (const auto& cs : modes_)
        if (cs.sketch_size() != m_) throw DomainError("TensorSketch: component sketches disagree on m");
}

Dims TensorSketch::domain_dims() const {
    Dims out;
    for (const auto& cs : modes_) out.push_back(cs.domain());
    return out;
}

TensorSketch tensor_sketch_excluding(std::span<const CountSketch> per_mode, Index skip) {
    std::vector<CountSketch> kept;
    for (std::size_t i = 0; i < per_mode.size(); ++i)
        if (static_cast<Index>(i) != skip) kept.push_back(per_mode[i]);
    return TensorSketch(std::move(kept));
}

Index combined_hash(const TensorSketch& ts, std::span<const Index> idx) {
    if (static_cast<Index>(idx.size()) != ts.num_modes()) throw DomainError("combined_hash: index has wrong order");
    Index sum = 0;
    for (Index k = 0; k < ts.num_modes(); ++k) {
        const auto i = idx[static_cast<std::size_t>(k)];
        if (i < 0 || i >= ts.mode(k).domain()) throw DomainError("combined_hash: index out of range");
        sum += ts.mode(k).bucket(i);
    }
    return sum % ts.sketch_size();
}

double combined_sign(const TensorSketch& ts, std::span<const Index> idx) {
    if (static_cast<Index>(idx.size()) != ts.num_modes()) throw DomainError("combined_sign: index has wrong order");
    double s = 1.0;
    for (Index k = 0; k < ts.num_modes(); ++k) {
        const auto i = idx[static_cast<std::size_t>(k)];
        if (i < 0 || i >= ts.mode(k).domain()) throw DomainError("combined_sign: index out of range");
        s *= ts.mode(k).sign(i);
    }
    return s;
}

namespace {

// Combined bucket and sign for every flat index of the sketch's domain.
void combined_tables(const TensorSketch& ts, std::vector<Index>& bucket, std::vector<double>& sign) {
    const Dims dims = ts.domain_dims();
    const Index total = dims_product(dims);
    const Index m = ts.sketch_size();
    bucket.assign(static_cast<std::size_t>(total), 0);
    sign.assign(static_cast<std::size_t>(total), 1.0);
    // build mode by mode: entries for the first q modes are a block of the full table
    Index block = 1;
    for (Index k = 0; k < ts.num_modes(); ++k) {
        const auto& cs = ts.mode(k);
        for (Index i = cs.domain() - 1; i >= 0; --i)
            for (Index j = 0; j < block; ++j) {
                const auto dst = static_cast<std::size_t>(j + block * i);
                const auto src = static_cast<std::size_t>(j);
                bucket[dst] = (bucket[src] + cs.bucket(i)) % m;
                sign[dst] = sign[src] * cs.sign(i);
            }
        block *= cs.domain();
    }
}

}  // namespace

Eigen::MatrixXd materialize(const TensorSketch& ts, Index cap) {
    const Index cols = dims_product(ts.domain_dims());
    if (cols * ts.sketch_size() > cap)
        throw ResourceError("materialize: " + std::to_string(cols * ts.sketch_size()) + " entries exceed the cap");
    std::vector<Index> bucket;
    std::vector<double> sign;
    combined_tables(ts, bucket, sign);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(ts.sketch_size(), cols);
    for (Index i = 0; i < cols; ++i) s(bucket[static_cast<std::size_t>(i)], i) = sign[static_cast<std::size_t>(i)];
    return s;
}

Eigen::MatrixXd sketch_rows(const TensorSketch& ts, const Eigen::MatrixXd& a) {
    const Index rows = dims_product(ts.domain_dims());
    if (a.rows() != rows) throw DomainError("sketch_rows: row count does not match the sketch domain");
    std::vector<Index> bucket;
    std::vector<double> sign;
    combined_tables(ts, bucket, sign);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ts.sketch_size(), a.cols());
    for (Index i = 0; i < rows; ++i)
        out.row(bucket[static_cast<std::size_t>(i)]) += sign[static_cast<std::size_t>(i)] * a.row(i);
    return out;
}

namespace {

using Fft = Eigen::FFT<double>;

// kissfft cannot plan a length-1 transform, which is the identity anyway
void fft_forward(Fft& fft, std::vector<Complex>& dst, const std::vector<Complex>& src) {
    if (src.size() == 1) {
        dst = src;
        return;
    }
    dst.resize(src.size());
    fft.fwd(dst, src);
}

void fft_inverse(Fft& fft, std::vector<Complex>& dst, const std::vector<Complex>& src) {
    if (src.size() == 1) {
        dst = src;
        return;
    }
    dst.resize(src.size());
    fft.inv(dst, src);
}

}  // namespace

Eigen::VectorXcd dft(const Eigen::VectorXcd& x) {
    if (x.size() < 1) throw DomainError("dft: empty input");
    Fft fft;
    std::vector<Complex> src(x.data(), x.data() + x.size()), dst;
    fft_forward(fft, dst, src);
    return Eigen::Map<Eigen::VectorXcd>(dst.data(), x.size());
}

Eigen::VectorXcd idft(const Eigen::VectorXcd& x) {
    if (x.size() < 1) throw DomainError("idft: empty input");
    Fft fft;
    std::vector<Complex> src(x.data(), x.data() + x.size()), dst;
    fft_inverse(fft, dst, src);
    return Eigen::Map<Eigen::VectorXcd>(dst.data(), x.size());
}

SketchedCore sketch_core(const Tensor& g, const CountSketch& cs) {
    if (g.order() != 3) throw DomainError("sketch_core: expected an order-3 core");
    const Index r1 = g.dim(0), n = g.dim(1), r2 = g.dim(2);
    if (cs.domain() != n)
        throw DomainError("sketch_core: sketch domain " + std::to_string(cs.domain()) + " != core mode size " +
                          std::to_string(n));
    const Index m = cs.sketch_size();

    // counted(s, a + r1 b) = sum_{i : h(i) = s} v(i) G(a, i, b)
    Eigen::MatrixXd counted = Eigen::MatrixXd::Zero(m, r1 * r2);
    const double* p = g.data().data();
    for (Index b = 0; b < r2; ++b)
        for (Index i = 0; i < n; ++i) {
            const Index s = cs.bucket(i);
            const double v = cs.sign(i);
            for (Index a = 0; a < r1; ++a) counted(s, a + r1 * b) += v * p[a + r1 * (i + n * b)];
        }

    SketchedCore out;
    out.r1 = r1;
    out.r2 = r2;
    out.slices.assign(static_cast<std::size_t>(m), Eigen::MatrixXcd(r1, r2));
    Fft fft;
    std::vector<Complex> src(static_cast<std::size_t>(m)), dst;
    for (Index c = 0; c < r1 * r2; ++c) {
        for (Index s = 0; s < m; ++s) src[static_cast<std::size_t>(s)] = counted(s, c);
        fft_forward(fft, dst, src);
        for (Index s = 0; s < m; ++s) out.slices[static_cast<std::size_t>(s)](c % r1, c / r1) = dst[static_cast<std::size_t>(s)];
    }
    return out;
}

Eigen::MatrixXd sketch_kron_chain(std::span<const SketchedCore> sketched, Index k) {
    const auto d = static_cast<Index>(sketched.size());
    detail::check_mode(d, k, "sketch_kron_chain");
    if (d < 2) throw DomainError("sketch_kron_chain: needs at least two modes");
    const Index m = sketched[static_cast<std::size_t>(k == 0 ? 1 : 0)].sketch_size();
    for (Index j = 0; j < d; ++j)
        if (j != k && sketched[static_cast<std::size_t>(j)].sketch_size() != m)
            throw DomainError("sketch_kron_chain: component sketches disagree on m");

    const Index r_left = k == 0 ? 1 : sketched[static_cast<std::size_t>(k - 1)].r2;
    const Index r_right = k == d - 1 ? 1 : sketched[static_cast<std::size_t>(k + 1)].r1;
    const Index cols = r_left * r_right;

    // frequency-domain face-split product, one row per frequency
    Eigen::MatrixXcd freq(m, cols);
    Eigen::RowVectorXcd left;
    Eigen::VectorXcd right;
    for (Index s = 0; s < m; ++s) {
        const auto su = static_cast<std::size_t>(s);
        left = Eigen::RowVectorXcd::Ones(1);
        for (Index j = 0; j < k; ++j) left = left * sketched[static_cast<std::size_t>(j)].slices[su];
        right = Eigen::VectorXcd::Ones(1);
        for (Index j = d - 1; j > k; --j) right = sketched[static_cast<std::size_t>(j)].slices[su] * right;
        for (Index b = 0; b < r_right; ++b)
            for (Index a = 0; a < r_left; ++a) freq(s, a + r_left * b) = right[b] * left[a];
    }

    Fft fft;
    std::vector<Complex> src(static_cast<std::size_t>(m)), dst;
    Eigen::MatrixXd out(m, cols);
    double imag_sq = 0.0;
    for (Index c = 0; c < cols; ++c) {
        for (Index s = 0; s < m; ++s) src[static_cast<std::size_t>(s)] = freq(s, c);
        fft_inverse(fft, dst, src);
        for (Index s = 0; s < m; ++s) {
            out(s, c) = dst[static_cast<std::size_t>(s)].real();
            imag_sq += dst[static_cast<std::size_t>(s)].imag() * dst[static_cast<std::size_t>(s)].imag();
        }
    }
    const double scale = out.norm();
    if (std::sqrt(imag_sq) > 1e-9 * scale + 1e-300)
        throw std::runtime_error("sketch_kron_chain: imaginary residual " + std::to_string(std::sqrt(imag_sq)) +
                                 " exceeds 1e-9 of the result norm " + std::to_string(scale));
    return out;
}

Eigen::MatrixXd sketch_kron_chain(const TT& t, Index k, std::span<const CountSketch> per_mode) {
    detail::check_mode(t.order(), k, "sketch_kron_chain");
    if (static_cast<Index>(per_mode.size()) != t.order())
        throw DomainError("sketch_kron_chain: expected one sketch per mode");
    std::vector<SketchedCore> sketched(per_mode.size());
    for (Index j = 0; j < t.order(); ++j)
        if (j != k) sketched[static_cast<std::size_t>(j)] = sketch_core(t.core(j), per_mode[static_cast<std::size_t>(j)]);
    // the skipped entry still reports the neighbouring ranks through r1/r2 of its neighbours
    return sketch_kron_chain(std::span<const SketchedCore>(sketched), k);
}

Eigen::MatrixXd sketch_mode_k_fibers(const Tensor& a, Index k, const TensorSketch& ts) {
    detail::check_mode(a.order(), k, "sketch_mode_k_fibers");
    Dims reduced;
    for (Index j = 0; j < a.order(); ++j)
        if (j != k) reduced.push_back(a.dim(j));
    if (reduced.empty()) throw DomainError("sketch_mode_k_fibers: tensor has no mode to sketch");
    if (ts.domain_dims() != reduced)
        throw DomainError("sketch_mode_k_fibers: sketch domain " + dims_string(ts.domain_dims()) +
                          " does not match the tensor modes " + dims_string(reduced));

    const auto ku = static_cast<std::size_t>(k);
    std::vector<CountSketch> left_modes(ts.modes().begin(), ts.modes().begin() + static_cast<std::ptrdiff_t>(ku));
    std::vector<CountSketch> right_modes(ts.modes().begin() + static_cast<std::ptrdiff_t>(ku), ts.modes().end());

    const Index m = ts.sketch_size();
    std::vector<Index> lb{0}, rb{0};
    std::vector<double> ls{1.0}, rs{1.0};
    if (!left_modes.empty()) combined_tables(TensorSketch(std::move(left_modes)), lb, ls);
    if (!right_modes.empty()) combined_tables(TensorSketch(std::move(right_modes)), rb, rs);

    const auto [left, nk, right] = detail::split_at(a.dims(), k);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, nk);
    const double* p = a.data().data();
    for (Index r = 0; r < right; ++r) {
        const Index hr = rb[static_cast<std::size_t>(r)];
        const double sr = rs[static_cast<std::size_t>(r)];
        for (Index i = 0; i < nk; ++i) {
            const double* fiber = p + left * (i + nk * r);
            double* col = out.col(i).data();
            for (Index l = 0; l < left; ++l) {
                const double x = fiber[l];
                if (x == 0.0) continue;
                Index row = lb[static_cast<std::size_t>(l)] + hr;
                if (row >= m) row -= m;
                col[row] += ls[static_cast<std::size_t>(l)] * sr * x;
            }
        }
    }
    return out;
}

}  // namespace ttts
