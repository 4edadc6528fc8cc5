#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ttts/errors.hpp"
#include "ttts/sketch.hpp"

using namespace ttts;

namespace {

// the 2 x 2 example: h_1 = h_2 = (1, 2), v_1 = (1, -1), v_2 = (-1, 1), m = 2
std::vector<CountSketch> example_pair() {
    return {CountSketch(2, {0, 1}, {1.0, -1.0}), CountSketch(2, {0, 1}, {-1.0, 1.0})};
}

Tensor integer_tensor(Dims dims, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(-3, 3);
    Eigen::VectorXd v(dims_product(dims));
    for (Index i = 0; i < v.size(); ++i) v[i] = pick(rng);
    return Tensor(std::move(dims), v);
}

}  // namespace

TEST_CASE("polynomial hash") {
    const PolyHash h({3, 5}, 7);
    CHECK(h(0) == 3);
    CHECK(h(1) == 1);
    CHECK(h(10) == (3 + 50) % 7);
    const PolyHash big({hash_prime - 1, hash_prime - 1}, 1000);
    CHECK(big(2) == ((hash_prime - 1) * 3 % hash_prime) % 1000);

    Rng a(1), b(1);
    const PolyHash ha(3, 100, a), hb(3, 100, b);
    CHECK(ha.coefficients() == hb.coefficients());
    CHECK(ha.degree() == 3);
    for (auto c : ha.coefficients()) CHECK(c < hash_prime);
}

TEST_CASE("CountSketch tables") {
    const CountSketch s1 = make_countsketch(50, 7, 99);
    const CountSketch s2 = make_countsketch(50, 7, 99);
    CHECK(s1.buckets() == s2.buckets());
    CHECK(s1.signs() == s2.signs());
    for (Index i = 0; i < 50; ++i) {
        CHECK(s1.bucket(i) >= 0);
        CHECK(s1.bucket(i) < 7);
        CHECK(std::abs(s1.sign(i)) == 1.0);
    }

    const CountSketch one = make_countsketch(6, 1, 3);
    Eigen::VectorXd x(6);
    x << 1, 2, 3, 4, 5, 6;
    double signed_sum = 0.0;
    for (Index i = 0; i < 6; ++i) {
        CHECK(one.bucket(i) == 0);
        signed_sum += one.sign(i) * x[i];
    }
    CHECK(one.apply(x)[0] == signed_sum);

    const Eigen::MatrixXd d = s1.dense();
    for (Index i = 0; i < 50; ++i) CHECK(d.col(i).norm() == 1.0);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(50, -1, 1);
    CHECK((s1.apply(y) - d * y).norm() == 0.0);

    CHECK_THROWS_AS(CountSketch(2, {0, 2}, {1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(CountSketch(2, {0, 1}, {1.0, 0.5}), DomainError);
    CHECK_THROWS_AS(make_countsketch(5, 0, 1), DomainError);
}

TEST_CASE("combined hash and sign of the 2 x 2 example") {
    const TensorSketch ts(example_pair());
    // zero-based buckets; (i1, i2) with i1 fastest
    CHECK(combined_hash(ts, Dims{0, 0}) == 0);
    CHECK(combined_hash(ts, Dims{1, 0}) == 1);
    CHECK(combined_hash(ts, Dims{0, 1}) == 1);
    CHECK(combined_hash(ts, Dims{1, 1}) == 0);
    CHECK(combined_sign(ts, Dims{0, 0}) == -1.0);
    CHECK(combined_sign(ts, Dims{1, 0}) == 1.0);
    CHECK(combined_sign(ts, Dims{0, 1}) == 1.0);
    CHECK(combined_sign(ts, Dims{1, 1}) == -1.0);
    CHECK(materialize(ts) == Eigen::MatrixXd{{-1, 0, 0, -1}, {0, 1, 1, 0}});
}

TEST_CASE("materialize equals the inverse DFT of face-split DFT-ed CountSketches") {
    Rng rng(17);
    for (Index q = 1; q <= 4; ++q) {
        for (Index m : {3, 5, 8}) {
            Dims dims;
            for (Index j = 0; j < q; ++j) dims.push_back(2 + (j % 3));
            const auto per_mode = make_countsketches(dims, m, rng);
            const Eigen::MatrixXcd f = oracle::dft_matrix(m);
            Eigen::MatrixXcd acc = f * per_mode[0].dense().cast<Complex>();
            for (Index j = 1; j < q; ++j) acc = oracle::face_split(f * per_mode[static_cast<std::size_t>(j)].dense().cast<Complex>(), acc);
            const Eigen::MatrixXcd s = oracle::idft_matrix(m) * acc;
            const Eigen::MatrixXd dense = materialize(TensorSketch(per_mode));
            CHECK((s.real() - dense).norm() <= 1e-10);
            CHECK(s.imag().norm() <= 1e-10);
            CHECK(dense == oracle::tensor_sketch_matrix(per_mode));
        }
    }
}

TEST_CASE("materialized columns are signed unit vectors") {
    Rng rng(4);
    const Dims dims{3, 4, 2};
    const TensorSketch ts(make_countsketches(dims, 5, rng));
    const Eigen::MatrixXd s = materialize(ts);
    for (Index c = 0; c < s.cols(); ++c) CHECK(s.col(c).norm() == 1.0);
    std::mt19937_64 g(1);
    const Eigen::MatrixXd a = oracle::random_matrix(24, 3, g);
    CHECK((sketch_rows(ts, a) - s * a).norm() <= 1e-12 * a.norm());
    CHECK_THROWS_AS(materialize(ts, 10), ResourceError);
}

TEST_CASE("dft") {
    Eigen::VectorXcd c = Eigen::VectorXcd::Constant(6, Complex(2.0, 0.0));
    Eigen::VectorXcd fc = dft(c);
    CHECK(std::abs(fc[0] - Complex(12.0, 0.0)) <= 1e-12);
    CHECK(fc.tail(5).norm() <= 1e-12);

    Eigen::VectorXcd one(1);
    one << Complex(3.0, -1.0);
    CHECK(dft(one) == one);

    std::mt19937_64 rng(45);
    const Eigen::VectorXcd x = oracle::random_matrix(45, 1, rng).cast<Complex>() +
                               Complex(0.0, 1.0) * oracle::random_matrix(45, 1, rng).cast<Complex>();
    const Eigen::VectorXcd want = oracle::dft_matrix(45) * x;
    CHECK((dft(x) - want).norm() <= 1e-10 * want.norm());
    CHECK((idft(dft(x)) - x).norm() <= 1e-12 * x.norm());
}

TEST_CASE("sketch_core equals the dense (F S) mode-2 product") {
    std::mt19937_64 rng(8);
    const Tensor g = oracle::random_tensor({2, 5, 3}, rng);
    const CountSketch cs = make_countsketch(5, 4, 6);
    const SketchedCore sc = sketch_core(g, cs);
    REQUIRE(sc.sketch_size() == 4);
    const Eigen::MatrixXcd fs = oracle::dft_matrix(4) * cs.dense().cast<Complex>();
    for (Index s = 0; s < 4; ++s) {
        Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(2, 3);
        for (Index i = 0; i < 5; ++i) want += fs(s, i) * detail::core_slice(g, i).cast<Complex>();
        CHECK((sc.slices[static_cast<std::size_t>(s)] - want).norm() <= 1e-10);
    }

    // identity hash, unit signs: a plain DFT along mode 2
    std::vector<Index> id{0, 1, 2, 3};
    const CountSketch eye(4, id, std::vector<double>(4, 1.0));
    const Tensor v = oracle::random_tensor({1, 4, 1}, rng);
    const SketchedCore pure = sketch_core(v, eye);
    const Eigen::VectorXcd fv = dft(v.data().cast<Complex>());
    for (Index s = 0; s < 4; ++s) CHECK(std::abs(pure.slices[static_cast<std::size_t>(s)](0, 0) - fv[s]) <= 1e-12);
}

TEST_CASE("sketch_kron_chain on the 2 x 2 tables is exact") {
    std::mt19937_64 rng(3);
    std::vector<Tensor> cores{integer_tensor({1, 2, 2}, rng), integer_tensor({2, 2, 2}, rng), integer_tensor({2, 2, 1}, rng)};
    const TT t(cores);
    const auto pair = example_pair();
    // modes 1 and 3 get the two example sketches; the middle entry is ignored
    const std::vector<CountSketch> per_mode{pair[0], make_countsketch(2, 2, 1), pair[1]};
    const Eigen::MatrixXd got = sketch_kron_chain(t, 1, per_mode);
    const Eigen::MatrixXd s = materialize(tensor_sketch_excluding(per_mode, 1));
    CHECK(s == Eigen::MatrixXd{{-1, 0, 0, -1}, {0, 1, 1, 0}});
    const Eigen::MatrixXd want = s * oracle::design_matrix(t, 1);
    CHECK(got == want);
}

TEST_CASE("sketch_kron_chain matches the dense oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Index d = 4 + static_cast<Index>(seed % 3);
        Dims dims;
        for (Index j = 0; j < d; ++j) dims.push_back(2 + static_cast<Index>((seed + j) % 2));
        Dims ranks = uniform_ranks(d, 2);
        ranks[1] = 3;
        const TT t = random_tt(dims, ranks, seed);
        Rng rng(seed + 100);
        const auto per_mode = make_countsketches(dims, 16, rng);
        for (Index k = 0; k < d; ++k) {
            const Eigen::MatrixXd got = sketch_kron_chain(t, k, per_mode);
            const Eigen::MatrixXd want = oracle::tensor_sketch_matrix([&] {
                std::vector<CountSketch> rest;
                for (Index j = 0; j < d; ++j)
                    if (j != k) rest.push_back(per_mode[static_cast<std::size_t>(j)]);
                return rest;
            }()) * oracle::design_matrix(t, k);
            CHECK(oracle::rel_err(got, want) <= 1e-8);
        }
    }
}

TEST_CASE("sketch size one") {
    const Dims dims{3, 2, 4};
    const TT t = random_tt(dims, Dims{1, 2, 2, 1}, 5);
    Rng rng(1);
    const auto per_mode = make_countsketches(dims, 1, rng);
    for (Index k = 0; k < 3; ++k) {
        const Eigen::MatrixXd want = materialize(tensor_sketch_excluding(per_mode, k)) * oracle::design_matrix(t, k);
        CHECK(oracle::rel_err(sketch_kron_chain(t, k, per_mode), want) <= 1e-12);
    }
}

TEST_CASE("sketch_mode_k_fibers") {
    const Tensor a({2, 2}, {1.0, 3.0, 2.0, 4.0});
    const TensorSketch ts({CountSketch(2, {0, 1}, {1.0, -1.0})});
    CHECK(sketch_mode_k_fibers(a, 0, ts) == Eigen::MatrixXd{{1, 3}, {-2, -4}});
    CHECK(sketch_mode_k_fibers(Tensor(Dims{2, 2}), 0, ts).isZero());

    std::mt19937_64 rng(6);
    const Tensor b = oracle::random_tensor({3, 4, 5}, rng);
    Rng r(2);
    const auto per_mode = make_countsketches(b.dims(), 6, r);
    const TensorSketch rest = tensor_sketch_excluding(per_mode, 1);
    const Eigen::MatrixXd want = materialize(rest) * oracle::matricize(b, 1).transpose();
    CHECK((sketch_mode_k_fibers(b, 1, rest) - want).norm() <= 1e-12 * want.norm());
    CHECK_THROWS_AS(sketch_mode_k_fibers(b, 0, rest), DomainError);
}

TEST_CASE("TensorSketch preserves inner products in expectation") {
    std::mt19937_64 g(77);
    const Dims dims{3, 4};
    const Eigen::VectorXd x = oracle::random_matrix(12, 1, g);
    const Eigen::VectorXd y = oracle::random_matrix(12, 1, g);
    const double exact = x.dot(y);
    const int trials = 2000;
    double sum = 0.0, sum_sq = 0.0;
    Rng rng(5);
    for (int t = 0; t < trials; ++t) {
        const TensorSketch ts(make_countsketches(dims, 5, rng));
        const double v = sketch_rows(ts, x).col(0).dot(sketch_rows(ts, y).col(0));
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / trials;
    const double se = std::sqrt((sum_sq / trials - mean * mean) / trials);
    CHECK(std::abs(mean - exact) <= 5.0 * se);
}
