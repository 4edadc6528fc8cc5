#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ttts/errors.hpp"
#include "ttts/tensor.hpp"

using namespace ttts;

namespace {

Tensor iota(Dims dims) {
    Eigen::VectorXd v(dims_product(dims));
    for (Index i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i + 1);
    return Tensor(std::move(dims), v);
}

}  // namespace

TEST_CASE("linear_index follows first-index-fastest ordering") {
    const Dims d22{2, 2};
    CHECK(linear_index(d22, Dims{1, 1}) == 1);
    CHECK(linear_index(d22, Dims{2, 1}) == 2);
    CHECK(linear_index(d22, Dims{1, 2}) == 3);
    CHECK(linear_index(d22, Dims{2, 2}) == 4);
    CHECK(linear_index(Dims{7}, Dims{5}) == 5);
    CHECK(linear_index(Dims{2, 3, 2}, Dims{2, 3, 1}) == 6);
}

TEST_CASE("linear_index and multi_index are inverse bijections") {
    for (const Dims& dims : {Dims{10}, Dims{3, 4}, Dims{2, 3, 5}, Dims{4, 1, 3, 2}, Dims{5, 5, 5, 5}, Dims{10, 10, 10, 10}}) {
        const Index total = dims_product(dims);
        Dims zero_based(dims.size(), 0);
        for (Index i = 1; i <= total; ++i) {
            const Dims m = multi_index(dims, i);
            Dims one_based = zero_based;
            for (auto& x : one_based) ++x;
            REQUIRE(m == one_based);
            REQUIRE(linear_index(dims, m) == i);
            REQUIRE(oracle::offset(dims, zero_based) == i - 1);
            oracle::next_index(dims, zero_based);
        }
    }
}

TEST_CASE("index errors") {
    CHECK_THROWS_AS(linear_index(Dims{2, 2}, Dims{3, 1}), DomainError);
    CHECK_THROWS_AS(linear_index(Dims{2, 2}, Dims{0, 1}), DomainError);
    CHECK_THROWS_AS(linear_index(Dims{2, 2}, Dims{1}), DomainError);
    CHECK_THROWS_AS(multi_index(Dims{2, 2}, 5), DomainError);
    CHECK_THROWS_AS(multi_index(Dims{2, 2}, 0), DomainError);
}

TEST_CASE("matricize examples") {
    const Tensor m = iota({2, 2});
    CHECK(matricize(m, 0) == Eigen::Matrix2d{{1, 3}, {2, 4}});

    const Tensor a = iota({2, 2, 2});
    const Eigen::MatrixXd k2 = matricize(a, 1);
    const Eigen::MatrixXd k3 = matricize(a, 2);
    CHECK(k2 == Eigen::MatrixXd{{1, 2, 5, 6}, {3, 4, 7, 8}});
    CHECK(k3 == Eigen::MatrixXd{{1, 2, 3, 4}, {5, 6, 7, 8}});
}

TEST_CASE("matricize matches brute-force enumeration and fold inverts it") {
    std::mt19937_64 rng(11);
    for (const Dims& dims : {Dims{3, 4, 5}, Dims{2, 1, 3, 2}, Dims{6}, Dims{2, 3, 2, 3, 2}}) {
        const Tensor a = oracle::random_tensor(dims, rng);
        for (Index k = 0; k < a.order(); ++k) {
            const Eigen::MatrixXd m = matricize(a, k);
            CHECK(m == oracle::matricize(a, k));
            CHECK(fold(m, dims, k).data() == a.data());
        }
    }
    CHECK_THROWS_AS(matricize(iota({2, 2}), 2), DomainError);
    CHECK_THROWS_AS(fold(Eigen::MatrixXd::Zero(2, 3), Dims{2, 2}, 0), DomainError);
}

TEST_CASE("mode_product") {
    const Tensor a = iota({2, 2, 2});
    const Tensor s = mode_product(a, 2, Eigen::RowVector2d{1, 1});
    CHECK(s.dims() == Dims{2, 2, 1});
    CHECK(matricize(reshape(s, {2, 2}), 0) == Eigen::Matrix2d{{6, 10}, {8, 12}});
    CHECK(mode_product(a, 1, Eigen::Matrix2d::Identity()).data() == a.data());

    std::mt19937_64 rng(5);
    const Tensor b = oracle::random_tensor({3, 4, 2, 3}, rng);
    for (Index k = 0; k < 4; ++k) {
        const Eigen::MatrixXd m = oracle::random_matrix(5, b.dim(k), rng);
        const Tensor got = mode_product(b, k, m);
        const Tensor want = oracle::mode_product(b, k, m);
        CHECK(got.dims() == want.dims());
        CHECK((got.data() - want.data()).norm() <= 1e-12 * want.data().norm());
    }
    CHECK_THROWS_AS(mode_product(a, 0, Eigen::Matrix3d::Identity()), DomainError);
}

TEST_CASE("core unfoldings") {
    const Tensor g = iota({2, 2, 2});
    CHECK(left_unfold(g) == Eigen::MatrixXd{{1, 5}, {2, 6}, {3, 7}, {4, 8}});
    CHECK(right_unfold(g) == Eigen::MatrixXd{{1, 3, 5, 7}, {2, 4, 6, 8}});

    const Tensor v = iota({1, 4, 1});
    CHECK(left_unfold(v).rows() == 4);
    CHECK(left_unfold(v).cols() == 1);
    CHECK(right_unfold(v).rows() == 1);
    CHECK(right_unfold(v).cols() == 4);

    std::mt19937_64 rng(2);
    const Tensor c = oracle::random_tensor({3, 4, 2}, rng);
    CHECK(fold_core(left_unfold(c), 3, 4, 2).data() == c.data());
    CHECK(fold_core(right_unfold(c), 3, 4, 2).data() == c.data());
    // left unfolding entry (a + r1 i, b) is G(a, i, b)
    CHECK(left_unfold(c)(1 + 3 * 2, 1) == c({1, 2, 1}));
    CHECK(right_unfold(c)(2, 3 + 4 * 1) == c({2, 3, 1}));
    CHECK_THROWS_AS(left_unfold(iota({2, 2})), DomainError);
}

TEST_CASE("frobenius norm") {
    CHECK(frobenius_norm(Tensor::Constant({3, 4, 5}, 1.0)) == doctest::Approx(std::sqrt(60.0)));
    CHECK(frobenius_norm(Tensor(Dims{2, 3})) == 0.0);
    std::mt19937_64 rng(3);
    const Tensor a = oracle::random_tensor({3, 3, 3}, rng);
    CHECK(frobenius_norm(a) == doctest::Approx(matricize(a, 1).norm()).epsilon(1e-14));
}

TEST_CASE("reshape is column-major") {
    const Tensor v = iota({4});
    CHECK(reshape(v, {2, 2}).data() == v.data());
    const Tensor m = iota({2, 3});
    const Tensor r = reshape(m, {3, 2});
    CHECK(r({2, 0}) == 3.0);
    CHECK(r({0, 1}) == 4.0);
    const Tensor c = reshape(iota({2, 2, 2}), {4, 2});
    CHECK(c({2, 1}) == 7.0);
    CHECK_THROWS_AS(reshape(v, {3, 2}), DomainError);
}

TEST_CASE("tensor construction checks") {
    CHECK_THROWS_AS(Tensor(Dims{2, 0}), DomainError);
    CHECK_THROWS_AS(Tensor(Dims{2, 2}, {1.0, 2.0, 3.0}), DomainError);
    const Tensor a(Dims{2, 2}, {1.0, 2.0, 3.0, 4.0});
    CHECK(a({1, 1}) == 4.0);
    CHECK(a.cast<float>()({1, 0}) == 2.0f);
}
