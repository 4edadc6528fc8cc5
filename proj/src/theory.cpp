#include "ttts/theory.hpp"

#include <cmath>

#include "ttts/random.hpp"

namespace ttts {

namespace {

// ceil that ignores representation error in products like 352 / 0.1
Index robust_ceil(double x) { return static_cast<Index>(std::ceil(x * (1.0 - 1e-12))); }

}  // namespace

std::pair<double, double> sketch_size_terms(double s, double q, double epsilon, double delta) {
    const double c = 2.0 + std::pow(3.0, q);
    return {8.0 * s * s * c / delta, 8.0 * s * c / (epsilon * delta)};
}

SketchPlan sketch_size_bound(Index s, Index q, double epsilon, double delta) {
    if (s < 1) throw DomainError("sketch_size_bound: s must be >= 1");
    if (q < 1) throw DomainError("sketch_size_bound: q must be >= 1");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("sketch_size_bound: epsilon must lie in (0, 1]");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("sketch_size_bound: delta must lie in (0, 1)");
    const auto [subspace, accuracy] =
        sketch_size_terms(static_cast<double>(s), static_cast<double>(q), epsilon, delta);
    SketchPlan plan{s, q, epsilon, delta, 0, BindingTerm::both};
    const Index ms = robust_ceil(subspace), ma = robust_ceil(accuracy);
    plan.m = std::max(ms, ma);
    if (ms > ma) plan.binding = BindingTerm::subspace;
    else if (ma > ms) plan.binding = BindingTerm::accuracy;
    return plan;
}

Index amm_sketch_size(Index q, double epsilon0, double delta0) {
    if (q < 1) throw DomainError("amm_sketch_size: q must be >= 1");
    if (!(epsilon0 > 0.0)) throw DomainError("amm_sketch_size: epsilon0 must be > 0");
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw DomainError("amm_sketch_size: delta0 must lie in (0, 1)");
    return robust_ceil((2.0 + std::pow(3.0, static_cast<double>(q))) / (epsilon0 * epsilon0 * delta0));
}

double AmmResult::acceptance_threshold() const {
    return delta0 + 3.0 * std::sqrt(delta0 * (1.0 - delta0) / static_cast<double>(trials));
}

AmmResult amm_validate(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::span<const Index> dims, Index m,
                       double epsilon0, double delta0, Index trials, std::uint64_t seed) {
    if (trials < 100) throw DomainError("amm_validate: needs at least 100 trials");
    if (m < 1) throw DomainError("amm_validate: m must be >= 1");
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw DomainError("amm_validate: delta0 must lie in (0, 1)");
    const Index rows = dims_product(dims);
    if (a.rows() != rows || b.rows() != rows) throw DomainError("amm_validate: A and B need prod(dims) rows");

    const Eigen::MatrixXd exact = a.transpose() * b;
    const double scale = a.squaredNorm() * b.squaredNorm();
    const double bound = epsilon0 * epsilon0 * scale;

    AmmResult res;
    res.delta0 = delta0;
    res.trials = trials;
    double ratio_sum = 0.0;
    for (Index t = 0; t < trials; ++t) {
        Rng rng = make_rng(seed, Stream::amm, static_cast<std::uint64_t>(t));
        const TensorSketch ts(make_countsketches(dims, m, rng));
        const Eigen::MatrixXd sa = sketch_rows(ts, a);
        const Eigen::MatrixXd sb = sketch_rows(ts, b);
        const double err = (sa.transpose() * sb - exact).squaredNorm();
        if (err > bound) ++res.failures;
        if (scale > 0.0) ratio_sum += err / scale;
    }
    res.failure_rate = static_cast<double>(res.failures) / static_cast<double>(trials);
    res.standard_error = std::sqrt(res.failure_rate * (1.0 - res.failure_rate) / static_cast<double>(trials));
    res.mean_error_ratio = ratio_sum / static_cast<double>(trials);
    return res;
}

AmmResult amm_validate(std::span<const Index> dims, Index m, double epsilon0, double delta0, Index trials,
                       std::uint64_t seed, Index cols) {
    const Index rows = dims_product(dims);
    Rng rng(derive_seed(seed, Stream::init));
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(rows, cols), b(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) a(i, j) = normal(rng);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) b(i, j) = normal(rng);
    return amm_validate(a, b, dims, m, epsilon0, delta0, trials, seed);
}

}  // namespace ttts
