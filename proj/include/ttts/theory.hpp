#pragma once

#include <cstdint>
#include <vector>

#include "ttts/sketch.hpp"
#include "ttts/tensor.hpp"

namespace ttts {

/// Which term of the sketch-size bound is the larger one.
enum class BindingTerm { subspace, accuracy, both };

/**
 * Sketch size that guarantees, with probability at least 1 - delta, a
 * (1 + epsilon) approximation of the optimal proximal least-squares
 * objective for a subproblem of width s sketched over q modes:
 *
 *   m = ceil(max{ 8 s^2 (2 + 3^q) / delta, 8 s (2 + 3^q) / (epsilon delta) }).
 *
 * The bound is very conservative in practice; the solvers never use it as a
 * default.
 */
struct SketchPlan {
    Index s = 0;
    Index q = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    Index m = 0;
    BindingTerm binding = BindingTerm::both;
};

/// The two terms of the bound, unrounded and without domain checks.
std::pair<double, double> sketch_size_terms(double s, double q, double epsilon, double delta);

SketchPlan sketch_size_bound(Index s, Index q, double epsilon, double delta);

/// Minimum m of the approximate-matrix-product guarantee, ceil((2 + 3^q) / (eps0^2 delta0)).
Index amm_sketch_size(Index q, double epsilon0, double delta0);

struct AmmResult {
    double delta0 = 0.0;
    Index trials = 0;
    Index failures = 0;
    double failure_rate = 0.0;
    double standard_error = 0.0;  ///< binomial, sqrt(p (1 - p) / trials) at p = failure_rate
    double mean_error_ratio = 0.0;  ///< mean of ||A^T S^T S B - A^T B||_F^2 / (||A||_F^2 ||B||_F^2)

    /// delta0 plus three binomial standard errors at p = delta0.
    double acceptance_threshold() const;
    bool consistent() const { return failure_rate <= acceptance_threshold(); }
};

/**
 * Empirical check of
 *   ||A^T S^T S B - A^T B||_F^2 <= eps0^2 ||A||_F^2 ||B||_F^2
 * over `trials` fresh TensorSketches of size m on the given A and B.
 */
AmmResult amm_validate(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::span<const Index> dims, Index m,
                       double epsilon0, double delta0, Index trials, std::uint64_t seed);

/// Same with fixed Gaussian A and B (`cols` columns each) drawn from `seed`.
AmmResult amm_validate(std::span<const Index> dims, Index m, double epsilon0, double delta0, Index trials,
                       std::uint64_t seed, Index cols = 4);

}  // namespace ttts
