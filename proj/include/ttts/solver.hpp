#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "ttts/tensor.hpp"
#include "ttts/tt.hpp"

namespace ttts {

enum class Algorithm { als, ts, random };
enum class Init { gaussian, zero };

std::string to_string(Algorithm a);
std::string to_string(Init i);
std::optional<Algorithm> parse_algorithm(const std::string& s);
std::optional<Init> parse_init(const std::string& s);

struct SolverConfig {
    Dims ranks;                 ///< (r_0, ..., r_d), boundary ranks 1
    double sigma = 0.5;         ///< proximal weight
    Index sketch_size = 0;      ///< rows kept by TS / RANDOM; ignored by ALS
    int max_sweeps = 200;
    double tol = 1e-6;          ///< stop when relative_change falls below this
    std::uint64_t seed = 0;
    Algorithm algorithm = Algorithm::ts;
    Init init = Init::gaussian;
    bool record_updates = false;  ///< objective after every core update (costs one reconstruction each)
    bool track_error = true;      ///< per-sweep reconstruction error and objective
    Index memory_cap = default_memory_cap;
};

/// Throws DomainError naming the offending field.
void validate(const SolverConfig& cfg, std::span<const Index> dims);

struct SweepRecord {
    int sweep = 0;
    double rel_change = 0.0;
    std::optional<double> recon_rel_err;
    std::optional<double> objective;  ///< 0.5 ||full(T) - A||_F^2
    double wall_ms = 0.0;             ///< sweep time, telemetry excluded
};

struct SweepReport {
    std::vector<SweepRecord> sweeps;
    std::vector<double> update_objectives;  ///< filled when record_updates is set; first entry is the initial value
    std::vector<std::string> warnings;
    bool converged = false;

    double total_ms() const;
    double mean_sweep_ms() const;
};

struct Decomposition {
    TT tt;
    SweepReport report;
};

/**
 * Minimizer of 0.5 ||M X - B||_F^2 + 0.5 sigma ||X - C||_F^2, i.e.
 * X = (M^T M + sigma I)^{-1} (M^T B + sigma C), via a Cholesky factorization
 * of the s x s normal matrix. With sigma = 0 and a numerically singular
 * normal matrix, throws SingularError.
 */
Eigen::MatrixXd prox_ls_solve(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b, double sigma,
                              const Eigen::MatrixXd& c);

/// max_k ||G_k^next - G_k^prev||_F / ||G_k^next||_F; a zero new core gives `zero_norm_value`.
double relative_change(const TT& prev, const TT& next,
                       double zero_norm_value = std::numeric_limits<double>::infinity());

/// Starting point of a run: Gaussian or zero cores of cfg.ranks.
TT initial_tt(std::span<const Index> dims, const SolverConfig& cfg);

/// Deterministic proximal TT-ALS with dense design matrices H_k.
Decomposition tt_als(const Tensor& a, const SolverConfig& cfg);
/// Randomized proximal ALS with TensorSketch (FFT fast path).
Decomposition tt_ts(const Tensor& a, const SolverConfig& cfg);
/// Baseline: uniformly sampled rows of H_k, unweighted.
Decomposition tt_random(const Tensor& a, const SolverConfig& cfg);

/// Dispatch on cfg.algorithm.
Decomposition decompose(const Tensor& a, const SolverConfig& cfg);

/// ||full(T) - A||_F / ||A||_F.
double reconstruction_error(const TT& t, const Tensor& a, Index cap = default_memory_cap);

/// Design matrix H_k = G_{>k}^T kron G_{<k}, dense.
Eigen::MatrixXd design_matrix(const TT& t, Index k, Index cap = default_memory_cap);

/**
 * One proximal core update of core k given an explicit row operator:
 * minimizes over core k with (R H_k, R A_(k)^T) in place of (H_k, A_(k)^T).
 * `row_op` must have prod_{i != k} n_i columns. Returns the updated core
 * (no QR shift). Used to cross-check the fast paths on small problems.
 */
Tensor core_update_with_operator(const TT& t, const Tensor& a, Index k, const Eigen::MatrixXd& row_op, double sigma);

}  // namespace ttts
