#include "ttts/solver.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "ttts/random.hpp"
#include "ttts/sketch.hpp"

namespace ttts {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::als: return "als";
        case Algorithm::ts: return "ts";
        case Algorithm::random: return "random";
    }
    return "?";
}

std::string to_string(Init i) { return i == Init::zero ? "zero" : "gaussian"; }

std::optional<Algorithm> parse_algorithm(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "als") return Algorithm::als;
    if (l == "ts") return Algorithm::ts;
    if (l == "random") return Algorithm::random;
    return std::nullopt;
}

std::optional<Init> parse_init(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "gaussian") return Init::gaussian;
    if (l == "zero") return Init::zero;
    return std::nullopt;
}

double SweepReport::total_ms() const {
    double t = 0.0;
    for (const auto& s : sweeps) t += s.wall_ms;
    return t;
}

double SweepReport::mean_sweep_ms() const { return sweeps.empty() ? 0.0 : total_ms() / static_cast<double>(sweeps.size()); }

void validate(const SolverConfig& cfg, std::span<const Index> dims) {
    try {
        check_rank_chain(dims, cfg.ranks);
    } catch (const DomainError& e) {
        throw DomainError(std::string("ranks: ") + e.what());
    }
    if (!(cfg.sigma >= 0.0) || !std::isfinite(cfg.sigma)) throw DomainError("sigma: must be finite and >= 0");
    if (!(cfg.tol > 0.0)) throw DomainError("tol: must be > 0");
    if (cfg.max_sweeps < 1) throw DomainError("max_sweeps: must be >= 1");
    if (cfg.algorithm != Algorithm::als && cfg.sketch_size < 1)
        throw DomainError("sketch_size: must be >= 1 for algorithm " + to_string(cfg.algorithm));
    if (dims.size() < 2) throw DomainError("dims: decomposition needs a tensor of order >= 2");
}

namespace {

bool singular_pivots(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& normal) {
    if (llt.info() != Eigen::Success) return true;
    const Eigen::VectorXd piv = llt.matrixLLT().diagonal();
    const double max_diag = normal.diagonal().cwiseAbs().maxCoeff();
    const double floor = static_cast<double>(normal.rows()) * std::numeric_limits<double>::epsilon() * max_diag;
    return !(piv.array().square().minCoeff() > floor);
}

Eigen::MatrixXd normal_matrix(const Eigen::MatrixXd& m, double sigma) {
    const Index s = m.cols();
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(s, s);
    normal.selfadjointView<Eigen::Lower>().rankUpdate(m.transpose());
    normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
    normal.diagonal().array() += sigma;
    return normal;
}

void check_system(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c) {
    if (b.rows() != m.rows()) throw DomainError("prox_ls_solve: M and B have different row counts");
    if (c.rows() != m.cols() || c.cols() != b.cols()) throw DomainError("prox_ls_solve: C must be s x n");
}

}  // namespace

Eigen::MatrixXd prox_ls_solve(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b, double sigma,
                              const Eigen::MatrixXd& c) {
    if (!(sigma >= 0.0)) throw DomainError("prox_ls_solve: sigma must be >= 0");
    check_system(m, b, c);
    const Eigen::MatrixXd normal = normal_matrix(m, sigma);
    Eigen::MatrixXd rhs = m.transpose() * b;
    if (sigma > 0.0) rhs += sigma * c;
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (sigma == 0.0 ? singular_pivots(llt, normal) : llt.info() != Eigen::Success)
        throw SingularError("prox_ls_solve: normal matrix is singular");
    return llt.solve(rhs);
}

namespace {

// sigma = 0 fallback: add 1e-12 trace/s to the diagonal
Eigen::MatrixXd jittered_solve(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c) {
    Eigen::MatrixXd normal = normal_matrix(m, 0.0);
    const double s = static_cast<double>(normal.rows());
    double jitter = 1e-12 * normal.trace() / s;
    if (!(jitter > 0.0)) jitter = 1e-12;
    normal.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (llt.info() != Eigen::Success) return c;
    return llt.solve(m.transpose() * b);
}

}  // namespace

double relative_change(const TT& prev, const TT& next, double zero_norm_value) {
    if (prev.order() != next.order()) throw DomainError("relative_change: orders differ");
    double worst = 0.0;
    for (Index k = 0; k < next.order(); ++k) {
        const auto& a = prev.core(k);
        const auto& b = next.core(k);
        if (a.dims() != b.dims()) throw DomainError("relative_change: core shapes differ at " + std::to_string(k));
        const double denom = b.data().norm();
        const double diff = (b.data() - a.data()).norm();
        double ratio;
        if (denom > 0.0)
            ratio = diff / denom;
        else
            ratio = diff > 0.0 ? zero_norm_value : 0.0;
        worst = std::max(worst, ratio);
    }
    return worst;
}

TT initial_tt(std::span<const Index> dims, const SolverConfig& cfg) {
    if (cfg.init == Init::zero) return zero_tt(dims, cfg.ranks);
    return random_tt(dims, cfg.ranks, derive_seed(cfg.seed, Stream::init));
}

double reconstruction_error(const TT& t, const Tensor& a, Index cap) {
    const Tensor full = tt_full(t, cap);
    if (full.dims() != a.dims()) throw DomainError("reconstruction_error: shape mismatch");
    const double na = a.data().norm();
    const double diff = (full.data() - a.data()).norm();
    return na > 0.0 ? diff / na : diff;
}

Eigen::MatrixXd design_matrix(const TT& t, Index k, Index cap) {
    detail::check_mode(t.order(), k, "design_matrix");
    const Dims dims = t.dims();
    const Dims ranks = t.ranks();
    const auto ku = static_cast<std::size_t>(k);
    const Index rows = dims_product(dims) / dims[ku];
    const Index cols = ranks[ku] * ranks[ku + 1];
    if (rows * cols > cap)
        throw ResourceError("design matrix H_" + std::to_string(k) + " has " + std::to_string(rows * cols) +
                            " entries, above the cap of " + std::to_string(cap) +
                            "; use the TensorSketch solver (algorithm ts) for tensors of this size");
    const Eigen::MatrixXd left = interface_left(t, k);
    const Eigen::MatrixXd right = interface_right(t, k);
    const Index nl = left.rows(), nr = right.cols(), rl = left.cols(), rr = right.rows();
    Eigen::MatrixXd h(nl * nr, rl * rr);
    for (Index b = 0; b < rr; ++b)
        for (Index a = 0; a < rl; ++a)
            for (Index j = 0; j < nr; ++j) h.col(a + rl * b).segment(j * nl, nl) = right(b, j) * left.col(a);
    return h;
}

Tensor core_update_with_operator(const TT& t, const Tensor& a, Index k, const Eigen::MatrixXd& row_op, double sigma) {
    const Eigen::MatrixXd h = design_matrix(t, k);
    if (row_op.cols() != h.rows()) throw DomainError("core_update_with_operator: operator width mismatch");
    const Eigen::MatrixXd m = row_op * h;
    const Eigen::MatrixXd b = row_op * matricize(a, k).transpose();
    const Tensor& g = t.core(k);
    const Eigen::MatrixXd c = matricize(g, 1).transpose();
    const Eigen::MatrixXd x = prox_ls_solve(m, b, sigma, c);
    return fold(x.transpose(), g.dims(), 1);
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct LinearSystem {
    Eigen::MatrixXd m;  // rows x s
    Eigen::MatrixXd b;  // rows x n_k
};

// What differs between the three solvers: how the (possibly reduced) system for core k is formed.
class SystemBuilder {
public:
    virtual ~SystemBuilder() = default;
    virtual void begin_sweep(const TT& /*t*/, int /*sweep*/) {}
    virtual LinearSystem system(const TT& t, Index k) = 0;
    virtual void core_changed(const TT& /*t*/, Index /*k*/) {}
};

class DenseBuilder final : public SystemBuilder {
public:
    DenseBuilder(const Tensor& a, Index cap) : a_(a), cap_(cap) {}

    LinearSystem system(const TT& t, Index k) override {
        return {design_matrix(t, k, cap_), matricize(a_, k).transpose()};
    }

private:
    const Tensor& a_;
    Index cap_;
};

class SketchBuilder final : public SystemBuilder {
public:
    SketchBuilder(const Tensor& a, const SolverConfig& cfg) : a_(a), cfg_(cfg) {}

    void begin_sweep(const TT& t, int sweep) override {
        Rng rng = make_rng(cfg_.seed, Stream::sketch, static_cast<std::uint64_t>(sweep));
        const Dims dims = t.dims();
        sketches_ = make_countsketches(dims, cfg_.sketch_size, rng);
        sketched_.clear();
        for (Index j = 0; j < t.order(); ++j)
            sketched_.push_back(sketch_core(t.core(j), sketches_[static_cast<std::size_t>(j)]));
    }

    LinearSystem system(const TT& /*t*/, Index k) override {
        LinearSystem sys;
        sys.m = sketch_kron_chain(std::span<const SketchedCore>(sketched_), k);
        sys.b = sketch_mode_k_fibers(a_, k, tensor_sketch_excluding(sketches_, k));
        return sys;
    }

    void core_changed(const TT& t, Index k) override {
        sketched_[static_cast<std::size_t>(k)] = sketch_core(t.core(k), sketches_[static_cast<std::size_t>(k)]);
    }

private:
    const Tensor& a_;
    const SolverConfig& cfg_;
    std::vector<CountSketch> sketches_;
    std::vector<SketchedCore> sketched_;
};

// m distinct values in [0, n) by Floyd's algorithm, sorted
std::vector<Index> sample_without_replacement(Index n, Index m, Rng& rng) {
    std::unordered_set<Index> chosen;
    chosen.reserve(static_cast<std::size_t>(m) * 2);
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(m));
    for (Index j = n - m; j < n; ++j) {
        std::uniform_int_distribution<Index> pick(0, j);
        const Index t = pick(rng);
        const Index v = chosen.insert(t).second ? t : j;
        if (v == j) chosen.insert(j);
        out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

class SamplingBuilder final : public SystemBuilder {
public:
    SamplingBuilder(const Tensor& a, const SolverConfig& cfg) : a_(a), cfg_(cfg) {}

    void begin_sweep(const TT& /*t*/, int sweep) override { sweep_ = sweep; }

    LinearSystem system(const TT& t, Index k) override {
        const Index d = t.order();
        const Dims dims = t.dims();
        const Dims ranks = t.ranks();
        const auto ku = static_cast<std::size_t>(k);
        const auto [left_size, nk, right_size] = detail::split_at(dims, k);
        const Index rows = left_size * right_size;
        const Index rl = ranks[ku], rr = ranks[ku + 1];

        Rng rng = make_rng(cfg_.seed, Stream::sampling,
                           static_cast<std::uint64_t>(sweep_) * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(k));
        const Index m = cfg_.sketch_size;
        std::vector<Index> picks;
        if (m <= rows) {
            picks = sample_without_replacement(rows, m, rng);
        } else {
            std::uniform_int_distribution<Index> pick(0, rows - 1);
            for (Index i = 0; i < m; ++i) picks.push_back(pick(rng));
        }

        LinearSystem sys{Eigen::MatrixXd(m, rl * rr), Eigen::MatrixXd(m, nk)};
        const double* p = a_.data().data();
        Eigen::RowVectorXd left;
        Eigen::VectorXd right;
        for (Index r = 0; r < m; ++r) {
            const Index row = picks[static_cast<std::size_t>(r)];
            const Index il = row % left_size, ir = row / left_size;
            left = Eigen::RowVectorXd::Ones(1);
            Index rem = il;
            for (Index j = 0; j < k; ++j) {
                const Index nj = dims[static_cast<std::size_t>(j)];
                left = left * detail::core_slice(t.core(j), rem % nj);
                rem /= nj;
            }
            // right factor: modes k+1..d-1, first of them fastest in ir
            right = Eigen::VectorXd::Ones(1);
            Dims idx;
            rem = ir;
            for (Index j = k + 1; j < d; ++j) {
                const Index nj = dims[static_cast<std::size_t>(j)];
                idx.push_back(rem % nj);
                rem /= nj;
            }
            for (Index j = d - 1; j > k; --j)
                right = detail::core_slice(t.core(j), idx[static_cast<std::size_t>(j - k - 1)]) * right;
            for (Index b = 0; b < rr; ++b)
                for (Index a = 0; a < rl; ++a) sys.m(r, a + rl * b) = right[b] * left[a];
            for (Index i = 0; i < nk; ++i) sys.b(r, i) = p[il + left_size * (i + nk * ir)];
        }
        return sys;
    }

private:
    const Tensor& a_;
    const SolverConfig& cfg_;
    int sweep_ = 0;
};

double objective(const TT& t, const Tensor& a, Index cap) {
    const Tensor full = tt_full(t, cap);
    return 0.5 * (full.data() - a.data()).squaredNorm();
}

Decomposition run(const Tensor& a, const SolverConfig& cfg, SystemBuilder& builder) {
    validate(cfg, a.dims());
    Decomposition out;
    SweepReport& report = out.report;
    TT tt = initial_tt(a.dims(), cfg);
    const Index d = tt.order();

    if (cfg.algorithm != Algorithm::als) {
        Index widest = 0;
        const Dims ranks = tt.ranks();
        for (std::size_t k = 0; k + 1 < ranks.size(); ++k) widest = std::max(widest, ranks[k] * ranks[k + 1]);
        if (cfg.sketch_size < widest)
            report.warnings.push_back("sketch size " + std::to_string(cfg.sketch_size) +
                                      " is below the widest subproblem (" + std::to_string(widest) +
                                      " unknowns); updates rely on the proximal term");
    }

    const double norm_a = a.data().norm();
    if (cfg.record_updates) report.update_objectives.push_back(objective(tt, a, cfg.memory_cap));

    int jitter_events = 0;
    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        const auto start = Clock::now();
        double telemetry_ms = 0.0;
        const TT prev = tt;

        tt = right_orthogonalize(std::move(tt));
        builder.begin_sweep(tt, sweep);
        for (Index k = 0; k < d; ++k) {
            const LinearSystem sys = builder.system(tt, k);
            const Tensor& g = tt.core(k);
            const Eigen::MatrixXd c = matricize(g, 1).transpose();
            Eigen::MatrixXd x;
            try {
                x = prox_ls_solve(sys.m, sys.b, cfg.sigma, c);
            } catch (const SingularError&) {
                if (cfg.sigma != 0.0) throw;
                x = jittered_solve(sys.m, sys.b, c);
                if (++jitter_events <= 5)
                    report.warnings.push_back("sweep " + std::to_string(sweep) + ", core " + std::to_string(k) +
                                              ": singular normal equations with sigma = 0, solved with diagonal jitter");
            }
            tt.set_core(k, fold(x.transpose(), g.dims(), 1));
            builder.core_changed(tt, k);
            if (cfg.record_updates) {
                const auto t0 = Clock::now();
                report.update_objectives.push_back(objective(tt, a, cfg.memory_cap));
                telemetry_ms += elapsed_ms(t0);
            }
            if (k + 1 < d) {
                tt = shift_core_qr(std::move(tt), k);
                builder.core_changed(tt, k);
                builder.core_changed(tt, k + 1);
            }
        }

        SweepRecord rec;
        rec.sweep = sweep;
        rec.wall_ms = elapsed_ms(start) - telemetry_ms;
        rec.rel_change = relative_change(prev, tt);
        if (cfg.track_error) {
            const Tensor full = tt_full(tt, cfg.memory_cap);
            const double diff = (full.data() - a.data()).norm();
            rec.objective = 0.5 * diff * diff;
            rec.recon_rel_err = norm_a > 0.0 ? diff / norm_a : diff;
        }
        report.sweeps.push_back(rec);
        if (rec.rel_change < cfg.tol) {
            report.converged = true;
            break;
        }
    }
    if (jitter_events > 5)
        report.warnings.push_back(std::to_string(jitter_events) + " jittered solves in total");
    out.tt = std::move(tt);
    return out;
}

SolverConfig with_algorithm(SolverConfig cfg, Algorithm a) {
    cfg.algorithm = a;
    return cfg;
}

}  // namespace

Decomposition tt_als(const Tensor& a, const SolverConfig& cfg) {
    const SolverConfig c = with_algorithm(cfg, Algorithm::als);
    DenseBuilder builder(a, c.memory_cap);
    return run(a, c, builder);
}

Decomposition tt_ts(const Tensor& a, const SolverConfig& cfg) {
    const SolverConfig c = with_algorithm(cfg, Algorithm::ts);
    SketchBuilder builder(a, c);
    return run(a, c, builder);
}

Decomposition tt_random(const Tensor& a, const SolverConfig& cfg) {
    const SolverConfig c = with_algorithm(cfg, Algorithm::random);
    SamplingBuilder builder(a, c);
    return run(a, c, builder);
}

Decomposition decompose(const Tensor& a, const SolverConfig& cfg) {
    switch (cfg.algorithm) {
        case Algorithm::als: return tt_als(a, cfg);
        case Algorithm::ts: return tt_ts(a, cfg);
        case Algorithm::random: return tt_random(a, cfg);
    }
    throw DomainError("decompose: unknown algorithm");
}

}  // namespace ttts
