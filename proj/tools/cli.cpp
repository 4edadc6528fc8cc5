#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "experiment.hpp"
#include "ttts/theory.hpp"

namespace ttts::cli {

namespace {

using nlohmann::json;

int cmd_run(const std::string& config_path, const std::string& output_dir, std::ostream& out) {
    ExperimentConfig cfg = load_config(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    const auto runs = run_experiment(cfg);
    std::vector<ComparisonRow> rows;
    for (const auto& r : runs) {
        rows.push_back(comparison_row(r.summary));
        for (const auto& w : r.summary.at("warnings")) out << "warning: " << r.summary_path.filename().string() << ": " << w.get<std::string>() << "\n";
    }
    out << comparison_table(rows);
    for (const auto& r : runs) out << "wrote " << r.summary_path.string() << "\n";
    return exit_ok;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& csv_path, std::ostream& out,
                std::ostream& err) {
    if (paths.size() < 2) {
        err << "compare: need at least two summary files\n";
        return exit_usage;
    }
    std::vector<ComparisonRow> rows;
    for (const auto& p : paths) {
        std::ifstream in(p);
        if (!in) {
            err << "compare: missing summary " << p << "\n";
            return exit_usage;
        }
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            err << "compare: " << p << ": " << e.what() << "\n";
            return exit_usage;
        }
        rows.push_back(comparison_row(doc));
    }
    out << comparison_table(rows);
    if (!csv_path.empty()) {
        std::ofstream f(csv_path, std::ios::binary | std::ios::trunc);
        f << comparison_csv(rows);
        if (!f) {
            err << "compare: failed writing " << csv_path << "\n";
            return exit_runtime;
        }
    }
    return exit_ok;
}

struct GenArgs {
    std::string kind;
    std::vector<Index> dims;
    Index rank = 1;
    double noise = 0.0;
    std::uint64_t seed = 0;
    Index count = 0;
    std::string output;
};

int cmd_gen(const GenArgs& g, std::ostream& out, std::ostream& err) {
    Tensor t;
    if (g.kind == "synthetic") {
        if (g.dims.empty()) {
            err << "gen synthetic: --dims is required\n";
            return exit_usage;
        }
        t = gen_synthetic(g.dims, uniform_ranks(static_cast<Index>(g.dims.size()), g.rank), g.noise, g.seed).tensor;
    } else if (g.kind == "sinc" || g.kind == "osc") {
        const Index count = g.count > 0 ? g.count : dims_product(g.dims);
        const Dims dims = g.dims.empty() ? Dims{count} : Dims(g.dims);
        t = gen_function_tensor(g.kind == "sinc" ? FunctionKind::sinc : FunctionKind::osc, count, dims);
    } else {
        err << "gen: unknown kind \"" << g.kind << "\" (synthetic, sinc, osc)\n";
        return exit_usage;
    }
    save_dtf(t, g.output);
    out << "wrote " << g.output << " dims " << dims_string(t.dims()) << "\n";
    return exit_ok;
}

int cmd_bound(Index s, Index q, double eps, double delta, std::ostream& out) {
    const SketchPlan plan = sketch_size_bound(s, q, eps, delta);
    const char* binding = plan.binding == BindingTerm::subspace   ? "subspace (8 s^2 (2+3^q) / delta)"
                          : plan.binding == BindingTerm::accuracy ? "accuracy (8 s (2+3^q) / (eps delta))"
                                                                  : "both terms equal";
    out << "m = " << plan.m << "\n" << "binding term: " << binding << "\n";
    return exit_ok;
}

struct AmmArgs {
    std::vector<Index> dims{8, 8};
    Index m = 0;
    double eps0 = 0.5;
    double delta0 = 0.2;
    Index trials = 500;
    std::uint64_t seed = 0;
    Index cols = 4;
};

int cmd_amm(const AmmArgs& a, std::ostream& out) {
    const Index m = a.m > 0 ? a.m : amm_sketch_size(static_cast<Index>(a.dims.size()), a.eps0, a.delta0);
    const AmmResult r = amm_validate(a.dims, m, a.eps0, a.delta0, a.trials, a.seed, a.cols);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "m = %lld, trials = %lld, failures = %lld\nfailure rate = %.4f (threshold %.4f = delta0 + 3 se)\n"
                  "mean error ratio = %.6f (eps0^2 = %.6f)\n%s\n",
                  static_cast<long long>(m), static_cast<long long>(r.trials), static_cast<long long>(r.failures),
                  r.failure_rate, r.acceptance_threshold(), r.mean_error_ratio, a.eps0 * a.eps0,
                  r.consistent() ? "PASS" : "FAIL");
    out << buf;
    return r.consistent() ? exit_ok : exit_runtime;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tensor-train decomposition with TensorSketch: experiments and tools", "ttts_cli"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    auto* run = app.add_subcommand("run", "Run the decompositions described by a JSON config");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    run->add_option("-o,--output-dir", output_dir, "override the config's output_dir");

    std::vector<std::string> summaries;
    std::string csv_path;
    auto* compare = app.add_subcommand("compare", "Tabulate two or more run summaries");
    compare->add_option("summaries", summaries, "summary JSON files")->required();
    compare->add_option("--csv", csv_path, "also write the table as CSV");

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate a tensor and write it as DTF");
    gen->add_option("kind", gen_args.kind, "synthetic | sinc | osc")->required();
    gen->add_option("--dims", gen_args.dims, "dimensions, e.g. 10,10,10")->delimiter(',');
    gen->add_option("--rank", gen_args.rank, "uniform TT rank (synthetic)");
    gen->add_option("--noise", gen_args.noise, "Gaussian noise standard deviation (synthetic)");
    gen->add_option("--seed", gen_args.seed, "seed (synthetic)");
    gen->add_option("--count", gen_args.count, "number of samples (sinc, osc); defaults to prod(dims)");
    gen->add_option("-o,--output", gen_args.output, "output .dtf file")->required();

    Index bs = 0, bq = 0;
    double beps = 0.0, bdelta = 0.0;
    auto* bound = app.add_subcommand("bound", "Sketch size guaranteeing a (1+eps) proximal least-squares solution");
    bound->add_option("s", bs, "subproblem width r_{k-1} r_k")->required();
    bound->add_option("q", bq, "number of sketched modes")->required();
    bound->add_option("eps", beps, "relative error target in (0, 1]")->required();
    bound->add_option("delta", bdelta, "failure probability in (0, 1)")->required();

    AmmArgs amm_args;
    auto* amm = app.add_subcommand("amm", "Monte-Carlo check of the approximate matrix product property");
    amm->add_option("--dims", amm_args.dims, "sketched mode sizes")->delimiter(',');
    amm->add_option("--m", amm_args.m, "sketch size (default: the minimum the guarantee asks for)");
    amm->add_option("--eps0", amm_args.eps0, "error level");
    amm->add_option("--delta0", amm_args.delta0, "failure probability");
    amm->add_option("--trials", amm_args.trials, "number of fresh sketches");
    amm->add_option("--seed", amm_args.seed, "seed");
    amm->add_option("--cols", amm_args.cols, "columns of the random test matrices");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, output_dir, out);
        if (compare->parsed()) return cmd_compare(summaries, csv_path, out, err);
        if (gen->parsed()) return cmd_gen(gen_args, out, err);
        if (bound->parsed()) return cmd_bound(bs, bq, beps, bdelta, out);
        if (amm->parsed()) return cmd_amm(amm_args, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_usage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_usage;
}

}  // namespace ttts::cli
