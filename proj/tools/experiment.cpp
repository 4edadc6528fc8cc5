#include "experiment.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ttts::cli {

using nlohmann::json;

namespace {

std::string field_at(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

const json& require(const json& obj, const std::string& parent, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(field_at(parent, key), "missing required field");
    return obj.at(key);
}

Index get_positive_int(const json& v, const std::string& field) {
    if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
    const auto x = v.get<long long>();
    if (x < 1) throw ConfigError(field, "must be >= 1");
    return static_cast<Index>(x);
}

double get_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(field, "expected a number");
    return v.get<double>();
}

std::string get_string(const json& v, const std::string& field) {
    if (!v.is_string()) throw ConfigError(field, "expected a string");
    return v.get<std::string>();
}

Dims get_dims(const json& v, const std::string& field) {
    if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a non-empty array of integers");
    Dims out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_positive_int(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

// "rank": r (uniform chain) or "ranks": [1, ..., 1]
Dims get_ranks(const json& obj, const std::string& parent, Index order) {
    if (obj.contains("ranks")) return get_dims(obj.at("ranks"), field_at(parent, "ranks"));
    if (obj.contains("rank")) return uniform_ranks(order, get_positive_int(obj.at("rank"), field_at(parent, "rank")));
    throw ConfigError(field_at(parent, "rank"), "missing required field (give rank or ranks)");
}

void check_keys(const json& obj, const std::string& parent, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(field_at(parent, key), "unknown field");
    }
}

DataSpec parse_data(const json& d, const std::filesystem::path& base_dir) {
    if (!d.is_object()) throw ConfigError("data", "expected an object");
    DataSpec spec;
    const std::string kind = get_string(require(d, "data", "kind"), "data.kind");
    if (kind == "synthetic") {
        check_keys(d, "data", {"kind", "dims", "rank", "ranks", "noise_std"});
        spec.kind = DataKind::synthetic;
        spec.dims = get_dims(require(d, "data", "dims"), "data.dims");
        spec.ranks = get_ranks(d, "data", static_cast<Index>(spec.dims.size()));
        if (d.contains("noise_std")) spec.noise_std = get_number(d.at("noise_std"), "data.noise_std");
        if (!(spec.noise_std >= 0.0)) throw ConfigError("data.noise_std", "must be >= 0");
        try {
            check_rank_chain(spec.dims, spec.ranks);
        } catch (const DomainError& e) {
            throw ConfigError(d.contains("ranks") ? "data.ranks" : "data.rank", e.what());
        }
    } else if (kind == "function") {
        check_keys(d, "data", {"kind", "function", "count", "dims"});
        spec.kind = DataKind::function;
        const std::string fn = get_string(require(d, "data", "function"), "data.function");
        if (fn == "sinc") spec.function = FunctionKind::sinc;
        else if (fn == "osc") spec.function = FunctionKind::osc;
        else throw ConfigError("data.function", "expected \"sinc\" or \"osc\", got \"" + fn + "\"");
        spec.count = get_positive_int(require(d, "data", "count"), "data.count");
        spec.dims = get_dims(require(d, "data", "dims"), "data.dims");
        if (dims_product(spec.dims) != spec.count)
            throw ConfigError("data.dims", "product of dims must equal data.count");
    } else if (kind == "file") {
        check_keys(d, "data", {"kind", "path"});
        spec.kind = DataKind::file;
        spec.path = get_string(require(d, "data", "path"), "data.path");
        if (spec.path.is_relative()) spec.path = base_dir / spec.path;
    } else {
        throw ConfigError("data.kind", "expected \"synthetic\", \"function\" or \"file\", got \"" + kind + "\"");
    }
    return spec;
}

RunSpec parse_run(const json& r, const std::string& field, Index order) {
    if (!r.is_object()) throw ConfigError(field, "expected an object");
    check_keys(r, field, {"label", "algorithm", "rank", "ranks", "sigma", "sketch_size", "max_sweeps", "tol", "init"});
    RunSpec run;
    SolverConfig& s = run.solver;
    const std::string alg = get_string(require(r, field, "algorithm"), field + ".algorithm");
    const auto parsed = parse_algorithm(alg);
    if (!parsed) throw ConfigError(field + ".algorithm", "expected \"als\", \"ts\" or \"random\", got \"" + alg + "\"");
    s.algorithm = *parsed;
    run.label = r.contains("label") ? get_string(r.at("label"), field + ".label") : to_string(s.algorithm);
    if (order > 0) s.ranks = get_ranks(r, field, order);
    if (r.contains("sigma")) s.sigma = get_number(r.at("sigma"), field + ".sigma");
    if (r.contains("sketch_size")) {
        const json& v = r.at("sketch_size");
        if (!v.is_number_integer()) throw ConfigError(field + ".sketch_size", "expected an integer");
        s.sketch_size = static_cast<Index>(v.get<long long>());
    }
    if (r.contains("max_sweeps")) s.max_sweeps = static_cast<int>(get_positive_int(r.at("max_sweeps"), field + ".max_sweeps"));
    if (r.contains("tol")) s.tol = get_number(r.at("tol"), field + ".tol");
    if (r.contains("init")) {
        const std::string init = get_string(r.at("init"), field + ".init");
        const auto pi = parse_init(init);
        if (!pi) throw ConfigError(field + ".init", "expected \"gaussian\" or \"zero\", got \"" + init + "\"");
        s.init = *pi;
    }
    if (!(s.sigma >= 0.0)) throw ConfigError(field + ".sigma", "must be >= 0");
    if (!(s.tol > 0.0)) throw ConfigError(field + ".tol", "must be > 0");
    if (s.algorithm != Algorithm::als && s.sketch_size < 1)
        throw ConfigError(field + ".sketch_size", "must be >= 1 for algorithm " + to_string(s.algorithm));
    return run;
}

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_fixed(double x, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string sanitize(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
    return s;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
    check_keys(doc, "", {"name", "seed", "seeds", "data", "runs", "psnr", "output_dir"});
    ExperimentConfig cfg;
    cfg.source = doc;
    cfg.output_dir = base_dir;
    if (doc.contains("name")) cfg.name = get_string(doc.at("name"), "name");
    if (doc.contains("seed") && doc.contains("seeds")) throw ConfigError("seeds", "give either seed or seeds, not both");
    if (doc.contains("seed")) {
        const json& v = doc.at("seed");
        if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("seed", "expected a non-negative integer");
        cfg.seeds = {v.get<std::uint64_t>()};
    } else if (doc.contains("seeds")) {
        const json& v = doc.at("seeds");
        if (!v.is_array() || v.empty()) throw ConfigError("seeds", "expected a non-empty array");
        cfg.seeds.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer() || v[i].get<long long>() < 0) throw ConfigError("seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
            cfg.seeds.push_back(v[i].get<std::uint64_t>());
        }
    }
    cfg.data = parse_data(require(doc, "", "data"), base_dir);
    if (doc.contains("psnr")) {
        if (!doc.at("psnr").is_boolean()) throw ConfigError("psnr", "expected a boolean");
        cfg.psnr = doc.at("psnr").get<bool>();
    }
    if (doc.contains("output_dir")) {
        cfg.output_dir = get_string(doc.at("output_dir"), "output_dir");
        if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
    }
    const json& runs = require(doc, "", "runs");
    if (!runs.is_array() || runs.empty()) throw ConfigError("runs", "expected a non-empty array");
    // order is only known up front for generated data
    const auto order = cfg.data.kind == DataKind::file ? Index{0} : static_cast<Index>(cfg.data.dims.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string field = "runs[" + std::to_string(i) + "]";
        RunSpec run = parse_run(runs[i], field, order);
        if (order > 0) {
            try {
                validate(run.solver, cfg.data.dims);
            } catch (const DomainError& e) {
                throw ConfigError(field, e.what());
            }
        }
        cfg.runs.push_back(std::move(run));
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("syntax error: ") + e.what());
    }
    ExperimentConfig cfg = parse_config(doc, path.parent_path().empty() ? "." : path.parent_path());
    return cfg;
}

Tensor make_data(const DataSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case DataKind::synthetic: return gen_synthetic(spec.dims, spec.ranks, spec.noise_std, seed).tensor;
        case DataKind::function: return gen_function_tensor(spec.function, spec.count, spec.dims);
        case DataKind::file: return load_dtf(spec.path);
    }
    throw ConfigError("data.kind", "unsupported");
}

std::string sweep_csv(const SweepReport& report) {
    std::string out = "sweep,rel_change,recon_rel_err,objective,wall_ms\n";
    for (const auto& s : report.sweeps) {
        out += std::to_string(s.sweep) + "," + fmt_double(s.rel_change) + "," +
               (s.recon_rel_err ? fmt_double(*s.recon_rel_err) : std::string()) + "," +
               (s.objective ? fmt_double(*s.objective) : std::string()) + "," + fmt_fixed(s.wall_ms, "%.3f") + "\n";
    }
    return out;
}

std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    std::vector<RunSummary> out;
    for (const std::uint64_t seed : cfg.seeds) {
        const Tensor a = make_data(cfg.data, seed);
        for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
            const std::string field = "runs[" + std::to_string(i) + "]";
            SolverConfig solver = cfg.runs[i].solver;
            solver.seed = seed;
            if (solver.ranks.empty()) {
                // file data: rank given as a scalar was deferred until the order is known
                const json& r = cfg.source.at("runs")[i];
                solver.ranks = get_ranks(r, field, a.order());
            }
            try {
                validate(solver, a.dims());
            } catch (const DomainError& e) {
                throw ConfigError(field, e.what());
            }
            const Decomposition result = decompose(a, solver);

            json summary;
            summary["name"] = cfg.name;
            summary["label"] = cfg.runs[i].label;
            summary["algorithm"] = to_string(solver.algorithm);
            summary["seed"] = seed;
            summary["sigma"] = solver.sigma;
            summary["sketch_size"] = solver.algorithm == Algorithm::als ? Index{0} : solver.sketch_size;
            summary["ranks"] = solver.ranks;
            summary["dims"] = a.dims();
            summary["sweeps"] = result.report.sweeps.size();
            summary["converged"] = result.report.converged;
            const auto& last = result.report.sweeps.back();
            summary["final_rel_change"] = last.rel_change;
            summary["final_recon_rel_err"] = optional_json(last.recon_rel_err);
            summary["final_objective"] = optional_json(last.objective);
            std::optional<double> p;
            if (cfg.psnr && a.order() >= 3) p = ttts::psnr(a, tt_full(result.tt));
            summary["psnr"] = p && std::isfinite(*p) ? json(*p) : (p ? json("inf") : json(nullptr));
            summary["total_ms"] = result.report.total_ms();
            summary["mean_sweep_ms"] = result.report.mean_sweep_ms();
            summary["warnings"] = result.report.warnings;
            json echo = cfg.source;
            echo["runs"] = json::array({cfg.source.at("runs")[i]});
            summary["config"] = echo;

            const std::string stem = sanitize(cfg.name) + "_s" + std::to_string(seed) + "_r" + std::to_string(i) + "_" +
                                     sanitize(cfg.runs[i].label);
            RunSummary rs;
            rs.csv_path = cfg.output_dir / (stem + ".csv");
            rs.summary_path = cfg.output_dir / (stem + ".summary.json");
            rs.summary = summary;
            {
                std::ofstream f(rs.csv_path, std::ios::binary | std::ios::trunc);
                f << sweep_csv(result.report);
                if (!f) throw std::runtime_error("failed writing " + rs.csv_path.string());
            }
            {
                std::ofstream f(rs.summary_path, std::ios::binary | std::ios::trunc);
                f << summary.dump(2) << "\n";
                if (!f) throw std::runtime_error("failed writing " + rs.summary_path.string());
            }
            out.push_back(std::move(rs));
        }
    }
    return out;
}

ComparisonRow comparison_row(const json& s) {
    ComparisonRow row;
    row.label = s.value("label", std::string());
    row.algorithm = s.value("algorithm", std::string());
    row.sketch_size = s.value("sketch_size", Index{0});
    row.sigma = s.value("sigma", 0.0);
    row.seed = s.value("seed", std::uint64_t{0});
    if (s.contains("final_recon_rel_err") && s.at("final_recon_rel_err").is_number())
        row.final_error = s.at("final_recon_rel_err").get<double>();
    if (s.contains("psnr") && s.at("psnr").is_number()) row.psnr = s.at("psnr").get<double>();
    else if (s.contains("psnr") && s.at("psnr").is_string()) row.psnr = std::numeric_limits<double>::infinity();
    row.mean_sweep_ms = s.value("mean_sweep_ms", 0.0);
    return row;
}

namespace {

std::vector<std::vector<std::string>> comparison_cells(const std::vector<ComparisonRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"label", "algorithm", "m", "sigma", "seed", "final_error", "psnr", "mean_sweep_ms"});
    for (const auto& r : rows) {
        cells.push_back({r.label, r.algorithm, r.algorithm == "als" ? std::string("all") : std::to_string(r.sketch_size),
                         fmt_fixed(r.sigma, "%g"), std::to_string(r.seed),
                         r.final_error ? fmt_fixed(*r.final_error, "%.6e") : std::string("-"),
                         r.psnr ? fmt_fixed(*r.psnr, "%.4f") : std::string("-"), fmt_fixed(r.mean_sweep_ms, "%.3f")});
    }
    return cells;
}

}  // namespace

std::string comparison_table(const std::vector<ComparisonRow>& rows) {
    const auto cells = comparison_cells(rows);
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    std::ostringstream os;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c) os << "  ";
            // text left, numbers right
            const bool left = c < 2;
            const std::string pad(width[c] - line[c].size(), ' ');
            os << (left ? line[c] + pad : pad + line[c]);
        }
        os << "\n";
    }
    return os.str();
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string out;
    for (const auto& line : comparison_cells(rows)) {
        for (std::size_t c = 0; c < line.size(); ++c) out += (c ? "," : "") + line[c];
        out += "\n";
    }
    return out;
}

}  // namespace ttts::cli
