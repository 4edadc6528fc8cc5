#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "experiment.hpp"
#include "ttts/data.hpp"

using namespace ttts;
using namespace ttts::cli;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    args.insert(args.begin(), "ttts_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ttts_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const json& doc) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << doc.dump(2);
    return p;
}

json synthetic_config(json runs) {
    for (auto& r : runs)
        if (!r.contains("ranks")) r["rank"] = 3;
    return json{{"name", "syn"},
                {"seed", 3},
                {"data", {{"kind", "synthetic"}, {"dims", {6, 6, 6, 6}}, {"rank", 3}, {"noise_std", 0.0}}},
                {"runs", std::move(runs)},
                {"output_dir", "out"}};
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// drop the last CSV column (wall time)
std::string without_timing(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

}  // namespace

TEST_CASE("run: noiseless synthetic ALS recovers the tensor") {
    const fs::path dir = scratch("als");
    const auto cfg = write_config(dir, synthetic_config(json::array({{{"algorithm", "als"}, {"sigma", 0.0}, {"max_sweeps", 30}}})));
    const Result r = call({"run", cfg.string()});
    REQUIRE(r.code == exit_ok);
    const json s = read_json(dir / "out" / "syn_s3_r0_als.summary.json");
    CHECK(s.at("final_recon_rel_err").get<double>() <= 1e-8);
    CHECK(s.at("algorithm") == "als");
    CHECK(s.at("config").at("runs").size() == 1);
    const std::string csv = read_text(dir / "out" / "syn_s3_r0_als.csv");
    CHECK(csv.rfind("sweep,rel_change,recon_rel_err,objective,wall_ms\n", 0) == 0);
}

TEST_CASE("run: validation errors name the field") {
    const fs::path dir = scratch("invalid");
    auto cfg = write_config(dir, synthetic_config(json::array({{{"algorithm", "ts"}, {"sketch_size", 0}}})));
    Result r = call({"run", cfg.string()});
    CHECK(r.code == exit_usage);
    CHECK(r.err.find("runs[0].sketch_size") != std::string::npos);

    json bad = synthetic_config(json::array({{{"algorithm", "ts"}, {"sketch_size", 10}, {"sigmaa", 1}}}));
    cfg = write_config(dir, bad);
    r = call({"run", cfg.string()});
    CHECK(r.code == exit_usage);
    CHECK(r.err.find("runs[0].sigmaa") != std::string::npos);

    bad = synthetic_config(json::array({{{"algorithm", "svd"}}}));
    r = call({"run", write_config(dir, bad).string()});
    CHECK(r.err.find("runs[0].algorithm") != std::string::npos);

    bad = synthetic_config(json::array({{{"algorithm", "als"}}}));
    bad["data"]["rank"] = 0;
    r = call({"run", write_config(dir, bad).string()});
    CHECK(r.code == exit_usage);
    CHECK(r.err.find("data.rank") != std::string::npos);

    std::ofstream(dir / "broken.json") << "{\"name\": \n";
    r = call({"run", (dir / "broken.json").string()});
    CHECK(r.code == exit_usage);
    CHECK(r.err.find("syntax error") != std::string::npos);

    CHECK(call({"run", (dir / "missing.json").string()}).code == exit_usage);
    CHECK(call({"frobnicate"}).code == exit_usage);
    CHECK(call({}).code == exit_usage);
}

TEST_CASE("run + compare: three solvers, identical reruns") {
    const fs::path dir = scratch("compare");
    const json runs = json::array({{{"label", "als"}, {"algorithm", "als"}, {"max_sweeps", 5}},
                                   {{"label", "ts"}, {"algorithm", "ts"}, {"sketch_size", 100}, {"max_sweeps", 5}},
                                   {{"label", "rnd"}, {"algorithm", "random"}, {"sketch_size", 100}, {"max_sweeps", 5}}});
    const auto cfg = write_config(dir, synthetic_config(runs));
    REQUIRE(call({"run", cfg.string()}).code == exit_ok);
    const fs::path out = dir / "out";
    const std::vector<std::string> names{"syn_s3_r0_als", "syn_s3_r1_ts", "syn_s3_r2_rnd"};
    std::vector<std::string> first;
    for (const auto& n : names) first.push_back(read_text(out / (n + ".csv")));

    std::vector<std::string> args{"compare"};
    for (const auto& n : names) args.push_back((out / (n + ".summary.json")).string());
    args.push_back("--csv");
    args.push_back((dir / "table.csv").string());
    const Result r = call(args);
    REQUIRE(r.code == exit_ok);
    std::istringstream table(r.out);
    std::string line;
    int lines = 0;
    while (std::getline(table, line)) ++lines;
    CHECK(lines == 4);
    CHECK(r.out.find("all") != std::string::npos);
    const std::string table_csv = read_text(dir / "table.csv");
    CHECK(table_csv.rfind("label,algorithm,m,sigma,seed,final_error,psnr,mean_sweep_ms\n", 0) == 0);

    REQUIRE(call({"run", cfg.string()}).code == exit_ok);
    for (std::size_t i = 0; i < names.size(); ++i)
        CHECK(without_timing(read_text(out / (names[i] + ".csv"))) == without_timing(first[i]));

    CHECK(call({"compare", (out / (names[0] + ".summary.json")).string()}).code == exit_usage);
    CHECK(call({"compare", (out / (names[0] + ".summary.json")).string(), (dir / "nope.json").string()}).code == exit_usage);
}

TEST_CASE("run: file data with psnr") {
    const fs::path dir = scratch("file");
    REQUIRE(call({"gen", "synthetic", "--dims", "5,4,3", "--rank", "2", "--seed", "4", "-o", (dir / "t.dtf").string()}).code ==
            exit_ok);
    CHECK(load_dtf(dir / "t.dtf").dims() == Dims{5, 4, 3});
    json doc{{"name", "f"},
             {"seeds", {1, 2}},
             {"data", {{"kind", "file"}, {"path", "t.dtf"}}},
             {"runs", json::array({{{"algorithm", "ts"}, {"rank", 2}, {"sketch_size", 30}, {"max_sweeps", 3}}})},
             {"psnr", true}};
    const auto cfg = write_config(dir, doc);
    const Result r = call({"run", cfg.string()});
    REQUIRE(r.code == exit_ok);
    CHECK(fs::exists(dir / "f_s1_r0_ts.summary.json"));
    CHECK(fs::exists(dir / "f_s2_r0_ts.summary.json"));
    const json s = read_json(dir / "f_s2_r0_ts.summary.json");
    CHECK((s.at("psnr").is_number() || s.at("psnr") == "inf"));
}

TEST_CASE("gen, bound and amm") {
    const fs::path dir = scratch("gen");
    Result r = call({"gen", "sinc", "--count", "1000", "--dims", "10,10,10", "-o", (dir / "s.dtf").string()});
    REQUIRE(r.code == exit_ok);
    CHECK(load_dtf(dir / "s.dtf").size() == 1000);
    CHECK(call({"gen", "plaid", "-o", (dir / "x.dtf").string()}).code == exit_usage);
    CHECK(call({"gen", "osc", "--count", "7", "--dims", "2,2", "-o", (dir / "x.dtf").string()}).code == exit_usage);

    r = call({"bound", "2", "2", "0.5", "0.1"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("m = 3520") != std::string::npos);
    r = call({"bound", "3", "3", "0.1", "0.1"});
    CHECK(r.out.find("m = 69600") != std::string::npos);
    CHECK(r.out.find("accuracy") != std::string::npos);
    r = call({"bound", "1", "1", "1", "1"});
    CHECK(r.code == exit_usage);
    CHECK(r.err.find("delta") != std::string::npos);

    r = call({"amm", "--dims", "8,8", "--eps0", "0.5", "--delta0", "0.2", "--trials", "200", "--seed", "1"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("m = 220") != std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
    CHECK(call({"amm", "--trials", "10"}).code == exit_usage);
}

TEST_CASE("config parsing") {
    json doc = synthetic_config(json::array({{{"algorithm", "ts"}, {"sketch_size", 50}, {"init", "zero"}, {"sigma", 0.25}}}));
    doc["seeds"] = {4, 5};
    doc.erase("seed");
    const ExperimentConfig cfg = parse_config(doc);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{4, 5});
    CHECK(cfg.runs.at(0).solver.init == Init::zero);
    CHECK(cfg.runs.at(0).solver.sigma == 0.25);
    CHECK(cfg.runs.at(0).solver.ranks == Dims{1, 3, 3, 3, 1});
    CHECK(cfg.runs.at(0).label == "ts");

    doc["seed"] = 1;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    try {
        json d2 = synthetic_config(json::array({{{"algorithm", "als"}, {"ranks", {1, 2, 1}}}}));
        parse_config(d2);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "runs[0]");
        CHECK(std::string(e.what()).find("ranks") != std::string::npos);
    }
}
