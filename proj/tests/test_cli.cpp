#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "eegfeat/artifact.hpp"
#include "eegfeat/cli.hpp"
#include "eegfeat/forest.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace eegfeat;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
    std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
    CliResult result;
    try {
        result.code = run_cli(args);
    } catch (...) {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
        throw;
    }
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string field;
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

// Shared workspace: a synthetic dataset generated once through the CLI, plus
// configs for the other subcommands. Lazily built so test order is free.
struct Workspace {
    fs::path dir;
    fs::path config;    // synth + in-session settings
    fs::path manifest;  // written by the synth run
    fs::path run_cfg;   // experiment config against the manifest
    fs::path subset_cfg;

    Workspace() {
        dir = fs::temp_directory_path() / ("eegfeat-cli-" + std::to_string(::getpid()));
        fs::create_directories(dir);
        config = dir / "config.json";
        write_file(config, R"({
  "manifest": "out/synth/manifest.json",
  "output_dir": "out",
  "experiment": {"splits": 3, "fractions": [0.5, 0.8], "seed": 42},
  "synth": {
    "n_subjects": 2,
    "n_channels": 4,
    "sample_rate": 64,
    "seconds_per_class": 20,
    "seed": 7,
    "class0": {"band_amplitudes": {"alpha_middle": 4.0}, "correlation": "identity"},
    "class1": {"band_amplitudes": {"beta_low": 4.0},
               "correlation": {"planted": {"channels": [0, 1], "rho": 0.8}}}
  }
})");
        manifest = dir / "out" / "synth" / "manifest.json";
        run_cfg = dir / "run.json";
        write_file(run_cfg, R"({
  "manifest": "out/synth/manifest.json",
  "output_dir": "run1",
  "features": ["bf", "tsg+bf"],
  "experiment": {"splits": 3, "fractions": [0.5, 0.8], "ratios": [0.5, 1.0], "seed": 42}
})");
        subset_cfg = dir / "subsets.json";
        write_file(subset_cfg, R"({
  "manifest": "out/synth/manifest.json",
  "output_dir": "subsets",
  "experiment": {"subset_splits": 2, "subset_channels": [0, 1, 2], "importance_sizes": [2],
                 "subset_feature_set": "bf", "seed": 42}
})");
        CliResult synth = run({"synth", "--config", config.string()});
        REQUIRE(synth.code == 0);
        REQUIRE(fs::exists(manifest));
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
};

const Workspace& ws() {
    static Workspace instance;
    return instance;
}

} // namespace

TEST_CASE("help prints usage and bad invocations exit 1") {
    CliResult help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("ingest") != std::string::npos);
    CHECK(help.out.find("experiment") != std::string::npos);

    CHECK(run({}).code == 1);
    CHECK(run({"bogus"}).code == 1);
    CHECK(run({"embed"}).code == 1);            // missing required options
    CHECK(run({"experiment"}).code == 1);       // missing protocol
    CliResult bad = run({"ingest"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("config error") != std::string::npos);
}

TEST_CASE("synth writes one csv per recording plus a manifest") {
    const Workspace& w = ws();
    for (const char* name : {"s0_session0_c0.csv", "s0_session0_c1.csv",
                             "s1_session0_c0.csv", "s1_session0_c1.csv"})
        CHECK(fs::exists(w.dir / "out" / "synth" / name));

    json manifest = json::parse(slurp(w.manifest));
    REQUIRE(manifest.is_array());
    REQUIRE(manifest.size() == 4);
    CHECK(manifest[0].at("subject") == "s0");
    CHECK(manifest[0].at("label") == 0);
    CHECK(manifest[0].at("sample_rate") == 64.0);
    CHECK(manifest[1].at("label") == 1);

    CliResult again = run({"synth", "--config", ws().config.string()});
    CHECK(again.code == 0);

    SUBCASE("a config without a synth section is a config error") {
        fs::path cfg = w.dir / "nosynth.json";
        write_file(cfg, R"({"output_dir": "out"})");
        CHECK(run({"synth", "--config", cfg.string()}).code == 1);
    }
}

TEST_CASE("ingest summarizes every recording and window count") {
    const Workspace& w = ws();
    CliResult res = run({"ingest", "--config", w.config.string()});
    REQUIRE(res.code == 0);
    CHECK(res.out.find("subject=s0") != std::string::npos);
    CHECK(res.out.find("subject=s1") != std::string::npos);
    CHECK(res.out.find("ingested 4 recordings") != std::string::npos);

    json summary = json::parse(slurp(w.dir / "out" / "dataset_summary.json"));
    REQUIRE(summary.at("recordings").size() == 4);
    for (const json& rec : summary.at("recordings")) {
        CHECK(rec.at("channels") == 4);
        CHECK(rec.at("samples") == 1280);
        CHECK(rec.at("sample_rate") == 64.0);
        // 20 s at 64 Hz with the default 2.5 s window
        CHECK(rec.at("windows") == 8);
    }
    CHECK(summary.at("config_hash").get<std::string>().size() == 16);
}

TEST_CASE("features writes per-window band and graph tables") {
    const Workspace& w = ws();
    REQUIRE(run({"features", "--config", w.config.string()}).code == 0);

    std::vector<std::string> bf = split_lines(slurp(w.dir / "out" / "features_bf.csv"));
    REQUIRE(bf.size() == 1 + 32); // 4 recordings x 8 windows
    std::vector<std::string> header = split_fields(bf[0]);
    REQUIRE(header.size() == 4 + 4 * 8);
    CHECK(header[0] == "subject");
    CHECK(header[4] == "ch0_theta_low");
    CHECK(header.back() == "ch3_beta_high");
    for (size_t r = 1; r < bf.size(); ++r) {
        std::vector<std::string> fields = split_fields(bf[r]);
        REQUIRE(fields.size() == header.size());
        double sum = 0.0;
        for (size_t c = 4; c < fields.size(); ++c) sum += std::stod(fields[c]);
        // four simplex-normalized channels
        CHECK(sum == doctest::Approx(4.0).epsilon(1e-9));
    }

    std::vector<std::string> gr = split_lines(slurp(w.dir / "out" / "features_graph.csv"));
    REQUIRE(gr.size() == 1 + 32);
    std::vector<std::string> gheader = split_fields(gr[0]);
    REQUIRE(gheader.size() == 4 + 6); // upper triangle of 4 channels
    CHECK(gheader[4] == "r0_1");
    CHECK(gheader.back() == "r2_3");
    for (size_t r = 1; r < gr.size(); ++r) {
        std::vector<std::string> fields = split_fields(gr[r]);
        for (size_t c = 4; c < fields.size(); ++c) {
            const double v = std::stod(fields[c]);
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("fit embed predict round trip on one recording") {
    const Workspace& w = ws();
    CliResult fit = run({"fit", "--config", w.config.string(), "--features", "tsg+bf"});
    REQUIRE(fit.code == 0);
    const fs::path model = w.dir / "out" / "tsg+bf.model";
    REQUIRE(fs::exists(model));

    json artifact = json::parse(slurp(model));
    CHECK(artifact.at("format") == "eegfeat-artifact");
    CHECK(artifact.at("version") == 1);
    CHECK(artifact.at("kind") == "bundle");
    CHECK(artifact.at("config_hash").get<std::string>().size() == 16);
    CHECK(artifact.at("payload").at("features") == "tsg+bf");
    CHECK(artifact.at("payload").at("sample_rate") == 64.0);
    CHECK_FALSE(artifact.at("payload").at("forest").is_null());

    const std::string input = (w.dir / "out" / "synth" / "s0_session0_c0.csv").string();
    const fs::path emb1 = w.dir / "emb1.csv";
    const fs::path emb2 = w.dir / "emb2.csv";
    REQUIRE(run({"embed", "--model", model.string(), "--input", input, "--sample-rate", "64",
                 "--output", emb1.string()})
                .code == 0);
    REQUIRE(run({"embed", "--model", model.string(), "--input", input, "--sample-rate", "64",
                 "--output", emb2.string()})
                .code == 0);
    CHECK(slurp(emb1) == slurp(emb2));
    std::vector<std::string> lines = split_lines(slurp(emb1));
    REQUIRE(lines.size() == 1 + 8);
    CHECK(lines[0].rfind("window,e0", 0) == 0);

    CliResult pred = run({"predict", "--model", model.string(), "--input", input, "--sample-rate", "64"});
    REQUIRE(pred.code == 0);
    std::vector<std::string> plines = split_lines(pred.out);
    REQUIRE(plines.size() == 1 + 8);
    CHECK(plines[0] == "window,posterior,label");
    int zeros = 0;
    for (size_t i = 1; i < plines.size(); ++i) {
        std::vector<std::string> fields = split_fields(plines[i]);
        REQUIRE(fields.size() == 3);
        const double posterior = std::stod(fields[1]);
        CHECK(posterior >= 0.0);
        CHECK(posterior <= 1.0);
        CHECK((fields[2] == "0" || fields[2] == "1"));
        CHECK(fields[2] == (posterior >= 0.5 ? "1" : "0"));
        if (fields[2] == "0") ++zeros;
    }
    // the recording is class-0 training data for this model
    CHECK(zeros >= 6);

    SUBCASE("sample rate mismatches and missing inputs are data errors") {
        CHECK(run({"embed", "--model", model.string(), "--input", input, "--sample-rate", "32"}).code == 2);
        CHECK(run({"embed", "--model", model.string(), "--input", input}).code == 2);
        CHECK(run({"embed", "--model", model.string(), "--input", (w.dir / "nope.csv").string(),
                   "--sample-rate", "64"})
                  .code == 2);
        CHECK(run({"embed", "--model", (w.dir / "nope.model").string(), "--input", input,
                   "--sample-rate", "64"})
                  .code == 2);
    }

    SUBCASE("finetune refreshes leaf counts but keeps the structure") {
        fs::path tune_cfg = w.dir / "tune.json";
        write_file(tune_cfg, R"({"manifest": "out/synth/manifest.json", "output_dir": "out"})");
        CliResult tuned = run({"finetune", "--model", model.string(), "--config", tune_cfg.string()});
        REQUIRE(tuned.code == 0);
        CHECK(tuned.out.find("structure hash") != std::string::npos);
        const fs::path tuned_path = model.string() + ".tuned";
        REQUIRE(fs::exists(tuned_path));

        Forest before = forest_from_json(load_artifact(model.string(), "bundle").at("forest"));
        Forest after = forest_from_json(load_artifact(tuned_path.string(), "bundle").at("forest"));
        CHECK(structure_hash(before) == structure_hash(after));
    }
}

TEST_CASE("experiment in-session writes stable reports and plot data") {
    const Workspace& w = ws();
    CliResult res = run({"experiment", "in-session", "--config", w.run_cfg.string()});
    REQUIRE(res.code == 0);
    CHECK(res.out.find("bf in-session ALL p=0.5") != std::string::npos);
    CHECK(res.out.find("tsg+bf in-session s1 p=0.8") != std::string::npos);

    const fs::path run_dir = w.dir / "run1";
    REQUIRE(fs::exists(run_dir / "report_in-session.csv"));
    REQUIRE(fs::exists(run_dir / "report_in-session.json"));
    for (const char* name : {"plot_curve_in-session_bf.csv", "plot_curve_in-session_tsgpbf.csv",
                             "plot_hist_bf.csv", "plot_hist_tsgpbf.csv"})
        CHECK(fs::exists(run_dir / name));

    const std::string csv_first = slurp(run_dir / "report_in-session.csv");
    REQUIRE(run({"experiment", "in-session", "--config", w.run_cfg.string()}).code == 0);
    CHECK(slurp(run_dir / "report_in-session.csv") == csv_first);

    json report = json::parse(slurp(run_dir / "report_in-session.json"));
    CHECK(report.at("experiment") == "in-session");
    CHECK(report.at("seed") == 42);
    CHECK(report.at("cells").size() == 2 * 2 * 3); // sets x fractions x (ALL + 2 subjects)

    SUBCASE("report re-derives identical csv and plot data") {
        const fs::path rederived = w.dir / "rederived";
        CliResult again = run({"report", "--input", (run_dir / "report_in-session.json").string(),
                               "--output-dir", rederived.string()});
        REQUIRE(again.code == 0);
        CHECK(slurp(rederived / "report_in-session.csv") == csv_first);
        CHECK(slurp(rederived / "plot_curve_in-session_bf.csv") ==
              slurp(run_dir / "plot_curve_in-session_bf.csv"));
    }

    SUBCASE("querying emits a cell per ratio") {
        CliResult q = run({"experiment", "querying", "--config", w.run_cfg.string()});
        REQUIRE(q.code == 0);
        CHECK(q.out.find("bf querying ALL r=0.5") != std::string::npos);
        CHECK(q.out.find("bf querying ALL r=1") != std::string::npos);
        CHECK(fs::exists(run_dir / "report_querying.csv"));
    }
}

TEST_CASE("experiment subsets writes rankings and per-size importance") {
    const Workspace& w = ws();
    CliResult res = run({"experiment", "subsets", "--config", w.subset_cfg.string()});
    REQUIRE(res.code == 0);
    CHECK(res.out.find("bf subsets 0+1+2") != std::string::npos);

    const fs::path dir = w.dir / "subsets";
    REQUIRE(fs::exists(dir / "report_subsets.csv"));
    REQUIRE(fs::exists(dir / "report_subsets.json"));
    REQUIRE(fs::exists(dir / "plot_subset_sizes.csv"));

    json report = json::parse(slurp(dir / "report_subsets.json"));
    CHECK(report.at("feature_set") == "bf");
    CHECK(report.at("subsets").size() == 7); // all nonempty subsets of 3 channels
    REQUIRE(report.contains("importance"));
    CHECK(report.at("importance").at("channels").size() == 3);

    json by_size = json::parse(slurp(dir / "importance_by_size.json"));
    REQUIRE(by_size.contains("2"));
    CHECK(by_size.at("2").at("channels").size() == 3);
    CHECK(by_size.at("2").at("pairs").size() == 3);
}

TEST_CASE("config and data errors map to distinct exit codes") {
    const Workspace& w = ws();

    fs::path unknown = w.dir / "unknown.json";
    write_file(unknown, R"({"output_dir": "out", "nope": 1})");
    CliResult res = run({"ingest", "--config", unknown.string()});
    CHECK(res.code == 1);
    CHECK(res.err.find("config error") != std::string::npos);
    CHECK(res.err.find("nope") != std::string::npos);

    fs::path invalid = w.dir / "invalid.json";
    write_file(invalid, "{not json");
    CHECK(run({"ingest", "--config", invalid.string()}).code == 1);

    CHECK(run({"ingest", "--config", (w.dir / "absent.json").string()}).code == 1);

    fs::path no_manifest = w.dir / "nomanifest.json";
    write_file(no_manifest, R"({"output_dir": "out"})");
    CHECK(run({"ingest", "--config", no_manifest.string()}).code == 1);

    fs::path ghost = w.dir / "ghost.json";
    write_file(ghost, R"({"manifest": "missing-manifest.json", "output_dir": "out"})");
    CliResult data_err = run({"ingest", "--config", ghost.string()});
    CHECK(data_err.code == 2);
    CHECK(data_err.err.find("error:") != std::string::npos);

    fs::path broken = w.dir / "broken-manifest.json";
    write_file(broken, "[{]");
    fs::path broken_cfg = w.dir / "broken.json";
    write_file(broken_cfg, R"({"manifest": "broken-manifest.json", "output_dir": "out"})");
    CHECK(run({"ingest", "--config", broken_cfg.string()}).code == 2);
}
