#include "eegfeat/cli.hpp"

#include "eegfeat/artifact.hpp"
#include "eegfeat/config.hpp"
#include "eegfeat/csv.hpp"
#include "eegfeat/error.hpp"
#include "eegfeat/experiments.hpp"
#include "eegfeat/filter.hpp"
#include "eegfeat/parallel.hpp"
#include "eegfeat/synth.hpp"
#include "eegfeat/windowing.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>

namespace eegfeat {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string resolve(const std::string& path, const std::string& base) {
    fs::path p(path);
    if (p.is_absolute() || base.empty()) return path;
    return (fs::path(base) / p).string();
}

std::string output_dir_of(const CliConfig& cfg) {
    std::string dir = resolve(cfg.output_dir, cfg.base_dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<Recording> load_dataset(const CliConfig& cfg, int jobs) {
    if (cfg.manifest.empty()) throw ConfigError("config needs a manifest path");
    return load_recordings(load_manifest(resolve(cfg.manifest, cfg.base_dir)), jobs);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
}

void print_cells(const Report& report) {
    for (const CellDetail& cell : report.cells)
        std::cout << cell.feature_set << ' ' << cell.experiment << ' ' << cell.subject << ' '
                  << cell.setting << " n=" << cell.values.size()
                  << " mean=" << format_double(cell.mean()) << " se=" << format_double(cell.se())
                  << '\n';
}

int window_count(Eigen::Index samples, int w, int h) {
    if (samples < w) return 0;
    return static_cast<int>((samples - h) / (w - h));
}

int cmd_ingest(const CliConfig& cfg, int jobs) {
    std::vector<Recording> recs = load_dataset(cfg, jobs);
    const std::string dir = output_dir_of(cfg);
    json summary;
    summary["config_hash"] = cfg.config_hash;
    summary["recordings"] = json::array();
    for (const Recording& rec : recs) {
        const int w = static_cast<int>(std::lround(cfg.pipeline.window_seconds * rec.sample_rate));
        const int h =
            static_cast<int>(std::lround(cfg.pipeline.window_overlap_seconds * rec.sample_rate));
        const int n_w = window_count(rec.length(), w, h);
        std::cout << rec.meta.source_path << " subject=" << rec.meta.subject
                  << " session=" << rec.meta.session
                  << " label=" << (rec.meta.label ? std::to_string(*rec.meta.label) : "none")
                  << " channels=" << rec.channels() << " samples=" << rec.length()
                  << " rate=" << format_double(rec.sample_rate) << " windows=" << n_w << '\n';
        summary["recordings"].push_back(json{{"path", rec.meta.source_path},
                                             {"subject", rec.meta.subject},
                                             {"session", rec.meta.session},
                                             {"label", rec.meta.label ? json(*rec.meta.label) : json()},
                                             {"channels", rec.channels()},
                                             {"samples", rec.length()},
                                             {"sample_rate", rec.sample_rate},
                                             {"windows", n_w}});
    }
    std::ofstream out(fs::path(dir) / "dataset_summary.json");
    out << summary.dump(2) << '\n';
    std::cout << "ingested " << recs.size() << " recordings; summary in " << dir << '\n';
    return 0;
}

int cmd_features(const CliConfig& cfg, int jobs) {
    std::vector<Recording> recs = load_dataset(cfg, jobs);
    DatasetCache cache = build_cache(recs, cfg.pipeline, jobs);
    const std::string dir = output_dir_of(cfg);
    const int n_c = cache.n_channels;
    const int n_bands = cfg.pipeline.bands.size();

    std::ofstream bf(fs::path(dir) / "features_bf.csv");
    bf << "subject,session,label,window";
    for (int c = 0; c < n_c; ++c)
        for (const Band& band : cfg.pipeline.bands.bands) bf << ",ch" << c << '_' << band.name;
    bf << '\n';
    std::ofstream gr(fs::path(dir) / "features_graph.csv");
    gr << "subject,session,label,window";
    for (int i = 0; i < n_c; ++i)
        for (int j = i + 1; j < n_c; ++j) gr << ",r" << i << '_' << j;
    gr << '\n';

    std::size_t total = 0;
    for (const SubjectCache& subject : cache.subjects) {
        for (int k = 0; k < subject.size(); ++k) {
            const std::string prefix = subject.id + ',' +
                                       subject.sessions[static_cast<size_t>(subject.session_of[static_cast<size_t>(k)])] +
                                       ',' + std::to_string(subject.labels[static_cast<size_t>(k)]) + ',' +
                                       std::to_string(k);
            bf << prefix;
            for (int c = 0; c < n_c * n_bands; ++c) bf << ',' << format_double(subject.band_feats(k, c));
            bf << '\n';
            gr << prefix;
            const Matrix& g = subject.graphs.graphs[static_cast<size_t>(k)];
            for (int i = 0; i < n_c; ++i)
                for (int j = i + 1; j < n_c; ++j) gr << ',' << format_double(g(i, j));
            gr << '\n';
            ++total;
        }
    }
    std::cout << "wrote band and graph features for " << total << " windows to " << dir << '\n';
    return 0;
}

// One pooled cache across all subjects, for fit/finetune.
SubjectCache pool_cache(const DatasetCache& cache) {
    SubjectCache pooled;
    pooled.id = "pooled";
    for (const SubjectCache& subject : cache.subjects) {
        for (const Matrix& g : subject.graphs.graphs) pooled.graphs.graphs.push_back(g);
        Matrix merged(pooled.band_feats.rows() + subject.band_feats.rows(), subject.band_feats.cols());
        if (pooled.band_feats.rows() > 0) merged.topRows(pooled.band_feats.rows()) = pooled.band_feats;
        merged.bottomRows(subject.band_feats.rows()) = subject.band_feats;
        pooled.band_feats = std::move(merged);
        for (int label : subject.labels) pooled.labels.push_back(label);
        for (int s : subject.session_of) {
            pooled.session_of.push_back(static_cast<int>(pooled.sessions.size()) + s);
        }
        for (const std::string& name : subject.sessions) pooled.sessions.push_back(subject.id + "/" + name);
    }
    return pooled;
}

int cmd_fit(const CliConfig& cfg, const std::string& features_name, std::string output, int jobs) {
    const FeatureSet set = parse_feature_set(features_name);
    std::vector<Recording> recs = load_dataset(cfg, jobs);
    DatasetCache cache = build_cache(recs, cfg.pipeline, jobs);
    SubjectCache pooled = pool_cache(cache);

    std::vector<int> all(static_cast<size_t>(pooled.size()));
    for (int i = 0; i < pooled.size(); ++i) all[static_cast<size_t>(i)] = i;
    FittedFeatures fitted = fit_features(set, pooled, all);
    if (fitted.bf) {
        fitted.bf->band_set = cfg.pipeline.bands;
        fitted.bf->psd_params = cfg.pipeline.psd;
    }
    Forest forest = train_forest(fitted.train_features, pooled.labels, cfg.pipeline.forest,
                                 derive_seed(cfg.experiment.seed, "forest:cli", 0), jobs);

    json payload;
    payload["features"] = feature_set_name(set);
    payload["sample_rate"] = cache.sample_rate;
    payload["pipeline"] = pipeline_to_json(cfg.pipeline);
    payload["tsg"] = fitted.tsg ? tsg_to_json(*fitted.tsg) : json();
    payload["bf"] = fitted.bf ? bf_to_json(*fitted.bf) : json();
    payload["forest"] = forest_to_json(forest);

    const std::string dir = output_dir_of(cfg);
    if (output.empty()) output = (fs::path(dir) / (feature_set_name(set) + ".model")).string();
    save_artifact(output, "bundle", payload, cfg.config_hash);
    std::cout << "fitted " << feature_set_name(set) << " on " << pooled.size() << " windows ("
              << fitted.train_features.cols() << " feature dims); model in " << output << '\n';
    return 0;
}

struct Bundle {
    FeatureSet set = FeatureSet::Tsg;
    double sample_rate = 0.0;
    PipelineConfig pipeline;
    std::optional<TsgModel> tsg;
    std::optional<BfModel> bf;
    std::optional<Forest> forest;
    std::string config_hash;
};

Bundle load_bundle(const std::string& path) {
    Bundle bundle;
    json payload = load_artifact(path, "bundle", &bundle.config_hash);
    bundle.set = parse_feature_set(payload.at("features").get<std::string>());
    bundle.sample_rate = payload.at("sample_rate").get<double>();
    bundle.pipeline = pipeline_from_json(payload.at("pipeline"));
    if (payload.contains("tsg") && !payload.at("tsg").is_null())
        bundle.tsg = tsg_from_json(payload.at("tsg"));
    if (payload.contains("bf") && !payload.at("bf").is_null())
        bundle.bf = bf_from_json(payload.at("bf"));
    if (payload.contains("forest") && !payload.at("forest").is_null())
        bundle.forest = forest_from_json(payload.at("forest"));
    return bundle;
}

WindowSet bundle_windows(const Bundle& bundle, const Recording& rec) {
    if (rec.sample_rate != bundle.sample_rate)
        throw ParamError("input sample rate " + format_double(rec.sample_rate) +
                         " differs from the model's " + format_double(bundle.sample_rate));
    Recording filtered =
        bandpass_filter(rec, bundle.pipeline.high_pass_hz, bundle.pipeline.low_pass_hz);
    const int w = static_cast<int>(std::lround(bundle.pipeline.window_seconds * rec.sample_rate));
    const int h =
        static_cast<int>(std::lround(bundle.pipeline.window_overlap_seconds * rec.sample_rate));
    return window(filtered, w, h);
}

Matrix bundle_embed(const Bundle& bundle, const WindowSet& ws, double fs, int jobs) {
    Matrix tsg_m, bf_m;
    if (bundle.tsg) {
        tsg_m.resize(static_cast<Eigen::Index>(ws.size()), bundle.tsg->d);
        parallel_for(ws.size(), jobs, [&](std::size_t k) {
            tsg_m.row(static_cast<Eigen::Index>(k)) = oos_embed(*bundle.tsg, ws.windows[k]).transpose();
        });
    }
    if (bundle.bf) {
        BandFeatureResult bands = band_features(ws, fs, bundle.bf->band_set, bundle.bf->psd_params, jobs);
        bf_m = apply_bf(*bundle.bf, bands.features);
    }
    if (tsg_m.size() == 0) return bf_m;
    if (bf_m.size() == 0) return tsg_m;
    Matrix out(tsg_m.rows(), tsg_m.cols() + bf_m.cols());
    out << tsg_m, bf_m;
    return out;
}

Recording load_single_input(const std::string& input, double sample_rate_flag) {
    ManifestEntry entry;
    entry.path = input;
    entry.subject = "cli-input";
    if (sample_rate_flag > 0.0) entry.sample_rate = sample_rate_flag;
    return load_recording(entry);
}

int cmd_embed(const std::string& model, const std::string& input, const std::string& output,
              double sample_rate_flag, int jobs, bool predict) {
    Bundle bundle = load_bundle(model);
    Recording rec = load_single_input(input, sample_rate_flag);
    WindowSet ws = bundle_windows(bundle, rec);
    Matrix feats = bundle_embed(bundle, ws, rec.sample_rate, jobs);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!output.empty()) {
        file.open(output, std::ios::binary);
        if (!file) throw Error("cannot open " + output + " for writing");
        out = &file;
    }
    if (predict) {
        if (!bundle.forest) throw ParamError("model " + model + " holds no classifier");
        Vector posterior = predict_posterior(*bundle.forest, feats, jobs);
        std::vector<int> labels = posterior_labels(posterior);
        *out << "window,posterior,label\n";
        for (Eigen::Index i = 0; i < posterior.size(); ++i)
            *out << i << ',' << format_double(posterior[i]) << ',' << labels[static_cast<size_t>(i)]
                 << '\n';
    } else {
        *out << "window";
        for (Eigen::Index c = 0; c < feats.cols(); ++c) *out << ",e" << c;
        *out << '\n';
        for (Eigen::Index r = 0; r < feats.rows(); ++r) {
            *out << r;
            for (Eigen::Index c = 0; c < feats.cols(); ++c) *out << ',' << format_double(feats(r, c));
            *out << '\n';
        }
    }
    return 0;
}

int cmd_finetune(const CliConfig& cfg, const std::string& model, std::string output, int jobs) {
    Bundle bundle = load_bundle(model);
    if (!bundle.forest) throw ParamError("model " + model + " holds no classifier to fine-tune");
    std::vector<Recording> recs = load_dataset(cfg, jobs);
    Matrix feats;
    std::vector<int> labels;
    for (const Recording& rec : recs) {
        if (!rec.meta.label) throw ParamError("recording " + rec.meta.source_path + " has no class label");
        WindowSet ws = bundle_windows(bundle, rec);
        Matrix f = bundle_embed(bundle, ws, rec.sample_rate, jobs);
        Matrix merged(feats.rows() + f.rows(), f.cols());
        if (feats.rows() > 0) merged.topRows(feats.rows()) = feats;
        merged.bottomRows(f.rows()) = f;
        feats = std::move(merged);
        for (std::size_t k = 0; k < ws.size(); ++k) labels.push_back(*rec.meta.label);
    }
    const std::uint64_t hash_before = structure_hash(*bundle.forest);
    Forest tuned = fine_tune(*bundle.forest, feats, labels);

    json payload = load_artifact(model, "bundle");
    payload["forest"] = forest_to_json(tuned);
    if (output.empty()) output = model + ".tuned";
    save_artifact(output, "bundle", payload, bundle.config_hash);
    std::cout << "fine-tuned on " << labels.size() << " windows (structure hash " << hash_before
              << " preserved); model in " << output << '\n';
    return 0;
}

int cmd_synth(const CliConfig& cfg) {
    if (!cfg.synth) throw ConfigError("config has no synth section");
    std::vector<Recording> recs = synth_dataset(*cfg.synth);
    const std::string dir = output_dir_of(cfg);
    const fs::path synth_dir = fs::path(dir) / "synth";
    fs::create_directories(synth_dir);
    json manifest = json::array();
    for (const Recording& rec : recs) {
        const std::string name =
            rec.meta.subject + "_" + rec.meta.session + "_c" + std::to_string(*rec.meta.label) + ".csv";
        write_csv(rec, (synth_dir / name).string());
        manifest.push_back(json{{"path", name},
                                {"subject", rec.meta.subject},
                                {"session", rec.meta.session},
                                {"label", *rec.meta.label},
                                {"sample_rate", rec.sample_rate}});
    }
    std::ofstream out(synth_dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    std::cout << "wrote " << recs.size() << " synthetic recordings and manifest to "
              << synth_dir.string() << '\n';
    return 0;
}

void write_importance_sizes(const SubsetReport& report, const std::vector<int>& sizes,
                            const std::string& path) {
    json doc;
    for (int size : sizes) {
        ImportanceReport imp;
        try {
            imp = channel_importance(report, {size});
        } catch (const Error&) {
            continue; // no subsets of this size scored
        }
        json entry;
        entry["channels"] = json::array();
        for (const ChannelScore& ch : imp.channels)
            entry["channels"].push_back(
                json{{"channel", ch.channel}, {"score", ch.score}, {"rank", ch.rank}});
        entry["pairs"] = json::array();
        for (const PairScore& pair : imp.pairs)
            entry["pairs"].push_back(
                json{{"a", pair.a}, {"b", pair.b}, {"score", pair.score}, {"rank", pair.rank}});
        doc[std::to_string(size)] = std::move(entry);
    }
    std::ofstream out(path, std::ios::binary);
    out << doc.dump(2) << '\n';
}

int cmd_experiment(const CliConfig& cfg, const std::string& kind, int jobs) {
    std::vector<Recording> recs = load_dataset(cfg, jobs);
    DatasetCache cache = build_cache(recs, cfg.pipeline, jobs);
    const std::string dir = output_dir_of(cfg);

    if (kind == "subsets") {
        SubsetReport report =
            run_subset_search(cache, cfg.pipeline, cfg.experiment, cfg.subset_feature_set, jobs);
        report.config_hash = cfg.config_hash;
        ImportanceReport importance = channel_importance(report);
        write_subset_csv(report, (fs::path(dir) / "report_subsets.csv").string());
        write_subset_json(report, importance, (fs::path(dir) / "report_subsets.json").string());
        write_subset_plot_data(report, dir);
        write_importance_sizes(report, cfg.experiment.importance_sizes,
                               (fs::path(dir) / "importance_by_size.json").string());
        print_warnings(report.warnings);
        for (const std::string& skip : report.skipped) std::cerr << "skipped subset " << skip << '\n';
        for (const SubsetResult& subset : report.subsets) {
            std::cout << report.feature_set << " subsets ";
            for (size_t i = 0; i < subset.channels.size(); ++i)
                std::cout << (i ? "+" : "") << subset.channels[i];
            std::cout << " n=" << subset.per_subject.size() << " mean=" << format_double(subset.mean)
                      << '\n';
        }
        std::cout << "subset report in " << dir << '\n';
        return 0;
    }

    Report report;
    if (kind == "in-session")
        report = run_in_session(cache, cfg.pipeline, cfg.experiment, cfg.features, jobs);
    else if (kind == "querying")
        report = run_nonconstant_querying(cache, cfg.pipeline, cfg.experiment, cfg.features, jobs);
    else if (kind == "transfer")
        report = run_transfer(cache, cfg.pipeline, cfg.experiment, cfg.features, jobs);
    else
        throw ConfigError("unknown experiment: " + kind);
    report.config_hash = cfg.config_hash;

    write_report_csv(report, (fs::path(dir) / ("report_" + report.experiment + ".csv")).string());
    write_report_json(report, (fs::path(dir) / ("report_" + report.experiment + ".json")).string());
    write_plot_data(report, dir);
    print_warnings(report.warnings);
    print_cells(report);
    std::cout << report.experiment << " report in " << dir << '\n';
    return 0;
}

int cmd_report(const std::string& input, std::string outdir) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw Error("cannot open report file: " + input);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("report " + input + " is not valid JSON: " + e.what());
    }
    if (outdir.empty()) outdir = fs::path(input).parent_path().string();
    if (outdir.empty()) outdir = ".";
    fs::create_directories(outdir);

    if (doc.contains("subsets")) {
        SubsetReport report;
        report.feature_set = doc.value("feature_set", "tsg+bf");
        report.config_hash = doc.value("config_hash", "");
        report.seed = doc.value("seed", 0ull);
        for (const json& row : doc.at("subsets")) {
            SubsetResult subset;
            subset.channels = row.at("channels").get<std::vector<int>>();
            subset.mean = row.at("mean").get<double>();
            if (row.contains("per_subject"))
                for (const json& v : row.at("per_subject"))
                    subset.per_subject.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                             : v.get<double>());
            report.subsets.push_back(std::move(subset));
        }
        ImportanceReport importance = channel_importance(report);
        write_subset_csv(report, (fs::path(outdir) / "report_subsets.csv").string());
        write_subset_plot_data(report, outdir);
        std::cout << "re-derived subset CSV and plot data in " << outdir << '\n';
        (void)importance;
        return 0;
    }

    Report report;
    report.experiment = doc.value("experiment", "in-session");
    report.config_hash = doc.value("config_hash", "");
    report.seed = doc.value("seed", 0ull);
    for (const json& c : doc.at("cells")) {
        CellDetail cell;
        cell.feature_set = c.at("feature_set").get<std::string>();
        cell.experiment = c.at("experiment").get<std::string>();
        cell.subject = c.at("subject").get<std::string>();
        cell.setting = c.at("setting").get<std::string>();
        cell.setting_value = c.at("setting_value").get<double>();
        cell.values = c.at("values").get<std::vector<double>>();
        report.cells.push_back(std::move(cell));
    }
    if (doc.contains("ranges"))
        for (const json& r : doc.at("ranges"))
            report.ranges.push_back(TransferRange{r.at("feature_set").get<std::string>(),
                                                  r.at("target").get<std::string>(),
                                                  r.at("q").get<double>(), r.at("min").get<double>(),
                                                  r.at("mean").get<double>(), r.at("max").get<double>()});
    write_report_csv(report, (fs::path(outdir) / ("report_" + report.experiment + ".csv")).string());
    write_plot_data(report, outdir);
    std::cout << "re-derived report CSV and plot data in " << outdir << '\n';
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"EEG feature extraction and mental-state classification experiments"};
    app.require_subcommand(1);
    int jobs = default_jobs();
    app.add_option("--jobs,-j", jobs, "worker threads (default: all cores)");
    app.fallthrough();

    std::string config_path, features_name = "tsg+bf", model_path, input_path, output_path;
    double sample_rate_flag = 0.0;

    CLI::App* ingest = app.add_subcommand("ingest", "parse and summarize the manifest's recordings");
    ingest->add_option("--config", config_path, "JSON config file")->required();

    CLI::App* features = app.add_subcommand("features", "write per-window band and graph features");
    features->add_option("--config", config_path, "JSON config file")->required();

    CLI::App* fit = app.add_subcommand("fit", "fit feature maps and classifier, save a model bundle");
    fit->add_option("--config", config_path, "JSON config file")->required();
    fit->add_option("--features", features_name, "feature set: tsg, bf, or tsg+bf");
    fit->add_option("--output", output_path, "model file (default <output_dir>/<features>.model)");

    CLI::App* embed = app.add_subcommand("embed", "embed a recording's windows with a saved model");
    embed->add_option("--model", model_path, "model bundle file")->required();
    embed->add_option("--input", input_path, "recording (.edf or .csv)")->required();
    embed->add_option("--output", output_path, "output CSV (default: stdout)");
    embed->add_option("--sample-rate", sample_rate_flag, "sample rate for CSV inputs");

    CLI::App* predict = app.add_subcommand("predict", "classify a recording's windows with a saved model");
    predict->add_option("--model", model_path, "model bundle file")->required();
    predict->add_option("--input", input_path, "recording (.edf or .csv)")->required();
    predict->add_option("--output", output_path, "output CSV (default: stdout)");
    predict->add_option("--sample-rate", sample_rate_flag, "sample rate for CSV inputs");

    CLI::App* finetune = app.add_subcommand("finetune", "refresh a model's leaf posteriors from new data");
    finetune->add_option("--model", model_path, "model bundle file")->required();
    finetune->add_option("--config", config_path, "JSON config (manifest = fine-tuning data)")->required();
    finetune->add_option("--output", output_path, "output model file (default <model>.tuned)");

    CLI::App* experiment = app.add_subcommand("experiment", "run an evaluation protocol");
    experiment->require_subcommand(1);
    std::vector<std::string> exp_kinds = {"in-session", "querying", "transfer", "subsets"};
    for (const std::string& kind : exp_kinds)
        experiment->add_subcommand(kind)->add_option("--config", config_path, "JSON config file")->required();

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--config", config_path, "JSON config with a synth section")->required();

    CLI::App* report = app.add_subcommand("report", "re-derive CSV/plot data from a JSON report");
    report->add_option("--input", input_path, "report JSON file")->required();
    report->add_option("--output-dir", output_path, "output directory (default: alongside input)");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*ingest) return cmd_ingest(load_config_file(config_path), jobs);
        if (*features) return cmd_features(load_config_file(config_path), jobs);
        if (*fit) return cmd_fit(load_config_file(config_path), features_name, output_path, jobs);
        if (*embed) return cmd_embed(model_path, input_path, output_path, sample_rate_flag, jobs, false);
        if (*predict) return cmd_embed(model_path, input_path, output_path, sample_rate_flag, jobs, true);
        if (*finetune) return cmd_finetune(load_config_file(config_path), model_path, output_path, jobs);
        if (*experiment)
            for (const std::string& kind : exp_kinds)
                if (experiment->got_subcommand(kind))
                    return cmd_experiment(load_config_file(config_path), kind, jobs);
        if (*synth) return cmd_synth(load_config_file(config_path));
        if (*report) return cmd_report(input_path, output_path);
        std::cerr << "config error: no subcommand given\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace eegfeat
