#include "eegfeat/experiments.hpp"

#include "eegfeat/error.hpp"
#include "eegfeat/filter.hpp"
#include "eegfeat/parallel.hpp"
#include "eegfeat/windowing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace eegfeat {

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

std::string feature_set_name(FeatureSet set) {
    switch (set) {
    case FeatureSet::Tsg: return "tsg";
    case FeatureSet::Bf: return "bf";
    case FeatureSet::TsgBf: return "tsg+bf";
    }
    return "?";
}

FeatureSet parse_feature_set(const std::string& name) {
    if (name == "tsg") return FeatureSet::Tsg;
    if (name == "bf") return FeatureSet::Bf;
    if (name == "tsg+bf" || name == "bf+tsg") return FeatureSet::TsgBf;
    throw ConfigError("unknown feature set: " + name + " (expected tsg, bf, or tsg+bf)");
}

double CellDetail::mean() const {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double CellDetail::se() const {
    const size_t n = values.size();
    if (n < 2) return 0.0;
    const double m = mean();
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

namespace {

std::string setting_str(const char* prefix, double v) {
    return std::string(prefix) + "=" + format_double(v);
}

Matrix rows_of(const Matrix& m, const std::vector<int>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(idx[k]);
    return out;
}

std::vector<int> labels_of(const std::vector<int>& labels, const std::vector<int>& idx) {
    std::vector<int> out(idx.size());
    for (size_t k = 0; k < idx.size(); ++k) out[k] = labels[static_cast<size_t>(idx[k])];
    return out;
}

bool has_both_classes(const std::vector<int>& labels, const std::vector<int>& idx) {
    bool c0 = false, c1 = false;
    for (int i : idx) {
        (labels[static_cast<size_t>(i)] == 1 ? c1 : c0) = true;
        if (c0 && c1) return true;
    }
    return false;
}

bool has_both_classes(const std::vector<int>& labels) {
    std::vector<int> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    return has_both_classes(labels, all);
}

std::vector<int> all_indices(int n) {
    std::vector<int> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
    if (a.size() == 0) return b;
    if (b.size() == 0) return a;
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

double score(Metric metric, const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    return metric == Metric::Balanced ? balanced_accuracy(y_true, y_pred)
                                      : standard_accuracy(y_true, y_pred);
}

// Selects `m` of the first `n` positions via a fresh permutation from `rng`,
// retrying until the selection holds both classes (and, when eval_rest is
// set, the complement does too). Returns sorted positions; nullopt after 100
// misses.
std::optional<std::vector<int>> pick_subset(int n, int m, const std::vector<int>& subset_labels,
                                            Rng& rng, bool require_rest_both,
                                            std::vector<int>* rest_out) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<int> perm = rng.permutation(n);
        std::vector<int> pick(perm.begin(), perm.begin() + m);
        std::sort(pick.begin(), pick.end());
        std::vector<int> rest;
        if (require_rest_both || rest_out) {
            rest.assign(perm.begin() + m, perm.end());
            std::sort(rest.begin(), rest.end());
        }
        if (!has_both_classes(subset_labels, pick)) continue;
        if (require_rest_both && !has_both_classes(subset_labels, rest)) continue;
        if (rest_out) *rest_out = std::move(rest);
        return pick;
    }
    return std::nullopt;
}

} // namespace

std::optional<SplitIndices> make_split(const std::vector<int>& labels, double train_fraction,
                                       Rng& rng, bool block_split) {
    const int n = static_cast<int>(labels.size());
    if (n < 2) return std::nullopt;
    const int n_train =
        std::clamp(static_cast<int>(std::lround(train_fraction * n)), 1, n - 1);
    for (int attempt = 0; attempt < 100; ++attempt) {
        SplitIndices split;
        if (block_split) {
            const int start = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - n_train + 1)));
            for (int i = 0; i < n; ++i)
                (i >= start && i < start + n_train ? split.train : split.test).push_back(i);
        } else {
            std::vector<int> perm = rng.permutation(n);
            split.train.assign(perm.begin(), perm.begin() + n_train);
            split.test.assign(perm.begin() + n_train, perm.end());
            std::sort(split.train.begin(), split.train.end());
            std::sort(split.test.begin(), split.test.end());
        }
        if (has_both_classes(labels, split.train) && has_both_classes(labels, split.test))
            return split;
    }
    return std::nullopt;
}

DatasetCache build_cache(const std::vector<Recording>& recordings, const PipelineConfig& cfg,
                         int jobs) {
    if (recordings.empty()) throw ParamError("dataset is empty");
    const double fs = recordings.front().sample_rate;
    const int n_c = static_cast<int>(recordings.front().channels());
    for (const Recording& rec : recordings) {
        if (rec.sample_rate != fs)
            throw ParamError("recordings have mixed sample rates (" + format_double(fs) + " vs " +
                             format_double(rec.sample_rate) + " in " + rec.meta.source_path + ")");
        if (rec.channels() != n_c)
            throw ShapeError("recordings have mixed channel counts (" + rec.meta.source_path + ")");
        if (!rec.meta.label.has_value())
            throw ParamError("recording " + rec.meta.source_path + " has no class label");
    }
    const int w = static_cast<int>(std::lround(cfg.window_seconds * fs));
    const int h = static_cast<int>(std::lround(cfg.window_overlap_seconds * fs));

    struct PerRecording {
        GraphSeries graphs;
        Matrix band_feats;
        std::vector<int> labels;
    };
    std::vector<PerRecording> parts(recordings.size());
    parallel_for(recordings.size(), jobs, [&](size_t r) {
        Recording filtered = bandpass_filter(recordings[r], cfg.high_pass_hz, cfg.low_pass_hz);
        WindowSet ws = window(filtered, w, h);
        parts[r].graphs = correlation_graphs(ws);
        parts[r].band_feats = band_features(ws, fs, cfg.bands, cfg.psd).features;
        parts[r].labels = ws.labels;
    });

    std::map<std::string, SubjectCache> by_subject;
    const int feat_cols = n_c * cfg.bands.size();
    for (size_t r = 0; r < recordings.size(); ++r) {
        const RecordingMeta& meta = recordings[r].meta;
        SubjectCache& subject = by_subject[meta.subject];
        subject.id = meta.subject;
        int session_idx = -1;
        for (size_t s = 0; s < subject.sessions.size(); ++s)
            if (subject.sessions[s] == meta.session) session_idx = static_cast<int>(s);
        if (session_idx < 0) {
            session_idx = static_cast<int>(subject.sessions.size());
            subject.sessions.push_back(meta.session);
        }
        PerRecording& part = parts[r];
        const Eigen::Index old_rows = subject.band_feats.rows();
        Matrix merged(old_rows + part.band_feats.rows(), feat_cols);
        if (old_rows > 0) merged.topRows(old_rows) = subject.band_feats;
        merged.bottomRows(part.band_feats.rows()) = part.band_feats;
        subject.band_feats = std::move(merged);
        for (Matrix& g : part.graphs.graphs) subject.graphs.graphs.push_back(std::move(g));
        for (int label : part.labels) {
            subject.labels.push_back(label);
            subject.session_of.push_back(session_idx);
        }
    }

    DatasetCache cache;
    cache.sample_rate = fs;
    cache.n_channels = n_c;
    cache.subjects.reserve(by_subject.size());
    for (auto& [id, subject] : by_subject) cache.subjects.push_back(std::move(subject));
    return cache;
}

SubjectCache restrict_cache(const SubjectCache& cache, const std::vector<int>& channels,
                            int n_bands) {
    SubjectCache out;
    out.id = cache.id;
    out.labels = cache.labels;
    out.session_of = cache.session_of;
    out.sessions = cache.sessions;
    const int m = static_cast<int>(channels.size());
    out.graphs.graphs.reserve(cache.graphs.graphs.size());
    for (const Matrix& g : cache.graphs.graphs) {
        Matrix sub(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) sub(i, j) = g(channels[static_cast<size_t>(i)], channels[static_cast<size_t>(j)]);
        out.graphs.graphs.push_back(std::move(sub));
    }
    out.band_feats.resize(cache.band_feats.rows(), m * n_bands);
    for (int c = 0; c < m; ++c)
        out.band_feats.middleCols(c * n_bands, n_bands) =
            cache.band_feats.middleCols(channels[static_cast<size_t>(c)] * n_bands, n_bands);
    return out;
}

FittedFeatures fit_features(FeatureSet set, const SubjectCache& cache,
                            const std::vector<int>& train_idx) {
    FittedFeatures out;
    out.set = set;
    Matrix tsg_train, bf_train;
    if (set != FeatureSet::Bf) {
        GraphSeries gs;
        gs.graphs.reserve(train_idx.size());
        for (int i : train_idx) gs.graphs.push_back(cache.graphs.graphs[static_cast<size_t>(i)]);
        out.tsg = fit_tsg_graphs(std::move(gs));
        tsg_train = out.tsg->embedding;
    }
    if (set != FeatureSet::Tsg) {
        Matrix rows = rows_of(cache.band_feats, train_idx);
        out.bf = fit_bf(rows);
        bf_train = apply_bf(*out.bf, rows);
    }
    out.train_features = hcat(tsg_train, bf_train);
    return out;
}

Matrix embed_features(const FittedFeatures& fitted, const SubjectCache& cache,
                      const std::vector<int>& idx) {
    Matrix tsg_m, bf_m;
    if (fitted.tsg) {
        tsg_m.resize(static_cast<Eigen::Index>(idx.size()), fitted.tsg->d);
        for (size_t k = 0; k < idx.size(); ++k) {
            Vector sims = similarity_row(*fitted.tsg, cache.graphs.graphs[static_cast<size_t>(idx[k])]);
            tsg_m.row(static_cast<Eigen::Index>(k)) = oos_embed_similarity(*fitted.tsg, sims).transpose();
        }
    }
    if (fitted.bf) bf_m = apply_bf(*fitted.bf, rows_of(cache.band_feats, idx));
    return hcat(tsg_m, bf_m);
}

namespace {

constexpr int kMinTsgTrain = 3;
constexpr int kMinBfTrain = 2;

int min_train_windows(FeatureSet set) {
    return set == FeatureSet::Bf ? kMinBfTrain : kMinTsgTrain;
}

// In-session cell: per-split accuracies for one (subject, fraction).
struct CellRun {
    std::vector<double> values;
    std::vector<std::string> warnings;
};

CellRun in_session_cell(const SubjectCache& cache, const PipelineConfig& cfg,
                        const ExperimentSettings& settings, FeatureSet set, double fraction,
                        int splits, Metric metric) {
    CellRun run;
    for (int s = 0; s < splits; ++s) {
        Rng rng(derive_seed(settings.seed, "partition:" + cache.id, static_cast<std::uint64_t>(s)));
        std::optional<SplitIndices> split = make_split(cache.labels, fraction, rng, settings.block_split);
        if (!split) {
            run.warnings.push_back("subject " + cache.id + " " + setting_str("p", fraction) +
                                   " split " + std::to_string(s) + ": no two-class partition found");
            continue;
        }
        if (static_cast<int>(split->train.size()) < min_train_windows(set)) {
            run.warnings.push_back("subject " + cache.id + " " + setting_str("p", fraction) +
                                   " split " + std::to_string(s) + ": too few training windows for " +
                                   feature_set_name(set));
            continue;
        }
        FittedFeatures fitted = fit_features(set, cache, split->train);
        Forest forest = train_forest(fitted.train_features, labels_of(cache.labels, split->train),
                                     cfg.forest,
                                     derive_seed(settings.seed, "forest:" + cache.id,
                                                 static_cast<std::uint64_t>(s)));
        Matrix test_feats = embed_features(fitted, cache, split->test);
        std::vector<int> pred = posterior_labels(predict_posterior(forest, test_feats));
        run.values.push_back(score(metric, labels_of(cache.labels, split->test), pred));
    }
    return run;
}

// Subjects whose data supports the protocols; others get a warning.
std::vector<int> eligible_subjects(const DatasetCache& data, std::vector<std::string>& warnings) {
    std::vector<int> keep;
    for (size_t i = 0; i < data.subjects.size(); ++i) {
        const SubjectCache& subject = data.subjects[i];
        if (subject.size() < 2 || !has_both_classes(subject.labels)) {
            warnings.push_back("subject " + subject.id + " excluded: single-class or too few windows");
            continue;
        }
        keep.push_back(static_cast<int>(i));
    }
    if (keep.empty()) throw ParamError("no subject has two-class windowed data");
    return keep;
}

void append_aggregate(Report& report, const std::string& fs_name, const std::string& setting,
                      double setting_value, const std::vector<CellDetail>& subject_cells) {
    CellDetail all;
    all.feature_set = fs_name;
    all.experiment = report.experiment;
    all.subject = "ALL";
    all.setting = setting;
    all.setting_value = setting_value;
    for (const CellDetail& cell : subject_cells)
        if (!cell.values.empty()) all.values.push_back(cell.mean());
    if (!all.values.empty()) report.cells.push_back(std::move(all));
}

} // namespace

Report run_in_session(const DatasetCache& data, const PipelineConfig& cfg,
                      const ExperimentSettings& settings, const std::vector<FeatureSet>& sets,
                      int jobs) {
    for (double p : settings.fractions)
        if (!(p > 0.0 && p < 1.0))
            throw ParamError("training fraction " + format_double(p) + " outside (0, 1)");
    if (settings.splits < 1) throw ParamError("split count must be at least 1");

    Report report;
    report.experiment = "in-session";
    report.seed = settings.seed;
    const std::vector<int> subjects = eligible_subjects(data, report.warnings);

    for (FeatureSet set : sets) {
        const std::string fs_name = feature_set_name(set);
        // grid[subject][fraction]
        std::vector<std::vector<CellRun>> grid(subjects.size());
        parallel_for(subjects.size(), jobs, [&](size_t k) {
            const SubjectCache& cache = data.subjects[static_cast<size_t>(subjects[k])];
            grid[k].reserve(settings.fractions.size());
            for (double p : settings.fractions)
                grid[k].push_back(
                    in_session_cell(cache, cfg, settings, set, p, settings.splits, Metric::Balanced));
        });
        for (size_t fi = 0; fi < settings.fractions.size(); ++fi) {
            const double p = settings.fractions[fi];
            std::vector<CellDetail> subject_cells;
            for (size_t k = 0; k < subjects.size(); ++k) {
                CellRun& run = grid[k][fi];
                for (std::string& w : run.warnings) report.warnings.push_back(std::move(w));
                CellDetail cell;
                cell.feature_set = fs_name;
                cell.experiment = report.experiment;
                cell.subject = data.subjects[static_cast<size_t>(subjects[k])].id;
                cell.setting = setting_str("p", p);
                cell.setting_value = p;
                cell.values = std::move(run.values);
                if (!cell.values.empty()) subject_cells.push_back(std::move(cell));
            }
            append_aggregate(report, fs_name, setting_str("p", p), p, subject_cells);
            for (CellDetail& cell : subject_cells) report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

Report run_nonconstant_querying(const DatasetCache& data, const PipelineConfig& cfg,
                                const ExperimentSettings& settings,
                                const std::vector<FeatureSet>& sets, int jobs) {
    for (double r : settings.ratios)
        if (!(r > 0.0 && r <= 1.0))
            throw ParamError("labeled ratio " + format_double(r) + " outside (0, 1]");
    if (settings.splits < 1) throw ParamError("split count must be at least 1");
    constexpr double kTrainFraction = 0.8;

    Report report;
    report.experiment = "querying";
    report.seed = settings.seed;
    const std::vector<int> subjects = eligible_subjects(data, report.warnings);

    for (FeatureSet set : sets) {
        const std::string fs_name = feature_set_name(set);
        std::vector<std::vector<CellRun>> grid(subjects.size());
        parallel_for(subjects.size(), jobs, [&](size_t k) {
            const SubjectCache& cache = data.subjects[static_cast<size_t>(subjects[k])];
            grid[k].assign(settings.ratios.size(), CellRun{});
            for (int s = 0; s < settings.splits; ++s) {
                Rng rng(derive_seed(settings.seed, "partition:" + cache.id, static_cast<std::uint64_t>(s)));
                std::optional<SplitIndices> split =
                    make_split(cache.labels, kTrainFraction, rng, settings.block_split);
                if (!split) {
                    grid[k][0].warnings.push_back("subject " + cache.id + " split " + std::to_string(s) +
                                                  ": no two-class partition found");
                    continue;
                }
                const int n_train = static_cast<int>(split->train.size());
                if (n_train < min_train_windows(set)) {
                    grid[k][0].warnings.push_back("subject " + cache.id + " split " + std::to_string(s) +
                                                  ": too few training windows for " + fs_name);
                    continue;
                }
                // feature maps see the whole (unlabeled) training side
                FittedFeatures fitted = fit_features(set, cache, split->train);
                Matrix test_feats = embed_features(fitted, cache, split->test);
                const std::vector<int> y_train = labels_of(cache.labels, split->train);
                const std::vector<int> y_test = labels_of(cache.labels, split->test);
                const std::uint64_t forest_seed =
                    derive_seed(settings.seed, "forest:" + cache.id, static_cast<std::uint64_t>(s));
                for (size_t ri = 0; ri < settings.ratios.size(); ++ri) {
                    const double r = settings.ratios[ri];
                    const int m = std::clamp(static_cast<int>(std::lround(r * n_train)), 1, n_train);
                    Rng rng_sub(derive_seed(settings.seed, "labeled:" + cache.id,
                                            static_cast<std::uint64_t>(s)));
                    std::optional<std::vector<int>> pick =
                        pick_subset(n_train, m, y_train, rng_sub, false, nullptr);
                    if (!pick) {
                        grid[k][ri].warnings.push_back("subject " + cache.id + " " + setting_str("r", r) +
                                                       " split " + std::to_string(s) +
                                                       ": labeled subset stayed single-class");
                        continue;
                    }
                    Forest forest = train_forest(rows_of(fitted.train_features, *pick),
                                                 labels_of(y_train, *pick), cfg.forest, forest_seed);
                    std::vector<int> pred = posterior_labels(predict_posterior(forest, test_feats));
                    grid[k][ri].values.push_back(score(Metric::Balanced, y_test, pred));
                }
            }
        });
        for (size_t ri = 0; ri < settings.ratios.size(); ++ri) {
            const double r = settings.ratios[ri];
            std::vector<CellDetail> subject_cells;
            for (size_t k = 0; k < subjects.size(); ++k) {
                CellRun& run = grid[k][ri];
                for (std::string& w : run.warnings) report.warnings.push_back(std::move(w));
                CellDetail cell;
                cell.feature_set = fs_name;
                cell.experiment = report.experiment;
                cell.subject = data.subjects[static_cast<size_t>(subjects[k])].id;
                cell.setting = setting_str("r", r);
                cell.setting_value = r;
                cell.values = std::move(run.values);
                if (!cell.values.empty()) subject_cells.push_back(std::move(cell));
            }
            append_aggregate(report, fs_name, setting_str("r", r), r, subject_cells);
            for (CellDetail& cell : subject_cells) report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

namespace {

// One transfer unit: a source or target corpus with its own windows.
struct TransferUnit {
    std::string key;     // seed tag, unique
    std::string subject; // aggregation id
    SubjectCache cache;
};

SubjectCache cache_rows(const SubjectCache& cache, const std::vector<int>& idx) {
    SubjectCache out;
    out.id = cache.id;
    out.sessions = cache.sessions;
    out.graphs.graphs.reserve(idx.size());
    for (int i : idx) out.graphs.graphs.push_back(cache.graphs.graphs[static_cast<size_t>(i)]);
    out.band_feats = rows_of(cache.band_feats, idx);
    out.labels = labels_of(cache.labels, idx);
    for (int i : idx) out.session_of.push_back(cache.session_of[static_cast<size_t>(i)]);
    return out;
}

std::vector<TransferUnit> transfer_units(const DatasetCache& data, const std::string& mode,
                                         std::vector<std::string>& warnings) {
    std::vector<TransferUnit> units;
    if (mode == "cross-subject") {
        for (const SubjectCache& subject : data.subjects) {
            if (subject.size() < 2 || !has_both_classes(subject.labels)) {
                warnings.push_back("subject " + subject.id + " excluded: single-class or too few windows");
                continue;
            }
            units.push_back({subject.id, subject.id, subject});
        }
        if (units.size() < 2) throw ParamError("cross-subject transfer needs at least 2 subjects");
    } else if (mode == "cross-session") {
        for (const SubjectCache& subject : data.subjects) {
            if (subject.sessions.size() < 2) {
                warnings.push_back("subject " + subject.id + " excluded: fewer than 2 sessions");
                continue;
            }
            for (size_t s = 0; s < subject.sessions.size(); ++s) {
                std::vector<int> idx;
                for (size_t w = 0; w < subject.session_of.size(); ++w)
                    if (subject.session_of[w] == static_cast<int>(s)) idx.push_back(static_cast<int>(w));
                SubjectCache unit_cache = cache_rows(subject, idx);
                if (unit_cache.size() < 2 || !has_both_classes(unit_cache.labels)) {
                    warnings.push_back("subject " + subject.id + " session " + subject.sessions[s] +
                                       " excluded: single-class or too few windows");
                    continue;
                }
                units.push_back({subject.id + "/" + subject.sessions[s], subject.id,
                                 std::move(unit_cache)});
            }
        }
        if (units.size() < 2) throw ParamError("cross-session transfer needs at least 2 usable sessions");
    } else {
        throw ConfigError("unknown transfer mode: " + mode);
    }
    return units;
}

bool transfer_pair_allowed(const std::string& mode, const TransferUnit& src, const TransferUnit& tgt) {
    if (&src == &tgt) return false;
    if (mode == "cross-subject") return src.subject != tgt.subject;
    return src.subject == tgt.subject && src.key != tgt.key;
}

} // namespace

Report run_transfer(const DatasetCache& data, const PipelineConfig& cfg,
                    const ExperimentSettings& settings, const std::vector<FeatureSet>& sets,
                    int jobs) {
    for (double q : settings.transfer_fractions)
        if (!(q >= 0.0 && q < 1.0))
            throw ParamError("fine-tune fraction " + format_double(q) + " outside [0, 1)");
    if (settings.splits < 1) throw ParamError("split count must be at least 1");

    Report report;
    report.experiment = "transfer";
    report.seed = settings.seed;
    std::vector<TransferUnit> units = transfer_units(data, settings.transfer_mode, report.warnings);
    const bool cross_subject = settings.transfer_mode == "cross-subject";

    // aggregation targets: subjects (both modes)
    std::vector<std::string> target_ids;
    for (const TransferUnit& unit : units)
        if (std::find(target_ids.begin(), target_ids.end(), unit.subject) == target_ids.end())
            target_ids.push_back(unit.subject);

    for (FeatureSet set : sets) {
        const std::string fs_name = feature_set_name(set);

        struct SourceModel {
            FittedFeatures fitted;
            Forest forest;
            bool ok = false;
        };
        std::vector<SourceModel> sources(units.size());
        parallel_for(units.size(), jobs, [&](size_t i) {
            const TransferUnit& src = units[i];
            if (static_cast<int>(src.cache.size()) < min_train_windows(set)) return;
            sources[i].fitted = fit_features(set, src.cache, all_indices(src.cache.size()));
            sources[i].forest = train_forest(sources[i].fitted.train_features, src.cache.labels,
                                             cfg.forest, derive_seed(settings.seed, "forest:" + src.key, 0));
            sources[i].ok = true;
        });

        // per (q, target-subject): raw values; per (q, target, source unit): mean for ranges
        struct PairResult {
            double q;
            std::string target;
            std::vector<double> values; // per split (or the single zero-shot value)
        };
        std::vector<std::vector<PairResult>> pair_results(units.size() * units.size());
        std::vector<std::vector<std::string>> pair_warnings(units.size() * units.size());

        parallel_for(units.size() * units.size(), jobs, [&](size_t flat) {
            const size_t si = flat / units.size();
            const size_t ti = flat % units.size();
            const TransferUnit& src = units[si];
            const TransferUnit& tgt = units[ti];
            if (!transfer_pair_allowed(settings.transfer_mode, src, tgt)) return;
            if (!sources[si].ok) {
                pair_warnings[flat].push_back("source " + src.key + " skipped for " + fs_name +
                                              ": too few windows");
                return;
            }
            const SourceModel& model = sources[si];
            const int n_tgt = tgt.cache.size();
            Matrix tgt_feats = embed_features(model.fitted, tgt.cache, all_indices(n_tgt));

            for (double q : settings.transfer_fractions) {
                PairResult result;
                result.q = q;
                result.target = tgt.subject;
                const int m = static_cast<int>(std::lround(q * n_tgt));
                if (m == 0) {
                    std::vector<int> pred = posterior_labels(predict_posterior(model.forest, tgt_feats));
                    if (has_both_classes(tgt.cache.labels))
                        result.values.push_back(score(Metric::Balanced, tgt.cache.labels, pred));
                } else {
                    const int m_eff = std::min(m, n_tgt - 1);
                    for (int s = 0; s < settings.splits; ++s) {
                        Rng rng(derive_seed(settings.seed,
                                            "finetune:" + src.key + ">" + tgt.key + ":" + format_double(q),
                                            static_cast<std::uint64_t>(s)));
                        std::vector<int> rest;
                        std::optional<std::vector<int>> pick =
                            pick_subset(n_tgt, m_eff, tgt.cache.labels, rng, true, &rest);
                        if (!pick) {
                            pair_warnings[flat].push_back(
                                "pair " + src.key + "->" + tgt.key + " " + setting_str("q", q) +
                                " split " + std::to_string(s) + ": no two-class tune/eval draw");
                            continue;
                        }
                        Forest tuned = fine_tune(model.forest, rows_of(tgt_feats, *pick),
                                                 labels_of(tgt.cache.labels, *pick));
                        std::vector<int> pred =
                            posterior_labels(predict_posterior(tuned, rows_of(tgt_feats, rest)));
                        result.values.push_back(
                            score(Metric::Balanced, labels_of(tgt.cache.labels, rest), pred));
                    }
                }
                if (!result.values.empty()) pair_results[flat].push_back(std::move(result));
            }
        });

        for (std::vector<std::string>& w : pair_warnings)
            for (std::string& msg : w) report.warnings.push_back(std::move(msg));

        for (double q : settings.transfer_fractions) {
            const std::string setting = setting_str("q", q);
            std::vector<CellDetail> subject_cells;
            for (const std::string& target : target_ids) {
                CellDetail cell;
                cell.feature_set = fs_name;
                cell.experiment = report.experiment;
                cell.subject = target;
                cell.setting = setting;
                cell.setting_value = q;
                std::vector<double> source_means;
                for (size_t flat = 0; flat < pair_results.size(); ++flat)
                    for (const PairResult& pr : pair_results[flat]) {
                        if (pr.q != q || pr.target != target) continue;
                        double sum = std::accumulate(pr.values.begin(), pr.values.end(), 0.0);
                        source_means.push_back(sum / static_cast<double>(pr.values.size()));
                        for (double v : pr.values) cell.values.push_back(v);
                    }
                if (cross_subject && !source_means.empty()) {
                    TransferRange range;
                    range.feature_set = fs_name;
                    range.target = target;
                    range.q = q;
                    range.min = *std::min_element(source_means.begin(), source_means.end());
                    range.max = *std::max_element(source_means.begin(), source_means.end());
                    range.mean = std::accumulate(source_means.begin(), source_means.end(), 0.0) /
                                 static_cast<double>(source_means.size());
                    report.ranges.push_back(range);
                }
                if (!cell.values.empty()) subject_cells.push_back(std::move(cell));
            }
            append_aggregate(report, fs_name, setting, q, subject_cells);
            for (CellDetail& cell : subject_cells) report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

SubsetReport run_subset_search(const DatasetCache& data, const PipelineConfig& cfg,
                               const ExperimentSettings& settings, FeatureSet set, int jobs) {
    const std::vector<int>& pool = settings.subset_channels;
    if (pool.empty()) throw ParamError("subset search needs a channel list");
    if (pool.size() > 16)
        throw ParamError("subset search over " + std::to_string(pool.size()) +
                         " channels is infeasible (limit 16)");
    std::set<int> seen;
    for (int c : pool) {
        if (c < 0 || c >= data.n_channels)
            throw ParamError("subset channel " + std::to_string(c) + " out of range");
        if (!seen.insert(c).second) throw ParamError("duplicate subset channel " + std::to_string(c));
    }
    if (settings.subset_splits < 1) throw ParamError("split count must be at least 1");

    SubsetReport report;
    report.feature_set = feature_set_name(set);
    report.seed = settings.seed;
    const std::vector<int> subjects = eligible_subjects(data, report.warnings);
    const int n_bands = cfg.bands.size();
    constexpr double kFraction = 0.8;

    const std::uint32_t n_masks = (1u << pool.size()) - 1;
    struct MaskResult {
        SubsetResult result;
        std::vector<std::string> warnings;
        bool skipped = false;
        std::string skip_reason;
        bool valid = false;
    };
    std::vector<MaskResult> by_mask(n_masks);

    parallel_for(n_masks, jobs, [&](size_t mi) {
        const std::uint32_t mask = static_cast<std::uint32_t>(mi) + 1;
        MaskResult& mr = by_mask[mi];
        std::vector<int> members;
        for (size_t b = 0; b < pool.size(); ++b)
            if (mask & (1u << b)) members.push_back(pool[b]);
        std::sort(members.begin(), members.end());
        mr.result.channels = members;
        if (members.size() == 1 && set != FeatureSet::Bf) {
            mr.skipped = true;
            mr.skip_reason = "channel " + std::to_string(members.front()) +
                             ": 1x1 correlation graph is degenerate";
            return;
        }
        double sum = 0.0;
        int counted = 0;
        for (int sj : subjects) {
            SubjectCache restricted = restrict_cache(data.subjects[static_cast<size_t>(sj)], members, n_bands);
            CellRun run = in_session_cell(restricted, cfg, settings, set, kFraction,
                                          settings.subset_splits, Metric::Standard);
            for (std::string& w : run.warnings) mr.warnings.push_back(std::move(w));
            if (run.values.empty()) {
                mr.result.per_subject.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            const double m =
                std::accumulate(run.values.begin(), run.values.end(), 0.0) /
                static_cast<double>(run.values.size());
            mr.result.per_subject.push_back(m);
            sum += m;
            ++counted;
        }
        if (counted == 0) {
            mr.skipped = true;
            mr.skip_reason = "no subject produced a valid split";
            return;
        }
        mr.result.mean = sum / counted;
        mr.valid = true;
    });

    for (MaskResult& mr : by_mask) {
        for (std::string& w : mr.warnings) report.warnings.push_back(std::move(w));
        if (mr.skipped) {
            std::string channels;
            for (size_t i = 0; i < mr.result.channels.size(); ++i) {
                if (i) channels += "+";
                channels += std::to_string(mr.result.channels[i]);
            }
            report.skipped.push_back(channels + ": " + mr.skip_reason);
        } else if (mr.valid) {
            report.subsets.push_back(std::move(mr.result));
        }
    }
    return report;
}

ImportanceReport channel_importance(const SubsetReport& report, const std::vector<int>& sizes) {
    if (report.subsets.empty()) throw ParamError("subset report is empty");
    auto size_ok = [&sizes](size_t n) {
        return sizes.empty() || std::find(sizes.begin(), sizes.end(), static_cast<int>(n)) != sizes.end();
    };

    std::set<int> universe;
    for (const SubsetResult& subset : report.subsets)
        for (int c : subset.channels) universe.insert(c);
    if (universe.size() < 2) throw ParamError("channel importance needs at least 2 channels");

    ImportanceReport out;
    std::map<int, std::pair<double, int>> channel_acc; // sum, count
    std::map<std::pair<int, int>, std::pair<double, int>> pair_acc;
    for (const SubsetResult& subset : report.subsets) {
        if (!size_ok(subset.channels.size())) continue;
        for (size_t i = 0; i < subset.channels.size(); ++i) {
            auto& [sum, count] = channel_acc[subset.channels[i]];
            sum += subset.mean;
            ++count;
            for (size_t j = i + 1; j < subset.channels.size(); ++j) {
                auto& [psum, pcount] = pair_acc[{subset.channels[i], subset.channels[j]}];
                psum += subset.mean;
                ++pcount;
            }
        }
    }
    for (int c : universe)
        if (!channel_acc.count(c))
            out.warnings.push_back("channel " + std::to_string(c) +
                                   " absent from all considered subsets; excluded");

    auto dense_ranks = [](std::vector<double> scores) {
        std::sort(scores.begin(), scores.end(), std::greater<>());
        scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
        return scores; // descending unique scores; rank = index + 1
    };

    std::vector<double> channel_scores;
    for (const auto& [c, acc] : channel_acc) channel_scores.push_back(acc.first / acc.second);
    std::vector<double> channel_levels = dense_ranks(channel_scores);
    for (const auto& [c, acc] : channel_acc) {
        const double score = acc.first / acc.second;
        const int rank = static_cast<int>(
            std::find(channel_levels.begin(), channel_levels.end(), score) - channel_levels.begin() + 1);
        out.channels.push_back({c, score, rank});
    }
    std::sort(out.channels.begin(), out.channels.end(), [](const ChannelScore& a, const ChannelScore& b) {
        return a.rank != b.rank ? a.rank < b.rank : a.channel < b.channel;
    });

    std::vector<double> pair_scores;
    for (const auto& [p, acc] : pair_acc) pair_scores.push_back(acc.first / acc.second);
    std::vector<double> pair_levels = dense_ranks(pair_scores);
    for (const auto& [p, acc] : pair_acc) {
        const double score = acc.first / acc.second;
        const int rank = static_cast<int>(
            std::find(pair_levels.begin(), pair_levels.end(), score) - pair_levels.begin() + 1);
        out.pairs.push_back({p.first, p.second, score, rank});
    }
    std::sort(out.pairs.begin(), out.pairs.end(), [](const PairScore& a, const PairScore& b) {
        if (a.rank != b.rank) return a.rank < b.rank;
        if (a.a != b.a) return a.a < b.a;
        return a.b < b.b;
    });
    return out;
}

} // namespace eegfeat
