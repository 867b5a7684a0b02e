#include "rcc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rcc/clinical.hpp"
#include "rcc/errors.hpp"
#include "rcc/imaging.hpp"
#include "rcc/metrics.hpp"
#include "rcc/mil.hpp"
#include "rcc/nomogram.hpp"
#include "rcc/report.hpp"
#include "rcc/special.hpp"
#include "rcc/survival.hpp"
#include "rcc/util.hpp"

namespace fs = std::filesystem;

namespace rcc {

namespace {

// flat key=value config; flags win, then config, then RCC_SEED for the seed
struct Config {
    std::map<std::string, std::string> values;
    std::string digest;

    static Config load(const std::string& path) {
        Config cfg;
        if (path.empty()) return cfg;
        const std::string text = read_file(path);
        cfg.digest = fnv1a_hex(text);
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw DataError("config line without '=': " + line);
            cfg.values[line.substr(0, eq)] = line.substr(eq + 1);
        }
        return cfg;
    }

    std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value) const {
        if (flag->count() > 0) return flag_value;
        if (auto it = values.find("seed"); it != values.end())
            return std::stoull(it->second);
        if (const char* env = std::getenv("RCC_SEED")) return std::stoull(env);
        return flag_value;
    }
};

std::map<std::string, double> read_scores_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw MissingColumn("empty scores file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "patient_id,score" && line != "slide_id,score")
        throw MissingColumn(path + ": header must be patient_id,score");
    std::map<std::string, double> scores;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 2)
            throw MissingColumn(path + " row " + std::to_string(row) + ": expected 2 fields");
        scores[f[0]] = parse_double(f[1], path + " row " + std::to_string(row));
    }
    return scores;
}

std::map<std::string, int> read_labels_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw MissingColumn("empty labels file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "slide_id,label")
        throw MissingColumn(path + ": header must be slide_id,label");
    std::map<std::string, int> labels;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 2)
            throw MissingColumn(path + " row " + std::to_string(row) + ": expected 2 fields");
        labels[f[0]] =
            static_cast<int>(parse_long(f[1], path + " row " + std::to_string(row)));
    }
    return labels;
}

// name=path pairs from repeated --scores flags
struct NamedPath {
    std::string name;
    std::string path;
};

std::vector<NamedPath> parse_named_paths(const std::vector<std::string>& specs) {
    std::vector<NamedPath> out;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw DataError("--scores expects name=path, got '" + s + "'");
        out.push_back({s.substr(0, eq), s.substr(eq + 1)});
    }
    return out;
}

double lookup_score(const std::map<std::string, double>& scores,
                    const std::string& patient_id, const std::string& name) {
    const auto it = scores.find(patient_id);
    if (it == scores.end())
        throw MissingCovariate("no '" + name + "' score for patient " + patient_id);
    return it->second;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

RunManifest make_manifest(const std::vector<std::string>& args, const Config& cfg,
                          std::uint64_t seed) {
    RunManifest m;
    std::ostringstream cmd;
    cmd << "rcc";
    for (const auto& a : args) cmd << ' ' << a;
    m.command_line = cmd.str();
    m.config_digest = cfg.digest;
    m.seed = seed;
    return m;
}

// ---------------------------------------------------------------------------
// shared covariate assembly for nomogram build/score and compare

struct CovariateTable {
    std::vector<std::string> names;
    std::vector<ClinicalRecord> records;            // rows kept after filtering
    std::vector<std::vector<double>> covariates;    // aligned with records
};

CovariateTable assemble_covariates(const std::vector<ClinicalRecord>& all,
                                   const std::vector<NamedPath>& score_files,
                                   bool use_grade, bool use_stage) {
    CovariateTable table;
    std::vector<std::map<std::string, double>> score_maps;
    for (const auto& np : score_files) {
        table.names.push_back(np.name);
        score_maps.push_back(read_scores_csv(np.path));
    }
    if (use_grade) table.names.push_back("grade");
    if (use_stage) table.names.push_back("stage");
    for (const auto& r : all) {
        if (r.event == EventStatus::Unknown) continue;
        if (use_grade && !r.grade) continue;
        std::vector<double> x;
        for (std::size_t i = 0; i < score_files.size(); ++i)
            x.push_back(lookup_score(score_maps[i], r.patient_id, score_files[i].name));
        if (use_grade) x.push_back(double(*r.grade));
        if (use_stage) x.push_back(double(r.stage));
        table.records.push_back(r);
        table.covariates.push_back(std::move(x));
    }
    return table;
}

// ---------------------------------------------------------------------------
// subcommand bodies

int run_tile(const std::vector<std::string>& args, const Config& cfg,
             const std::string& input, int patch_size, double min_tissue,
             int white_threshold, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const RasterImage image = read_ppm(input);
    const Mask tissue = detect_tissue(image, white_threshold);
    const auto patches = tile_image(image, tissue, patch_size, min_tissue);
    const std::string slide_id = stem_of(input);

    RunManifest manifest = make_manifest(args, cfg, 0);
    manifest.input_digests[input] = fnv1a_file_hex(input);
    std::ostringstream index;
    index << "slide_id,patch_x,patch_y,tissue_fraction\n";
    for (const auto& p : patches) {
        const std::string name = "patch_" + std::to_string(p.origin_x) + "_" +
                                 std::to_string(p.origin_y) + ".ppm";
        write_ppm(out_dir + "/" + name, p.pixels);
        manifest.outputs.push_back(name);
        index << slide_id << ',' << p.origin_x << ',' << p.origin_y << ','
              << format_double(p.tissue_fraction) << "\n";
    }
    write_file(out_dir + "/index.csv", index.str());
    manifest.outputs.push_back("index.csv");
    write_manifest(out_dir, std::move(manifest));
    std::cerr << "tiled " << patches.size() << " patches from " << input << "\n";
    return 0;
}

int run_featurize(const std::vector<std::string>& args, const Config& cfg,
                  const std::vector<std::string>& inputs, int patch_size,
                  double min_tissue, int white_threshold, const std::string& out_dir) {
    fs::create_directories(out_dir);
    RunManifest manifest = make_manifest(args, cfg, 0);
    std::vector<PatchFeatureRow> rows;
    for (const auto& input : inputs) {
        manifest.input_digests[input] = fnv1a_file_hex(input);
        const RasterImage image = read_ppm(input);
        const Mask tissue = detect_tissue(image, white_threshold);
        for (const auto& p : tile_image(image, tissue, patch_size, min_tissue)) {
            PatchFeatureRow row;
            row.slide_id = stem_of(input);
            row.patch_x = p.origin_x;
            row.patch_y = p.origin_y;
            row.features = patch_descriptor(p);
            rows.push_back(std::move(row));
        }
    }
    write_file(out_dir + "/features.csv", serialize_features_csv(rows));
    manifest.outputs.push_back("features.csv");
    write_manifest(out_dir, std::move(manifest));
    return 0;
}

int run_train(const std::vector<std::string>& args, const Config& cfg,
              const std::string& features_path, const std::string& labels_path,
              const std::string& task_str, const MilHyperparams& hyper, int h, int m,
              int classes, const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto bags = bags_from_feature_rows(parse_features_csv(read_file(features_path)));
    const auto labels = read_labels_csv(labels_path);
    for (auto& b : bags) {
        const auto it = labels.find(b.slide_id);
        if (it == labels.end())
            throw MissingCovariate("no label for slide " + b.slide_id);
        b.label = it->second;
    }
    const MilModel model =
        mil_train(bags, hyper, h, m, classes, task_from_name(task_str));
    write_file(out_dir + "/model.json", mil_model_to_json(model));

    RunManifest manifest = make_manifest(args, cfg, hyper.seed);
    manifest.input_digests[features_path] = fnv1a_file_hex(features_path);
    manifest.input_digests[labels_path] = fnv1a_file_hex(labels_path);
    manifest.outputs.push_back("model.json");
    write_manifest(out_dir, std::move(manifest));
    std::cerr << "trained " << task_str << " on " << bags.size()
              << " bags, final mean loss " << model.loss_log.back() << "\n";
    return 0;
}

int run_predict(const std::vector<std::string>& args, const Config& cfg,
                const std::string& features_path, const std::string& model_path,
                int heatmap_cell, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const auto bags = bags_from_feature_rows(parse_features_csv(read_file(features_path)));
    const MilModel model = mil_model_from_json(read_file(model_path));

    RunManifest manifest = make_manifest(args, cfg, model.hyper.seed);
    manifest.input_digests[features_path] = fnv1a_file_hex(features_path);
    manifest.input_digests[model_path] = fnv1a_file_hex(model_path);

    std::ostringstream scores;
    scores << "patient_id,score\n";
    for (const auto& bag : bags) {
        const MilOutput out = mil_forward(bag, model);
        const RiskScore rs = predict_risk(bag, model, model.task);
        scores << bag.slide_id << ',' << format_double(rs.value) << "\n";
        if (heatmap_cell > 0) {
            const Mask heat = attention_heatmap(bag, out, heatmap_cell);
            const std::string name = "heatmap_" + bag.slide_id + ".pgm";
            write_pgm(out_dir + "/" + name, heat);
            manifest.outputs.push_back(name);
        }
    }
    write_file(out_dir + "/scores.csv", scores.str());
    manifest.outputs.push_back("scores.csv");
    write_manifest(out_dir, std::move(manifest));
    return 0;
}

int run_eval_seg(const std::vector<std::string>& args, const Config& cfg,
                 const std::string& pred_path, const std::string& truth_path,
                 const std::string& tissue_path, double area_threshold,
                 const std::string& out_dir) {
    fs::create_directories(out_dir);
    const Mask pred = read_pgm(pred_path);
    const Mask truth = read_pgm(truth_path);

    // hard masks for the overlap metrics; the soft losses use pred as-is
    Mask pred_bin = pred;
    for (double& v : pred_bin.values) v = v >= 0.5 ? 1.0 : 0.0;

    nlohmann::ordered_json j;
    j["dice_score"] = dice_score(pred_bin, truth);
    j["dice_loss"] = dice_loss(pred, truth);
    j["bce_loss"] = bce_loss(pred, truth);
    RunManifest manifest = make_manifest(args, cfg, 0);
    manifest.input_digests[pred_path] = fnv1a_file_hex(pred_path);
    manifest.input_digests[truth_path] = fnv1a_file_hex(truth_path);
    if (!tissue_path.empty()) {
        const Mask tissue = read_pgm(tissue_path);
        manifest.input_digests[tissue_path] = fnv1a_file_hex(tissue_path);
        const double frac = tumor_area_fraction(pred_bin, tissue);
        j["tumor_area_fraction"] = frac;
        j["slide_positive"] = slide_positive(frac, area_threshold);
    }
    write_file(out_dir + "/seg_eval.json", j.dump(2) + "\n");
    manifest.outputs.push_back("seg_eval.json");
    write_manifest(out_dir, std::move(manifest));
    return 0;
}

std::vector<SurvivalSample> survival_samples(const std::vector<ClinicalRecord>& records) {
    std::vector<SurvivalSample> out;
    for (const auto& r : records) {
        if (r.event == EventStatus::Unknown) continue;
        if (r.os_months <= 0.0) continue;  // zero follow-up carries no information
        out.push_back({r.os_months, r.event == EventStatus::Dead ? 1 : 0, {}});
    }
    return out;
}

int run_survival_km(const std::vector<std::string>& args, const Config& cfg,
                    const std::string& clinical_path, const std::string& group_path,
                    const std::string& svg_name, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const auto records = parse_clinical_csv(clinical_path);
    RunManifest manifest = make_manifest(args, cfg, 0);
    manifest.input_digests[clinical_path] = fnv1a_file_hex(clinical_path);

    nlohmann::ordered_json j;
    std::vector<KmCurve> curves;
    std::vector<std::string> names;
    std::optional<HazardRatioResult> hr;
    auto curve_json = [](const KmCurve& c) {
        nlohmann::ordered_json cj;
        cj["event_times"] = c.event_times;
        cj["surv"] = c.surv;
        cj["at_risk"] = c.at_risk;
        cj["events"] = c.events;
        cj["censor_times"] = c.censor_times;
        return cj;
    };
    if (group_path.empty()) {
        const auto samples = survival_samples(records);
        curves.push_back(km_estimate(samples));
        names.push_back("all");
        j["curves"]["all"] = curve_json(curves.back());
        j["n"] = samples.size();
    } else {
        manifest.input_digests[group_path] = fnv1a_file_hex(group_path);
        const auto groups = read_scores_csv(group_path);  // patient_id,score with 0/1
        std::vector<ClinicalRecord> rec_a, rec_b;
        for (const auto& r : records) {
            const auto it = groups.find(r.patient_id);
            if (it == groups.end())
                throw MissingCovariate("no group for patient " + r.patient_id);
            (it->second != 0.0 ? rec_a : rec_b).push_back(r);
        }
        const auto sa = survival_samples(rec_a);
        const auto sb = survival_samples(rec_b);
        curves.push_back(km_estimate(sa));
        names.push_back("group1");
        curves.push_back(km_estimate(sb));
        names.push_back("group0");
        hr = hazard_ratio_groups(sa, sb);
        const LogrankResult lr = logrank(sa, sb);
        j["curves"]["group1"] = curve_json(curves[0]);
        j["curves"]["group0"] = curve_json(curves[1]);
        j["hazard_ratio"] = {{"estimate", hr->hr},
                             {"ci_low", hr->ci_low},
                             {"ci_high", hr->ci_high},
                             {"p", hr->p_value},
                             {"n", sa.size() + sb.size()}};
        j["logrank"] = {{"chi2", lr.chi2}, {"p", lr.p}};
    }
    write_file(out_dir + "/km.json", j.dump(2) + "\n");
    manifest.outputs.push_back("km.json");
    if (!svg_name.empty()) {
        write_file(out_dir + "/" + svg_name, render_km_svg(curves, names, hr));
        manifest.outputs.push_back(svg_name);
    }
    write_manifest(out_dir, std::move(manifest));
    return 0;
}

int run_survival_anova(const std::vector<std::string>& args, const Config& cfg,
                       const std::string& groups_path, const std::string& out_dir) {
    fs::create_directories(out_dir);
    // CSV: group,value
    std::istringstream in(read_file(groups_path));
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"group", "value"})
        throw MissingColumn(groups_path + ": header must be group,value");
    std::map<std::string, std::vector<double>> by_group;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 2) throw MissingColumn("anova row " + std::to_string(row));
        by_group[f[0]].push_back(parse_double(f[1], "anova row " + std::to_string(row)));
    }
    std::vector<std::vector<double>> groups;
    for (auto& [name, vals] : by_group) groups.push_back(std::move(vals));
    const AnovaResult res = anova_oneway(groups);
    nlohmann::ordered_json j;
    j["F"] = res.F;
    j["p"] = res.p;
    j["groups"] = by_group.size();
    write_file(out_dir + "/anova.json", j.dump(2) + "\n");
    RunManifest manifest = make_manifest(args, cfg, 0);
    manifest.input_digests[groups_path] = fnv1a_file_hex(groups_path);
    manifest.outputs.push_back("anova.json");
    write_manifest(out_dir, std::move(manifest));
    return 0;
}

int run_nomogram_build(const std::vector<std::string>& args, const Config& cfg,
                       const std::string& clinical_path,
                       const std::vector<std::string>& score_specs, bool use_grade,
                       bool use_stage, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const auto records = parse_clinical_csv(clinical_path);
    const auto score_files = parse_named_paths(score_specs);
    const CovariateTable table =
        assemble_covariates(records, score_files, use_grade, use_stage);

    std::vector<SurvivalSample> samples;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < table.records.size(); ++i) {
        const auto& r = table.records[i];
        if (r.os_months <= 0.0) continue;
        samples.push_back({r.os_months, r.event == EventStatus::Dead ? 1 : 0,
                           table.covariates[i]});
        kept.push_back(i);
    }
    const CoxModel cox = cox_fit(samples);

    std::map<std::string, CovariateRange> ranges;
    for (std::size_t j = 0; j < table.names.size(); ++j) {
        CovariateRange r{1e300, -1e300};
        for (const auto& s : samples) {
            r.min = std::min(r.min, s.covariates[j]);
            r.max = std::max(r.max, s.covariates[j]);
        }
        ranges[table.names[j]] = r;
    }
    Nomogram nom = build_nomogram(cox, table.names, ranges);

    // cutoff: Youden-optimal threshold of total points vs 5-year labels
    std::vector<double> points;
    std::vector<int> labels;
    for (std::size_t i : kept) {
        const auto& r = table.records[i];
        const HorizonLabel hl = horizon_label(r.os_months, r.event, 60.0);
        if (hl == HorizonLabel::Excluded) continue;
        points.push_back(nomogram_score(nom, table.covariates[i]));
        labels.push_back(hl == HorizonLabel::Positive ? 1 : 0);
    }
    nom.cutoff_points = best_cutoff(points, labels).threshold;

    write_file(out_dir + "/nomogram.json", nomogram_to_json(nom));
    nlohmann::ordered_json fit;
    fit["loglik"] = cox.loglik;
    fit["iterations"] = cox.iterations;
    fit["coefficients"] = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < table.names.size(); ++j) {
        const double se = cox.se(static_cast<int>(j));
        const double z = cox.beta[j] / se;
        nlohmann::ordered_json c;
        c["name"] = table.names[j];
        c["beta"] = cox.beta[j];
        c["se"] = se;
        c["hr"] = std::exp(cox.beta[j]);
        c["ci_low"] = std::exp(cox.beta[j] - 1.96 * se);
        c["ci_high"] = std::exp(cox.beta[j] + 1.96 * se);
        c["p"] = 2.0 * normal_sf(std::fabs(z));
        fit["coefficients"].push_back(std::move(c));
    }
    write_file(out_dir + "/cox_fit.json", fit.dump(2) + "\n");

    RunManifest manifest = make_manifest(args, cfg, 0);
    manifest.input_digests[clinical_path] = fnv1a_file_hex(clinical_path);
    for (const auto& np : score_files)
        manifest.input_digests[np.path] = fnv1a_file_hex(np.path);
    manifest.outputs.push_back("nomogram.json");
    manifest.outputs.push_back("cox_fit.json");
    write_manifest(out_dir, std::move(manifest));
    return 0;
}

int run_nomogram_score(const std::vector<std::string>& args, const Config& cfg,
                       const std::string& clinical_path,
                       const std::vector<std::string>& score_specs,
                       const std::string& nomogram_path, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const auto records = parse_clinical_csv(clinical_path);
    const auto score_files = parse_named_paths(score_specs);
    const Nomogram nom = nomogram_from_json(read_file(nomogram_path));

    // variable order comes from the nomogram; grade/stage come from the
    // clinical table, anything else from a score file of the same name
    std::map<std::string, std::map<std::string, double>> score_maps;
    for (const auto& np : score_files) score_maps[np.name] = read_scores_csv(np.path);

    std::ostringstream out;
    out << "patient_id,total_points,group,surv_12m,surv_36m,surv_60m\n";
    int clamps = 0;
    for (const auto& r : records) {
        if (r.event == EventStatus::Unknown) continue;
        std::vector<double> x;
        bool usable = true;
        for (const auto& v : nom.variables) {
            if (v.name == "grade") {
                if (!r.grade) {
                    usable = false;
                    break;
                }
                x.push_back(double(*r.grade));
            } else if (v.name == "stage") {
                x.push_back(double(r.stage));
            } else {
                const auto it = score_maps.find(v.name);
                if (it == score_maps.end())
                    throw MissingCovariate("no score file for nomogram variable '" +
                                           v.name + "'");
                x.push_back(lookup_score(it->second, r.patient_id, v.name));
            }
        }
        if (!usable) continue;
        const double points = nomogram_score(nom, x, &clamps);
        const StratifiedGroup g = stratify(nom, points);
        out << r.patient_id << ',' << format_double(points) << ','
            << (g == StratifiedGroup::Worse ? "worse" : "favorable");
        for (double horizon : {12.0, 36.0, 60.0}) {
            out << ',';
            if (horizon > nom.max_time)
                out << "NA";
            else
                out << format_double(survival_probability(nom, x, horizon));
        }
        out << "\n";
    }
    if (clamps > 0)
        std::cerr << "warning: " << clamps << " covariate values clamped to range\n";
    write_file(out_dir + "/scored.csv", out.str());

    RunManifest manifest = make_manifest(args, cfg, 0);
    manifest.input_digests[clinical_path] = fnv1a_file_hex(clinical_path);
    manifest.input_digests[nomogram_path] = fnv1a_file_hex(nomogram_path);
    for (const auto& np : score_files)
        manifest.input_digests[np.path] = fnv1a_file_hex(np.path);
    manifest.outputs.push_back("scored.csv");
    write_manifest(out_dir, std::move(manifest));
    return 0;
}

int run_compare(const std::vector<std::string>& args, const Config& cfg,
                const std::string& clinical_path,
                const std::vector<std::string>& score_specs, bool use_grade,
                bool use_stage, int B, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const auto records = parse_clinical_csv(clinical_path);
    const auto score_files = parse_named_paths(score_specs);
    const CovariateTable table =
        assemble_covariates(records, score_files, use_grade, use_stage);

    std::vector<NamedScores> indicators;
    for (std::size_t j = 0; j < table.names.size(); ++j) {
        NamedScores ns;
        ns.name = table.names[j];
        for (const auto& x : table.covariates) ns.scores.push_back(x[j]);
        indicators.push_back(std::move(ns));
    }
    const auto rows = indicator_comparison(table.records, indicators, B, seed);
    write_file(out_dir + "/comparison.csv", comparison_table_csv(rows));

    RunManifest manifest = make_manifest(args, cfg, seed);
    manifest.input_digests[clinical_path] = fnv1a_file_hex(clinical_path);
    for (const auto& np : score_files)
        manifest.input_digests[np.path] = fnv1a_file_hex(np.path);
    manifest.outputs.push_back("comparison.csv");
    write_manifest(out_dir, std::move(manifest));
    return 0;
}

int run_report_roc(const std::vector<std::string>& args, const Config& cfg,
                   const std::string& clinical_path,
                   const std::vector<std::string>& score_specs, double horizon, int B,
                   std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const auto records = parse_clinical_csv(clinical_path);
    const auto score_files = parse_named_paths(score_specs);

    RunManifest manifest = make_manifest(args, cfg, seed);
    manifest.input_digests[clinical_path] = fnv1a_file_hex(clinical_path);

    std::vector<RocCurve> curves;
    std::vector<AucResult> cis;
    std::uint64_t stream = 0;
    for (const auto& np : score_files) {
        manifest.input_digests[np.path] = fnv1a_file_hex(np.path);
        const auto score_map = read_scores_csv(np.path);
        std::vector<double> s;
        std::vector<int> l;
        for (const auto& r : records) {
            if (r.event == EventStatus::Unknown) continue;
            const HorizonLabel hl = horizon_label(r.os_months, r.event, horizon);
            if (hl == HorizonLabel::Excluded) continue;
            s.push_back(lookup_score(score_map, r.patient_id, np.name));
            l.push_back(hl == HorizonLabel::Positive ? 1 : 0);
        }
        RocCurve curve = roc_curve(s, l);
        curve.name = np.name;
        write_file(out_dir + "/roc_" + np.name + ".csv", roc_points_csv(curve));
        manifest.outputs.push_back("roc_" + np.name + ".csv");
        cis.push_back(auc_ci(s, l, B, seed + stream));
        ++stream;
        curves.push_back(std::move(curve));
    }
    write_file(out_dir + "/roc.svg", render_roc_svg(curves, cis));
    manifest.outputs.push_back("roc.svg");
    write_manifest(out_dir, std::move(manifest));
    return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
    CLI::App app{"weakly-supervised WSI pipeline and survival statistics"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "flat key=value config file");

    // tile
    auto* tile = app.add_subcommand("tile", "tile a slide into tissue patches");
    std::string tile_input, tile_out;
    int patch_size = 1024, white_threshold = 220;
    double min_tissue = 0.25;
    tile->add_option("--input", tile_input, "slide PPM")->required();
    tile->add_option("--patch-size", patch_size, "patch edge in pixels");
    tile->add_option("--min-tissue", min_tissue, "minimum tissue fraction");
    tile->add_option("--white-threshold", white_threshold, "background threshold");
    tile->add_option("--out", tile_out, "output directory")->required();

    // featurize
    auto* feat = app.add_subcommand("featurize", "tile + extract patch descriptors");
    std::vector<std::string> feat_inputs;
    std::string feat_out;
    feat->add_option("--input", feat_inputs, "slide PPM(s)")->required();
    feat->add_option("--patch-size", patch_size, "patch edge in pixels");
    feat->add_option("--min-tissue", min_tissue, "minimum tissue fraction");
    feat->add_option("--white-threshold", white_threshold, "background threshold");
    feat->add_option("--out", feat_out, "output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "train an attention-MIL model");
    std::string train_features, train_labels, train_task = "diagnosis", train_out;
    MilHyperparams hyper;
    int att_dim = 16, hid_dim = 16, classes = 2;
    train->add_option("--features", train_features, "features.csv")->required();
    train->add_option("--labels", train_labels, "slide_id,label CSV")->required();
    train->add_option("--task", train_task, "diagnosis|subtype|grade_risk|os_risk");
    auto* seed_opt = train->add_option("--seed", hyper.seed, "PRNG seed");
    train->add_option("--epochs", hyper.epochs, "training epochs");
    train->add_option("--lr", hyper.learning_rate, "Adam learning rate");
    train->add_option("--weight-decay", hyper.weight_decay, "per-step shrinkage");
    train->add_option("--attention-dim", att_dim, "attention hidden dim");
    train->add_option("--hidden-dim", hid_dim, "classifier hidden dim");
    train->add_option("--classes", classes, "class count");
    train->add_option("--out", train_out, "output directory")->required();

    // predict
    auto* predict = app.add_subcommand("predict", "score bags with a trained model");
    std::string pred_features, pred_model, pred_out;
    int heatmap_cell = 0;
    predict->add_option("--features", pred_features, "features.csv")->required();
    predict->add_option("--model", pred_model, "model.json")->required();
    predict->add_option("--heatmap-cell", heatmap_cell,
                        "emit attention heatmaps with this cell size");
    predict->add_option("--out", pred_out, "output directory")->required();

    // eval-seg
    auto* evalseg = app.add_subcommand("eval-seg", "segmentation metrics + 5% rule");
    std::string seg_pred, seg_truth, seg_tissue, seg_out;
    double area_threshold = 0.05;
    evalseg->add_option("--pred", seg_pred, "predicted mask PGM")->required();
    evalseg->add_option("--truth", seg_truth, "reference mask PGM")->required();
    evalseg->add_option("--tissue", seg_tissue, "tissue mask PGM");
    evalseg->add_option("--area-threshold", area_threshold, "slide-positive threshold");
    evalseg->add_option("--out", seg_out, "output directory")->required();

    // survival
    auto* surv = app.add_subcommand("survival", "KM curves, HR, ANOVA");
    surv->require_subcommand(1);
    auto* km = surv->add_subcommand("km", "Kaplan-Meier with optional two-group HR");
    std::string km_clinical, km_group, km_svg = "km.svg", km_out;
    km->add_option("--clinical", km_clinical, "clinical.csv")->required();
    km->add_option("--group-by", km_group, "patient_id,score CSV with 0/1 groups");
    km->add_option("--svg", km_svg, "SVG filename (empty to skip)");
    km->add_option("--out", km_out, "output directory")->required();
    auto* anova = surv->add_subcommand("anova", "one-way ANOVA over groups");
    std::string anova_groups, anova_out;
    anova->add_option("--groups", anova_groups, "group,value CSV")->required();
    anova->add_option("--out", anova_out, "output directory")->required();

    // nomogram
    auto* nomo = app.add_subcommand("nomogram", "build / apply the points chart");
    nomo->require_subcommand(1);
    auto* nbuild = nomo->add_subcommand("build", "fit Cox and derive the chart");
    std::string nb_clinical, nb_out;
    std::vector<std::string> nb_scores;
    bool nb_grade = false, nb_stage = false;
    nbuild->add_option("--clinical", nb_clinical, "clinical.csv")->required();
    nbuild->add_option("--scores", nb_scores, "name=path score CSVs");
    nbuild->add_flag("--use-grade", nb_grade, "include tumor grade");
    nbuild->add_flag("--use-stage", nb_stage, "include tumor stage");
    nbuild->add_option("--out", nb_out, "output directory")->required();
    auto* nscore = nomo->add_subcommand("score", "score patients in points");
    std::string ns_clinical, ns_nomogram, ns_out;
    std::vector<std::string> ns_scores;
    nscore->add_option("--clinical", ns_clinical, "clinical.csv")->required();
    nscore->add_option("--scores", ns_scores, "name=path score CSVs");
    nscore->add_option("--nomogram", ns_nomogram, "nomogram.json")->required();
    nscore->add_option("--out", ns_out, "output directory")->required();

    // compare
    auto* compare = app.add_subcommand("compare", "indicator comparison table");
    std::string cmp_clinical, cmp_out;
    std::vector<std::string> cmp_scores;
    bool cmp_grade = false, cmp_stage = false;
    int bootstrap_B = 2000;
    std::uint64_t cmp_seed = 0;
    compare->add_option("--clinical", cmp_clinical, "clinical.csv")->required();
    compare->add_option("--scores", cmp_scores, "name=path score CSVs");
    compare->add_flag("--use-grade", cmp_grade, "include tumor grade");
    compare->add_flag("--use-stage", cmp_stage, "include tumor stage");
    compare->add_option("--bootstrap", bootstrap_B, "bootstrap resamples");
    auto* cmp_seed_opt = compare->add_option("--seed", cmp_seed, "bootstrap seed");
    compare->add_option("--out", cmp_out, "output directory")->required();

    // report
    auto* report = app.add_subcommand("report", "figure emission");
    report->require_subcommand(1);
    auto* roc = report->add_subcommand("roc", "ROC curves at a survival horizon");
    std::string roc_clinical, roc_out;
    std::vector<std::string> roc_scores;
    double roc_horizon = 60.0;
    int roc_B = 2000;
    std::uint64_t roc_seed = 0;
    roc->add_option("--clinical", roc_clinical, "clinical.csv")->required();
    roc->add_option("--scores", roc_scores, "name=path score CSVs")->required();
    roc->add_option("--horizon", roc_horizon, "horizon in months");
    roc->add_option("--bootstrap", roc_B, "bootstrap resamples");
    auto* roc_seed_opt = roc->add_option("--seed", roc_seed, "bootstrap seed");
    roc->add_option("--out", roc_out, "output directory")->required();

    std::vector<const char*> argv;
    argv.push_back("rcc");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        const Config cfg = Config::load(config_path);
        if (tile->parsed())
            return run_tile(args, cfg, tile_input, patch_size, min_tissue,
                            white_threshold, tile_out);
        if (feat->parsed())
            return run_featurize(args, cfg, feat_inputs, patch_size, min_tissue,
                                 white_threshold, feat_out);
        if (train->parsed()) {
            hyper.seed = cfg.resolve_seed(seed_opt, hyper.seed);
            return run_train(args, cfg, train_features, train_labels, train_task, hyper,
                             att_dim, hid_dim, classes, train_out);
        }
        if (predict->parsed())
            return run_predict(args, cfg, pred_features, pred_model, heatmap_cell,
                               pred_out);
        if (evalseg->parsed())
            return run_eval_seg(args, cfg, seg_pred, seg_truth, seg_tissue,
                                area_threshold, seg_out);
        if (surv->parsed()) {
            if (km->parsed())
                return run_survival_km(args, cfg, km_clinical, km_group, km_svg, km_out);
            return run_survival_anova(args, cfg, anova_groups, anova_out);
        }
        if (nomo->parsed()) {
            if (nbuild->parsed())
                return run_nomogram_build(args, cfg, nb_clinical, nb_scores, nb_grade,
                                          nb_stage, nb_out);
            return run_nomogram_score(args, cfg, ns_clinical, ns_scores, ns_nomogram,
                                      ns_out);
        }
        if (compare->parsed()) {
            cmp_seed = cfg.resolve_seed(cmp_seed_opt, cmp_seed);
            return run_compare(args, cfg, cmp_clinical, cmp_scores, cmp_grade, cmp_stage,
                               bootstrap_B, cmp_seed, cmp_out);
        }
        if (report->parsed()) {
            roc_seed = cfg.resolve_seed(roc_seed_opt, roc_seed);
            return run_report_roc(args, cfg, roc_clinical, roc_scores, roc_horizon,
                                  roc_B, roc_seed, roc_out);
        }
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace rcc
