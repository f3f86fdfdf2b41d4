#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbmf/checkpoint.hpp"
#include "dbmf/pipeline.hpp"
#include "dbmf/svg_plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalError = 3 };

int log_level() {
    const char* env = std::getenv("DBMF_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cout << msg << '\n';
}

void debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[debug] " << msg << '\n';
}

struct CommonOpts {
    std::string config_path;
    std::string data_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw dbmf::IoError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw dbmf::ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw dbmf::ConfigError("config root must be a JSON object");
    return j;
}

dbmf::SynthConfig synth_from_config(const json& cfg, std::uint64_t seed, bool seed_set) {
    dbmf::SynthConfig sc;
    sc.seed = seed;
    if (cfg.contains("synth")) {
        const json& s = cfg.at("synth");
        try {
            if (s.contains("dim")) sc.dim = s.at("dim").get<std::size_t>();
            if (s.contains("num_id_classes")) sc.num_id_classes = s.at("num_id_classes").get<std::size_t>();
            if (s.contains("samples_per_class"))
                sc.samples_per_class = s.at("samples_per_class").get<std::size_t>();
            if (s.contains("ood_clusters")) sc.ood_clusters = s.at("ood_clusters").get<std::size_t>();
            if (s.contains("ood_samples")) sc.ood_samples = s.at("ood_samples").get<std::size_t>();
            if (s.contains("cluster_spread")) sc.cluster_spread = s.at("cluster_spread").get<double>();
            if (s.contains("seed") && !seed_set) sc.seed = s.at("seed").get<std::uint64_t>();
        } catch (const json::exception& e) {
            throw dbmf::ConfigError(std::string("synth config: ") + e.what());
        }
    }
    return sc;
}

dbmf::TrainConfig train_config_from(const json& cfg, const std::string& key, std::uint64_t seed) {
    dbmf::TrainConfig tc;
    tc.seed = seed;
    if (cfg.contains(key)) {
        const json& t = cfg.at(key);
        try {
            if (t.contains("batch_size")) tc.batch_size = t.at("batch_size").get<std::size_t>();
            if (t.contains("learning_rate")) tc.learning_rate = t.at("learning_rate").get<double>();
            if (t.contains("steps")) tc.steps = t.at("steps").get<std::size_t>();
            if (t.contains("lambda")) tc.lambda = t.at("lambda").get<double>();
            if (t.contains("seed")) tc.seed = t.at("seed").get<std::uint64_t>();
        } catch (const json::exception& e) {
            throw dbmf::ConfigError(key + " config: " + e.what());
        }
    }
    return tc;
}

void warn_range(const std::string& name, double value, double lo, double hi) {
    if (value < lo || value > hi) {
        std::cerr << "warning: " << name << " = " << value << " is outside the recommended range ["
                  << lo << ", " << hi << "]\n";
    }
}

std::string resolve_data_path(const CommonOpts& opts, const json& cfg) {
    if (!opts.data_path.empty()) return opts.data_path;
    if (cfg.contains("data")) return cfg.at("data").get<std::string>();
    return (fs::path(opts.out_dir) / "dataset.jsonl").string();
}

int cmd_gen(const CommonOpts& opts) {
    const json cfg = load_config(opts.config_path);
    dbmf::SynthConfig sc = synth_from_config(cfg, opts.seed, opts.seed_set);
    dbmf::Dataset ds = dbmf::generate_synthetic(sc);
    dbmf::tag_split_id_8_2(ds, sc.seed + 1);
    fs::create_directories(opts.out_dir);
    const std::string path = (fs::path(opts.out_dir) / "dataset.jsonl").string();
    dbmf::save_jsonl(ds, path);

    std::size_t n_id = 0;
    std::size_t n_ood = 0;
    std::size_t n_train = 0;
    for (const auto& s : ds.samples) {
        (s.is_ood ? n_ood : n_id)++;
        if (s.split == dbmf::Split::Train) ++n_train;
    }
    info("wrote " + path + ": " + std::to_string(n_id) + " ID + " + std::to_string(n_ood) +
         " OOD samples (" + std::to_string(n_train) + " train)");
    return kOk;
}

int cmd_train(const CommonOpts& opts, std::optional<double> lambda, std::optional<double> omega,
              std::optional<double> gamma, std::optional<double> target_tpr) {
    const json cfg = load_config(opts.config_path);
    const std::string data_path = resolve_data_path(opts, cfg);
    const dbmf::Dataset ds = dbmf::load_jsonl(data_path);

    dbmf::TrainConfig ti_cfg = train_config_from(cfg, "text_image", opts.seed + 2);
    dbmf::TrainConfig vi_cfg = train_config_from(cfg, "vision", opts.seed + 3);
    if (lambda) ti_cfg.lambda = *lambda;
    warn_range("lambda", ti_cfg.lambda, 1.0, 1.5);

    dbmf::DetectorConfig det_cfg;
    if (cfg.contains("detector")) {
        const json& d = cfg.at("detector");
        if (d.contains("omega")) det_cfg.omega = d.at("omega").get<double>();
        if (d.contains("target_tpr")) det_cfg.target_tpr = d.at("target_tpr").get<double>();
    }
    if (omega) det_cfg.omega = *omega;
    if (target_tpr) det_cfg.target_tpr = *target_tpr;
    warn_range("omega", det_cfg.omega, 1.0, 3.0);

    bool has_train = false;
    for (const auto& s : ds.samples) has_train |= (s.split == dbmf::Split::Train);
    if (!has_train) throw dbmf::ConfigError("dataset has no train split");

    debug("training on " + data_path);
    dbmf::TrainOutcome outcome = dbmf::train_pipeline(ds, ti_cfg, vi_cfg, det_cfg);
    if (gamma) outcome.detector.gamma = *gamma;

    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);
    const std::string ti_path = (out / "text_image.json").string();
    const std::string vi_path = (out / "vision.json").string();
    dbmf::save_text_image(outcome.detector.text_image, ti_cfg, ti_path);
    dbmf::save_vision(outcome.detector.vision, outcome.detector.stats, vi_cfg, vi_path);

    dbmf::DetectorBundle bundle;
    bundle.standardizer = outcome.detector.standardizer;
    bundle.omega = outcome.detector.omega;
    bundle.gamma = outcome.detector.gamma;
    bundle.target_tpr = outcome.detector.target_tpr;
    bundle.text_image_path = ti_path;
    bundle.vision_path = vi_path;
    dbmf::save_detector(bundle, (out / "detector.json").string());

    dbmf::save_loss_trace_csv(outcome.text_image_trace, (out / "loss_trace_text_image.csv").string());
    dbmf::save_loss_trace_csv(outcome.vision_trace, (out / "loss_trace_vision.csv").string());

    json summary;
    summary["text_image_accuracy"] = outcome.text_image_accuracy;
    summary["vision_accuracy"] = outcome.vision_accuracy;
    summary["gamma"] = outcome.detector.gamma;
    summary["omega"] = outcome.detector.omega;
    summary["final_text_image_loss"] = outcome.text_image_trace.losses.back();
    summary["final_vision_loss"] = outcome.vision_trace.losses.back();
    std::ofstream sum((out / "train_summary.json").string());
    sum << summary.dump(2) << '\n';

    info("trained: text-image accuracy " + std::to_string(outcome.text_image_accuracy) +
         ", vision accuracy " + std::to_string(outcome.vision_accuracy) + ", gamma " +
         std::to_string(outcome.detector.gamma));
    return kOk;
}

dbmf::TrainedDetector load_trained(const fs::path& out) {
    const dbmf::DetectorBundle bundle = dbmf::load_detector((out / "detector.json").string());
    dbmf::TrainedDetector det;
    det.text_image = dbmf::load_text_image(bundle.text_image_path);
    auto [vision, stats] = dbmf::load_vision(bundle.vision_path);
    det.vision = std::move(vision);
    det.stats = std::move(stats);
    det.standardizer = bundle.standardizer;
    det.omega = bundle.omega;
    det.gamma = bundle.gamma;
    det.target_tpr = bundle.target_tpr;
    return det;
}

int cmd_eval(const CommonOpts& opts, const std::string& scorer_str, bool ablate,
             std::optional<double> omega, std::optional<double> bandwidth) {
    const json cfg = load_config(opts.config_path);
    const std::string data_path = resolve_data_path(opts, cfg);
    const dbmf::Dataset ds = dbmf::load_jsonl(data_path);
    const fs::path out(opts.out_dir);

    dbmf::TrainedDetector det = load_trained(out);
    if (omega) det.omega = *omega;

    const auto scorer = dbmf::scorer_from_name(scorer_str);
    if (!scorer) throw dbmf::ConfigError("unknown scorer '" + scorer_str + "'");

    const dbmf::EvalReport report = dbmf::evaluate(det, ds, *scorer, bandwidth);
    dbmf::save_report_json(report, (out / "report.json").string());
    dbmf::save_scores_csv(report.scores, (out / "scores.csv").string());
    info("scorer " + scorer_str + ": AUROC " + std::to_string(report.auroc) + ", FPR95 " +
         std::to_string(report.fpr95) + " (" + std::to_string(report.n_id) + " ID / " +
         std::to_string(report.n_ood) + " OOD)");

    if (ablate) {
        const auto rows = dbmf::ablation(det, ds);
        std::ofstream tab((out / "ablation.csv").string());
        tab << "variant,auroc,fpr95\n";
        for (const auto& r : rows) {
            tab << r.name << ',' << json(r.auroc).dump() << ',' << json(r.fpr95).dump() << '\n';
            info(r.name + ": AUROC " + std::to_string(r.auroc) + ", FPR95 " +
                 std::to_string(r.fpr95));
        }
    }
    return kOk;
}

int cmd_plot(const std::string& report_path, const std::string& out_dir) {
    const dbmf::EvalReport report = dbmf::load_report_json(report_path);
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    dbmf::save_density_csv(report.id_density, report.ood_density, (out / "density.csv").string());
    dbmf::write_density_svg(report.id_density, report.ood_density, (out / "density.svg").string());
    info("wrote " + (out / "density.svg").string());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DBMF dual-branch OOD detection over embedding vectors"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::optional<double> lambda;
    std::optional<double> omega;
    std::optional<double> gamma;
    std::optional<double> target_tpr;
    std::optional<double> bandwidth;
    std::string scorer = "dbmf";
    bool ablate = false;
    std::string report_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "JSON config file");
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--seed", opts.seed, "base RNG seed")
            ->each([&](const std::string&) { opts.seed_set = true; });
    };

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic embedding dataset");
    add_common(gen);

    CLI::App* train = app.add_subcommand("train", "train both branches and calibrate the detector");
    add_common(train);
    train->add_option("--data", opts.data_path, "dataset JSONL path");
    train->add_option("--lambda", lambda, "separation loss weight");
    train->add_option("--omega", omega, "fusion weight");
    train->add_option("--gamma", gamma, "decision threshold override");
    train->add_option("--target-tpr", target_tpr, "gamma calibration TPR");

    CLI::App* eval = app.add_subcommand("eval", "score the test split and write a report");
    add_common(eval);
    eval->add_option("--data", opts.data_path, "dataset JSONL path");
    eval->add_option("--scorer", scorer,
                     "dbmf|st-only|sv-only|msp|maxlogit|energy|entropy|mahalanobis");
    eval->add_flag("--ablate", ablate, "emit the 3-row ablation table");
    eval->add_option("--omega", omega, "fusion weight override");
    eval->add_option("--bandwidth", bandwidth, "KDE bandwidth override");

    CLI::App* plot = app.add_subcommand("plot", "render density curves from a report");
    plot->add_option("--report", report_path, "report JSON path");
    plot->add_option("--out", opts.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (gen->parsed()) return cmd_gen(opts);
        if (train->parsed()) return cmd_train(opts, lambda, omega, gamma, target_tpr);
        if (eval->parsed()) return cmd_eval(opts, scorer, ablate, omega, bandwidth);
        if (plot->parsed()) {
            if (report_path.empty()) report_path = (fs::path(opts.out_dir) / "report.json").string();
            return cmd_plot(report_path, opts.out_dir);
        }
    } catch (const dbmf::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const dbmf::NotSPD& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const dbmf::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}
