#include "dbmf/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace dbmf {

using nlohmann::json;

namespace {

json matrix_to_json(const DenseMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

DenseMatrix matrix_from_json(const json& j) {
    DenseMatrix m;
    m.rows = j.size();
    m.cols = m.rows ? j.at(0).size() : 0;
    m.data.reserve(m.rows * m.cols);
    for (const auto& row : j) {
        if (row.size() != m.cols) throw ParseError("checkpoint: ragged matrix rows");
        for (const auto& v : row) m.data.push_back(v.get<double>());
    }
    return m;
}

json train_config_to_json(const TrainConfig& c) {
    return {{"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"steps", c.steps},
            {"lambda", c.lambda},
            {"seed", c.seed}};
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path);
}

// Shortest round-trip double formatting, shared with the JSON outputs so CSV
// and JSON artifacts agree byte-for-byte on values.
std::string num(double v) { return json(v).dump(); }

}  // namespace

void save_text_image(const TextImageBranch& branch, const TrainConfig& config,
                     const std::string& path) {
    json j;
    j["kind"] = "text_image_branch";
    j["d_embed"] = branch.d_embed;
    j["d_proj"] = branch.d_proj;
    j["weights"] = matrix_to_json(branch.tlinear_weights);
    j["bias"] = branch.tlinear_bias;
    j["prototypes"] = branch.prototypes;
    j["log_tau"] = branch.log_tau;
    j["class_names"] = branch.class_names;
    j["train_config"] = train_config_to_json(config);
    write_json_file(j, path);
}

TextImageBranch load_text_image(const std::string& path) {
    const json j = load_json_file(path);
    TextImageBranch b;
    try {
        b.d_embed = j.at("d_embed").get<std::size_t>();
        b.d_proj = j.at("d_proj").get<std::size_t>();
        b.tlinear_weights = matrix_from_json(j.at("weights"));
        b.tlinear_bias = j.at("bias").get<Vec>();
        b.prototypes = j.at("prototypes").get<std::vector<Vec>>();
        b.log_tau = j.at("log_tau").get<double>();
        b.class_names = j.at("class_names").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return b;
}

void save_vision(const VisionBranch& branch, const GaussianStats& stats,
                 const TrainConfig& config, const std::string& path) {
    json j;
    j["kind"] = "vision_branch";
    j["d_embed"] = branch.d_embed;
    j["weights"] = matrix_to_json(branch.weights);
    j["bias"] = branch.bias;
    j["class_names"] = branch.class_names;
    j["means"] = stats.means;
    j["covariance"] = matrix_to_json(stats.covariance);
    j["epsilon"] = stats.epsilon;
    j["train_config"] = train_config_to_json(config);
    write_json_file(j, path);
}

std::pair<VisionBranch, GaussianStats> load_vision(const std::string& path) {
    const json j = load_json_file(path);
    VisionBranch b;
    GaussianStats stats;
    try {
        b.d_embed = j.at("d_embed").get<std::size_t>();
        b.weights = matrix_from_json(j.at("weights"));
        b.bias = j.at("bias").get<Vec>();
        b.class_names = j.at("class_names").get<std::vector<std::string>>();
        stats.means = j.at("means").get<std::vector<Vec>>();
        stats.covariance = matrix_from_json(j.at("covariance"));
        stats.epsilon = j.at("epsilon").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    DenseMatrix reg = stats.covariance;
    for (std::size_t i = 0; i < reg.rows; ++i) reg(i, i) += stats.epsilon;
    stats.chol = cholesky(reg);
    return {std::move(b), std::move(stats)};
}

void save_detector(const DetectorBundle& bundle, const std::string& path) {
    json j;
    j["kind"] = "detector";
    j["st_mean"] = bundle.standardizer.st.mean;
    j["st_std"] = bundle.standardizer.st.std;
    j["sv_mean"] = bundle.standardizer.sv.mean;
    j["sv_std"] = bundle.standardizer.sv.std;
    j["omega"] = bundle.omega;
    j["gamma"] = bundle.gamma;
    j["target_tpr"] = bundle.target_tpr;
    j["text_image_path"] = bundle.text_image_path;
    j["vision_path"] = bundle.vision_path;
    write_json_file(j, path);
}

DetectorBundle load_detector(const std::string& path) {
    const json j = load_json_file(path);
    DetectorBundle b;
    try {
        b.standardizer.st = {j.at("st_mean").get<double>(), j.at("st_std").get<double>()};
        b.standardizer.sv = {j.at("sv_mean").get<double>(), j.at("sv_std").get<double>()};
        b.omega = j.at("omega").get<double>();
        b.gamma = j.at("gamma").get<double>();
        b.target_tpr = j.at("target_tpr").get<double>();
        b.text_image_path = j.at("text_image_path").get<std::string>();
        b.vision_path = j.at("vision_path").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return b;
}

void save_report_json(const EvalReport& report, const std::string& path) {
    json j;
    j["auroc"] = report.auroc;
    j["fpr95"] = report.fpr95;
    j["n_id"] = report.n_id;
    j["n_ood"] = report.n_ood;
    json roc = json::array();
    for (const auto& [fpr, tpr] : report.roc_points) roc.push_back({fpr, tpr});
    j["roc_points"] = std::move(roc);
    j["id_density"] = {{"xs", report.id_density.xs}, {"ys", report.id_density.ys}};
    j["ood_density"] = {{"xs", report.ood_density.xs}, {"ys", report.ood_density.ys}};
    json scores = json::array();
    for (const auto& s : report.scores) {
        scores.push_back({{"id", s.id}, {"score", s.score}, {"ood", s.is_ood}});
    }
    j["scores"] = std::move(scores);
    write_json_file(j, path);
}

EvalReport load_report_json(const std::string& path) {
    const json j = load_json_file(path);
    EvalReport r;
    try {
        r.auroc = j.at("auroc").get<double>();
        r.fpr95 = j.at("fpr95").get<double>();
        r.n_id = j.at("n_id").get<std::size_t>();
        r.n_ood = j.at("n_ood").get<std::size_t>();
        for (const auto& p : j.at("roc_points")) {
            r.roc_points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        }
        r.id_density.xs = j.at("id_density").at("xs").get<Vec>();
        r.id_density.ys = j.at("id_density").at("ys").get<Vec>();
        r.ood_density.xs = j.at("ood_density").at("xs").get<Vec>();
        r.ood_density.ys = j.at("ood_density").at("ys").get<Vec>();
        for (const auto& s : j.at("scores")) {
            r.scores.push_back({s.at("id").get<std::string>(), s.at("score").get<double>(),
                                s.at("ood").get<bool>()});
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return r;
}

void save_scores_csv(const std::vector<ScoredSample>& scores, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "id,score,is_ood\n";
    for (const auto& s : scores) {
        out << s.id << ',' << num(s.score) << ',' << (s.is_ood ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

void save_density_csv(const DensityCurve& id_density, const DensityCurve& ood_density,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "curve,x,y\n";
    for (std::size_t i = 0; i < id_density.xs.size(); ++i) {
        out << "id," << num(id_density.xs[i]) << ',' << num(id_density.ys[i]) << '\n';
    }
    for (std::size_t i = 0; i < ood_density.xs.size(); ++i) {
        out << "ood," << num(ood_density.xs[i]) << ',' << num(ood_density.ys[i]) << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

void save_loss_trace_csv(const TrainTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "step,loss\n";
    for (std::size_t i = 0; i < trace.losses.size(); ++i) {
        out << i << ',' << num(trace.losses[i]) << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace dbmf
