#pragma once

#include <string>

#include "dbmf/fusion.hpp"
#include "dbmf/metrics.hpp"
#include "dbmf/text_image.hpp"
#include "dbmf/vision.hpp"

namespace dbmf {

void save_text_image(const TextImageBranch& branch, const TrainConfig& config,
                     const std::string& path);
TextImageBranch load_text_image(const std::string& path);

void save_vision(const VisionBranch& branch, const GaussianStats& stats,
                 const TrainConfig& config, const std::string& path);
std::pair<VisionBranch, GaussianStats> load_vision(const std::string& path);

/// Detector bundle: standardizer statistics, omega, gamma, target_tpr, and
/// the paths of the two branch checkpoints.
struct DetectorBundle {
    ScoreStandardizer standardizer;
    double omega = 1.0;
    double gamma = 0.0;
    double target_tpr = 0.95;
    std::string text_image_path;
    std::string vision_path;
};

void save_detector(const DetectorBundle& bundle, const std::string& path);
DetectorBundle load_detector(const std::string& path);

void save_report_json(const EvalReport& report, const std::string& path);
EvalReport load_report_json(const std::string& path);

/// Per-sample CSV: id,score,is_ood.
void save_scores_csv(const std::vector<ScoredSample>& scores, const std::string& path);

/// Two-curve CSV: curve,x,y.
void save_density_csv(const DensityCurve& id_density, const DensityCurve& ood_density,
                      const std::string& path);

/// step,loss rows.
void save_loss_trace_csv(const TrainTrace& trace, const std::string& path);

}  // namespace dbmf
