#pragma once

#include <optional>
#include <string>

#include "dbmf/baselines.hpp"
#include "dbmf/data.hpp"
#include "dbmf/fusion.hpp"
#include "dbmf/metrics.hpp"
#include "dbmf/text_image.hpp"
#include "dbmf/vision.hpp"

namespace dbmf {

enum class Scorer { Dbmf, StOnly, SvOnly, Msp, MaxLogit, Energy, Entropy, Mahalanobis };

std::optional<Scorer> scorer_from_name(const std::string& name);
std::string scorer_name(Scorer s);

/// Everything the detector needs at inference time.
struct TrainedDetector {
    TextImageBranch text_image;
    VisionBranch vision;
    GaussianStats stats;
    ScoreStandardizer standardizer;
    double omega = 1.0;
    double gamma = 0.0;
    double target_tpr = 0.95;
};

struct TrainOutcome {
    TrainedDetector detector;
    TrainTrace text_image_trace;
    TrainTrace vision_trace;
    double text_image_accuracy = 0.0;
    double vision_accuracy = 0.0;
};

/// Trains the text-image branch first, then the vision branch, fits the
/// Gaussian statistics on the train split, standardizes on train-split ID
/// scores, and calibrates gamma at target_tpr.
TrainOutcome train_pipeline(const Dataset& dataset, const TrainConfig& text_image_config,
                            const TrainConfig& vision_config, const DetectorConfig& detector_config);

double score_sample(const TrainedDetector& det, const Vec& embedding, Scorer scorer);

std::vector<ScoredSample> score_split(const TrainedDetector& det, const Dataset& dataset,
                                      Split split, Scorer scorer);

EvalReport evaluate(const TrainedDetector& det, const Dataset& dataset, Scorer scorer,
                    std::optional<double> bandwidth = {});

struct AblationRow {
    std::string name;
    double auroc = 0.0;
    double fpr95 = 0.0;
};

/// Table-style ablation: text-image only, vision only, fused.
std::vector<AblationRow> ablation(const TrainedDetector& det, const Dataset& dataset);

}  // namespace dbmf
