#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dbmf/numerics.hpp"

namespace dbmf {

/// One evaluated sample; score oriented higher = more OOD.
struct ScoredSample {
    std::string id;
    double score = 0.0;
    bool is_ood = false;
};

struct EvalReport {
    double auroc = 0.0;
    double fpr95 = 0.0;
    std::vector<std::pair<double, double>> roc_points;  // (fpr, tpr)
    DensityCurve id_density;
    DensityCurve ood_density;
    std::size_t n_id = 0;
    std::size_t n_ood = 0;
    std::vector<ScoredSample> scores;
};

/// Probability a random OOD sample outscores a random ID sample, ties 0.5.
/// Tie-aware rank statistic, O(n log n).
double auroc(const std::vector<ScoredSample>& samples);

/// ID is the positive class, predicted ID when score <= t. Picks the smallest
/// threshold reaching ID-recall >= target_tpr and returns the OOD fraction
/// at or below it.
double fpr_at_tpr(const std::vector<ScoredSample>& samples, double target_tpr);

/// ROC sweeping thresholds over distinct scores, OOD as the curve positive;
/// trapezoidal area equals auroc().
std::vector<std::pair<double, double>> roc_curve(const std::vector<ScoredSample>& samples);

/// Joint min-max rescale of all scores to [0,1], then per-group Gaussian KDE
/// on a shared grid. Bandwidth defaults to Silverman per group.
std::pair<DensityCurve, DensityCurve> density_report(const std::vector<ScoredSample>& samples,
                                                     std::optional<double> bandwidth = {});

EvalReport make_report(const std::vector<ScoredSample>& samples,
                       std::optional<double> bandwidth = {});

}  // namespace dbmf
