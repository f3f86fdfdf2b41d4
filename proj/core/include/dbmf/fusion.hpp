#pragma once

#include "dbmf/numerics.hpp"

namespace dbmf {

/// Per-branch z-score statistics fitted on ID calibration scores.
struct ScoreStandardizer {
    ZScoreStats st;
    ZScoreStats sv;
};

struct DetectorConfig {
    double omega = 1.0;        // fusion weight, recommended range [1, 3]
    double gamma = 0.0;        // decision threshold
    double target_tpr = 0.95;  // calibration operating point
};

enum class Decision { ID, OOD };

ScoreStandardizer fit_standardizer(const Vec& st_scores, const Vec& sv_scores);

/// z(st) + omega·z(sv).
double fuse(const ScoreStandardizer& std, double st, double sv, double omega);

/// OOD iff score strictly exceeds gamma.
Decision decide(double score, double gamma);

/// Smallest score g with fraction of ID scores <= g at least target_tpr.
double calibrate_gamma(const Vec& fused_id_scores, double target_tpr);

}  // namespace dbmf
