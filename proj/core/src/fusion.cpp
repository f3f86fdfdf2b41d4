#include "dbmf/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace dbmf {

ScoreStandardizer fit_standardizer(const Vec& st_scores, const Vec& sv_scores) {
    if (st_scores.size() < 2 || sv_scores.size() < 2)
        throw TooFewSamples("fit_standardizer: need >= 2 calibration scores per stream");
    return {zscore_fit(st_scores), zscore_fit(sv_scores)};
}

double fuse(const ScoreStandardizer& std, double st, double sv, double omega) {
    return std.st.apply(st) + omega * std.sv.apply(sv);
}

Decision decide(double score, double gamma) {
    return score > gamma ? Decision::OOD : Decision::ID;
}

double calibrate_gamma(const Vec& fused_id_scores, double target_tpr) {
    if (fused_id_scores.size() < 20)
        throw TooFewSamples("calibrate_gamma: need >= 20 calibration ID scores");
    if (!(target_tpr > 0.0 && target_tpr <= 1.0))
        throw ConfigError("calibrate_gamma: target_tpr must be in (0, 1]");
    Vec sorted = fused_id_scores;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::size_t idx = static_cast<std::size_t>(std::ceil(target_tpr * n));
    if (idx > 0) --idx;
    return sorted[std::min(idx, sorted.size() - 1)];
}

}  // namespace dbmf
