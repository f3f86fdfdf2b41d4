#include "dbmf/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace dbmf {

namespace {

std::pair<Vec, Vec> split_scores(const std::vector<ScoredSample>& samples) {
    Vec id_scores;
    Vec ood_scores;
    for (const auto& s : samples) {
        if (!std::isfinite(s.score)) throw Error("metrics: non-finite score for sample " + s.id);
        (s.is_ood ? ood_scores : id_scores).push_back(s.score);
    }
    if (id_scores.empty() || ood_scores.empty())
        throw OneClassOnly("metrics: need at least one ID and one OOD sample");
    return {std::move(id_scores), std::move(ood_scores)};
}

}  // namespace

double auroc(const std::vector<ScoredSample>& samples) {
    auto [id_scores, ood_scores] = split_scores(samples);
    struct Entry {
        double score;
        bool ood;
    };
    std::vector<Entry> all;
    all.reserve(samples.size());
    for (double s : id_scores) all.push_back({s, false});
    for (double s : ood_scores) all.push_back({s, true});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Midranks over tie groups; Mann-Whitney U from the OOD rank sum.
    double rank_sum_ood = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t q = i; q < j; ++q) {
            if (all[q].ood) rank_sum_ood += midrank;
        }
        i = j;
    }
    const double n_o = static_cast<double>(ood_scores.size());
    const double n_i = static_cast<double>(id_scores.size());
    const double u = rank_sum_ood - n_o * (n_o + 1.0) / 2.0;
    return u / (n_o * n_i);
}

double fpr_at_tpr(const std::vector<ScoredSample>& samples, double target_tpr) {
    if (!(target_tpr > 0.0 && target_tpr <= 1.0))
        throw ConfigError("fpr_at_tpr: target_tpr must be in (0, 1]");
    auto [id_scores, ood_scores] = split_scores(samples);
    std::sort(id_scores.begin(), id_scores.end());
    const double n = static_cast<double>(id_scores.size());
    std::size_t idx = static_cast<std::size_t>(std::ceil(target_tpr * n));
    if (idx > 0) --idx;
    const double t = id_scores[std::min(idx, id_scores.size() - 1)];
    std::size_t below = 0;
    for (double s : ood_scores) {
        if (s <= t) ++below;
    }
    return static_cast<double>(below) / static_cast<double>(ood_scores.size());
}

std::vector<std::pair<double, double>> roc_curve(const std::vector<ScoredSample>& samples) {
    auto [id_scores, ood_scores] = split_scores(samples);
    struct Entry {
        double score;
        bool ood;
    };
    std::vector<Entry> all;
    all.reserve(samples.size());
    for (double s : id_scores) all.push_back({s, false});
    for (double s : ood_scores) all.push_back({s, true});
    std::sort(all.begin(), all.end(),
              [](const Entry& a, const Entry& b) { return a.score > b.score; });

    std::vector<std::pair<double, double>> points;
    points.emplace_back(0.0, 0.0);
    const double n_i = static_cast<double>(id_scores.size());
    const double n_o = static_cast<double>(ood_scores.size());
    std::size_t fp = 0;
    std::size_t tp = 0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        // Tied scores cross the threshold together.
        while (j < all.size() && all[j].score == all[i].score) {
            if (all[j].ood) {
                ++tp;
            } else {
                ++fp;
            }
            ++j;
        }
        points.emplace_back(static_cast<double>(fp) / n_i, static_cast<double>(tp) / n_o);
        i = j;
    }
    return points;
}

std::pair<DensityCurve, DensityCurve> density_report(const std::vector<ScoredSample>& samples,
                                                     std::optional<double> bandwidth) {
    Vec all_scores;
    all_scores.reserve(samples.size());
    for (const auto& s : samples) all_scores.push_back(s.score);
    const Vec rescaled = minmax_rescale(all_scores);

    Vec id_scores;
    Vec ood_scores;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (samples[i].is_ood ? ood_scores : id_scores).push_back(rescaled[i]);
    }
    if (id_scores.size() < 2 || ood_scores.size() < 2)
        throw TooFewSamples("density_report: need >= 2 samples per group");

    const double h_id = bandwidth.value_or(silverman_bandwidth(id_scores));
    const double h_ood = bandwidth.value_or(silverman_bandwidth(ood_scores));
    const double h_max = std::max(h_id, h_ood);

    // Shared grid over the joint [0,1] range padded by 3 bandwidths.
    constexpr std::size_t kGridPoints = 256;
    Vec grid(kGridPoints);
    const double lo = -3.0 * h_max;
    const double hi = 1.0 + 3.0 * h_max;
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kGridPoints - 1);
    }
    return {gaussian_kde(id_scores, h_id, grid), gaussian_kde(ood_scores, h_ood, grid)};
}

EvalReport make_report(const std::vector<ScoredSample>& samples, std::optional<double> bandwidth) {
    EvalReport report;
    report.auroc = auroc(samples);
    report.fpr95 = fpr_at_tpr(samples, 0.95);
    report.roc_points = roc_curve(samples);
    auto [id_density, ood_density] = density_report(samples, bandwidth);
    report.id_density = std::move(id_density);
    report.ood_density = std::move(ood_density);
    for (const auto& s : samples) {
        if (s.is_ood) {
            ++report.n_ood;
        } else {
            ++report.n_id;
        }
    }
    report.scores = samples;
    return report;
}

}  // namespace dbmf
