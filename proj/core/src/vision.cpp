#include "dbmf/vision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dbmf/rng.hpp"

namespace dbmf {

VisionBranch make_vision_branch(std::size_t d_embed,
                                const std::vector<std::string>& class_names,
                                std::uint64_t seed) {
    const std::size_t k = class_names.size();
    if (k < 2) throw InvalidK("vision branch: need at least 2 classes");
    VisionBranch b;
    b.d_embed = d_embed;
    b.class_names = class_names;
    b.weights = DenseMatrix(d_embed, k);
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_embed));
    for (double& w : b.weights.data) w = scale * rng.normal();
    b.bias.assign(k, 0.0);
    return b;
}

Vec vision_logits(const VisionBranch& branch, const Vec& embedding) {
    if (embedding.size() != branch.d_embed)
        throw DimensionMismatch("vision_logits: embedding length mismatch");
    const std::size_t k = branch.num_classes();
    Vec logits = branch.bias;
    for (std::size_t i = 0; i < branch.d_embed; ++i) {
        const double xi = embedding[i];
        const double* row = &branch.weights.data[i * k];
        for (std::size_t j = 0; j < k; ++j) logits[j] += xi * row[j];
    }
    return logits;
}

double loss_cross_entropy(const VisionBranch& branch, const Batch& batch) {
    if (batch.empty()) throw EmptyInput("loss_cross_entropy: empty batch");
    const std::size_t k = branch.num_classes();
    double total = 0.0;
    for (const auto& [x, y] : batch) {
        if (y >= k) throw LabelOutOfRange("loss_cross_entropy: label out of range");
        const Vec z = vision_logits(branch, x);
        total += log_sum_exp(z) - z[y];
    }
    return total / static_cast<double>(batch.size());
}

CeGradients gradients_cross_entropy(const VisionBranch& branch, const Batch& batch) {
    if (batch.empty()) throw EmptyInput("gradients_cross_entropy: empty batch");
    const std::size_t k = branch.num_classes();
    CeGradients g;
    g.d_weights = DenseMatrix(branch.d_embed, k);
    g.d_bias.assign(k, 0.0);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto& [x, y] : batch) {
        if (y >= k) throw LabelOutOfRange("gradients_cross_entropy: label out of range");
        const Vec p = softmax(vision_logits(branch, x));
        for (std::size_t j = 0; j < k; ++j) {
            const double dz = (p[j] - (j == y ? 1.0 : 0.0)) * inv_n;
            g.d_bias[j] += dz;
            for (std::size_t i = 0; i < branch.d_embed; ++i) {
                g.d_weights.data[i * k + j] += x[i] * dz;
            }
        }
    }
    return g;
}

TrainTrace train_vision(VisionBranch& branch, const Dataset& dataset, const TrainConfig& config) {
    config.validate();
    const std::size_t k = branch.num_classes();
    Batch all;
    std::vector<std::size_t> per_class(k, 0);
    for (const auto& s : dataset.samples) {
        if (s.split == Split::Train && !s.is_ood) {
            all.emplace_back(s.embedding, *s.label);
            ++per_class[*s.label];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (per_class[c] == 0)
            throw TooFewSamples("train_vision: class " + std::to_string(c) + " has no train samples");
    }

    Rng rng(config.seed);
    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::size_t cursor = 0;

    TrainTrace trace;
    trace.losses.reserve(config.steps);
    const std::size_t bs = std::min(config.batch_size, all.size());
    Batch batch;
    batch.reserve(bs);
    for (std::size_t step = 0; step < config.steps; ++step) {
        batch.clear();
        for (std::size_t i = 0; i < bs; ++i) {
            if (cursor == order.size()) {
                rng.shuffle(order);
                cursor = 0;
            }
            batch.push_back(all[order[cursor++]]);
        }
        const double loss = loss_cross_entropy(branch, batch);
        if (!std::isfinite(loss)) throw NumericalFailure("train_vision: non-finite loss");
        trace.losses.push_back(loss);
        const CeGradients g = gradients_cross_entropy(branch, batch);
        for (std::size_t i = 0; i < branch.weights.data.size(); ++i) {
            branch.weights.data[i] -= config.learning_rate * g.d_weights.data[i];
        }
        for (std::size_t j = 0; j < k; ++j) branch.bias[j] -= config.learning_rate * g.d_bias[j];
    }
    return trace;
}

double vision_accuracy(const VisionBranch& branch, const Batch& batch) {
    if (batch.empty()) throw EmptyInput("vision_accuracy: empty batch");
    std::size_t hits = 0;
    for (const auto& [x, y] : batch) {
        const Vec z = vision_logits(branch, x);
        const std::size_t arg =
            static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
        if (arg == y) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(batch.size());
}

double default_epsilon(const DenseMatrix& covariance) {
    double tr = 0.0;
    for (std::size_t i = 0; i < covariance.rows; ++i) tr += covariance(i, i);
    const double eps = 1e-6 * tr / static_cast<double>(covariance.rows);
    return std::max(eps, 1e-12);
}

GaussianStats fit_gaussian_stats(const std::vector<std::pair<Vec, std::size_t>>& features,
                                 std::size_t num_classes, double epsilon) {
    if (features.size() < 2) throw TooFewSamples("fit_gaussian_stats: need >= 2 samples");
    const std::size_t d = features.front().first.size();

    GaussianStats stats;
    stats.means.assign(num_classes, Vec(d, 0.0));
    std::vector<std::size_t> counts(num_classes, 0);
    for (const auto& [v, y] : features) {
        if (y >= num_classes) throw LabelOutOfRange("fit_gaussian_stats: label out of range");
        if (v.size() != d) throw DimensionMismatch("fit_gaussian_stats: feature length mismatch");
        for (std::size_t i = 0; i < d; ++i) stats.means[y][i] += v[i];
        ++counts[y];
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (counts[c] == 0)
            throw TooFewSamples("fit_gaussian_stats: class " + std::to_string(c) + " empty");
        for (double& m : stats.means[c]) m /= static_cast<double>(counts[c]);
    }

    // Pooled scatter over all classes, divided by n_train (population convention).
    stats.covariance = DenseMatrix(d, d);
    Vec delta(d);
    for (const auto& [v, y] : features) {
        for (std::size_t i = 0; i < d; ++i) delta[i] = v[i] - stats.means[y][i];
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                stats.covariance(i, j) += delta[i] * delta[j];
            }
        }
    }
    for (double& v : stats.covariance.data) v /= static_cast<double>(features.size());

    stats.epsilon = epsilon;
    DenseMatrix reg = stats.covariance;
    for (std::size_t i = 0; i < d; ++i) reg(i, i) += epsilon;
    stats.chol = cholesky(reg);
    return stats;
}

GaussianStats fit_gaussian_stats(const std::vector<std::pair<Vec, std::size_t>>& features,
                                 std::size_t num_classes) {
    if (features.size() < 2) throw TooFewSamples("fit_gaussian_stats: need >= 2 samples");
    // Two passes: the default epsilon depends on the fitted covariance trace.
    // The scatter computation is cheap at this scale, so refit with the
    // derived epsilon rather than duplicating the accumulation.
    GaussianStats first = fit_gaussian_stats(features, num_classes, 1.0);
    return fit_gaussian_stats(features, num_classes, default_epsilon(first.covariance));
}

double score_sv(const GaussianStats& stats, const Vec& feature) {
    const std::size_t d = stats.dim();
    if (feature.size() != d) throw DimensionMismatch("score_sv: feature length mismatch");
    double best = std::numeric_limits<double>::infinity();
    Vec delta(d);
    for (const auto& mu : stats.means) {
        for (std::size_t i = 0; i < d; ++i) delta[i] = feature[i] - mu[i];
        const Vec x = spd_solve(stats.chol, delta);
        best = std::min(best, dot(delta, x));
    }
    return best;
}

}  // namespace dbmf
