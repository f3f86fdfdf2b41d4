#include "dbmf/text_image.hpp"

#include <algorithm>
#include <cmath>

#include "dbmf/rng.hpp"

namespace dbmf {

namespace {

constexpr double kLogTauMin = -6.907755278982137;  // log(1e-3)
constexpr double kLogTauMax = 4.605170185988092;   // log(100)

Vec affine_forward(const TextImageBranch& b, const Vec& x) {
    if (x.size() != b.d_embed) throw DimensionMismatch("project_image: embedding length mismatch");
    Vec u = b.tlinear_bias;
    for (std::size_t i = 0; i < b.d_embed; ++i) {
        const double xi = x[i];
        const double* row = &b.tlinear_weights.data[i * b.d_proj];
        for (std::size_t j = 0; j < b.d_proj; ++j) u[j] += xi * row[j];
    }
    return u;
}

// Gradient of L through y = v/||v||: maps dL/dy to dL/dv.
Vec through_normalization(const Vec& dy, const Vec& y_hat, double norm) {
    const double proj = dot(dy, y_hat);
    Vec dv(dy.size());
    for (std::size_t i = 0; i < dy.size(); ++i) dv[i] = (dy[i] - proj * y_hat[i]) / norm;
    return dv;
}

}  // namespace

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
    if (steps < 1) throw ConfigError("train config: steps must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("train config: learning_rate must be positive");
}

double TextImageBranch::tau() const { return std::exp(log_tau); }

std::string prompt_for_class(const std::string& class_name) {
    return "a photo of normal " + class_name;
}

TextImageBranch make_text_image_branch(std::size_t d_embed, std::size_t d_proj,
                                       const std::vector<std::string>& class_names,
                                       std::uint64_t seed) {
    const std::size_t k = class_names.size();
    if (k < 2) throw InvalidK("text-image branch: need at least 2 classes");
    if (d_proj + 1 < k)
        throw ConfigError("text-image branch: d_proj must be >= K-1 for the separation optimum");

    TextImageBranch b;
    b.d_embed = d_embed;
    b.d_proj = d_proj;
    b.class_names = class_names;
    b.log_tau = std::log(0.07);

    Rng rng(seed);
    b.tlinear_weights = DenseMatrix(d_embed, d_proj);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_embed));
    for (double& w : b.tlinear_weights.data) w = scale * rng.normal();
    b.tlinear_bias.assign(d_proj, 0.0);

    // Each prototype is seeded from its prompt string so the mapping from
    // class prompt to initialization is stable across runs and orderings.
    b.prototypes.reserve(k);
    for (const auto& name : class_names) {
        Rng proto_rng(fnv1a(prompt_for_class(name)) ^ seed);
        b.prototypes.push_back(normalized(proto_rng.normal_vec(d_proj)));
    }
    return b;
}

Vec project_image(const TextImageBranch& branch, const Vec& embedding) {
    return normalized(affine_forward(branch, embedding));
}

SimilarityRow similarities(const TextImageBranch& branch, const Vec& image_feature) {
    const double inv_tau = 1.0 / branch.tau();
    SimilarityRow row;
    row.logits.resize(branch.num_classes());
    for (std::size_t j = 0; j < branch.num_classes(); ++j) {
        row.logits[j] = dot(image_feature, normalized(branch.prototypes[j])) * inv_tau;
    }
    return row;
}

double loss_contrastive(const TextImageBranch& branch, const Batch& batch) {
    if (batch.empty()) throw EmptyInput("loss_contrastive: empty batch");
    const std::size_t k = branch.num_classes();
    double total = 0.0;
    for (const auto& [x, y] : batch) {
        if (y >= k) throw LabelOutOfRange("loss_contrastive: label out of range");
        const Vec feat = project_image(branch, x);
        const Vec s = similarities(branch, feat).logits;
        total += log_sum_exp(s) - s[y];
    }
    return total / static_cast<double>(batch.size());
}

double eta_star(std::size_t k) {
    if (k < 2) throw InvalidK("eta_star: K must be >= 2");
    return -1.0 / static_cast<double>(k - 1);
}

double loss_text_separation(const TextImageBranch& branch) {
    const std::size_t k = branch.num_classes();
    const double eta = eta_star(k);
    std::vector<Vec> t(k);
    for (std::size_t i = 0; i < k; ++i) t[i] = normalized(branch.prototypes[i]);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double d = dot(t[i], t[j]) - eta;
            total += d * d;
        }
    }
    return total / static_cast<double>(k * k - k);
}

double loss_tsc(const TextImageBranch& branch, const Batch& batch, double lambda) {
    return loss_contrastive(branch, batch) + lambda * loss_text_separation(branch);
}

TscGradients gradients_tsc(const TextImageBranch& branch, const Batch& batch, double lambda) {
    if (batch.empty()) throw EmptyInput("gradients_tsc: empty batch");
    const std::size_t k = branch.num_classes();
    const std::size_t dp = branch.d_proj;
    const double tau = branch.tau();
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    TscGradients g;
    g.d_weights = DenseMatrix(branch.d_embed, dp);
    g.d_bias.assign(dp, 0.0);
    g.d_prototypes.assign(k, Vec(dp, 0.0));
    g.d_log_tau = 0.0;

    std::vector<Vec> t_hat(k);
    std::vector<double> t_norm(k);
    for (std::size_t j = 0; j < k; ++j) {
        t_norm[j] = norm2(branch.prototypes[j]);
        t_hat[j] = normalized(branch.prototypes[j]);
    }

    // Contrastive term. Accumulated in normalized-prototype coordinates,
    // mapped back through the prototype normalization at the end.
    std::vector<Vec> d_t_hat(k, Vec(dp, 0.0));
    for (const auto& [x, y] : batch) {
        if (y >= k) throw LabelOutOfRange("gradients_tsc: label out of range");
        const Vec u = affine_forward(branch, x);
        const double nu = norm2(u);
        if (nu < 1e-12) throw ZeroVector("gradients_tsc: zero pre-normalization feature");
        Vec feat(dp);
        for (std::size_t j = 0; j < dp; ++j) feat[j] = u[j] / nu;

        Vec s(k);
        for (std::size_t j = 0; j < k; ++j) s[j] = dot(feat, t_hat[j]) / tau;
        const Vec p = softmax(s);

        Vec d_feat(dp, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            const double dls = (p[j] - (j == y ? 1.0 : 0.0)) * inv_n;  // dL/ds_j
            g.d_log_tau -= dls * s[j];                                 // ds_j/dlog_tau = -s_j
            const double dlc = dls / tau;                              // dL/d(cosine)
            for (std::size_t q = 0; q < dp; ++q) {
                d_feat[q] += dlc * t_hat[j][q];
                d_t_hat[j][q] += dlc * feat[q];
            }
        }
        const Vec d_u = through_normalization(d_feat, feat, nu);
        for (std::size_t i = 0; i < branch.d_embed; ++i) {
            const double xi = x[i];
            double* row = &g.d_weights.data[i * dp];
            for (std::size_t q = 0; q < dp; ++q) row[q] += xi * d_u[q];
        }
        for (std::size_t q = 0; q < dp; ++q) g.d_bias[q] += d_u[q];
    }

    // Separation term: each unordered pair appears twice in the ordered sum.
    if (lambda != 0.0) {
        const double eta = eta_star(k);
        const double coef = 4.0 * lambda / static_cast<double>(k * k - k);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                if (a == b) continue;
                const double d = dot(t_hat[a], t_hat[b]) - eta;
                for (std::size_t q = 0; q < dp; ++q) d_t_hat[a][q] += coef * d * t_hat[b][q];
            }
        }
    }

    for (std::size_t j = 0; j < k; ++j) {
        g.d_prototypes[j] = through_normalization(d_t_hat[j], t_hat[j], t_norm[j]);
    }
    return g;
}

namespace {

Batch collect_train_batch(const Dataset& dataset, std::size_t k) {
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
            throw TooFewSamples("training: class " + std::to_string(c) + " has no train samples");
    }
    return all;
}

}  // namespace

TrainTrace train_text_image(TextImageBranch& branch, const Dataset& dataset,
                            const TrainConfig& config) {
    config.validate();
    const std::size_t k = branch.num_classes();
    const Batch all = collect_train_batch(dataset, k);

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
        const double loss = loss_tsc(branch, batch, config.lambda);
        if (!std::isfinite(loss)) throw NumericalFailure("train_text_image: non-finite loss");
        trace.losses.push_back(loss);

        const TscGradients g = gradients_tsc(branch, batch, config.lambda);
        const double lr = config.learning_rate;
        for (std::size_t i = 0; i < branch.tlinear_weights.data.size(); ++i) {
            branch.tlinear_weights.data[i] -= lr * g.d_weights.data[i];
        }
        for (std::size_t j = 0; j < branch.d_proj; ++j) branch.tlinear_bias[j] -= lr * g.d_bias[j];
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t q = 0; q < branch.d_proj; ++q) {
                branch.prototypes[j][q] -= lr * g.d_prototypes[j][q];
            }
            branch.prototypes[j] = normalized(branch.prototypes[j]);
        }
        branch.log_tau =
            std::clamp(branch.log_tau - lr * g.d_log_tau, kLogTauMin, kLogTauMax);
    }
    return trace;
}

double st_from_logits(const Vec& logits) {
    if (logits.empty()) throw EmptyInput("st_from_logits: empty logits");
    double min_neg = -logits[0];
    double sum_neg = 0.0;
    for (double v : logits) {
        min_neg = std::min(min_neg, -v);
        sum_neg += -v;
    }
    return 2.0 * min_neg - sum_neg;
}

double score_st(const TextImageBranch& branch, const Vec& embedding) {
    return st_from_logits(similarities(branch, project_image(branch, embedding)).logits);
}

double top1_accuracy(const TextImageBranch& branch, const Batch& batch) {
    if (batch.empty()) throw EmptyInput("top1_accuracy: empty batch");
    std::size_t hits = 0;
    for (const auto& [x, y] : batch) {
        const Vec s = similarities(branch, project_image(branch, x)).logits;
        const std::size_t arg =
            static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
        if (arg == y) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(batch.size());
}

std::vector<Vec> simplex_frame(std::size_t k, std::size_t dim) {
    if (k < 2) throw InvalidK("simplex_frame: K must be >= 2");
    if (dim + 1 < k) throw ConfigError("simplex_frame: dim must be >= K-1");
    // Centered standard basis in R^K: v_i = e_i - (1/K)·1, normalized.
    std::vector<Vec> frame(k, Vec(k, -1.0 / static_cast<double>(k)));
    for (std::size_t i = 0; i < k; ++i) {
        frame[i][i] += 1.0;
        frame[i] = normalized(frame[i]);
    }
    if (dim == k - 1) {
        // Express in an orthonormal basis of the spanned (K-1)-dim subspace.
        std::vector<Vec> basis;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            Vec v = frame[i];
            for (const auto& b : basis) {
                const double p = dot(v, b);
                for (std::size_t q = 0; q < k; ++q) v[q] -= p * b[q];
            }
            basis.push_back(normalized(v));
        }
        std::vector<Vec> out(k, Vec(dim));
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < dim; ++j) out[i][j] = dot(frame[i], basis[j]);
        }
        return out;
    }
    std::vector<Vec> out(k, Vec(dim, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        std::copy(frame[i].begin(), frame[i].end(), out[i].begin());
    }
    return out;
}

}  // namespace dbmf
