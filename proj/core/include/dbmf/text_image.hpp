#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dbmf/data.hpp"
#include "dbmf/numerics.hpp"

namespace dbmf {

/// One training batch: (embedding, class label) pairs.
using Batch = std::vector<std::pair<Vec, std::size_t>>;

struct TrainConfig {
    std::size_t batch_size = 32;
    double learning_rate = 0.5;
    std::size_t steps = 500;
    double lambda = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Linear image projection plus K learnable unit-norm class prototypes and a
/// learnable temperature. Prototypes are stored unit-norm; the forward pass
/// still normalizes so the loss is well defined for perturbed parameters.
struct TextImageBranch {
    std::size_t d_embed = 0;
    std::size_t d_proj = 0;
    DenseMatrix tlinear_weights;  // d_embed x d_proj
    Vec tlinear_bias;             // d_proj
    std::vector<Vec> prototypes;  // K vectors of dim d_proj
    double log_tau = 0.0;
    std::vector<std::string> class_names;

    std::size_t num_classes() const { return prototypes.size(); }
    double tau() const;
};

struct SimilarityRow {
    Vec logits;  // K cosine similarities divided by tau
};

struct TscGradients {
    DenseMatrix d_weights;
    Vec d_bias;
    std::vector<Vec> d_prototypes;
    double d_log_tau = 0.0;
};

struct TrainTrace {
    Vec losses;  // batch loss per step, before the update
};

/// Prompt used to seed each class prototype.
std::string prompt_for_class(const std::string& class_name);

/// Requires d_proj >= K-1 so the simplex optimum of the separation loss is
/// attainable.
TextImageBranch make_text_image_branch(std::size_t d_embed, std::size_t d_proj,
                                       const std::vector<std::string>& class_names,
                                       std::uint64_t seed);

Vec project_image(const TextImageBranch& branch, const Vec& embedding);
SimilarityRow similarities(const TextImageBranch& branch, const Vec& image_feature);

double loss_contrastive(const TextImageBranch& branch, const Batch& batch);
double eta_star(std::size_t k);
double loss_text_separation(const TextImageBranch& branch);
double loss_tsc(const TextImageBranch& branch, const Batch& batch, double lambda);

TscGradients gradients_tsc(const TextImageBranch& branch, const Batch& batch, double lambda);

TrainTrace train_text_image(TextImageBranch& branch, const Dataset& dataset,
                            const TrainConfig& config);

/// 2·min_j(−s_j) − Σ_j(−s_j); higher means more OOD.
double st_from_logits(const Vec& logits);
double score_st(const TextImageBranch& branch, const Vec& embedding);

/// Fraction of samples whose argmax similarity matches their label.
double top1_accuracy(const TextImageBranch& branch, const Batch& batch);

/// K unit vectors with every pairwise inner product equal to -1/(K-1).
/// Built from the centered standard basis in R^K; requires dim >= K-1.
std::vector<Vec> simplex_frame(std::size_t k, std::size_t dim);

}  // namespace dbmf
