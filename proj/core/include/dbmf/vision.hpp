#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dbmf/data.hpp"
#include "dbmf/numerics.hpp"
#include "dbmf/text_image.hpp"  // Batch, TrainConfig, TrainTrace

namespace dbmf {

/// Linear classifier over raw embeddings, trained with cross-entropy.
struct VisionBranch {
    std::size_t d_embed = 0;
    DenseMatrix weights;  // d_embed x K
    Vec bias;             // K
    std::vector<std::string> class_names;

    std::size_t num_classes() const { return class_names.size(); }
};

/// Class-conditional Gaussian fit: per-class means plus one covariance pooled
/// over all classes, regularized with epsilon·I before factorization.
struct GaussianStats {
    std::vector<Vec> means;
    DenseMatrix covariance;
    DenseMatrix chol;  // factor of covariance + epsilon·I
    double epsilon = 0.0;

    std::size_t dim() const { return covariance.rows; }
};

struct CeGradients {
    DenseMatrix d_weights;
    Vec d_bias;
};

VisionBranch make_vision_branch(std::size_t d_embed,
                                const std::vector<std::string>& class_names,
                                std::uint64_t seed);

Vec vision_logits(const VisionBranch& branch, const Vec& embedding);

double loss_cross_entropy(const VisionBranch& branch, const Batch& batch);
CeGradients gradients_cross_entropy(const VisionBranch& branch, const Batch& batch);

TrainTrace train_vision(VisionBranch& branch, const Dataset& dataset, const TrainConfig& config);

double vision_accuracy(const VisionBranch& branch, const Batch& batch);

/// Default covariance regularization: 1e-6·trace(Σ)/d.
double default_epsilon(const DenseMatrix& covariance);

GaussianStats fit_gaussian_stats(const std::vector<std::pair<Vec, std::size_t>>& features,
                                 std::size_t num_classes, double epsilon);
GaussianStats fit_gaussian_stats(const std::vector<std::pair<Vec, std::size_t>>& features,
                                 std::size_t num_classes);

/// min_k (v − μ_k)ᵀ(Σ + εI)⁻¹(v − μ_k); higher means more OOD.
double score_sv(const GaussianStats& stats, const Vec& feature);

}  // namespace dbmf
