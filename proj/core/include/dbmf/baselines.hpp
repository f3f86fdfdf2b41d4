#pragma once

#include <optional>
#include <string>

#include "dbmf/numerics.hpp"
#include "dbmf/vision.hpp"

namespace dbmf {

enum class BaselineKind { MSP, MaxLogit, Energy, Entropy, MahalanobisVanilla };

std::optional<BaselineKind> baseline_from_name(const std::string& name);
std::string baseline_name(BaselineKind kind);

// All baselines orient higher = more OOD.

/// −max softmax probability.
double score_msp(const Vec& logits);

/// −max logit.
double score_max_logit(const Vec& logits);

/// −log Σ exp(logits), temperature 1.
double score_energy(const Vec& logits);

/// Softmax entropy.
double score_entropy(const Vec& logits);

/// Mahalanobis score on raw embeddings; same computation as score_sv.
double score_mahalanobis_vanilla(const GaussianStats& stats, const Vec& feature);

}  // namespace dbmf
