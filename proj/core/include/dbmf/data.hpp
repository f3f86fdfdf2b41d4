#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbmf/numerics.hpp"

namespace dbmf {

enum class Split { Train, Test };

/// One sample: an embedding vector with an ID class label or an OOD flag.
struct LabeledEmbedding {
    std::string id;
    Vec embedding;
    std::optional<std::size_t> label;  // absent iff is_ood
    bool is_ood = false;
    Split split = Split::Test;
};

struct Dataset {
    std::size_t dim = 0;
    std::vector<std::string> class_names;
    std::vector<LabeledEmbedding> samples;

    std::size_t num_classes() const { return class_names.size(); }
    void validate() const;  // throws on any invariant violation
};

/// Seeded synthetic generator config: isotropic Gaussian ID clusters plus
/// OOD clusters displaced from every ID mean.
struct SynthConfig {
    std::size_t dim = 16;
    std::size_t num_id_classes = 3;
    std::size_t samples_per_class = 50;
    std::size_t ood_clusters = 2;
    std::size_t ood_samples = 60;
    double cluster_spread = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

Dataset load_jsonl(const std::string& path);
void save_jsonl(const Dataset& dataset, const std::string& path);

/// Per-class stratified 8:2 split of the ID samples; all OOD samples go to
/// test. Deterministic under seed.
std::pair<Dataset, Dataset> split_id_8_2(const Dataset& dataset, std::uint64_t seed);

/// Tags splits in place (same protocol as split_id_8_2 but keeps one dataset).
void tag_split_id_8_2(Dataset& dataset, std::uint64_t seed);

/// The seeded cluster means generate_synthetic samples around.
struct SynthLayout {
    std::vector<Vec> id_means;
    std::vector<Vec> ood_means;
};

SynthLayout synthetic_layout(const SynthConfig& config);

Dataset generate_synthetic(const SynthConfig& config);

/// Scenario where one OOD group is detectable only by prototype-direction
/// scoring and the other only by Mahalanobis distance: ID classes sit on
/// distinct axes with large radial (per-class-direction) noise, group A lies
/// at angular midpoints between class axes at ID-typical radius, group B lies
/// on a class axis at an anomalous radius.
struct ComplementaryConfig {
    std::size_t dim = 6;
    std::size_t num_id_classes = 3;
    std::size_t samples_per_class = 80;
    std::size_t ood_per_group = 40;
    double radius = 1.0;
    double radial_noise = 0.4;
    double iso_noise = 0.04;
    std::uint64_t seed = 0;
};

Dataset generate_complementary(const ComplementaryConfig& config);

std::vector<const LabeledEmbedding*> select_split(const Dataset& d, Split s);

}  // namespace dbmf
