#include "dbmf/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "dbmf/rng.hpp"

namespace dbmf {

using nlohmann::json;

void Dataset::validate() const {
    if (class_names.size() < 2) throw ParseError("dataset: need at least 2 classes");
    for (const auto& s : samples) {
        if (s.embedding.size() != dim) throw InconsistentDim("sample " + s.id + ": embedding length mismatch");
        for (double v : s.embedding) {
            if (!std::isfinite(v)) throw ParseError("sample " + s.id + ": non-finite embedding value");
        }
        if (s.is_ood) {
            if (s.label.has_value()) throw ParseError("sample " + s.id + ": OOD sample carries a label");
            if (s.split != Split::Test) throw ParseError("sample " + s.id + ": OOD sample not in test split");
        } else {
            if (!s.label.has_value()) throw ParseError("sample " + s.id + ": ID sample missing label");
            if (*s.label >= class_names.size())
                throw LabelOutOfRange("sample " + s.id + ": label out of range");
        }
    }
}

void SynthConfig::validate() const {
    if (dim < 1 || num_id_classes < 1 || samples_per_class < 1 || ood_clusters < 1 || ood_samples < 1)
        throw ConfigError("synth config: all counts must be >= 1");
    if (!(cluster_spread > 0.0)) throw ConfigError("synth config: cluster_spread must be positive");
}

namespace {

Split parse_split(const std::string& s, std::size_t line_no) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    throw ParseError("line " + std::to_string(line_no) + ": unknown split '" + s + "'");
}

}  // namespace

Dataset load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!have_header) {
            if (!j.contains("dim") || !j.contains("class_names"))
                throw ParseError("line " + std::to_string(line_no) + ": missing dataset header");
            ds.dim = j.at("dim").get<std::size_t>();
            ds.class_names = j.at("class_names").get<std::vector<std::string>>();
            have_header = true;
            continue;
        }
        LabeledEmbedding s;
        try {
            s.id = j.at("id").get<std::string>();
            s.split = parse_split(j.at("split").get<std::string>(), line_no);
            s.is_ood = j.at("ood").get<bool>();
            if (!j.at("label").is_null()) {
                const long long lab = j.at("label").get<long long>();
                if (lab < 0) throw LabelOutOfRange("line " + std::to_string(line_no) + ": negative label");
                s.label = static_cast<std::size_t>(lab);
            }
            s.embedding = j.at("embedding").get<Vec>();
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (s.embedding.size() != ds.dim)
            throw InconsistentDim("line " + std::to_string(line_no) + ": embedding length != dim");
        if (s.is_ood && s.label.has_value())
            throw ParseError("line " + std::to_string(line_no) + ": OOD record carries a label");
        if (!s.is_ood && !s.label.has_value())
            throw ParseError("line " + std::to_string(line_no) + ": ID record missing label");
        if (s.label.has_value() && *s.label >= ds.class_names.size())
            throw LabelOutOfRange("line " + std::to_string(line_no) + ": label out of range");
        ds.samples.push_back(std::move(s));
    }
    if (!have_header) throw ParseError("empty file: missing dataset header");
    ds.validate();
    return ds;
}

void save_jsonl(const Dataset& dataset, const std::string& path) {
    dataset.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    json header;
    header["dim"] = dataset.dim;
    header["class_names"] = dataset.class_names;
    out << header.dump() << '\n';
    for (const auto& s : dataset.samples) {
        json j;
        j["id"] = s.id;
        j["split"] = (s.split == Split::Train) ? "train" : "test";
        if (s.label.has_value()) {
            j["label"] = *s.label;
        } else {
            j["label"] = nullptr;
        }
        j["ood"] = s.is_ood;
        j["embedding"] = s.embedding;
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

void tag_split_id_8_2(Dataset& dataset, std::uint64_t seed) {
    const std::size_t k = dataset.num_classes();
    std::vector<std::vector<std::size_t>> by_class(k);
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        auto& s = dataset.samples[i];
        if (s.is_ood) {
            s.split = Split::Test;
        } else {
            by_class[*s.label].push_back(i);
        }
    }
    Rng rng(seed);
    for (std::size_t c = 0; c < k; ++c) {
        auto& idx = by_class[c];
        if (idx.size() < 5)
            throw TooFewSamples("split: class " + std::to_string(c) + " has fewer than 5 ID samples");
        rng.shuffle(idx);
        const std::size_t n_train =
            static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(idx.size()) + 0.5));
        for (std::size_t j = 0; j < idx.size(); ++j) {
            dataset.samples[idx[j]].split = (j < n_train) ? Split::Train : Split::Test;
        }
    }
}

std::pair<Dataset, Dataset> split_id_8_2(const Dataset& dataset, std::uint64_t seed) {
    Dataset tagged = dataset;
    tag_split_id_8_2(tagged, seed);
    Dataset train{tagged.dim, tagged.class_names, {}};
    Dataset test{tagged.dim, tagged.class_names, {}};
    for (const auto& s : tagged.samples) {
        (s.split == Split::Train ? train : test).samples.push_back(s);
    }
    return {std::move(train), std::move(test)};
}

namespace {

// Orthonormal class means when K <= dim (Gram-Schmidt over seeded Gaussian
// draws), random unit directions otherwise.
std::vector<Vec> seeded_class_means(Rng& rng, std::size_t k, std::size_t dim) {
    std::vector<Vec> means;
    means.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        Vec v = rng.normal_vec(dim);
        if (k <= dim) {
            for (const auto& m : means) {
                const double p = dot(v, m);
                for (std::size_t i = 0; i < dim; ++i) v[i] -= p * m[i];
            }
        }
        means.push_back(normalized(v));
    }
    return means;
}

}  // namespace

namespace {

SynthLayout layout_with_rng(Rng& rng, const SynthConfig& config) {
    SynthLayout layout;
    layout.id_means = seeded_class_means(rng, config.num_id_classes, config.dim);

    Vec centroid(config.dim, 0.0);
    for (const auto& m : layout.id_means) {
        for (std::size_t i = 0; i < config.dim; ++i) centroid[i] += m[i];
    }
    for (double& v : centroid) v /= static_cast<double>(layout.id_means.size());
    double max_radius = 0.0;
    for (const auto& m : layout.id_means) {
        Vec d(config.dim);
        for (std::size_t i = 0; i < config.dim; ++i) d[i] = m[i] - centroid[i];
        max_radius = std::max(max_radius, norm2(d));
    }

    // OOD cluster means sit outside the ID shell, at least 12 spreads beyond
    // the farthest ID mean, so every OOD mean is >= 4 spreads from all ID means.
    const double displacement = max_radius + 12.0 * config.cluster_spread;
    for (std::size_t c = 0; c < config.ood_clusters; ++c) {
        Vec u = normalized(rng.normal_vec(config.dim));
        Vec m(config.dim);
        for (std::size_t i = 0; i < config.dim; ++i) m[i] = centroid[i] + displacement * u[i];
        layout.ood_means.push_back(std::move(m));
    }
    return layout;
}

}  // namespace

SynthLayout synthetic_layout(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    return layout_with_rng(rng, config);
}

Dataset generate_synthetic(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);

    Dataset ds;
    ds.dim = config.dim;
    for (std::size_t c = 0; c < config.num_id_classes; ++c) {
        ds.class_names.push_back("class_" + std::to_string(c));
    }
    if (ds.class_names.size() < 2) ds.class_names.push_back("class_pad");

    const SynthLayout layout = layout_with_rng(rng, config);
    const auto& means = layout.id_means;
    const auto& ood_means = layout.ood_means;

    std::size_t counter = 0;
    for (std::size_t c = 0; c < config.num_id_classes; ++c) {
        for (std::size_t s = 0; s < config.samples_per_class; ++s) {
            LabeledEmbedding e;
            e.id = "id_" + std::to_string(counter++);
            e.label = c;
            e.is_ood = false;
            e.split = Split::Train;
            e.embedding.resize(config.dim);
            for (std::size_t i = 0; i < config.dim; ++i) {
                e.embedding[i] = means[c][i] + config.cluster_spread * rng.normal();
            }
            ds.samples.push_back(std::move(e));
        }
    }
    for (std::size_t s = 0; s < config.ood_samples; ++s) {
        const auto& m = ood_means[s % config.ood_clusters];
        LabeledEmbedding e;
        e.id = "ood_" + std::to_string(counter++);
        e.is_ood = true;
        e.split = Split::Test;
        e.embedding.resize(config.dim);
        for (std::size_t i = 0; i < config.dim; ++i) {
            e.embedding[i] = m[i] + config.cluster_spread * rng.normal();
        }
        ds.samples.push_back(std::move(e));
    }
    ds.validate();
    return ds;
}

Dataset generate_complementary(const ComplementaryConfig& config) {
    if (config.dim < config.num_id_classes)
        throw ConfigError("complementary config: dim must be >= num_id_classes");
    if (config.num_id_classes < 2) throw ConfigError("complementary config: need >= 2 classes");
    Rng rng(config.seed);

    Dataset ds;
    ds.dim = config.dim;
    for (std::size_t c = 0; c < config.num_id_classes; ++c) {
        ds.class_names.push_back("axis_" + std::to_string(c));
    }

    const std::size_t k = config.num_id_classes;
    std::size_t counter = 0;
    auto add_iso = [&](Vec& x) {
        for (double& v : x) v += config.iso_noise * rng.normal();
    };

    // ID class c: on axis e_c at radius R with large radial noise. Radial
    // noise moves samples along their class direction, so the prototype
    // branch sees tightly clustered directions while the pooled covariance
    // picks up large variance along every class axis.
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t s = 0; s < config.samples_per_class; ++s) {
            LabeledEmbedding e;
            e.id = "id_" + std::to_string(counter++);
            e.label = c;
            e.split = Split::Train;
            Vec x(config.dim, 0.0);
            x[c] = config.radius + config.radial_noise * rng.normal();
            add_iso(x);
            e.embedding = std::move(x);
            ds.samples.push_back(std::move(e));
        }
    }
    // Group A: angular midpoints between adjacent class axes at ID-typical
    // Mahalanobis radius — visible to the prototype branch only.
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t s = 0; s < config.ood_per_group; ++s) {
        const std::size_t a = s % k;
        const std::size_t b = (a + 1) % k;
        LabeledEmbedding e;
        e.id = "oodA_" + std::to_string(counter++);
        e.is_ood = true;
        e.split = Split::Test;
        Vec x(config.dim, 0.0);
        // Radius near R/sqrt(2) minimizes the distance to the nearest class
        // mean, keeping group A inside the Mahalanobis-typical range.
        const double r = config.radius * (0.65 + 0.15 * rng.uniform());
        x[a] = r * inv_sqrt2;
        x[b] = r * inv_sqrt2;
        add_iso(x);
        e.embedding = std::move(x);
        ds.samples.push_back(std::move(e));
    }
    // Group B: on a class axis at an anomalous radius — direction looks like
    // a confident ID class, only the Mahalanobis geometry flags it.
    for (std::size_t s = 0; s < config.ood_per_group; ++s) {
        const std::size_t a = s % k;
        LabeledEmbedding e;
        e.id = "oodB_" + std::to_string(counter++);
        e.is_ood = true;
        e.split = Split::Test;
        // Drawn exactly like an ID sample of class a, then rescaled to an
        // anomalous norm: the direction distribution matches ID, so only the
        // radius is out of distribution.
        Vec x(config.dim, 0.0);
        x[a] = config.radius + config.radial_noise * rng.normal();
        add_iso(x);
        // Alternate between shrunken and inflated radii. The prototype branch
        // reads the two directions of the radius anomaly with opposite signs
        // (the projection bias matters more at small norms), so mixing them
        // leaves it near chance on this group while the Mahalanobis distance
        // flags both ends.
        const double f = (s % 2 == 0) ? 0.10 + 0.10 * rng.uniform() : 2.6 + 0.4 * rng.uniform();
        const double target = config.radius * f / norm2(x);
        for (double& v : x) v *= target;
        e.embedding = std::move(x);
        ds.samples.push_back(std::move(e));
    }
    ds.validate();
    return ds;
}

std::vector<const LabeledEmbedding*> select_split(const Dataset& d, Split s) {
    std::vector<const LabeledEmbedding*> out;
    for (const auto& e : d.samples) {
        if (e.split == s) out.push_back(&e);
    }
    return out;
}

}  // namespace dbmf
