#include "dbmf/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace dbmf {

std::optional<BaselineKind> baseline_from_name(const std::string& name) {
    if (name == "msp") return BaselineKind::MSP;
    if (name == "maxlogit") return BaselineKind::MaxLogit;
    if (name == "energy") return BaselineKind::Energy;
    if (name == "entropy") return BaselineKind::Entropy;
    if (name == "mahalanobis") return BaselineKind::MahalanobisVanilla;
    return std::nullopt;
}

std::string baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::MSP: return "msp";
        case BaselineKind::MaxLogit: return "maxlogit";
        case BaselineKind::Energy: return "energy";
        case BaselineKind::Entropy: return "entropy";
        case BaselineKind::MahalanobisVanilla: return "mahalanobis";
    }
    return "unknown";
}

double score_msp(const Vec& logits) {
    if (logits.empty()) throw EmptyInput("score_msp: empty logits");
    const Vec p = softmax(logits);
    return -*std::max_element(p.begin(), p.end());
}

double score_max_logit(const Vec& logits) {
    if (logits.empty()) throw EmptyInput("score_max_logit: empty logits");
    return -*std::max_element(logits.begin(), logits.end());
}

double score_energy(const Vec& logits) {
    if (logits.empty()) throw EmptyInput("score_energy: empty logits");
    return -log_sum_exp(logits);
}

double score_entropy(const Vec& logits) {
    if (logits.empty()) throw EmptyInput("score_entropy: empty logits");
    const double lse = log_sum_exp(logits);
    double h = 0.0;
    for (double z : logits) {
        const double logp = z - lse;
        h -= std::exp(logp) * logp;
    }
    return h;
}

double score_mahalanobis_vanilla(const GaussianStats& stats, const Vec& feature) {
    return score_sv(stats, feature);
}

}  // namespace dbmf
