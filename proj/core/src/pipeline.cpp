#include "dbmf/pipeline.hpp"

namespace dbmf {

std::optional<Scorer> scorer_from_name(const std::string& name) {
    if (name == "dbmf") return Scorer::Dbmf;
    if (name == "st-only") return Scorer::StOnly;
    if (name == "sv-only") return Scorer::SvOnly;
    if (const auto b = baseline_from_name(name)) {
        switch (*b) {
            case BaselineKind::MSP: return Scorer::Msp;
            case BaselineKind::MaxLogit: return Scorer::MaxLogit;
            case BaselineKind::Energy: return Scorer::Energy;
            case BaselineKind::Entropy: return Scorer::Entropy;
            case BaselineKind::MahalanobisVanilla: return Scorer::Mahalanobis;
        }
    }
    return std::nullopt;
}

std::string scorer_name(Scorer s) {
    switch (s) {
        case Scorer::Dbmf: return "dbmf";
        case Scorer::StOnly: return "st-only";
        case Scorer::SvOnly: return "sv-only";
        case Scorer::Msp: return "msp";
        case Scorer::MaxLogit: return "maxlogit";
        case Scorer::Energy: return "energy";
        case Scorer::Entropy: return "entropy";
        case Scorer::Mahalanobis: return "mahalanobis";
    }
    return "unknown";
}

TrainOutcome train_pipeline(const Dataset& dataset, const TrainConfig& text_image_config,
                            const TrainConfig& vision_config,
                            const DetectorConfig& detector_config) {
    dataset.validate();
    const std::size_t k = dataset.num_classes();

    Batch train_batch;
    for (const auto& s : dataset.samples) {
        if (s.split == Split::Train && !s.is_ood) train_batch.emplace_back(s.embedding, *s.label);
    }
    if (train_batch.empty()) throw TooFewSamples("train_pipeline: dataset has no train split");

    TrainOutcome out;
    const std::size_t d_proj = std::min<std::size_t>(dataset.dim, 64);

    // Text-image branch trains first, then the vision branch.
    out.detector.text_image =
        make_text_image_branch(dataset.dim, d_proj, dataset.class_names, text_image_config.seed);
    out.text_image_trace =
        train_text_image(out.detector.text_image, dataset, text_image_config);
    out.text_image_accuracy = top1_accuracy(out.detector.text_image, train_batch);

    out.detector.vision = make_vision_branch(dataset.dim, dataset.class_names, vision_config.seed);
    out.vision_trace = train_vision(out.detector.vision, dataset, vision_config);
    out.vision_accuracy = vision_accuracy(out.detector.vision, train_batch);

    out.detector.stats = fit_gaussian_stats(train_batch, k);

    // Calibration on train-split ID scores only.
    Vec st_scores;
    Vec sv_scores;
    st_scores.reserve(train_batch.size());
    sv_scores.reserve(train_batch.size());
    for (const auto& [x, y] : train_batch) {
        st_scores.push_back(score_st(out.detector.text_image, x));
        sv_scores.push_back(score_sv(out.detector.stats, x));
    }
    out.detector.standardizer = fit_standardizer(st_scores, sv_scores);
    out.detector.omega = detector_config.omega;
    out.detector.target_tpr = detector_config.target_tpr;

    Vec fused(st_scores.size());
    for (std::size_t i = 0; i < fused.size(); ++i) {
        fused[i] =
            fuse(out.detector.standardizer, st_scores[i], sv_scores[i], out.detector.omega);
    }
    out.detector.gamma = calibrate_gamma(fused, detector_config.target_tpr);
    return out;
}

double score_sample(const TrainedDetector& det, const Vec& embedding, Scorer scorer) {
    switch (scorer) {
        case Scorer::Dbmf:
            return fuse(det.standardizer, score_st(det.text_image, embedding),
                        score_sv(det.stats, embedding), det.omega);
        case Scorer::StOnly:
            return score_st(det.text_image, embedding);
        case Scorer::SvOnly:
            return score_sv(det.stats, embedding);
        case Scorer::Msp:
            return score_msp(vision_logits(det.vision, embedding));
        case Scorer::MaxLogit:
            return score_max_logit(vision_logits(det.vision, embedding));
        case Scorer::Energy:
            return score_energy(vision_logits(det.vision, embedding));
        case Scorer::Entropy:
            return score_entropy(vision_logits(det.vision, embedding));
        case Scorer::Mahalanobis:
            return score_mahalanobis_vanilla(det.stats, embedding);
    }
    throw ConfigError("score_sample: unknown scorer");
}

std::vector<ScoredSample> score_split(const TrainedDetector& det, const Dataset& dataset,
                                      Split split, Scorer scorer) {
    std::vector<ScoredSample> out;
    for (const auto& s : dataset.samples) {
        if (s.split != split) continue;
        out.push_back({s.id, score_sample(det, s.embedding, scorer), s.is_ood});
    }
    return out;
}

EvalReport evaluate(const TrainedDetector& det, const Dataset& dataset, Scorer scorer,
                    std::optional<double> bandwidth) {
    return make_report(score_split(det, dataset, Split::Test, scorer), bandwidth);
}

std::vector<AblationRow> ablation(const TrainedDetector& det, const Dataset& dataset) {
    std::vector<AblationRow> rows;
    const std::pair<std::string, Scorer> variants[] = {
        {"Text-image", Scorer::StOnly}, {"Vision", Scorer::SvOnly}, {"DBMF", Scorer::Dbmf}};
    for (const auto& [name, scorer] : variants) {
        const auto scored = score_split(det, dataset, Split::Test, scorer);
        rows.push_back({name, auroc(scored), fpr_at_tpr(scored, 0.95)});
    }
    return rows;
}

}  // namespace dbmf
