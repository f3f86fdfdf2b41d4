#include <doctest.h>

#include <cmath>

#include "dbmf/rng.hpp"
#include "dbmf/text_image.hpp"
#include "test_util.hpp"

using namespace dbmf;

namespace {

TextImageBranch tiny_branch(std::size_t d_embed, std::size_t d_proj, std::size_t k,
                            std::uint64_t seed) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
    return make_text_image_branch(d_embed, d_proj, names, seed);
}

Batch seeded_batch(Rng& rng, std::size_t n, std::size_t d, std::size_t k) {
    Batch batch;
    for (std::size_t i = 0; i < n; ++i) {
        batch.emplace_back(rng.normal_vec(d), rng.index(k));
    }
    return batch;
}

// Finite-difference check of gradients_tsc over every parameter.
double max_grad_rel_err(TextImageBranch& branch, const Batch& batch, double lambda) {
    const auto g = gradients_tsc(branch, batch, lambda);
    auto loss = [&] { return loss_tsc(branch, batch, lambda); };
    double worst = 0.0;
    auto check = [&](double& param, double analytic) {
        const double fd = testutil::central_diff(loss, param);
        worst = std::max(worst, testutil::rel_err(fd, analytic));
    };
    for (std::size_t i = 0; i < branch.tlinear_weights.data.size(); ++i) {
        check(branch.tlinear_weights.data[i], g.d_weights.data[i]);
    }
    for (std::size_t j = 0; j < branch.d_proj; ++j) check(branch.tlinear_bias[j], g.d_bias[j]);
    for (std::size_t c = 0; c < branch.num_classes(); ++c) {
        for (std::size_t q = 0; q < branch.d_proj; ++q) {
            check(branch.prototypes[c][q], g.d_prototypes[c][q]);
        }
    }
    check(branch.log_tau, g.d_log_tau);
    return worst;
}

}  // namespace

TEST_CASE("project_image normalizes the affine output") {
    TextImageBranch b = tiny_branch(2, 2, 2, 1);
    b.tlinear_weights = DenseMatrix::identity(2);
    b.tlinear_bias = {0.0, 0.0};
    const Vec out = project_image(b, {3.0, 4.0});
    CHECK(out[0] == doctest::Approx(0.6));
    CHECK(out[1] == doctest::Approx(0.8));

    CHECK_THROWS_AS(project_image(b, {0.0, 0.0}), ZeroVector);
    CHECK_THROWS_AS(project_image(b, {1.0, 2.0, 3.0}), DimensionMismatch);
}

TEST_CASE("project_image matches an independent matmul-then-normalize oracle") {
    Rng rng(2);
    TextImageBranch b = tiny_branch(6, 4, 3, 3);
    for (int rep = 0; rep < 5; ++rep) {
        const Vec x = rng.normal_vec(6);
        Vec u = b.tlinear_bias;
        for (std::size_t i = 0; i < 6; ++i) {
            for (std::size_t j = 0; j < 4; ++j) u[j] += x[i] * b.tlinear_weights(i, j);
        }
        double n = 0.0;
        for (double v : u) n += v * v;
        n = std::sqrt(n);
        const Vec out = project_image(b, x);
        CHECK(norm2(out) == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t j = 0; j < 4; ++j) CHECK(out[j] == doctest::Approx(u[j] / n).epsilon(1e-12));
    }
}

TEST_CASE("similarities scale as 1/tau") {
    TextImageBranch b = tiny_branch(2, 2, 2, 4);
    b.log_tau = 0.0;  // tau = 1
    b.prototypes[0] = {1.0, 0.0};
    b.prototypes[1] = {0.0, 1.0};
    const auto row = similarities(b, {1.0, 0.0});
    CHECK(row.logits[0] == doctest::Approx(1.0));
    CHECK(row.logits[1] == doctest::Approx(0.0).epsilon(1e-15));

    b.log_tau = std::log(0.5);  // halved tau doubles every logit
    const auto row2 = similarities(b, {1.0, 0.0});
    CHECK(row2.logits[0] == doctest::Approx(2.0));

    // Orthogonal to all prototypes.
    TextImageBranch b3 = tiny_branch(3, 3, 2, 4);
    b3.prototypes[0] = {1.0, 0.0, 0.0};
    b3.prototypes[1] = {0.0, 1.0, 0.0};
    const auto row3 = similarities(b3, {0.0, 0.0, 1.0});
    CHECK(row3.logits[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(row3.logits[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("loss_contrastive limits") {
    TextImageBranch b = tiny_branch(2, 2, 2, 5);
    b.tlinear_weights = DenseMatrix::identity(2);
    b.tlinear_bias = {0.0, 0.0};
    b.log_tau = 0.0;
    // Both prototypes orthogonal to the image feature: uniform softmax.
    b.prototypes[0] = {0.0, 1.0};
    b.prototypes[1] = {0.0, -1.0};
    Batch batch{{{1.0, 0.0}, 0}};
    CHECK(loss_contrastive(b, batch) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // Confident limit: make the margin >= 30 via a tiny temperature.
    b.prototypes[0] = {1.0, 0.0};
    b.prototypes[1] = {-1.0, 0.0};
    b.log_tau = std::log(1.0 / 16.0);  // logits +16 / -16, margin 32
    CHECK(loss_contrastive(b, batch) < 1e-12);

    Batch bad{{{1.0, 0.0}, 9}};
    CHECK_THROWS_AS(loss_contrastive(b, bad), LabelOutOfRange);
}

TEST_CASE("loss_contrastive matches the extended-precision softmax oracle") {
    Rng rng(6);
    TextImageBranch b = tiny_branch(5, 4, 3, 7);
    const Batch batch = seeded_batch(rng, 4, 5, 3);
    long double expected = 0.0L;
    for (const auto& [x, y] : batch) {
        const Vec s = similarities(b, project_image(b, x)).logits;
        const auto p = testutil::softmax_long_double(s);
        expected -= logl(p[y]);
    }
    expected /= batch.size();
    CHECK(std::fabs(loss_contrastive(b, batch) - static_cast<double>(expected)) < 1e-12);
}

TEST_CASE("eta_star explicit values") {
    CHECK(eta_star(2) == doctest::Approx(-1.0));
    CHECK(eta_star(3) == doctest::Approx(-0.5));
    CHECK(eta_star(11) == doctest::Approx(-0.1));
    CHECK_THROWS_AS(eta_star(1), InvalidK);
}

TEST_CASE("loss_text_separation hand values") {
    TextImageBranch b = tiny_branch(2, 2, 2, 8);
    b.prototypes[0] = {1.0, 0.0};
    b.prototypes[1] = {-1.0, 0.0};
    CHECK(loss_text_separation(b) == doctest::Approx(0.0).epsilon(1e-15));

    b.prototypes[1] = {1.0, 0.0};
    CHECK(loss_text_separation(b) == doctest::Approx(4.0));

    TextImageBranch b3 = tiny_branch(3, 3, 3, 8);
    b3.prototypes[0] = {1.0, 0.0, 0.0};
    b3.prototypes[1] = {0.0, 1.0, 0.0};
    b3.prototypes[2] = {0.0, 0.0, 1.0};
    CHECK(loss_text_separation(b3) == doctest::Approx(0.25));
}

TEST_CASE("loss_tsc is the lambda-weighted sum of its parts") {
    Rng rng(9);
    TextImageBranch b = tiny_branch(4, 3, 3, 10);
    const Batch batch = seeded_batch(rng, 5, 4, 3);
    CHECK(loss_tsc(b, batch, 0.0) == loss_contrastive(b, batch));
    const double combined = loss_tsc(b, batch, 1.2);
    const double parts = loss_contrastive(b, batch) + 1.2 * loss_text_separation(b);
    CHECK(std::fabs(combined - parts) < 1e-14);
}

TEST_CASE("separation gradient vanishes at the simplex optimum") {
    TextImageBranch b = tiny_branch(3, 3, 4, 11);
    b.prototypes = simplex_frame(4, 3);
    Rng rng(12);
    const Batch batch = seeded_batch(rng, 3, 3, 4);
    const auto with_sep = gradients_tsc(b, batch, 5.0);
    const auto without_sep = gradients_tsc(b, batch, 0.0);
    for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t q = 0; q < 3; ++q) {
            CHECK(std::fabs(with_sep.d_prototypes[c][q] - without_sep.d_prototypes[c][q]) < 1e-10);
        }
    }
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(13);
    for (int rep = 0; rep < 5; ++rep) {
        TextImageBranch b = tiny_branch(4, 3, 3, 100 + rep);
        // Move off the unit sphere a little so the normalization path is
        // genuinely exercised by the perturbations.
        for (auto& t : b.prototypes) {
            for (double& v : t) v *= 1.0 + 0.1 * rng.normal();
        }
        const Batch batch = seeded_batch(rng, 4, 4, 3);
        CHECK(max_grad_rel_err(b, batch, 1.2) < 1e-5);
    }
}

TEST_CASE("one small step does not increase the full loss") {
    SynthConfig sc;
    sc.seed = 31;
    Dataset ds = generate_synthetic(sc);
    TextImageBranch b = tiny_branch(sc.dim, sc.dim, sc.num_id_classes, 14);
    Batch all;
    for (const auto& s : ds.samples) {
        if (!s.is_ood) all.emplace_back(s.embedding, *s.label);
    }
    const double before = loss_tsc(b, all, 1.0);
    TrainConfig cfg;
    cfg.batch_size = all.size();
    cfg.learning_rate = 1e-3;
    cfg.steps = 1;
    cfg.seed = 15;
    train_text_image(b, ds, cfg);
    CHECK(loss_tsc(b, all, 1.0) <= before);
}

TEST_CASE("training separates the synthetic classes") {
    SynthConfig sc;
    sc.seed = 33;
    Dataset ds = generate_synthetic(sc);
    TextImageBranch b = tiny_branch(sc.dim, sc.dim, sc.num_id_classes, 16);
    TrainConfig cfg;
    cfg.steps = 500;
    cfg.seed = 17;
    cfg.lambda = 1.0;
    train_text_image(b, ds, cfg);

    Batch train;
    for (const auto& s : ds.samples) {
        if (s.split == Split::Train && !s.is_ood) train.emplace_back(s.embedding, *s.label);
    }
    CHECK(top1_accuracy(b, train) == doctest::Approx(1.0));

    // The separation loss drives pairwise prototype similarity toward eta*.
    double max_sim = -1.0;
    for (std::size_t i = 0; i < b.num_classes(); ++i) {
        for (std::size_t j = i + 1; j < b.num_classes(); ++j) {
            max_sim = std::max(max_sim, dot(normalized(b.prototypes[i]),
                                            normalized(b.prototypes[j])));
        }
    }
    CHECK(max_sim < 0.2);
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
    SynthConfig sc;
    sc.samples_per_class = 20;
    sc.seed = 34;
    Dataset ds = generate_synthetic(sc);
    TrainConfig cfg;
    cfg.steps = 50;
    cfg.seed = 18;
    TextImageBranch b1 = tiny_branch(sc.dim, sc.dim, sc.num_id_classes, 19);
    TextImageBranch b2 = tiny_branch(sc.dim, sc.dim, sc.num_id_classes, 19);
    train_text_image(b1, ds, cfg);
    train_text_image(b2, ds, cfg);
    CHECK(b1.tlinear_weights.data == b2.tlinear_weights.data);
    CHECK(b1.tlinear_bias == b2.tlinear_bias);
    CHECK(b1.prototypes == b2.prototypes);
    CHECK(b1.log_tau == b2.log_tau);
}

TEST_CASE("score_st hand values and monotonicity") {
    CHECK(st_from_logits({3.0}) == doctest::Approx(-3.0));
    CHECK(st_from_logits({2.0, 1.0}) == doctest::Approx(-1.0));
    CHECK(st_from_logits({1.0, 1.0, 1.0}) == doctest::Approx(1.0));

    // Raising the best-class logit with others fixed strictly lowers S_t.
    double prev = st_from_logits({2.0, 1.0, 0.5});
    for (double bump : {2.5, 3.0, 4.0}) {
        const double cur = st_from_logits({bump, 1.0, 0.5});
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("simplex frame attains eta_star and random configurations never beat it") {
    Rng rng(20);
    for (std::size_t k = 2; k <= 12; ++k) {
        const auto frame = simplex_frame(k, k);
        double max_sim = -2.0;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                max_sim = std::max(max_sim, dot(frame[i], frame[j]));
            }
        }
        CHECK(std::fabs(max_sim - eta_star(k)) < 1e-9);

        // Reduced-dimension construction as well.
        const auto reduced = simplex_frame(k, k - 1);
        double max_sim_r = -2.0;
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(norm2(reduced[i]) == doctest::Approx(1.0).epsilon(1e-12));
            for (std::size_t j = i + 1; j < k; ++j) {
                max_sim_r = std::max(max_sim_r, dot(reduced[i], reduced[j]));
            }
        }
        CHECK(std::fabs(max_sim_r - eta_star(k)) < 1e-9);

        for (int trial = 0; trial < 50; ++trial) {
            std::vector<Vec> rnd(k);
            for (auto& v : rnd) v = normalized(rng.normal_vec(k));
            double m = -2.0;
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = i + 1; j < k; ++j) m = std::max(m, dot(rnd[i], rnd[j]));
            }
            CHECK(m >= eta_star(k) - 1e-9);
        }
    }
}
