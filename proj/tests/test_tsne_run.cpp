#include <doctest.h>

#include <cmath>

#include "rptsne/data_io.hpp"
#include "rptsne/evaluation.hpp"
#include "rptsne/rng.hpp"
#include "rptsne/tsne.hpp"

using namespace rptsne;

namespace {

// two well-separated Gaussian blobs, labels 0/1
Dataset two_blobs(std::size_t per_blob, std::size_t d, std::uint64_t seed, double separation) {
    Dataset ds;
    ds.x = Matrix(2 * per_blob, d);
    ds.labels.resize(2 * per_blob);
    Rng rng(seed);
    for (std::size_t i = 0; i < 2 * per_blob; ++i) {
        const bool second = i >= per_blob;
        ds.labels[i] = second ? 1 : 0;
        for (std::size_t j = 0; j < d; ++j) {
            ds.x.at(i, j) = rng.gaussian() + (second && j == 0 ? separation : 0.0);
        }
    }
    return ds;
}

}  // namespace

TEST_CASE("two separated blobs embed to perfectly clustered output") {
    const Dataset ds = two_blobs(10, 20, 1, 50.0);
    TsneConfig cfg;
    cfg.perplexity = 5.0;
    cfg.n_iter = 500;
    cfg.seed = 3;
    const TsneResult res = run_tsne(ds.x, cfg);
    REQUIRE(res.embedding.rows == 20);
    const AccuracyReport rep = accuracy_score(res.embedding, ds.labels, 1);
    CHECK(rep.score == 1.0);
}

TEST_CASE("fixed config runs are bit-identical at any worker count") {
    const Dataset ds = two_blobs(12, 10, 2, 30.0);
    TsneConfig cfg;
    cfg.perplexity = 6.0;
    cfg.n_iter = 220;
    cfg.seed = 9;

    const TsneResult a = run_tsne(ds.x, cfg);
    const TsneResult b = run_tsne(ds.x, cfg);
    CHECK(a.embedding.values == b.embedding.values);
    REQUIRE(a.trace.points.size() == b.trace.points.size());
    for (std::size_t i = 0; i < a.trace.points.size(); ++i) {
        CHECK(a.trace.points[i].kl == b.trace.points[i].kl);
        CHECK(a.trace.points[i].grad_norm == b.trace.points[i].grad_norm);
    }

    const int saved = threads();
    set_threads(4);
    const TsneResult c = run_tsne(ds.x, cfg);
    set_threads(saved);
    CHECK(a.embedding.values == c.embedding.values);

    cfg.theta = 0.5;
    const TsneResult d1 = run_tsne(ds.x, cfg);
    set_threads(4);
    const TsneResult d2 = run_tsne(ds.x, cfg);
    set_threads(saved);
    CHECK(d1.embedding.values == d2.embedding.values);
}

TEST_CASE("optimization reduces the KL divergence") {
    const Dataset ds = two_blobs(10, 8, 4, 20.0);
    TsneConfig cfg;
    cfg.perplexity = 4.0;
    cfg.n_iter = 600;  // room to settle after early exaggeration ends
    for (const double theta : {0.0, 0.5}) {
        cfg.theta = theta;
        const TsneResult res = run_tsne(ds.x, cfg);
        REQUIRE(res.trace.points.size() >= 2);
        CHECK(res.trace.points.back().kl < res.trace.points.front().kl);
        for (const TracePoint& p : res.trace.points) {
            CHECK(std::isfinite(p.kl));
            CHECK(p.kl >= -1e-8);
        }
    }
}

TEST_CASE("trace records at least every 50 iterations") {
    const Dataset ds = two_blobs(8, 6, 5, 25.0);
    TsneConfig cfg;
    cfg.perplexity = 4.0;
    cfg.n_iter = 130;
    const TsneResult res = run_tsne(ds.x, cfg);
    REQUIRE(res.trace.points.size() == 4);  // 0, 50, 100, final(130)
    CHECK(res.trace.points[0].iteration == 0);
    CHECK(res.trace.points[1].iteration == 50);
    CHECK(res.trace.points[2].iteration == 100);
    CHECK(res.trace.points[3].iteration == 130);
    CHECK(res.trace.total_seconds > 0.0);
    CHECK(res.trace.total_seconds ==
          doctest::Approx(res.trace.affinity_seconds + res.trace.optimize_seconds));
}

TEST_CASE("gradient norm is small after a long run") {
    const Dataset ds = two_blobs(8, 5, 6, 15.0);
    TsneConfig cfg;
    cfg.perplexity = 4.0;
    cfg.n_iter = 3000;
    cfg.learning_rate = 50.0;
    const TsneResult res = run_tsne(ds.x, cfg);
    CHECK(res.trace.points.back().grad_norm <= 1e-4);
}

TEST_CASE("parameter and divergence errors") {
    const Dataset ds = two_blobs(4, 5, 7, 10.0);
    TsneConfig cfg;
    cfg.perplexity = 8.0;  // >= N
    CHECK_THROWS_AS(run_tsne(ds.x, cfg), UsageError);

    cfg.perplexity = 3.0;
    cfg.theta = 1.5;
    CHECK_THROWS_AS(run_tsne(ds.x, cfg), UsageError);

    cfg.theta = 0.0;
    cfg.learning_rate = 1e300;  // blows up immediately
    cfg.n_iter = 50;
    CHECK_THROWS_AS(run_tsne(ds.x, cfg), NumericError);
}

TEST_CASE("barnes-hut run separates blobs too") {
    const Dataset ds = two_blobs(30, 16, 8, 40.0);
    TsneConfig cfg;
    cfg.perplexity = 10.0;
    cfg.n_iter = 400;
    cfg.theta = 0.5;
    cfg.seed = 11;
    const TsneResult res = run_tsne(ds.x, cfg);
    const AccuracyReport rep = accuracy_score(res.embedding, ds.labels, 1);
    CHECK(rep.score == 1.0);
}
