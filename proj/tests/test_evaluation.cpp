#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "rptsne/evaluation.hpp"
#include "rptsne/rng.hpp"

using namespace rptsne;

namespace {

// Exhaustive O(N^2) scorer written from the definition: full sort by
// (distance, index), modal label with smallest-label tie-break.
double oracle_score(const Matrix& y, const LabelVector& labels, std::size_t k) {
    const std::size_t n = y.rows;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d2 = 0.0;
            for (std::size_t c = 0; c < y.cols; ++c) {
                const double diff = y.at(i, c) - y.at(j, c);
                d2 += diff * diff;
            }
            all.emplace_back(d2, j);
        }
        std::sort(all.begin(), all.end());
        std::map<std::int64_t, std::size_t> votes;
        for (std::size_t t = 0; t < k; ++t) ++votes[labels[all[t].second]];
        std::int64_t modal = votes.begin()->first;
        std::size_t best = votes.begin()->second;
        for (const auto& [label, count] : votes) {
            if (count > best) {
                best = count;
                modal = label;
            }
        }
        if (modal == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

Matrix random_embedding(std::size_t n, std::uint64_t seed) {
    Matrix y(n, 2);
    Rng rng(seed);
    for (double& v : y.values) v = rng.gaussian() * 4.0;
    return y;
}

}  // namespace

TEST_CASE("pair scores are forced by the definition") {
    Matrix y(2, 2);
    y.at(1, 0) = 1.0;
    CHECK(accuracy_score(y, {3, 4}, 1).score == 0.0);

    // matching labels: two tight pairs, every nearest neighbor shares
    // the label (a two-point instance with one label is degenerate and
    // rejected below)
    Matrix pairs(4, 2);
    pairs.at(1, 0) = 0.5;
    pairs.at(2, 0) = 10.0;
    pairs.at(3, 0) = 10.5;
    CHECK(accuracy_score(pairs, {3, 3, 5, 5}, 1).score == 1.0);

    CHECK_THROWS_AS(accuracy_score(y, {3, 3}, 1), DataError);
}

TEST_CASE("alternating labels on a line score zero") {
    Matrix y(10, 2);
    LabelVector labels(10);
    for (std::size_t i = 0; i < 10; ++i) {
        y.at(i, 0) = static_cast<double>(i);
        labels[i] = static_cast<std::int64_t>(i % 2);
    }
    CHECK(accuracy_score(y, labels, 1).score == 0.0);
}

TEST_CASE("accuracy_score equals the brute-force oracle") {
    Rng rng(77);
    for (int inst = 0; inst < 25; ++inst) {
        const std::size_t n = 10 + static_cast<std::size_t>(rng.below(190));
        const Matrix y = random_embedding(n, 1000 + inst);
        LabelVector labels(n);
        for (auto& l : labels) l = static_cast<std::int64_t>(rng.below(3));
        labels[0] = 0;
        labels[1] = 1;  // ensure two distinct labels
        for (const std::size_t k : {1ul, 3ul, 5ul}) {
            CHECK(accuracy_score(y, labels, k).score == oracle_score(y, labels, k));
        }
    }
}

TEST_CASE("per-class scores average back to the total") {
    const Matrix y = random_embedding(60, 5);
    LabelVector labels(60);
    Rng rng(6);
    for (auto& l : labels) l = static_cast<std::int64_t>(rng.below(4));
    const AccuracyReport rep = accuracy_score(y, labels, 3);
    double weighted = 0.0;
    for (const auto& [label, frac] : rep.per_class_scores) {
        const auto count = std::count(labels.begin(), labels.end(), label);
        weighted += frac * static_cast<double>(count) / 60.0;
    }
    CHECK(std::abs(weighted - rep.score) <= 1e-12);
}

TEST_CASE("score is invariant under rigid motion and uniform scaling") {
    const Matrix y = random_embedding(40, 9);
    LabelVector labels(40);
    Rng rng(10);
    for (auto& l : labels) l = static_cast<std::int64_t>(rng.below(3));
    labels[0] = 0;
    labels[1] = 1;
    const double base = accuracy_score(y, labels, 3).score;

    const double c = std::cos(1.1), s = std::sin(1.1);
    Matrix moved(40, 2);
    for (std::size_t i = 0; i < 40; ++i) {
        const double rx = c * y.at(i, 0) - s * y.at(i, 1);
        const double ry = s * y.at(i, 0) + c * y.at(i, 1);
        moved.at(i, 0) = 2.5 * rx + 7.0;
        moved.at(i, 1) = 2.5 * ry - 3.0;
    }
    CHECK(accuracy_score(moved, labels, 3).score == base);
}

TEST_CASE("accuracy_score errors") {
    const Matrix y = random_embedding(5, 11);
    CHECK_THROWS_AS(accuracy_score(y, {0, 1, 0, 1, 0}, 5), UsageError);   // k >= N
    CHECK_THROWS_AS(accuracy_score(y, {0, 1, 0}, 1), UsageError);        // length mismatch
    CHECK_THROWS_AS(accuracy_score(y, {2, 2, 2, 2, 2}, 1), DataError);   // single label
}

TEST_CASE("modal ties are counted and resolved to the smaller label") {
    // query at origin, one neighbor of label 1 and one of label 0 at
    // equal distance; k=2 gives a tie resolved toward label 0
    Matrix y(3, 2);
    y.at(1, 0) = 1.0;
    y.at(2, 0) = -1.0;
    const LabelVector labels = {0, 1, 0};
    const AccuracyReport rep = accuracy_score(y, labels, 2);
    // ties at the origin and at the far label-0 point, both resolved
    // toward label 0; the label-1 point is outvoted
    CHECK(rep.tie_count == 2);
    CHECK(rep.score == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("time_stage sanity") {
    const double noop = time_stage([] {});
    CHECK(noop >= 0.0);
    CHECK(noop < 1e-3);
    volatile double sink = 0.0;
    const double busy1 = time_stage([&] {
        for (int i = 0; i < 100000; ++i) sink = sink + 1.0;
    });
    const double busy2 = time_stage([&] {
        for (int i = 0; i < 100000; ++i) sink = sink + 1.0;
    });
    CHECK(busy1 > 0.0);
    CHECK(busy2 > 0.0);
}

TEST_CASE("ratio_table arithmetic and ordering") {
    RunRecord baseline;
    baseline.reducer = Reducer::none;
    baseline.d_prime = 100;
    baseline.tsne_seconds = 4.0;
    baseline.accuracy.score = 0.5;

    SUBCASE("self ratio") {
        RunRecord self = baseline;
        const auto table = ratio_table(baseline, {self});
        REQUIRE(table.size() == 1);
        CHECK(table[0].time_ratio == doctest::Approx(1.0));
        CHECK(table[0].accuracy_ratio == doctest::Approx(1.0));
    }

    SUBCASE("empty input") { CHECK(ratio_table(baseline, {}).empty()); }

    SUBCASE("hand-built records") {
        RunRecord run;
        run.reducer = Reducer::random_projection;
        run.d_prime = 10;
        run.tsne_seconds = 2.0;
        run.accuracy.score = 0.45;
        RunRecord run2 = run;
        run2.d_prime = 5;
        const auto table = ratio_table(baseline, {run, run2});
        REQUIRE(table.size() == 2);
        CHECK(table[0].d_prime == 5);  // sorted ascending
        CHECK(table[1].d_prime == 10);
        CHECK(table[1].time_ratio == doctest::Approx(0.5));
        CHECK(table[1].accuracy_ratio == doctest::Approx(0.9));
    }

    SUBCASE("errors") {
        RunRecord bad = baseline;
        bad.reducer = Reducer::pca;
        CHECK_THROWS_AS(ratio_table(bad, {}), UsageError);
        RunRecord zero = baseline;
        zero.accuracy.score = 0.0;
        CHECK_THROWS_AS(ratio_table(zero, {}), UsageError);
    }
}

TEST_CASE("run records round-trip through CSV exactly") {
    const auto path =
        (std::filesystem::temp_directory_path() / "rptsne_records.csv").string();
    std::vector<RunRecord> records;
    Rng rng(13);
    for (int i = 0; i < 8; ++i) {
        RunRecord r;
        r.reducer = i == 0 ? Reducer::none
                           : (i % 2 != 0 ? Reducer::random_projection : Reducer::pca);
        r.d_prime = 7 + static_cast<std::size_t>(i);
        r.seed = rng.next_u64();
        r.tsne_seconds = rng.uniform01() * 100.0;
        r.accuracy.score = rng.uniform01();
        r.final_kl = rng.gaussian();
        records.push_back(r);
    }
    std::ofstream out(path);
    out << run_record_csv_header() << "\n";
    for (const auto& r : records) out << run_record_to_csv(r) << "\n";
    out << "pca,3,1,,error,\n";  // error marker row
    out.close();

    std::size_t error_rows = 0;
    const auto parsed = read_run_records(path, &error_rows);
    CHECK(error_rows == 1);
    REQUIRE(parsed.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(parsed[i].reducer == records[i].reducer);
        CHECK(parsed[i].d_prime == records[i].d_prime);
        CHECK(parsed[i].seed == records[i].seed);
        CHECK(parsed[i].tsne_seconds == records[i].tsne_seconds);  // bit-exact
        CHECK(parsed[i].accuracy.score == records[i].accuracy.score);
        CHECK(parsed[i].final_kl == records[i].final_kl);
    }
}
