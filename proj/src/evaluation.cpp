#include "rptsne/evaluation.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace rptsne {

AccuracyReport accuracy_score(const Matrix& y, const LabelVector& labels, std::size_t k) {
    const std::size_t n = y.rows;
    if (labels.size() != n) throw UsageError("accuracy_score: labels/rows mismatch");
    if (k < 1 || k >= n) throw UsageError("accuracy_score: k must satisfy 1 <= k < N");
    if (!y.all_finite()) throw NumericError("accuracy_score: non-finite embedding");
    const std::set<std::int64_t> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) throw DataError("accuracy_score: need at least 2 distinct labels");

    const std::size_t m = y.cols;
    std::vector<unsigned char> correct(n, 0);
    std::vector<unsigned char> tied(n, 0);
    parallel_for(n, [&](std::size_t i) {
        std::vector<std::pair<double, std::size_t>> cand;
        cand.reserve(n - 1);
        const double* yi = y.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d2 = 0.0;
            const double* yj = y.row(j);
            for (std::size_t c = 0; c < m; ++c) {
                const double diff = yi[c] - yj[c];
                d2 += diff * diff;
            }
            cand.emplace_back(d2, j);
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());

        // modal label among the k nearest; ties to the smallest label id
        std::map<std::int64_t, std::size_t> counts;
        for (std::size_t t = 0; t < k; ++t) ++counts[labels[cand[t].second]];
        std::int64_t modal = 0;
        std::size_t best = 0;
        std::size_t with_best = 0;
        for (const auto& [label, count] : counts) {  // ascending label order
            if (count > best) {
                best = count;
                modal = label;
                with_best = 1;
            } else if (count == best) {
                ++with_best;
            }
        }
        tied[i] = with_best > 1 ? 1 : 0;
        correct[i] = modal == labels[i] ? 1 : 0;
    });

    AccuracyReport report;
    report.k = k;
    std::map<std::int64_t, std::size_t> class_total, class_correct;
    std::size_t total_correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ++class_total[labels[i]];
        if (correct[i]) {
            ++class_correct[labels[i]];
            ++total_correct;
        }
        report.tie_count += tied[i];
    }
    report.score = static_cast<double>(total_correct) / static_cast<double>(n);
    for (const auto& [label, total] : class_total) {
        report.per_class_scores[label] =
            static_cast<double>(class_correct[label]) / static_cast<double>(total);
    }
    return report;
}

std::string reducer_name(Reducer r) {
    switch (r) {
        case Reducer::none: return "none";
        case Reducer::random_projection: return "random_projection";
        case Reducer::pca: return "pca";
    }
    return "none";
}

Reducer reducer_from_name(const std::string& name) {
    if (name == "none") return Reducer::none;
    if (name == "random_projection") return Reducer::random_projection;
    if (name == "pca") return Reducer::pca;
    throw UsageError("unknown reducer: " + name);
}

std::vector<RatioRow> ratio_table(const RunRecord& baseline, const std::vector<RunRecord>& runs) {
    if (baseline.reducer != Reducer::none) {
        throw UsageError("ratio_table: baseline must be the no-reduction run");
    }
    if (baseline.accuracy.score == 0.0) {
        throw UsageError("ratio_table: baseline accuracy is zero, ratios undefined");
    }
    if (baseline.tsne_seconds <= 0.0) {
        throw UsageError("ratio_table: baseline time must be positive");
    }
    std::vector<RatioRow> table;
    table.reserve(runs.size());
    for (const RunRecord& r : runs) {
        table.push_back({r.d_prime, r.tsne_seconds / baseline.tsne_seconds,
                         r.accuracy.score / baseline.accuracy.score});
    }
    std::stable_sort(table.begin(), table.end(),
                     [](const RatioRow& a, const RatioRow& b) { return a.d_prime < b.d_prime; });
    return table;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string run_record_csv_header() { return "reducer,d_prime,seed,tsne_seconds,accuracy,final_kl"; }

std::string run_record_to_csv(const RunRecord& r) {
    std::ostringstream out;
    out << reducer_name(r.reducer) << ',' << r.d_prime << ',' << r.seed << ','
        << format_double(r.tsne_seconds) << ',' << format_double(r.accuracy.score) << ','
        << format_double(r.final_kl);
    return out.str();
}

std::vector<RunRecord> read_run_records(const std::string& csv_path, std::size_t* error_rows) {
    std::ifstream in(csv_path);
    if (!in) throw DataError("cannot open " + csv_path);
    std::vector<RunRecord> records;
    if (error_rows != nullptr) *error_rows = 0;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == run_record_csv_header()) continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (fields.size() != 6) throw DataError("malformed CSV row: " + line);
        if (fields[4] == "error") {
            if (error_rows != nullptr) ++*error_rows;
            continue;
        }
        try {
            RunRecord r;
            r.reducer = reducer_from_name(fields[0]);
            r.d_prime = std::stoull(fields[1]);
            r.seed = std::stoull(fields[2]);
            r.tsne_seconds = std::stod(fields[3]);
            r.accuracy.score = std::stod(fields[4]);
            r.final_kl = std::stod(fields[5]);
            records.push_back(r);
        } catch (const std::exception&) {
            throw DataError("unparseable CSV row: " + line);
        }
    }
    return records;
}

}  // namespace rptsne
