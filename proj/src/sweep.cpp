#include "rptsne/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "rptsne/reducers.hpp"
#include "rptsne/rng.hpp"

namespace rptsne {

Dataset load_dataset(const DatasetSpec& spec) {
    Dataset ds;
    switch (spec.format) {
        case DatasetSpec::Format::idx:
            ds = load_idx(spec.images, spec.labels, spec.normalize);
            break;
        case DatasetSpec::Format::raw:
            ds = load_raw(spec.matrix, spec.sidecar);
            if (spec.normalize) normalize255(ds.x);
            break;
        case DatasetSpec::Format::csv:
            ds = load_csv(spec.csv, spec.csv_header, spec.csv_labels);
            if (spec.normalize) normalize255(ds.x);
            break;
    }
    if (spec.subsample > 0 && spec.subsample < ds.x.rows) {
        ds = subsample(ds, spec.subsample, spec.subsample_seed);
    }
    return ds;
}

std::vector<std::size_t> sweep_dimensions(std::size_t d, std::size_t dim_start, double dim_base) {
    if (dim_start < 1) throw UsageError("sweep_dimensions: dim_start must be >= 1");
    if (dim_start > d) throw UsageError("sweep_dimensions: dim_start exceeds d");
    if (!(dim_base > 1.0)) throw UsageError("sweep_dimensions: dim_base must exceed 1");
    std::vector<std::size_t> dims;
    for (int t = 0;; ++t) {
        const double v = std::round(static_cast<double>(dim_start) * std::pow(dim_base, t));
        if (v >= static_cast<double>(d)) break;
        const auto dim = static_cast<std::size_t>(v);
        if (dims.empty() || dims.back() != dim) dims.push_back(dim);
    }
    dims.push_back(d);
    return dims;
}

namespace {

constexpr std::uint64_t reducer_tag(Reducer r) {
    switch (r) {
        case Reducer::none: return 0;
        case Reducer::random_projection: return 1;
        case Reducer::pca: return 2;
    }
    return 0;
}

std::uint64_t run_stream(std::uint64_t master, Reducer r, std::size_t d_prime, int repeat) {
    return derive_stream(
        derive_stream(derive_stream(master, reducer_tag(r)), static_cast<std::uint64_t>(d_prime)),
        static_cast<std::uint64_t>(repeat));
}

}  // namespace

std::vector<RunRecord> run_sweep(const SweepConfig& config) {
    const Dataset ds = load_dataset(config.dataset);
    if (!ds.has_labels()) throw DataError("sweep requires a labeled dataset");
    if (config.repeats < 1) throw UsageError("repeats must be >= 1");
    const std::size_t n = ds.x.rows;
    const std::size_t d = ds.x.cols;
    if (config.tsne.perplexity >= static_cast<double>(n)) {
        throw UsageError("perplexity must be below the (sub)sample size");
    }

    std::filesystem::create_directories(config.out_dir);
    const std::string csv_path = config.out_dir + "/runs.csv";
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw DataError("cannot write " + csv_path);
    csv << run_record_csv_header() << "\n" << std::flush;

    std::vector<RunRecord> records;

    auto execute = [&](Reducer reducer, std::size_t d_prime, int repeat,
                       const Matrix& reduced) -> RunRecord {
        TsneConfig tc = config.tsne;
        tc.seed = derive_stream(run_stream(config.master_seed, reducer, d_prime, repeat), 1);
        const TsneResult res = run_tsne(reduced, tc);
        RunRecord rec;
        rec.reducer = reducer;
        rec.d_prime = d_prime;
        rec.seed = run_stream(config.master_seed, reducer, d_prime, repeat);
        rec.tsne_seconds = res.trace.total_seconds;
        rec.accuracy = accuracy_score(res.embedding, ds.labels, config.k);
        rec.final_kl = res.trace.final_kl();
        return rec;
    };

    auto emit = [&](const RunRecord& rec) {
        records.push_back(rec);
        csv << run_record_to_csv(rec) << "\n" << std::flush;
    };

    auto emit_error = [&](Reducer reducer, std::size_t d_prime, int repeat) {
        csv << reducer_name(reducer) << ',' << d_prime << ','
            << run_stream(config.master_seed, reducer, d_prime, repeat) << ",,error,\n"
            << std::flush;
    };

    // baseline first so ratio rows can stream
    emit(execute(Reducer::none, d, 0, ds.x));

    const std::vector<std::size_t> dims = sweep_dimensions(d, config.dim_start, config.dim_base);
    std::vector<Reducer> reducers;
    if (config.use_random_projection) reducers.push_back(Reducer::random_projection);
    if (config.use_pca) reducers.push_back(Reducer::pca);

    std::map<std::size_t, PrincipalBasis> basis_cache;
    for (const Reducer reducer : reducers) {
        for (const std::size_t d_prime : dims) {
            for (int repeat = 0; repeat < config.repeats; ++repeat) {
                try {
                    Matrix reduced;
                    if (reducer == Reducer::random_projection) {
                        const std::uint64_t rseed = derive_stream(
                            run_stream(config.master_seed, reducer, d_prime, repeat), 2);
                        reduced = apply_projection(ds.x, gaussian_projection(d, d_prime, rseed));
                    } else {
                        auto it = basis_cache.find(d_prime);
                        if (it == basis_cache.end()) {
                            it = basis_cache.emplace(d_prime, pca_fit(ds.x, d_prime)).first;
                        }
                        reduced = pca_transform(ds.x, it->second);
                    }
                    emit(execute(reducer, d_prime, repeat, reduced));
                } catch (const std::exception&) {
                    emit_error(reducer, d_prime, repeat);
                }
            }
        }
    }
    return records;
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw UsageError("config key " + key + " expects true/false");
}

}  // namespace

SweepConfig load_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config: " + path);
    SweepConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        bool blank = true;
        for (char c : line) {
            if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
        }
        if (blank) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(line_no) + " is not key=value");
        }
        auto strip = [](std::string s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
            return s;
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));

        if (key == "format") {
            if (val == "idx") cfg.dataset.format = DatasetSpec::Format::idx;
            else if (val == "raw") cfg.dataset.format = DatasetSpec::Format::raw;
            else if (val == "csv") cfg.dataset.format = DatasetSpec::Format::csv;
            else throw UsageError("unknown format: " + val);
        } else if (key == "images") cfg.dataset.images = val;
        else if (key == "labels") cfg.dataset.labels = val;
        else if (key == "matrix") cfg.dataset.matrix = val;
        else if (key == "sidecar") cfg.dataset.sidecar = val;
        else if (key == "csv") cfg.dataset.csv = val;
        else if (key == "csv_header") cfg.dataset.csv_header = parse_bool(val, key);
        else if (key == "csv_labels") cfg.dataset.csv_labels = parse_bool(val, key);
        else if (key == "normalize") cfg.dataset.normalize = parse_bool(val, key);
        else if (key == "subsample") cfg.dataset.subsample = std::stoull(val);
        else if (key == "subsample_seed") cfg.dataset.subsample_seed = std::stoull(val);
        else if (key == "reducers") {
            cfg.use_random_projection = false;
            cfg.use_pca = false;
            std::stringstream ss(val);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = strip(item);
                if (item.empty()) continue;
                if (item == "random_projection") cfg.use_random_projection = true;
                else if (item == "pca") cfg.use_pca = true;
                else throw UsageError("unknown reducer in config: " + item);
            }
        } else if (key == "dim_start") cfg.dim_start = std::stoull(val);
        else if (key == "dim_base") cfg.dim_base = std::stod(val);
        else if (key == "perplexity") cfg.tsne.perplexity = std::stod(val);
        else if (key == "n_iter") cfg.tsne.n_iter = std::stoi(val);
        else if (key == "theta") cfg.tsne.theta = std::stod(val);
        else if (key == "learning_rate") cfg.tsne.learning_rate = std::stod(val);
        else if (key == "early_exaggeration") cfg.tsne.early_exaggeration_factor = std::stod(val);
        else if (key == "early_exaggeration_iters") cfg.tsne.early_exaggeration_iters = std::stoi(val);
        else if (key == "repeats") cfg.repeats = std::stoi(val);
        else if (key == "k") cfg.k = std::stoull(val);
        else if (key == "seed") cfg.master_seed = std::stoull(val);
        else if (key == "out_dir") cfg.out_dir = val;
        else throw UsageError("unknown config key: " + key);
    }
    return cfg;
}

}  // namespace rptsne
