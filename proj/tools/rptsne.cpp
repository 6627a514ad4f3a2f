#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <iostream>

#include "rptsne/data_io.hpp"
#include "rptsne/evaluation.hpp"
#include "rptsne/kernels.hpp"
#include "rptsne/reducers.hpp"
#include "rptsne/rng.hpp"
#include "rptsne/svg.hpp"
#include "rptsne/sweep.hpp"
#include "rptsne/tsne.hpp"

namespace {

using namespace rptsne;

struct DatasetFlags {
    std::string format = "raw";
    DatasetSpec spec;

    void attach(CLI::App* cmd) {
        cmd->add_option("--format", format, "dataset format: idx, raw or csv")
            ->check(CLI::IsMember({"idx", "raw", "csv"}));
        cmd->add_option("--images", spec.images, "IDX image file");
        cmd->add_option("--labels", spec.labels, "IDX label file");
        cmd->add_option("--matrix", spec.matrix, "raw_f64 matrix file");
        cmd->add_option("--sidecar", spec.sidecar, "raw_f64 sidecar file");
        cmd->add_option("--csv", spec.csv, "CSV file");
        cmd->add_flag("--csv-header", spec.csv_header, "CSV has a header row");
        cmd->add_flag("!--no-csv-labels", spec.csv_labels,
                      "CSV last column is not a label column");
        cmd->add_flag("!--no-normalize", spec.normalize, "skip the divide-by-255 normalization");
        cmd->add_option("--subsample", spec.subsample, "subsample to this many rows (0 = all)");
        cmd->add_option("--subsample-seed", spec.subsample_seed, "seed for subsampling");
    }

    DatasetSpec resolve() const {
        DatasetSpec out = spec;
        if (format == "idx") out.format = DatasetSpec::Format::idx;
        else if (format == "csv") out.format = DatasetSpec::Format::csv;
        else out.format = DatasetSpec::Format::raw;
        return out;
    }
};

void attach_tsne_flags(CLI::App* cmd, TsneConfig& tc) {
    cmd->add_option("--perplexity", tc.perplexity, "target perplexity");
    cmd->add_option("--n-iter", tc.n_iter, "gradient descent iterations");
    cmd->add_option("--theta", tc.theta, "Barnes-Hut accuracy in [0,1]; 0 = exact");
    cmd->add_option("--learning-rate", tc.learning_rate, "learning rate");
    cmd->add_option("--early-exaggeration", tc.early_exaggeration_factor,
                    "early exaggeration factor");
    cmd->add_option("--early-exaggeration-iters", tc.early_exaggeration_iters,
                    "early exaggeration iterations");
}

int run(int argc, char** argv) {
    CLI::App app{"random-projection / PCA front-ends for a from-scratch t-SNE engine"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int n_threads = 1;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--threads", n_threads, "worker count (results are identical at any value)")
        ->capture_default_str();
    app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();

    // convert
    auto* convert = app.add_subcommand("convert", "convert IDX/CSV input to raw_f64 + sidecar");
    DatasetFlags convert_ds;
    convert_ds.attach(convert);
    std::string convert_out;
    convert->add_option("--output", convert_out, "output base path (writes .f64 and .meta)")
        ->required();

    // tsne
    auto* tsne_cmd = app.add_subcommand("tsne", "run one embedding");
    DatasetFlags tsne_ds;
    tsne_ds.attach(tsne_cmd);
    TsneConfig tsne_cfg;
    attach_tsne_flags(tsne_cmd, tsne_cfg);
    std::string tsne_reducer = "none";
    std::size_t tsne_dprime = 0;
    std::string save_reducer, load_reducer;
    tsne_cmd->add_option("--reducer", tsne_reducer, "none, random_projection or pca")
        ->check(CLI::IsMember({"none", "random_projection", "pca"}));
    tsne_cmd->add_option("--d-prime", tsne_dprime, "reduced dimension (required with a reducer)");
    tsne_cmd->add_option("--save-reducer", save_reducer, "cache the fitted reducer at this base path");
    tsne_cmd->add_option("--load-reducer", load_reducer, "reuse a cached reducer from this base path");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "dimension sweep benchmark");
    DatasetFlags sweep_ds;
    sweep_ds.attach(sweep_cmd);
    std::string sweep_config_path;
    SweepConfig sweep_cfg;
    attach_tsne_flags(sweep_cmd, sweep_cfg.tsne);
    std::string sweep_reducers = "random_projection";
    sweep_cmd->add_option("--config", sweep_config_path, "key=value config file");
    sweep_cmd->add_option("--reducers", sweep_reducers,
                          "comma-separated subset of random_projection,pca (empty = baseline only)");
    sweep_cmd->add_option("--dim-start", sweep_cfg.dim_start, "sweep start dimension");
    sweep_cmd->add_option("--dim-base", sweep_cfg.dim_base, "sweep growth factor");
    sweep_cmd->add_option("--repeats", sweep_cfg.repeats, "repeats per dimension");
    sweep_cmd->add_option("--k", sweep_cfg.k, "accuracy neighbor count");

    // score
    auto* score_cmd = app.add_subcommand("score", "nearest-neighbor label agreement of an embedding");
    std::string score_embedding;
    std::size_t score_k = 1;
    score_cmd->add_option("--embedding", score_embedding, "embedding base path (.f64/.meta with labels)")
        ->required();
    score_cmd->add_option("--k", score_k, "neighbor count");

    // plot
    auto* plot_cmd = app.add_subcommand("plot", "emit SVG figures");
    plot_cmd->require_subcommand(1);
    auto* plot_ratio = plot_cmd->add_subcommand("ratio", "time/accuracy ratio curves from runs.csv");
    std::string ratio_csv, ratio_out, ratio_reducer = "random_projection";
    double ratio_log_base = 1.5;
    plot_ratio->add_option("--csv", ratio_csv, "runs.csv from a sweep")->required();
    plot_ratio->add_option("--output", ratio_out, "output SVG path")->required();
    plot_ratio->add_option("--reducer", ratio_reducer, "series to plot")
        ->check(CLI::IsMember({"random_projection", "pca"}));
    plot_ratio->add_option("--log-base", ratio_log_base, "x-axis log base");
    auto* plot_scatter = plot_cmd->add_subcommand("scatter", "2-D embedding colored by label");
    std::string scatter_embedding, scatter_out;
    plot_scatter->add_option("--embedding", scatter_embedding, "embedding base path")->required();
    plot_scatter->add_option("--output", scatter_out, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    set_threads(n_threads);
    std::filesystem::create_directories(out_dir);

    if (convert->parsed()) {
        const Dataset ds = load_dataset(convert_ds.resolve());
        write_raw(convert_out + ".f64", convert_out + ".meta", ds.x,
                  ds.has_labels() ? &ds.labels : nullptr);
        std::cout << "wrote " << convert_out << ".f64 (" << ds.x.rows << " x " << ds.x.cols
                  << (ds.has_labels() ? ", labeled" : "") << ")\n";
        return 0;
    }

    if (tsne_cmd->parsed()) {
        const Dataset ds = load_dataset(tsne_ds.resolve());
        tsne_cfg.seed = derive_stream(seed, 1);
        Matrix input;
        if (tsne_reducer == "none") {
            input = ds.x;
        } else if (tsne_reducer == "random_projection") {
            ProjectionMatrix proj;
            if (!load_reducer.empty()) {
                proj = load_projection(load_reducer);
            } else {
                if (tsne_dprime == 0) throw UsageError("--d-prime is required with a reducer");
                proj = gaussian_projection(ds.x.cols, tsne_dprime, derive_stream(seed, 2));
            }
            if (!save_reducer.empty()) save_projection(save_reducer, proj);
            input = apply_projection(ds.x, proj);
        } else {
            PrincipalBasis basis;
            if (!load_reducer.empty()) {
                basis = load_basis(load_reducer);
            } else {
                if (tsne_dprime == 0) throw UsageError("--d-prime is required with a reducer");
                basis = pca_fit(ds.x, tsne_dprime);
            }
            if (!save_reducer.empty()) save_basis(save_reducer, basis);
            input = pca_transform(ds.x, basis);
        }

        const TsneResult res = run_tsne(input, tsne_cfg);
        write_raw(out_dir + "/embedding.f64", out_dir + "/embedding.meta", res.embedding,
                  ds.has_labels() ? &ds.labels : nullptr);
        std::ofstream trace(out_dir + "/trace.csv");
        trace << "iteration,kl,grad_norm\n";
        for (const TracePoint& p : res.trace.points) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", p.iteration, p.kl, p.grad_norm);
            trace << buf;
        }
        std::cout << "tsne_seconds=" << res.trace.total_seconds
                  << " affinity_seconds=" << res.trace.affinity_seconds
                  << " final_kl=" << res.trace.final_kl() << "\n";
        if (ds.has_labels()) {
            const AccuracyReport rep = accuracy_score(res.embedding, ds.labels, 1);
            std::cout << "accuracy(k=1)=" << rep.score << "\n";
        }
        return 0;
    }

    if (sweep_cmd->parsed()) {
        SweepConfig cfg = sweep_cfg;
        if (!sweep_config_path.empty()) {
            cfg = load_sweep_config(sweep_config_path);
            // command-line flags override file values
            for (const auto* opt : sweep_cmd->get_options()) {
                if (opt->count() == 0) continue;
                const std::string name = opt->get_name();
                if (name == "--dim-start") cfg.dim_start = sweep_cfg.dim_start;
                else if (name == "--dim-base") cfg.dim_base = sweep_cfg.dim_base;
                else if (name == "--repeats") cfg.repeats = sweep_cfg.repeats;
                else if (name == "--k") cfg.k = sweep_cfg.k;
                else if (name == "--perplexity") cfg.tsne.perplexity = sweep_cfg.tsne.perplexity;
                else if (name == "--n-iter") cfg.tsne.n_iter = sweep_cfg.tsne.n_iter;
                else if (name == "--theta") cfg.tsne.theta = sweep_cfg.tsne.theta;
                else if (name == "--learning-rate")
                    cfg.tsne.learning_rate = sweep_cfg.tsne.learning_rate;
            }
        } else {
            cfg.dataset = sweep_ds.resolve();
            std::stringstream ss(sweep_reducers);
            std::string item;
            cfg.use_random_projection = false;
            cfg.use_pca = false;
            while (std::getline(ss, item, ',')) {
                if (item == "random_projection") cfg.use_random_projection = true;
                else if (item == "pca") cfg.use_pca = true;
                else if (!item.empty()) throw UsageError("unknown reducer: " + item);
            }
        }
        if (app.count("--seed") > 0 || cfg.master_seed == 0) cfg.master_seed = seed;
        if (app.count("--out-dir") > 0 || cfg.out_dir.empty()) cfg.out_dir = out_dir;
        const auto records = run_sweep(cfg);
        std::cout << "wrote " << cfg.out_dir << "/runs.csv (" << records.size() << " runs)\n";
        return 0;
    }

    if (score_cmd->parsed()) {
        const Dataset emb = load_raw(score_embedding + ".f64", score_embedding + ".meta");
        if (!emb.has_labels()) throw DataError("embedding file has no labels to score against");
        const AccuracyReport rep = accuracy_score(emb.x, emb.labels, score_k);
        std::cout << "accuracy(k=" << score_k << ")=" << rep.score
                  << " ties=" << rep.tie_count << "\n";
        for (const auto& [label, frac] : rep.per_class_scores) {
            std::cout << "class " << label << ": " << frac << "\n";
        }
        return 0;
    }

    if (plot_ratio->parsed()) {
        const auto records = read_run_records(ratio_csv);
        const Reducer wanted = reducer_from_name(ratio_reducer);
        const RunRecord* baseline = nullptr;
        std::vector<RunRecord> runs;
        for (const RunRecord& r : records) {
            if (r.reducer == Reducer::none && baseline == nullptr) baseline = &r;
            if (r.reducer == wanted) runs.push_back(r);
        }
        if (baseline == nullptr) throw DataError("no baseline row in " + ratio_csv);
        if (runs.empty()) throw DataError("no rows for reducer " + ratio_reducer);

        // average repeats per dimension so each d' plots as one point
        std::map<std::size_t, std::vector<const RunRecord*>> by_dim;
        for (const RunRecord& r : runs) by_dim[r.d_prime].push_back(&r);
        std::vector<RunRecord> averaged;
        for (const auto& [d_prime, group] : by_dim) {
            RunRecord mean = *group.front();
            mean.tsne_seconds = 0.0;
            mean.accuracy.score = 0.0;
            for (const RunRecord* r : group) {
                mean.tsne_seconds += r->tsne_seconds;
                mean.accuracy.score += r->accuracy.score;
            }
            mean.tsne_seconds /= static_cast<double>(group.size());
            mean.accuracy.score /= static_cast<double>(group.size());
            averaged.push_back(mean);
        }
        const auto table = ratio_table(*baseline, averaged);
        std::ofstream out(ratio_out);
        out << ratio_curves_svg(table, ratio_log_base);
        std::cout << "wrote " << ratio_out << "\n";
        return 0;
    }

    if (plot_scatter->parsed()) {
        const Dataset emb = load_raw(scatter_embedding + ".f64", scatter_embedding + ".meta");
        if (!emb.has_labels()) throw DataError("embedding file has no labels for coloring");
        std::ofstream out(scatter_out);
        out << scatter_svg(emb.x, emb.labels);
        std::cout << "wrote " << scatter_out << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
