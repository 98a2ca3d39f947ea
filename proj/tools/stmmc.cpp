// stmmc command-line entry point: simulate | run | evaluate | plot.

#include "stmmc/config.hpp"
#include "stmmc/image.hpp"
#include "stmmc/ingest.hpp"
#include "stmmc/io.hpp"
#include "stmmc/metrics.hpp"
#include "stmmc/parallel.hpp"
#include "stmmc/pipeline.hpp"
#include "stmmc/plot.hpp"
#include "stmmc/synth.hpp"
#include "stmmc/tensor.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <utility>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr const char* tool_version = "0.1.0";

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Output files are collected here and only written once the whole command has succeeded.
class OutputSet {
public:
    void add(fs::path path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& f : files_) {
            out.push_back(f.first.filename().string());
        }
        return out;
    }

    void commit() const {
        for (const auto& [path, content] : files_) {
            stmmc::write_file_atomic(path, content);
        }
    }

private:
    std::vector<std::pair<fs::path, std::string>> files_;
};

struct RunOverrides {
    std::string config;
    std::string expr;
    std::string coords;
    std::string features;
    std::string image;
    std::string out_dir;
    std::uint64_t seed = 0;
    int epochs = 0;
    int k_neighbors = 0;
    int n_clusters = 0;
    int b_smooth = 0;
    bool no_image = false;
    bool no_contrastive = false;
    bool no_smoothing = false;
    bool checkpoint = false;
};

stmmc::RunConfig resolve_run_config(const RunOverrides& o, const CLI::App& cmd) {
    stmmc::RunConfig cfg = o.config.empty() ? stmmc::RunConfig{} : stmmc::load_run_config(o.config);
    if (!o.expr.empty()) cfg.expr_path = o.expr;
    if (!o.coords.empty()) cfg.coord_path = o.coords;
    if (!o.features.empty()) cfg.feat_path = o.features;
    if (!o.image.empty()) cfg.image_path = o.image;
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (cmd.count("--seed")) cfg.train.seed = o.seed;
    if (cmd.count("--epochs")) cfg.train.epochs = o.epochs;
    if (cmd.count("--k-neighbors")) cfg.train.k_neighbors = o.k_neighbors;
    if (cmd.count("--n-clusters")) cfg.train.n_clusters = o.n_clusters;
    if (cmd.count("--b-smooth")) cfg.train.b_smooth = o.b_smooth;
    if (o.no_image) cfg.train.use_image_modality = false;
    if (o.no_contrastive) cfg.train.use_contrastive = false;
    if (o.no_smoothing) cfg.train.use_smoothing = false;
    if (o.checkpoint) cfg.write_checkpoint = true;
    if (cfg.expr_path.empty() || cfg.coord_path.empty()) {
        throw stmmc::ConfigError("expr_path and coord_path are required (config file or --expr/--coords)");
    }
    cfg.train.validate();
    return cfg;
}

int cmd_run(const stmmc::RunConfig& cfg) {
    const std::string started = utc_timestamp();
    std::optional<fs::path> feat_path;
    if (!cfg.feat_path.empty()) {
        feat_path = cfg.feat_path;
    }
    stmmc::Dataset data = stmmc::load_dataset(cfg.expr_path, cfg.coord_path, feat_path);
    if (cfg.train.use_image_modality && !data.features) {
        if (cfg.image_path.empty()) {
            throw stmmc::DataError("image modality enabled but neither feat_path nor image_path was given");
        }
        data.features = stmmc::extract_patch_features(stmmc::read_image(cfg.image_path), data.coordinates,
                                                      cfg.train.patch_width);
    }

    const stmmc::PipelineResult result =
        stmmc::run_pipeline(data.expression, data.features, data.coordinates, cfg.train);

    const fs::path out_dir = cfg.out_dir;
    OutputSet outputs;
    outputs.add(out_dir / "labels.csv", stmmc::labels_csv(data.expression.spot_ids, result.labels));
    outputs.add(out_dir / "history.csv", result.training.history.to_csv());
    stmmc::ExpressionMatrix reconstruction = result.processed;
    reconstruction.values = result.training.reconstruction;
    outputs.add(out_dir / "reconstruction.csv", stmmc::expression_csv(reconstruction));
    if (cfg.write_checkpoint) {
        outputs.add(out_dir / "checkpoint.bin", stmmc::encode_checkpoint(result.training.model.parameters()));
    }

    nlohmann::ordered_json manifest;
    manifest["tool"] = "stmmc";
    manifest["version"] = tool_version;
    manifest["seed"] = cfg.train.seed;
    manifest["started_at"] = started;
    manifest["finished_at"] = utc_timestamp();
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    for (const auto& [key, value] : stmmc::parse_key_values(stmmc::to_key_values(cfg))) {
        config[key] = value;
    }
    manifest["config"] = config;
    manifest["feature_source"] = !data.features ? "none"
                                 : data.features->source == stmmc::FeatureSource::patch_stats ? "patch_stats"
                                                                                               : "precomputed";
    auto files = outputs.names();
    files.push_back("manifest.json");
    manifest["outputs"] = files;
    outputs.add(out_dir / "manifest.json", manifest.dump(2) + "\n");
    outputs.commit();

    const auto& last = result.training.history.epochs.back();
    std::cout << "trained " << last.epoch << " epochs, final loss " << last.loss.total << "; " << data.expression.n_spots()
              << " spots in " << cfg.train.n_clusters << " clusters; outputs in " << out_dir.string() << "\n";
    return 0;
}

stmmc::LabelVector aligned_labels(const stmmc::LabeledSpots& source, const std::vector<std::string>& order,
                                  const std::string& what) {
    const auto idx = stmmc::alignment_order(order, source.spot_ids, what);
    stmmc::LabelVector out;
    out.k = source.labels.k;
    for (auto i : idx) {
        out.labels.push_back(source.labels.labels[static_cast<std::size_t>(i)]);
    }
    return out;
}

int cmd_evaluate(const std::string& pred_path, const std::string& truth_path, const std::string& out_path) {
    const auto pred = stmmc::read_labels(pred_path);
    const auto truth = stmmc::read_labels(truth_path);
    const auto truth_aligned = aligned_labels(truth, pred.spot_ids, truth_path);
    const double a = stmmc::ari(pred.labels, truth_aligned);
    const double n = stmmc::nmi(pred.labels, truth_aligned);
    const std::string report = stmmc::evaluation_csv(a, n);
    if (!out_path.empty()) {
        stmmc::write_file_atomic(out_path, report);
    }
    std::cout << report;
    return 0;
}

int cmd_plot(const std::string& labels_path, const std::string& coords_path, const std::string& out_path) {
    const auto labels = stmmc::read_labels(labels_path);
    const auto coords = stmmc::read_coordinates(coords_path);
    const auto aligned = aligned_labels(labels, coords.spot_ids, labels_path);
    stmmc::write_file_atomic(out_path, stmmc::render_cluster_svg(aligned, coords));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    stmmc::tune_allocator();
    CLI::App app{"Multi-modal spatial clustering for spatial transcriptomics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    stmmc::SynthSpec synth;
    std::string synth_out = "synthetic";
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset with planted spatial domains");
    simulate->add_option("--out-dir", synth_out, "Output directory")->capture_default_str();
    simulate->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
    simulate->add_option("--rows", synth.rows, "Lattice rows")->capture_default_str();
    simulate->add_option("--cols", synth.cols, "Lattice columns")->capture_default_str();
    simulate->add_option("--domains", synth.n_domains, "Number of planted domains")->capture_default_str();
    simulate->add_option("--genes", synth.n_genes, "Number of genes")->capture_default_str();
    simulate->add_option("--signature", synth.signature_strength, "Marker-gene mean shift")->capture_default_str();
    simulate->add_option("--noise", synth.noise_sd, "Expression noise standard deviation")->capture_default_str();
    simulate->add_option("--image-dim", synth.image_dim, "Image feature dimension")->capture_default_str();
    simulate->add_option("--image-signal", synth.image_signal, "Domain separation in feature space")->capture_default_str();

    RunOverrides run_opts;
    auto* run = app.add_subcommand("run", "Preprocess, train, cluster and smooth");
    run->add_option("--config", run_opts.config, "Key-value config file or run manifest");
    run->add_option("--expr", run_opts.expr, "Expression CSV/TSV");
    run->add_option("--coords", run_opts.coords, "Coordinates CSV/TSV");
    run->add_option("--features", run_opts.features, "Precomputed image features CSV/TSV");
    run->add_option("--image", run_opts.image, "Histology image (PNG/PPM) for patch features");
    run->add_option("--seed", run_opts.seed, "Random seed");
    run->add_option("--epochs", run_opts.epochs, "Training epochs");
    run->add_option("--k-neighbors", run_opts.k_neighbors, "Neighbours per spot in both graphs");
    run->add_option("--n-clusters", run_opts.n_clusters, "Number of clusters");
    run->add_option("--b-smooth", run_opts.b_smooth, "Neighbours consulted by label smoothing");
    run->add_flag("--no-image", run_opts.no_image, "Feed expression to the second branch instead of image features");
    run->add_flag("--no-contrastive", run_opts.no_contrastive, "Drop both contrastive terms");
    run->add_flag("--no-smoothing", run_opts.no_smoothing, "Skip label smoothing");
    run->add_flag("--checkpoint", run_opts.checkpoint, "Also write checkpoint.bin");
    run->add_option("--out-dir", run_opts.out_dir, "Output directory");

    std::string pred_path, truth_path, eval_out;
    auto* evaluate = app.add_subcommand("evaluate", "ARI and NMI between two label files");
    evaluate->add_option("pred", pred_path, "Predicted labels CSV")->required();
    evaluate->add_option("truth", truth_path, "Reference labels CSV")->required();
    evaluate->add_option("--out", eval_out, "Also write the report to this CSV");

    std::string plot_labels, plot_coords, plot_out = "clusters.svg";
    auto* plot = app.add_subcommand("plot", "Render a spatial cluster map as SVG");
    plot->add_option("labels", plot_labels, "Labels CSV")->required();
    plot->add_option("coords", plot_coords, "Coordinates CSV")->required();
    plot->add_option("--out", plot_out, "Output SVG path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*simulate) {
            const auto data = stmmc::generate(synth);
            stmmc::write_synthetic(synth_out, data);
            std::cout << "wrote " << data.expression.n_spots() << " spots to " << synth_out << "\n";
            return 0;
        }
        if (*run) {
            stmmc::RunConfig cfg;
            try {
                cfg = resolve_run_config(run_opts, *run);
            } catch (const stmmc::ConfigError& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            return cmd_run(cfg);
        }
        if (*evaluate) {
            return cmd_evaluate(pred_path, truth_path, eval_out);
        }
        if (*plot) {
            return cmd_plot(plot_labels, plot_coords, plot_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
