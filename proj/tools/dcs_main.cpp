// dcs: DDPM-based probabilistic constellation shaping CLI.
//
// Subcommands: train, shape, sweep, boxplot, baseline-train, inspect.
// Exit codes: 0 success, 1 config error, 2 IO error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "dcs/errors.hpp"
#include "dcs/harness.hpp"
#include "dcs/metrics.hpp"

namespace {

using namespace dcs;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;

    ExperimentConfig load() const {
        ExperimentConfig config =
            config_path.empty() ? default_config(16) : load_config(config_path);
        if (seed) config.training.seed = *seed;
        if (out_dir) config.output.directory = *out_dir;
        validate_config(config);
        return config;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* opt = cmd->add_option("--config", args.config_path, "experiment config (JSON)");
    if (config_required) opt->required();
    cmd->add_option("--seed", args.seed, "master seed override");
    cmd->add_option("--out", args.out_dir, "output directory override");
}

void write_loss_trace(const std::vector<double>& trace, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "epoch,loss\n";
    for (std::size_t e = 0; e < trace.size(); ++e) out << e + 1 << ',' << fmt(trace[e]) << '\n';
    if (!out) throw IoError("failed while writing '" + path + "'");
}

int cmd_train(const CommonArgs& args, int snapshot_every) {
    const ExperimentConfig config = args.load();
    ensure_dir(config.output.directory);

    std::function<void(long long, const DenoiserModel&)> snapshot;
    DiffusionSchedule snap_sched = build_schedule(config.schedule.T, config.schedule.alpha_first,
                                                  config.schedule.alpha_last);
    if (snapshot_every > 0) {
        snapshot = [&config, &snap_sched](long long epoch, const DenoiserModel& model) {
            // Reverse-sample a cloud from standard-normal starts so the
            // training progress can be plotted.
            Rng rng = substream(config.training.seed, "snapshot", epoch);
            Batch start(2000);
            for (IQ& p : start) p = {rng.normal(), rng.normal()};
            const Batch cloud = reverse_sample(start, model, snap_sched,
                                               mix_seed(config.training.seed, "snapshot-rev",
                                                        static_cast<std::uint64_t>(epoch)));
            char name[256];
            std::snprintf(name, sizeof name, "%s/snapshot_epoch%06lld.csv",
                          config.output.directory.c_str(), epoch);
            std::ofstream out = open_out(name);
            out << "i,q\n";
            for (const IQ& p : cloud) out << fmt(p.i) << ',' << fmt(p.q) << '\n';
        };
    }

    const TrainingRun run = run_training(config, snapshot_every, snapshot);
    save_model(run.model, run.schedule, config.modulation_order,
               config.output.directory + "/model.json");
    write_loss_trace(run.loss_trace, config.output.directory + "/loss_trace.csv");
    std::cout << "trained " << config.modulation_order << "-QAM model for "
              << run.model.epochs_trained << " epochs (T=" << run.model.time_steps()
              << "), wrote " << config.output.directory << "/model.json\n";
    if (run.model.epochs_trained == 0)
        std::cout << "note: model is untrained (epochs=0)\n";
    return 0;
}

int cmd_shape(const CommonArgs& args, const std::string& model_path, double snr_db) {
    const ExperimentConfig config = args.load();
    const TrainedModel trained = load_model(model_path);
    if (trained.modulation_order != config.modulation_order)
        throw ConfigError("model modulation order does not match the config");
    ensure_dir(config.output.directory);
    const ConstellationGeometry geo = qam_geometry(config.modulation_order);

    const ShapingResult result = shape_constellation(
        trained.model, geo, trained.schedule, snr_db,
        static_cast<std::size_t>(config.shaping.N_s), mix_seed(config.training.seed, "shape-cli"));

    {
        std::ofstream out = open_out(config.output.directory + "/shaping_distribution.csv");
        out << "symbol,i,q,probability\n";
        for (int s = 0; s < geo.order; ++s)
            out << s << ',' << fmt(geo.points[s].i) << ',' << fmt(geo.points[s].q) << ','
                << fmt(result.distribution.probs[s]) << '\n';
    }
    {
        std::ofstream out = open_out(config.output.directory + "/shaped_points.csv");
        out << "i,q\n";
        for (const IQ& p : result.raw_outputs) out << fmt(p.i) << ',' << fmt(p.q) << '\n';
    }
    {
        std::ofstream out = open_out(config.output.directory + "/geometry.csv");
        write_geometry_csv(geo, out);
    }
    std::cout << "shaped " << config.shaping.N_s << " samples at " << snr_db
              << " dB; entropy " << fmt(entropy_bits(result.distribution)) << " bits"
              << (result.model_untrained ? " (untrained model)" : "") << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& model_path,
              const std::string& baseline_path, bool retrain_ood) {
    const ExperimentConfig config = args.load();
    const TrainedModel trained = load_model(model_path);
    std::optional<DnnBaseline> baseline;
    if (!baseline_path.empty()) baseline = load_baseline(baseline_path);

    const RunReport report =
        run_sweep(config, trained, baseline ? &*baseline : nullptr, retrain_ood);
    emit_report(report, config.output);
    std::cout << "sweep finished: " << report.records.size() << " records in "
              << fmt(report.meta.wall_time_s) << " s, wrote " << config.output.directory
              << "/report.{csv,json}\n";
    return 0;
}

int cmd_boxplot(const CommonArgs& args, const std::string& model_path) {
    const ExperimentConfig config = args.load();
    const TrainedModel trained = load_model(model_path);
    const std::vector<BoxplotRow> rows = run_boxplot_experiment(config, trained);
    ensure_dir(config.output.directory);
    const std::string path = config.output.directory + "/boxplot.csv";
    std::ofstream out = open_out(path);
    write_boxplot_csv(rows, out);
    if (!out) throw IoError("failed while writing '" + path + "'");
    std::cout << "boxplot experiment finished: " << rows.size() << " rows, wrote " << path
              << "\n";
    return 0;
}

int cmd_baseline_train(const CommonArgs& args, double snr_db, long long iterations,
                       const std::string& family) {
    const ExperimentConfig config = args.load();
    ensure_dir(config.output.directory);
    BaselineTrainOptions opt;
    opt.iterations = iterations;
    opt.noise = family_from_name(family);
    opt.adam.learning_rate = config.training.learning_rate;
    const DnnBaseline baseline =
        train_dnn_baseline(config.modulation_order, snr_db, opt, config.training.seed);
    const std::string path = config.output.directory + "/baseline.json";
    save_baseline(baseline, path);
    std::cout << "trained DNN baseline (" << config.modulation_order << "-QAM, "
              << iterations << " iterations at " << snr_db << " dB, " << family
              << " noise), wrote " << path << "\n";
    return 0;
}

int cmd_inspect(const std::string& model_path, const std::string& config_path) {
    if (model_path.empty() && config_path.empty())
        throw ConfigError("inspect: pass --model and/or --config");
    if (!model_path.empty()) {
        const std::string kind = model_kind(model_path);
        if (kind == "denoiser") {
            const TrainedModel trained = load_model(model_path);
            std::cout << "denoiser model: " << trained.modulation_order << "-QAM, T="
                      << trained.model.time_steps() << ", hidden=" << trained.model.hidden_dim()
                      << ", params=" << trained.model.param_count()
                      << ", epochs_trained=" << trained.model.epochs_trained
                      << ", ema_decay=" << trained.model.ema_decay << "\n"
                      << "schedule: beta_1=" << fmt(trained.schedule.beta.front())
                      << ", beta_T=" << fmt(trained.schedule.beta.back())
                      << ", alpha_bar_T=" << fmt(trained.schedule.alpha_bar.back()) << "\n";
        } else if (kind == "dnn_baseline") {
            const DnnBaseline baseline = load_baseline(model_path);
            std::cout << "dnn baseline: " << baseline.order() << "-QAM, hidden="
                      << baseline.hidden_dim() << ", params=" << baseline.param_count()
                      << ", iterations_trained=" << baseline.iterations_trained
                      << ", train_snr_db=" << baseline.train_snr_db << ", noise="
                      << family_name(baseline.trained_noise) << "\n";
        } else {
            throw IoError("'" + model_path + "': unknown model kind '" + kind + "'");
        }
    }
    if (!config_path.empty()) {
        const ExperimentConfig config = load_config(config_path);
        std::cout << config_summary(config) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DDPM-based probabilistic constellation shaping"};
    app.require_subcommand(1);

    CommonArgs train_args, shape_args, sweep_args, boxplot_args, baseline_args;
    int snapshot_every = 0;
    std::string shape_model, sweep_model, sweep_baseline, boxplot_model;
    std::string inspect_model, inspect_config;
    double shape_snr = 0.0, baseline_snr = 0.0;
    long long baseline_iterations = 5000;
    std::string baseline_family = "gaussian";
    bool retrain_ood = false;

    auto* train = app.add_subcommand("train", "train the denoiser and write model + loss trace");
    add_common(train, train_args, true);
    train->add_option("--snapshot-every", snapshot_every,
                      "dump a reverse-sample cloud CSV every K epochs");

    auto* shape = app.add_subcommand("shape", "single-SNR shaping dump");
    add_common(shape, shape_args, true);
    shape->add_option("--model", shape_model, "trained model file")->required();
    shape->add_option("--snr", shape_snr, "channel SNR in dB")->required();

    auto* sweep = app.add_subcommand("sweep", "metric sweep over the SNR grid");
    add_common(sweep, sweep_args, true);
    sweep->add_option("--model", sweep_model, "trained model file")->required();
    sweep->add_option("--baseline", sweep_baseline, "trained DNN baseline file");
    sweep->add_flag("--retrain-baseline-ood", retrain_ood,
                    "retrain the DNN baseline with Laplacian noise for Laplacian rows");

    auto* boxplot = app.add_subcommand("boxplot", "random-SNR realization experiment");
    add_common(boxplot, boxplot_args, true);
    boxplot->add_option("--model", boxplot_model, "trained model file")->required();

    auto* baseline =
        app.add_subcommand("baseline-train", "train the DNN benchmark and write baseline.json");
    add_common(baseline, baseline_args, true);
    baseline->add_option("--snr", baseline_snr, "training SNR in dB")->required();
    baseline->add_option("--iterations", baseline_iterations, "training iterations");
    baseline->add_option("--noise", baseline_family, "training noise family");

    auto* inspect = app.add_subcommand("inspect", "print model/config summary");
    inspect->add_option("--model", inspect_model, "model or baseline file");
    inspect->add_option("--config", inspect_config, "experiment config (JSON)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(train_args, snapshot_every);
        if (*shape) return cmd_shape(shape_args, shape_model, shape_snr);
        if (*sweep) return cmd_sweep(sweep_args, sweep_model, sweep_baseline, retrain_ood);
        if (*boxplot) return cmd_boxplot(boxplot_args, boxplot_model);
        if (*baseline)
            return cmd_baseline_train(baseline_args, baseline_snr, baseline_iterations,
                                      baseline_family);
        if (*inspect) return cmd_inspect(inspect_model, inspect_config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
