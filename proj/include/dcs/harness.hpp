#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dcs/baselines.hpp"
#include "dcs/channel.hpp"
#include "dcs/link.hpp"
#include "dcs/serialize.hpp"

namespace dcs {

struct ScheduleConfig {
    int T = 100;
    double alpha_first = 0.99999;
    double alpha_last = 0.99;
};

struct TrainingConfig {
    long long epochs = 1000;
    int batch_size = 128;
    double learning_rate = 1e-3;
    double ema_decay = 0.9;
    std::uint64_t seed = 1; // master seed for the whole run
};

struct ShapingConfig {
    std::int64_t N_s = 10000;
};

struct EvaluationConfig {
    std::vector<double> snr_grid_db;
    std::vector<NoiseFamily> noise_families;
    std::int64_t n_symbols_per_point = 10000;
    int realizations = 30;
    std::vector<double> random_snr_set;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats = {"csv", "json"};
};

struct ExperimentConfig {
    int modulation_order = 16;
    ScheduleConfig schedule;
    TrainingConfig training;
    ShapingConfig shaping;
    EvaluationConfig evaluation;
    OutputConfig output;
};

// Paper-style defaults for the given modulation order: T = 100 and 1000
// epochs for 16-QAM, T = 200 and 5000 epochs for 64-QAM.
ExperimentConfig default_config(int modulation_order);

// Loads a JSON config; absent fields take their defaults. Every invalid
// field raises ConfigError naming the field path.
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& config);

std::uint64_t config_hash(const ExperimentConfig& config);
std::string config_summary(const ExperimentConfig& config);

struct TrainingRun {
    DenoiserModel model;
    DiffusionSchedule schedule;
    std::vector<double> loss_trace;
};

TrainingRun run_training(const ExperimentConfig& config, int snapshot_every = 0,
                         std::function<void(long long, const DenoiserModel&)> snapshot = {});

struct SweepRecord {
    double snr_db = 0.0;
    NoiseFamily family = NoiseFamily::gaussian;
    std::string scheme; // "ddpm", "uniform" or "dnn"
    double mi_bits = 0.0;
    double csim = 0.0;
    double ser = 0.0;
    double entropy_bits = 0.0;
    ShapingDistribution shaping_distribution;
};

struct RunReport {
    std::vector<SweepRecord> records;
    struct Meta {
        std::uint64_t config_hash = 0;
        std::uint64_t seed = 0;
        std::string version;
        double wall_time_s = 0.0; // logged, never serialized
    } meta;
};

// One full transmission round per (snr, family) grid point for the DDPM
// scheme plus a uniform-shaping row, and a DNN row when a baseline is given.
// With retrain_baseline_ood set, Laplacian-family DNN rows use a copy of the
// baseline retrained under Laplacian noise.
RunReport run_sweep(const ExperimentConfig& config, const TrainedModel& trained,
                    const DnnBaseline* baseline = nullptr, bool retrain_baseline_ood = false);

struct BoxplotRow {
    int realization = 0;
    double snr_db = 0.0;
    NoiseFamily family = NoiseFamily::gaussian;
    std::string scheme;
    double mi_bits = 0.0;
    double csim = 0.0;
};

// `realizations` independent shaping runs, each at an SNR drawn uniformly
// from evaluation.random_snr_set, evaluated under every configured noise
// family for the DDPM and uniform schemes.
std::vector<BoxplotRow> run_boxplot_experiment(const ExperimentConfig& config,
                                               const TrainedModel& trained);

// report.csv (header: snr_db,family,scheme,mi_bits,csim,ser,entropy_bits),
// report.json and per-SNR shaping-distribution CSVs under the output dir.
void emit_report(const RunReport& report, const OutputConfig& output);
void write_report_csv(const RunReport& report, std::ostream& out);
std::string report_json(const RunReport& report);
void write_boxplot_csv(std::span<const BoxplotRow> rows, std::ostream& out);

const char* version_string();

} // namespace dcs
