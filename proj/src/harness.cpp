#include "dcs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dcs/errors.hpp"
#include "dcs/metrics.hpp"

namespace dcs {

using nlohmann::json;

const char* version_string() { return "0.1.0"; }

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) known = true;
        if (!known)
            throw ConfigError("config field '" + (path.empty() ? key : path + "." + key) +
                              "' is not recognized");
    }
}

template <class T>
void read_field(const json& obj, const std::string& path, const char* key, T& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + (path.empty() ? std::string(key) : path + "." + key) +
                          "' has the wrong type");
    }
}

} // namespace

ExperimentConfig default_config(int modulation_order) {
    ExperimentConfig c;
    c.modulation_order = modulation_order;
    if (modulation_order == 64) {
        c.schedule.T = 200;
        c.training.epochs = 5000;
    }
    for (double snr = -30.0; snr <= 30.0; snr += 5.0) c.evaluation.snr_grid_db.push_back(snr);
    c.evaluation.noise_families = {NoiseFamily::gaussian, NoiseFamily::laplacian,
                                   NoiseFamily::exponential};
    for (double snr = -20.0; snr <= 10.0; snr += 1.0) c.evaluation.random_snr_set.push_back(snr);
    return c;
}

void validate_config(const ExperimentConfig& c) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("config field '" + field + "' " + why);
    };
    if (c.modulation_order != 16 && c.modulation_order != 64)
        fail("modulation_order", "must be 16 or 64");
    if (c.schedule.T < 2) fail("schedule.T", "must be at least 2");
    if (!(c.schedule.alpha_last > 0.0) || !(c.schedule.alpha_first < 1.0) ||
        !(c.schedule.alpha_first > c.schedule.alpha_last))
        fail("schedule.alpha_first/alpha_last", "must satisfy 0 < alpha_last < alpha_first < 1");
    if (c.training.epochs < 0) fail("training.epochs", "must be non-negative");
    if (c.training.batch_size < 1) fail("training.batch_size", "must be at least 1");
    if (!(c.training.learning_rate > 0.0) || !std::isfinite(c.training.learning_rate))
        fail("training.learning_rate", "must be positive and finite");
    if (!(c.training.ema_decay >= 0.0 && c.training.ema_decay <= 1.0))
        fail("training.ema_decay", "must lie in [0, 1]");
    if (c.shaping.N_s < 1) fail("shaping.N_s", "must be at least 1");
    if (c.evaluation.snr_grid_db.empty()) fail("evaluation.snr_grid_db", "must not be empty");
    for (const double snr : c.evaluation.snr_grid_db)
        if (!std::isfinite(snr)) fail("evaluation.snr_grid_db", "must contain finite values");
    if (c.evaluation.noise_families.empty())
        fail("evaluation.noise_families", "must not be empty");
    if (c.evaluation.n_symbols_per_point < 1)
        fail("evaluation.n_symbols_per_point", "must be at least 1");
    if (c.evaluation.realizations < 1) fail("evaluation.realizations", "must be at least 1");
    if (c.evaluation.random_snr_set.empty())
        fail("evaluation.random_snr_set", "must not be empty");
    for (const double snr : c.evaluation.random_snr_set)
        if (!std::isfinite(snr)) fail("evaluation.random_snr_set", "must contain finite values");
    if (c.output.directory.empty()) fail("output.directory", "must not be empty");
    if (c.output.formats.empty()) fail("output.formats", "must not be empty");
    for (const auto& f : c.output.formats)
        if (f != "csv" && f != "json")
            fail("output.formats", "supports only \"csv\" and \"json\", got \"" + f + "\"");
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    check_keys(doc, "",
               {"modulation_order", "schedule", "training", "shaping", "evaluation", "output"});

    int order = 16;
    read_field(doc, "", "modulation_order", order);
    if (order != 16 && order != 64)
        throw ConfigError("config field 'modulation_order' must be 16 or 64");
    ExperimentConfig c = default_config(order);

    if (doc.contains("schedule")) {
        const json& s = doc["schedule"];
        check_keys(s, "schedule", {"T", "alpha_first", "alpha_last"});
        read_field(s, "schedule", "T", c.schedule.T);
        read_field(s, "schedule", "alpha_first", c.schedule.alpha_first);
        read_field(s, "schedule", "alpha_last", c.schedule.alpha_last);
    }
    if (doc.contains("training")) {
        const json& s = doc["training"];
        check_keys(s, "training",
                   {"epochs", "batch_size", "learning_rate", "ema_decay", "seed"});
        read_field(s, "training", "epochs", c.training.epochs);
        read_field(s, "training", "batch_size", c.training.batch_size);
        read_field(s, "training", "learning_rate", c.training.learning_rate);
        read_field(s, "training", "ema_decay", c.training.ema_decay);
        read_field(s, "training", "seed", c.training.seed);
    }
    if (doc.contains("shaping")) {
        const json& s = doc["shaping"];
        check_keys(s, "shaping", {"N_s"});
        read_field(s, "shaping", "N_s", c.shaping.N_s);
    }
    if (doc.contains("evaluation")) {
        const json& s = doc["evaluation"];
        check_keys(s, "evaluation",
                   {"snr_grid_db", "noise_families", "n_symbols_per_point", "realizations",
                    "random_snr_set"});
        read_field(s, "evaluation", "snr_grid_db", c.evaluation.snr_grid_db);
        if (s.contains("noise_families")) {
            std::vector<std::string> names;
            read_field(s, "evaluation", "noise_families", names);
            c.evaluation.noise_families.clear();
            for (std::size_t k = 0; k < names.size(); ++k) {
                try {
                    c.evaluation.noise_families.push_back(family_from_name(names[k]));
                } catch (const ConfigError&) {
                    throw ConfigError("config field 'evaluation.noise_families[" +
                                      std::to_string(k) + "]' names an unknown family '" +
                                      names[k] + "'");
                }
            }
        }
        read_field(s, "evaluation", "n_symbols_per_point", c.evaluation.n_symbols_per_point);
        read_field(s, "evaluation", "realizations", c.evaluation.realizations);
        read_field(s, "evaluation", "random_snr_set", c.evaluation.random_snr_set);
    }
    if (doc.contains("output")) {
        const json& s = doc["output"];
        check_keys(s, "output", {"directory", "formats"});
        read_field(s, "output", "directory", c.output.directory);
        read_field(s, "output", "formats", c.output.formats);
    }
    validate_config(c);
    return c;
}

namespace {

json config_json(const ExperimentConfig& c) {
    std::vector<std::string> families;
    for (const auto f : c.evaluation.noise_families) families.emplace_back(family_name(f));
    return json{
        {"modulation_order", c.modulation_order},
        {"schedule",
         {{"T", c.schedule.T},
          {"alpha_first", c.schedule.alpha_first},
          {"alpha_last", c.schedule.alpha_last}}},
        {"training",
         {{"epochs", c.training.epochs},
          {"batch_size", c.training.batch_size},
          {"learning_rate", c.training.learning_rate},
          {"ema_decay", c.training.ema_decay},
          {"seed", c.training.seed}}},
        {"shaping", {{"N_s", c.shaping.N_s}}},
        {"evaluation",
         {{"snr_grid_db", c.evaluation.snr_grid_db},
          {"noise_families", families},
          {"n_symbols_per_point", c.evaluation.n_symbols_per_point},
          {"realizations", c.evaluation.realizations},
          {"random_snr_set", c.evaluation.random_snr_set}}},
        {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}}};
}

} // namespace

std::uint64_t config_hash(const ExperimentConfig& c) {
    const std::string canon = config_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : canon) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_summary(const ExperimentConfig& c) { return config_json(c).dump(2); }

TrainingRun run_training(const ExperimentConfig& config, int snapshot_every,
                         std::function<void(long long, const DenoiserModel&)> snapshot) {
    validate_config(config);
    const ConstellationGeometry geo = qam_geometry(config.modulation_order);
    TrainingRun run{DenoiserModel(config.schedule.T),
                    build_schedule(config.schedule.T, config.schedule.alpha_first,
                                   config.schedule.alpha_last),
                    {}};
    run.model.ema_decay = config.training.ema_decay;
    Rng init_rng = substream(config.training.seed, "init");
    run.model.init_weights(init_rng);

    TrainOptions opt;
    opt.epochs = config.training.epochs;
    opt.batch_size = config.training.batch_size;
    opt.adam.learning_rate = config.training.learning_rate;
    opt.snapshot_every = snapshot_every;
    opt.snapshot = std::move(snapshot);
    Rng train_rng = substream(config.training.seed, "train");
    run.loss_trace = train(run.model, geo, run.schedule, opt, train_rng);
    return run;
}

namespace {

Batch points_of(const std::vector<int>& indices, const ConstellationGeometry& geo) {
    Batch out;
    out.reserve(indices.size());
    for (const int s : indices) out.push_back(geo.points[s]);
    return out;
}

void check_model_matches(const ExperimentConfig& config, const TrainedModel& trained) {
    if (trained.modulation_order != config.modulation_order)
        throw ConfigError("model was trained for " + std::to_string(trained.modulation_order) +
                          "-QAM but the config asks for " +
                          std::to_string(config.modulation_order) + "-QAM");
    if (trained.model.time_steps() != config.schedule.T)
        throw ConfigError("model uses T=" + std::to_string(trained.model.time_steps()) +
                          " but the config schedule has T=" + std::to_string(config.schedule.T));
}

SweepRecord uniform_record(const ConstellationGeometry& geo, const ChannelSpec& spec,
                           std::int64_t n_symbols, std::uint64_t seed) {
    const ShapingDistribution dist = uniform_shaping(geo.order);
    Rng sym_rng = substream(seed, "uni-txsym");
    const std::vector<int> tx = sample_symbols(dist, n_symbols, sym_rng);
    const Batch tx_points = points_of(tx, geo);
    Rng chan_rng = substream(seed, "uni-chan");
    const Batch rx_points = apply_channel(tx_points, spec, chan_rng);
    const std::vector<int> rx = project(rx_points, geo);
    SweepRecord rec;
    rec.snr_db = spec.snr_db;
    rec.family = spec.family;
    rec.scheme = "uniform";
    rec.mi_bits = mutual_information(tx, rx, geo.order);
    rec.csim = cosine_similarity(tx_points, points_of(rx, geo));
    rec.ser = symbol_error_rate(tx, rx);
    rec.entropy_bits = entropy_bits(dist);
    rec.shaping_distribution = dist;
    return rec;
}

SweepRecord dnn_record(const DnnBaseline& baseline, const ChannelSpec& spec,
                       std::int64_t n_symbols, std::uint64_t seed) {
    const int m = baseline.order();
    const ShapingDistribution dist = uniform_shaping(m);
    Rng sym_rng = substream(seed, "dnn-txsym");
    const std::vector<int> tx = sample_symbols(dist, n_symbols, sym_rng);
    Batch tx_points;
    tx_points.reserve(tx.size());
    for (const int s : tx) tx_points.push_back(baseline.point(s));
    Rng chan_rng = substream(seed, "dnn-chan");
    const Batch rx_points = apply_channel(tx_points, spec, chan_rng);
    const std::vector<int> rx = dnn_demap(baseline, rx_points);
    Batch rx_mapped;
    rx_mapped.reserve(rx.size());
    for (const int s : rx) rx_mapped.push_back(baseline.point(s));
    SweepRecord rec;
    rec.snr_db = spec.snr_db;
    rec.family = spec.family;
    rec.scheme = "dnn";
    rec.mi_bits = mutual_information(tx, rx, m);
    rec.csim = cosine_similarity(tx_points, rx_mapped);
    rec.ser = symbol_error_rate(tx, rx);
    rec.entropy_bits = entropy_bits(dist);
    rec.shaping_distribution = dist;
    return rec;
}

} // namespace

RunReport run_sweep(const ExperimentConfig& config, const TrainedModel& trained,
                    const DnnBaseline* baseline, bool retrain_baseline_ood) {
    validate_config(config);
    check_model_matches(config, trained);
    if (baseline && baseline->order() != config.modulation_order)
        throw ConfigError("baseline modulation order does not match the config");
    const auto t0 = std::chrono::steady_clock::now();
    const ConstellationGeometry geo = qam_geometry(config.modulation_order);
    const std::uint64_t master = config.training.seed;

    // Retrained-under-Laplacian copy for the OOD comparison, built on demand.
    DnnBaseline retrained(config.modulation_order);
    bool have_retrained = false;
    auto laplacian_baseline = [&]() -> const DnnBaseline& {
        if (!have_retrained) {
            BaselineTrainOptions opt;
            opt.iterations = baseline->iterations_trained;
            opt.noise = NoiseFamily::laplacian;
            retrained = train_dnn_baseline(baseline->order(), baseline->train_snr_db, opt,
                                           baseline->train_seed);
            have_retrained = true;
        }
        return retrained;
    };

    RunReport report;
    const std::size_t n_families = config.evaluation.noise_families.size();
    for (std::size_t si = 0; si < config.evaluation.snr_grid_db.size(); ++si) {
        const double snr = config.evaluation.snr_grid_db[si];
        for (std::size_t fi = 0; fi < n_families; ++fi) {
            const NoiseFamily family = config.evaluation.noise_families[fi];
            const ChannelSpec spec{family, snr, 1.0};
            const std::uint64_t pair_seed = mix_seed(master, "sweep", si * n_families + fi);

            ShapingResult shaping;
            const TransmissionRecord rec =
                transmit_round(trained.model, geo, trained.schedule, spec,
                               config.evaluation.n_symbols_per_point,
                               config.shaping.N_s, mix_seed(pair_seed, "ddpm"), &shaping);
            SweepRecord row;
            row.snr_db = snr;
            row.family = family;
            row.scheme = "ddpm";
            row.mi_bits = mutual_information(rec.tx_indices, rec.rx_indices, geo.order);
            row.csim = cosine_similarity(rec.tx_points, points_of(rec.rx_indices, geo));
            row.ser = symbol_error_rate(rec.tx_indices, rec.rx_indices);
            row.entropy_bits = entropy_bits(shaping.distribution);
            row.shaping_distribution = shaping.distribution;
            report.records.push_back(std::move(row));

            report.records.push_back(uniform_record(geo, spec,
                                                    config.evaluation.n_symbols_per_point,
                                                    mix_seed(pair_seed, "uniform")));
            if (baseline) {
                const DnnBaseline& b =
                    (retrain_baseline_ood && family == NoiseFamily::laplacian)
                        ? laplacian_baseline()
                        : *baseline;
                report.records.push_back(dnn_record(b, spec,
                                                    config.evaluation.n_symbols_per_point,
                                                    mix_seed(pair_seed, "dnn")));
            }
        }
    }
    report.meta.config_hash = config_hash(config);
    report.meta.seed = master;
    report.meta.version = version_string();
    report.meta.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::vector<BoxplotRow> run_boxplot_experiment(const ExperimentConfig& config,
                                               const TrainedModel& trained) {
    validate_config(config);
    check_model_matches(config, trained);
    const ConstellationGeometry geo = qam_geometry(config.modulation_order);
    const std::uint64_t master = config.training.seed;
    std::vector<BoxplotRow> rows;

    for (int r = 0; r < config.evaluation.realizations; ++r) {
        const std::uint64_t seed_r = mix_seed(master, "boxplot", static_cast<std::uint64_t>(r));
        Rng snr_rng = substream(seed_r, "snr");
        const double snr = config.evaluation.random_snr_set[snr_rng.below(
            config.evaluation.random_snr_set.size())];
        const ShapingResult shaping =
            shape_constellation(trained.model, geo, trained.schedule, snr,
                                static_cast<std::size_t>(config.shaping.N_s),
                                mix_seed(seed_r, "shape"));
        const std::int64_t n = config.evaluation.n_symbols_per_point;

        for (std::size_t fi = 0; fi < config.evaluation.noise_families.size(); ++fi) {
            const NoiseFamily family = config.evaluation.noise_families[fi];
            const ChannelSpec spec{family, snr, 1.0};
            {
                Rng sym_rng = substream(seed_r, "ddpm-txsym", fi);
                const std::vector<int> tx = sample_symbols(shaping.distribution, n, sym_rng);
                const Batch tx_points = points_of(tx, geo);
                Rng chan_rng = substream(seed_r, "ddpm-chan", fi);
                const Batch rx_points = apply_channel(tx_points, spec, chan_rng);
                const std::vector<int> rx =
                    reconstruct(rx_points, trained.model, trained.schedule, geo, snr,
                                mix_seed(seed_r, "ddpm-rx", fi));
                rows.push_back({r, snr, family, "ddpm",
                                mutual_information(tx, rx, geo.order),
                                cosine_similarity(tx_points, points_of(rx, geo))});
            }
            {
                const SweepRecord rec =
                    uniform_record(geo, spec, n, mix_seed(seed_r, "uniform", fi));
                rows.push_back({r, snr, family, "uniform", rec.mi_bits, rec.csim});
            }
        }
    }
    return rows;
}

void write_report_csv(const RunReport& report, std::ostream& out) {
    out << "snr_db,family,scheme,mi_bits,csim,ser,entropy_bits\n";
    for (const SweepRecord& rec : report.records)
        out << fmt(rec.snr_db) << ',' << family_name(rec.family) << ',' << rec.scheme << ','
            << fmt(rec.mi_bits) << ',' << fmt(rec.csim) << ',' << fmt(rec.ser) << ','
            << fmt(rec.entropy_bits) << '\n';
}

std::string report_json(const RunReport& report) {
    json records = json::array();
    for (const SweepRecord& rec : report.records)
        records.push_back({{"snr_db", rec.snr_db},
                           {"family", family_name(rec.family)},
                           {"scheme", rec.scheme},
                           {"mi_bits", rec.mi_bits},
                           {"csim", rec.csim},
                           {"ser", rec.ser},
                           {"entropy_bits", rec.entropy_bits},
                           {"shaping_distribution", rec.shaping_distribution.probs}});
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(report.meta.config_hash));
    const json doc = {{"schema_version", 1},
                      {"metadata",
                       {{"config_hash", hash},
                        {"seed", report.meta.seed},
                        {"version", report.meta.version}}},
                      {"records", records}};
    return doc.dump(2) + "\n";
}

void write_boxplot_csv(std::span<const BoxplotRow> rows, std::ostream& out) {
    out << "realization,snr_db,family,scheme,mi_bits,csim\n";
    for (const BoxplotRow& row : rows)
        out << row.realization << ',' << fmt(row.snr_db) << ',' << family_name(row.family)
            << ',' << row.scheme << ',' << fmt(row.mi_bits) << ',' << fmt(row.csim) << '\n';
}

void emit_report(const RunReport& report, const OutputConfig& output) {
    if (report.records.empty()) throw std::invalid_argument("emit_report: empty report");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(output.directory, ec);
    if (ec) throw IoError("cannot create output directory '" + output.directory + "'");

    const bool want_csv =
        std::find(output.formats.begin(), output.formats.end(), "csv") != output.formats.end();
    const bool want_json =
        std::find(output.formats.begin(), output.formats.end(), "json") != output.formats.end();

    if (want_csv) {
        const std::string path = output.directory + "/report.csv";
        std::ofstream out(path);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        write_report_csv(report, out);
        if (!out) throw IoError("failed while writing '" + path + "'");

        const std::string dist_dir = output.directory + "/distributions";
        fs::create_directories(dist_dir, ec);
        if (ec) throw IoError("cannot create '" + dist_dir + "'");
        for (const SweepRecord& rec : report.records) {
            if (rec.scheme != "ddpm") continue;
            const ConstellationGeometry geo =
                qam_geometry(static_cast<int>(rec.shaping_distribution.probs.size()));
            char name[128];
            std::snprintf(name, sizeof name, "%s/dist_ddpm_%s_snr%g.csv", dist_dir.c_str(),
                          family_name(rec.family), rec.snr_db);
            std::ofstream dist_out(name);
            if (!dist_out) throw IoError(std::string("cannot open '") + name + "' for writing");
            dist_out << "symbol,i,q,probability\n";
            for (int s = 0; s < geo.order; ++s)
                dist_out << s << ',' << fmt(geo.points[s].i) << ',' << fmt(geo.points[s].q)
                         << ',' << fmt(rec.shaping_distribution.probs[s]) << '\n';
        }
    }
    if (want_json) {
        const std::string path = output.directory + "/report.json";
        std::ofstream out(path);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        out << report_json(report);
        if (!out) throw IoError("failed while writing '" + path + "'");
    }
}

} // namespace dcs
