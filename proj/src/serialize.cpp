#include "dcs/serialize.hpp"

#include <fstream>

#include <json.hpp>

#include "dcs/errors.hpp"

namespace dcs {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json slice(const std::vector<double>& flat, std::size_t off, std::size_t count) {
    return json(std::vector<double>(flat.begin() + off, flat.begin() + off + count));
}

void fill(std::vector<double>& flat, std::size_t off, const json& arr, std::size_t count,
          const std::string& what) {
    if (!arr.is_array() || arr.size() != count)
        throw IoError("model file: field '" + what + "' must be an array of " +
                      std::to_string(count) + " numbers");
    for (std::size_t k = 0; k < count; ++k) flat[off + k] = arr[k].get<double>();
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError("failed to parse '" + path + "': " + e.what());
    }
    return doc;
}

void write_json(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed while writing '" + path + "'");
}

void check_header(const json& doc, const std::string& path, const std::string& kind) {
    if (doc.value("format_version", -1) != kFormatVersion)
        throw IoError("'" + path + "': unsupported format_version");
    if (doc.value("kind", "") != kind)
        throw IoError("'" + path + "': expected kind '" + kind + "', found '" +
                      doc.value("kind", "<missing>") + "'");
}

} // namespace

void save_model(const DenoiserModel& model, const DiffusionSchedule& sched,
                int modulation_order, const std::string& path) {
    const auto& theta = model.params();
    json hidden = json::array();
    json embeddings = json::array();
    json layer_dims = json::array();
    for (int k = 0; k < DenoiserModel::kHiddenLayers; ++k) {
        const std::size_t nw =
            static_cast<std::size_t>(model.hidden_dim()) * model.hidden_in(k);
        hidden.push_back({{"w", slice(theta, model.hidden_w_off(k), nw)},
                          {"b", slice(theta, model.hidden_b_off(k), model.hidden_dim())}});
        embeddings.push_back(slice(theta, model.embed_off(k),
                                   static_cast<std::size_t>(model.time_steps()) *
                                       model.hidden_dim()));
        layer_dims.push_back({model.hidden_dim(), model.hidden_in(k)});
    }
    layer_dims.push_back({model.io_dim(), model.hidden_dim()});
    const json doc = {
        {"format_version", kFormatVersion},
        {"kind", "denoiser"},
        {"modulation_order", modulation_order},
        {"T", model.time_steps()},
        {"io_dim", model.io_dim()},
        {"hidden_dim", model.hidden_dim()},
        {"layer_dims", layer_dims},
        {"ema_decay", model.ema_decay},
        {"epochs_trained", model.epochs_trained},
        {"schedule_params",
         {{"T", sched.steps()},
          {"alpha_first", sched.alpha_first},
          {"alpha_last", sched.alpha_last}}},
        {"weights",
         {{"hidden", hidden},
          {"embeddings", embeddings},
          {"output",
           {{"w", slice(theta, model.out_w_off(),
                        static_cast<std::size_t>(model.io_dim()) * model.hidden_dim())},
            {"b", slice(theta, model.out_b_off(), model.io_dim())}}}}},
        {"ema_shadow", json(model.ema_shadow())},
    };
    write_json(doc, path);
}

TrainedModel load_model(const std::string& path) {
    const json doc = read_json(path);
    check_header(doc, path, "denoiser");
    try {
        const int steps = doc.at("T").get<int>();
        const int hidden_dim = doc.at("hidden_dim").get<int>();
        const int io_dim = doc.at("io_dim").get<int>();
        const auto& sp = doc.at("schedule_params");
        TrainedModel out{DenoiserModel(steps, hidden_dim, io_dim),
                         build_schedule(sp.at("T").get<int>(), sp.at("alpha_first").get<double>(),
                                        sp.at("alpha_last").get<double>()),
                         doc.at("modulation_order").get<int>()};
        DenoiserModel& model = out.model;
        model.ema_decay = doc.at("ema_decay").get<double>();
        model.epochs_trained = doc.at("epochs_trained").get<long long>();

        auto& theta = model.params();
        const auto& weights = doc.at("weights");
        for (int k = 0; k < DenoiserModel::kHiddenLayers; ++k) {
            const auto& layer = weights.at("hidden").at(k);
            const std::size_t nw = static_cast<std::size_t>(hidden_dim) * model.hidden_in(k);
            fill(theta, model.hidden_w_off(k), layer.at("w"), nw, "weights.hidden.w");
            fill(theta, model.hidden_b_off(k), layer.at("b"), hidden_dim, "weights.hidden.b");
            fill(theta, model.embed_off(k), weights.at("embeddings").at(k),
                 static_cast<std::size_t>(steps) * hidden_dim, "weights.embeddings");
        }
        fill(theta, model.out_w_off(), weights.at("output").at("w"),
             static_cast<std::size_t>(io_dim) * hidden_dim, "weights.output.w");
        fill(theta, model.out_b_off(), weights.at("output").at("b"), io_dim,
             "weights.output.b");
        fill(model.ema_shadow(), 0, doc.at("ema_shadow"), model.param_count(), "ema_shadow");
        if (out.schedule.steps() != model.time_steps())
            throw IoError("'" + path + "': schedule_params.T disagrees with T");
        return out;
    } catch (const json::exception& e) {
        throw IoError("'" + path + "': malformed model file: " + e.what());
    }
}

void save_baseline(const DnnBaseline& baseline, const std::string& path) {
    const auto& theta = baseline.params();
    json layers = json::array();
    json layer_dims = json::array();
    for (int k = 0; k < DnnBaseline::kLayers; ++k) {
        const std::size_t nw =
            static_cast<std::size_t>(baseline.layer_out(k)) * baseline.layer_in(k);
        layers.push_back({{"w", slice(theta, baseline.w_off(k), nw)},
                          {"b", slice(theta, baseline.b_off(k), baseline.layer_out(k))}});
        layer_dims.push_back({baseline.layer_out(k), baseline.layer_in(k)});
    }
    const json doc = {
        {"format_version", kFormatVersion},
        {"kind", "dnn_baseline"},
        {"modulation_order", baseline.order()},
        {"hidden_dim", baseline.hidden_dim()},
        {"layer_dims", layer_dims},
        {"weights",
         {{"constellation",
           slice(theta, baseline.constellation_off(), 2 * static_cast<std::size_t>(baseline.order()))},
          {"layers", layers}}},
        {"train_snr_db", baseline.train_snr_db},
        {"iterations_trained", baseline.iterations_trained},
        {"noise_family", family_name(baseline.trained_noise)},
        {"train_seed", baseline.train_seed},
    };
    write_json(doc, path);
}

DnnBaseline load_baseline(const std::string& path) {
    const json doc = read_json(path);
    check_header(doc, path, "dnn_baseline");
    try {
        DnnBaseline baseline(doc.at("modulation_order").get<int>(),
                             doc.at("hidden_dim").get<int>());
        auto& theta = baseline.params();
        const auto& weights = doc.at("weights");
        fill(theta, baseline.constellation_off(), weights.at("constellation"),
             2 * static_cast<std::size_t>(baseline.order()), "weights.constellation");
        for (int k = 0; k < DnnBaseline::kLayers; ++k) {
            const auto& layer = weights.at("layers").at(k);
            const std::size_t nw =
                static_cast<std::size_t>(baseline.layer_out(k)) * baseline.layer_in(k);
            fill(theta, baseline.w_off(k), layer.at("w"), nw, "weights.layers.w");
            fill(theta, baseline.b_off(k), layer.at("b"), baseline.layer_out(k),
                 "weights.layers.b");
        }
        baseline.train_snr_db = doc.at("train_snr_db").get<double>();
        baseline.iterations_trained = doc.at("iterations_trained").get<long long>();
        baseline.trained_noise = family_from_name(doc.at("noise_family").get<std::string>());
        baseline.train_seed = doc.at("train_seed").get<std::uint64_t>();
        return baseline;
    } catch (const json::exception& e) {
        throw IoError("'" + path + "': malformed baseline file: " + e.what());
    }
}

std::string model_kind(const std::string& path) {
    const json doc = read_json(path);
    return doc.value("kind", "");
}

} // namespace dcs
