#pragma once

#include <string>

#include "dcs/baselines.hpp"
#include "dcs/diffusion.hpp"
#include "dcs/nn.hpp"

namespace dcs {

struct TrainedModel {
    DenoiserModel model;
    DiffusionSchedule schedule;
    int modulation_order = 0;
};

// Versioned JSON model files. Doubles are emitted with shortest round-trip
// formatting, so save/load is value-exact.
void save_model(const DenoiserModel& model, const DiffusionSchedule& sched,
                int modulation_order, const std::string& path);
TrainedModel load_model(const std::string& path);

void save_baseline(const DnnBaseline& baseline, const std::string& path);
DnnBaseline load_baseline(const std::string& path);

// "denoiser" or "dnn_baseline"; throws IoError for unreadable files.
std::string model_kind(const std::string& path);

} // namespace dcs
