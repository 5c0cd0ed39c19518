// Compares the serial reference reverse sampler against the OpenMP kernel
// and verifies that both produce bit-identical outputs.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dcs/diffusion.hpp"
#include "dcs/harness.hpp"

using namespace dcs;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    std::size_t n = 4000;
    int steps = 100;
    if (argc > 1) n = std::strtoull(argv[1], nullptr, 10);
    if (argc > 2) steps = std::atoi(argv[2]);

    const DiffusionSchedule sched = build_schedule(steps);
    DenoiserModel model(steps);
    Rng init = substream(7, "init");
    model.init_weights(init);

    Rng start_rng = substream(7, "bench-start");
    Batch start(n);
    for (IQ& p : start) p = {start_rng.normal(), start_rng.normal()};

    std::printf("reverse sampling benchmark: %zu elements x %d steps\n", n, steps);
#ifdef _OPENMP
    std::printf("OpenMP max threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif

    auto t0 = clock_type::now();
    const Batch serial = reverse_sample_serial(start, model, sched, 99);
    const double t_serial = seconds_since(t0);

    t0 = clock_type::now();
    const Batch parallel = reverse_sample(start, model, sched, 99);
    const double t_parallel = seconds_since(t0);

    bool identical = serial.size() == parallel.size();
    for (std::size_t k = 0; identical && k < serial.size(); ++k)
        identical = std::memcmp(&serial[k], &parallel[k], sizeof(IQ)) == 0;

    const double work = static_cast<double>(n) * steps;
    std::printf("serial reference: %8.3f s  (%.0f sample-steps/s)\n", t_serial,
                work / t_serial);
    std::printf("openmp kernel:    %8.3f s  (%.0f sample-steps/s)\n", t_parallel,
                work / t_parallel);
    std::printf("speedup: %.2fx, outputs %s\n", t_serial / t_parallel,
                identical ? "bit-identical" : "DIFFER");
    return identical ? 0 : 1;
}
