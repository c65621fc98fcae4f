// Serial-vs-parallel timing for the morphology kernels, with an equality
// check so the parallel path cannot drift from the reference.
#include <chrono>
#include <cstdio>
#include <random>

#include "porogen/morph/distance.hpp"
#include "porogen/morph/metrics.hpp"

using namespace porogen;

namespace {

BinaryMask random_mask(int side, double porosity, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution pore(porosity);
    BinaryMask mask = BinaryMask::filled(side, side, 0);
    for (auto& v : mask.data) v = pore(rng) ? 1 : 0;
    return mask;
}

template <typename F>
double time_best_of(int repeats, const F& f) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        best = std::min(best, dt);
    }
    return best;
}

}  // namespace

int main() {
    std::printf("%8s %14s %14s %9s %7s\n", "side", "serial (ms)", "parallel (ms)", "speedup",
                "match");
    for (int side : {240, 480, 960, 1920}) {
        auto mask = random_mask(side, 0.4, 17);
        morph::DistanceField serial, parallel;
        double ts = time_best_of(3, [&] { serial = morph::distance_transform(mask, morph::Exec::Serial); });
        double tp = time_best_of(3, [&] { parallel = morph::distance_transform(mask, morph::Exec::Parallel); });
        bool match = serial.data == parallel.data;
        std::printf("%8d %14.3f %14.3f %8.2fx %7s\n", side, ts * 1e3, tp * 1e3, ts / tp,
                    match ? "yes" : "NO");
        if (!match) return 1;
    }

    auto mask = random_mask(960, 0.4, 23);
    double t = time_best_of(3, [&] { (void)morph::specific_surface_area(mask); });
    std::printf("\nspecific_surface_area 960^2: %.3f ms\n", t * 1e3);
    return 0;
}
