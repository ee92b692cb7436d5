// Timing comparison of the OpenMP grid kernels against their serial
// reference implementations. The parallel versions must also agree bit for
// bit, since each cell is computed by the same scalar code.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <vector>

#include "nfisac/beamform.hpp"
#include "nfisac/channel.hpp"
#include "nfisac/geometry.hpp"
#include "nfisac/rng.hpp"
#include "nfisac/sensing.hpp"

using namespace nfisac;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-18s serial %8.4f s | parallel %8.4f s | speedup %5.2fx | %s\n", name,
                serial_s, parallel_s, serial_s / parallel_s,
                identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
    constexpr double deg = std::numbers::pi / 180.0;
    const double lambda = wavelength_from_carrier(30e9);
    const ArrayConfig cfg(64, 0.5 * lambda, lambda);
    std::printf("threads: %d\n", omp_get_max_threads());

    // synthetic rank-3 covariance
    Rng rng = Rng::stream(7, stream_tag("bench"));
    CMatrix f(64, 3);
    for (Eigen::Index c = 0; c < f.cols(); ++c)
        for (Eigen::Index r = 0; r < f.rows(); ++r) f(r, c) = rng.cnormal(1.0);
    const CMatrix cov = 0.5 * (f * f.adjoint() + (f * f.adjoint()).adjoint());

    std::vector<double> angles, ranges;
    for (double a = -89.0; a <= 89.0; a += 0.25) angles.push_back(a * deg);
    for (double r = 1.0; r <= 30.0; r += 0.1) ranges.push_back(r);

    {
        RVector a, b;
        const double ts = best_of(3, [&] { a = beampattern_far_serial(cov, cfg, angles); });
        const double tp = best_of(3, [&] { b = beampattern_far(cov, cfg, angles); });
        report("beampattern_far", ts, tp, (a - b).cwiseAbs().maxCoeff() == 0.0);
    }
    {
        RMatrix a, b;
        const double ts =
            best_of(3, [&] { a = beampattern_near_serial(cov, cfg, ranges, angles); });
        const double tp = best_of(3, [&] { b = beampattern_near(cov, cfg, ranges, angles); });
        report("beampattern_near", ts, tp, (a - b).cwiseAbs().maxCoeff() == 0.0);
    }
    {
        const CVector b = near_focusing(cfg, PolarCoord(5.0, 60.0 * deg));
        const CMatrix one_target = cov + 40.0 * b * b.adjoint();
        const CMatrix basis = noise_subspace(0.5 * (one_target + one_target.adjoint()), 1);
        MusicGrid grid;
        grid.ranges = ranges;
        grid.angles = angles;
        RMatrix sa, sb;
        const double ts = best_of(3, [&] { sa = music_spectrum_serial(basis, cfg, grid); });
        const double tp = best_of(3, [&] { sb = music_spectrum(basis, cfg, grid); });
        report("music_spectrum", ts, tp, (sa - sb).cwiseAbs().maxCoeff() == 0.0);
    }
    return 0;
}
