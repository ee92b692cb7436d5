#ifndef NFISAC_EXPERIMENTS_HPP
#define NFISAC_EXPERIMENTS_HPP

#include <string>
#include <utility>
#include <vector>

#include "nfisac/beamform.hpp"
#include "nfisac/channel.hpp"
#include "nfisac/config.hpp"
#include "nfisac/csvio.hpp"
#include "nfisac/geometry.hpp"
#include "nfisac/sensing.hpp"

// Monte-Carlo sweeps over a scenario. Channel gains and scatterer placements
// are drawn once per scenario so the precoders and bounds stay fixed along a
// sweep; trials only redraw symbols and noise. Every random quantity comes
// from a stream keyed on (master seed, purpose, indices), and trial results
// land in per-trial slots before any reduction, so outputs are byte-identical
// across reruns and thread counts.

namespace nfisac {

double rmse(const std::vector<double>& errors);

struct SweepSeries {
    std::string name;  // unit suffix included, e.g. "nfbf_rmse_range_m"
    std::vector<double> values;
};

struct SweepResult {
    std::string name;
    std::string axis_label;
    std::vector<double> axis;
    std::vector<SweepSeries> series;
    std::vector<std::pair<std::string, std::string>> meta;
    bool log_plot = false;

    const std::vector<double>& find(const std::string& series_name) const;
    CsvTable table() const;
};

// Scenario realizations fixed by the master seed.
std::vector<UserPlacement> materialize_users(const Scenario& s);
TargetTruth target_truth(const Scenario& s);

// Precoders for the compared pipelines. "near" designs use focusing vectors
// and the spherical-wave channel model, "far" designs use steering vectors
// and the planar model; both are evaluated against the spherical-wave truth.
struct DesignSet {
    Precoder near_tradeoff;
    Precoder far_tradeoff;
    Precoder radar_only;  // focusing beam at the target, no comm streams
    Precoder near_comm;
    Precoder far_comm;
    ChannelMatrix near_truth;
};

DesignSet build_designs(const Scenario& s, const std::vector<UserPlacement>& users,
                        double eta, const PolarCoord& target);
DesignSet build_designs(const Scenario& s, const std::vector<UserPlacement>& users);

// Noise level that puts the mean per-user receive SNR of the
// interference-free design at `snr_db`: sigma^2 = mean_k |h_k^H f_k|^2 over
// the budget-scaled ZF precoder, divided by 10^(snr_db/10). Referencing the
// delivered signal keeps the SNR axis meaningful despite the free-space path
// loss carried by the channel gains.
double comm_noise_power(const Scenario& s, const ChannelMatrix& truth, double snr_db);

// Search plans over the scenario's fine lattices. The angle extents are
// trimmed one step inside +-90 degrees where the polar parameterization
// degenerates.
MusicSearchOptions standard_search(const Scenario& s);
MusicSearchOptions estimation_search(const Scenario& s);

SweepResult run_estimation_sweep(const Scenario& s);
SweepResult run_detection_sweep(const Scenario& s);
SweepResult run_rate_sweep(const Scenario& s);
SweepResult run_tradeoff_sweep(const Scenario& s);
SweepResult run_distance_sweep(const Scenario& s);
SweepResult run_power_sweep(const Scenario& s);        // SINR floor axis
SweepResult run_power_floor_sweep(const Scenario& s);  // beampattern floor axis

std::vector<std::string> sweep_names();
SweepResult run_sweep(const std::string& name, const Scenario& s);

// Writes <out_dir>/<name>.csv and <out_dir>/<name>.svg.
void save_sweep(const SweepResult& r, const std::string& out_dir);

}  // namespace nfisac

#endif
