#ifndef NFISAC_CONFIG_HPP
#define NFISAC_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nfisac/geometry.hpp"
#include "nfisac/numkernel.hpp"

// Scenario description and its JSON round trip. Fields carry the units used
// at the tool boundary (degrees, meters, dBm, GHz); the accessors convert to
// the SI/radian quantities the library works in. Keeping the boundary values
// verbatim makes serialize(parse(x)) lossless.

namespace nfisac {

enum class Profile { kDesk, kPaper };

struct ScattererSpec {
    double range_m = 1.0;
    double angle_deg = 0.0;

    bool operator==(const ScattererSpec&) const = default;
};

struct UserSpec {
    double range_m = 5.0;
    double angle_deg = 0.0;
    // Non-LoS path count. Placements are drawn from the seed unless an
    // explicit scatterer list is given, which then wins over `paths`.
    int paths = 2;
    std::vector<ScattererSpec> scatterers;

    bool operator==(const UserSpec&) const = default;
};

struct TargetSpec {
    double range_m = 5.0;
    double angle_deg = 60.0;
    double beta_magnitude = 1.0;
    double beta_phase_deg = 0.0;

    bool operator==(const TargetSpec&) const = default;
};

struct QosConfig {
    double gamma_db = 15.0;    // per-user SINR floor
    double g_hat = 100.0;      // beampattern floor at the target, linear
    double noise_dbm = -90.0;  // absolute receiver noise for the QoS problem

    bool operator==(const QosConfig&) const = default;
};

struct MusicConfig {
    double range_min_m = 1.0;
    double range_max_m = 30.0;
    double range_step_m = 0.1;
    double angle_min_deg = -90.0;
    double angle_max_deg = 90.0;
    double angle_step_deg = 0.25;
    bool refine = false;

    bool operator==(const MusicConfig&) const = default;
};

// Finer lattice used inside the estimation sweep so grid quantization stays
// below the bound at the top of the SNR axis.
struct EstimationMusicConfig {
    double range_step_m = 0.02;
    double angle_step_deg = 0.02;

    bool operator==(const EstimationMusicConfig&) const = default;
};

struct SweepGrids {
    std::vector<double> snr_r_db = {5.0, 10.0, 15.0, 20.0, 25.0};
    // The array gain pushes the detector's transition region far below the
    // estimation SNRs, hence the separate axis.
    std::vector<double> detection_snr_db = {-30.0, -25.0, -20.0, -15.0,
                                            -10.0, -5.0,  0.0};
    // Runs far enough up for the far-field design's interference floor to
    // flatten its rate curve; the floor sits high when the aperture is small.
    std::vector<double> transmit_snr_db = {0.0,  5.0,  10.0, 15.0, 20.0, 25.0, 30.0,
                                           35.0, 40.0, 45.0, 50.0, 55.0, 60.0};
    std::vector<double> eta = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> tradeoff_distances_m = {5.0, 15.0};
    std::vector<double> target_distance_m = {2.0,  4.0,  6.0,  8.0,  10.0,
                                             12.0, 14.0, 16.0, 18.0, 20.0,
                                             22.0, 24.0, 26.0, 28.0, 30.0};
    std::vector<double> gamma_db = {5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0};
    std::vector<double> g_hat = {20.0, 50.0, 80.0, 110.0, 140.0, 170.0, 200.0};

    bool operator==(const SweepGrids&) const = default;
};

struct Scenario {
    std::uint64_t seed = 12345;
    int n_tx = 256;
    int n_rx = 256;
    double spacing_over_wavelength = 0.5;
    double carrier_ghz = 30.0;
    double power_dbm = 30.0;
    int snapshots = 64;
    double eta = 0.5;
    int trials = 500;
    double comm_snr_db = 15.0;
    double radar_snr_db = 15.0;
    double pfa = 1e-7;
    std::vector<UserSpec> users = {UserSpec{5.0, 0.0, 2, {}},
                                   UserSpec{15.0, 0.0, 2, {}}};
    TargetSpec target;
    QosConfig qos;
    MusicConfig music;
    EstimationMusicConfig estimation_music;
    SweepGrids sweeps;

    static Scenario defaults(Profile profile);

    double wavelength() const;
    double spacing() const { return spacing_over_wavelength * wavelength(); }
    double power_watts() const;
    ArrayConfig tx_array() const;
    ArrayConfig rx_array() const;
    PolarCoord target_tx() const;
    cdouble beta() const;
    double radar_noise_power() const;  // watts, from radar_snr_db
    double qos_noise_power() const;    // watts, from qos.noise_dbm

    bool operator==(const Scenario&) const = default;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);
double deg_to_rad(double deg);
double rad_to_deg(double rad);

// Parses a JSON scenario on top of the profile defaults. Keys present in the
// text always win; unknown keys and wrong types are errors naming the full
// key path. An empty string yields the plain profile defaults.
Scenario parse_scenario(const std::string& json_text, Profile profile);

std::string scenario_to_json(const Scenario& s);

}  // namespace nfisac

#endif
