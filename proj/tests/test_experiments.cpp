#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <string>

#include "nfisac/experiments.hpp"

using namespace nfisac;

namespace {

// Small enough that even the precoder designs run in milliseconds.
Scenario tiny_scenario(const std::string& extra = "{}") {
    Scenario s = parse_scenario(extra, Profile::kDesk);
    s.n_tx = 8;
    s.n_rx = 8;
    s.trials = 3;
    s.snapshots = 8;
    s.sweeps.transmit_snr_db = {0.0, 10.0, 20.0};
    s.sweeps.gamma_db = {5.0, 10.0};
    s.sweeps.g_hat = {20.0, 50.0};
    s.sweeps.eta = {0.25, 0.75};
    // Keep the SINR floors binding on the gamma axis; the desk beampattern
    // floor would otherwise pin the power at both points.
    s.qos.g_hat = 0.0;
    return s;
}

bool all_finite(const SweepResult& r) {
    for (const SweepSeries& s : r.series)
        for (double v : s.values)
            if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

TEST_CASE("rmse is the root of the mean square") {
    CHECK(rmse({1.0, 2.0, 2.0}) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(rmse({-3.0}) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(rmse({0.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(rmse({}), std::invalid_argument);
}

TEST_CASE("user placements are seed-determined and respect explicit scatterers") {
    Scenario s = tiny_scenario();
    const auto first = materialize_users(s);
    const auto second = materialize_users(s);
    REQUIRE(first.size() == 2);
    for (size_t k = 0; k < first.size(); ++k) {
        CHECK(first[k].los_gain == second[k].los_gain);
        REQUIRE(first[k].paths() == s.users[k].paths);
        for (int i = 0; i < first[k].paths(); ++i) {
            CHECK(first[k].scatterers[i].range == second[k].scatterers[i].range);
            CHECK(first[k].scatter_gains[i] == second[k].scatter_gains[i]);
            // Sampled placements stay inside the sector the channels model.
            CHECK(first[k].scatterers[i].range >= 1.0);
            CHECK(first[k].scatterers[i].range <= 30.0);
            CHECK(std::abs(first[k].scatterers[i].angle) <= deg_to_rad(60.0));
        }
    }

    // A different seed moves the scattered paths.
    Scenario other = s;
    other.seed = 999;
    const auto moved = materialize_users(other);
    CHECK(moved[0].scatterers[0].range != first[0].scatterers[0].range);

    // Explicit scatterer lists are taken verbatim, no sampling.
    Scenario fixed = s;
    fixed.users[0].scatterers = {ScattererSpec{2.5, 10.0}};
    const auto placed = materialize_users(fixed);
    REQUIRE(placed[0].paths() == 1);
    CHECK(placed[0].scatterers[0].range == 2.5);
    CHECK(placed[0].scatterers[0].angle == doctest::Approx(deg_to_rad(10.0)).epsilon(1e-15));
}

TEST_CASE("target truth mirrors the scenario target block") {
    const Scenario s = tiny_scenario();
    const TargetTruth t = target_truth(s);
    CHECK(t.tx.range == 5.0);
    CHECK(t.tx.angle == doctest::Approx(deg_to_rad(60.0)).epsilon(1e-15));
    CHECK(std::abs(t.beta - cdouble(1.0, 0.0)) <= 1e-15);
    const PolarCoord rx = rx_geometry(t.tx, s.tx_array(), s.rx_array());
    CHECK(t.rx.range == doctest::Approx(rx.range).epsilon(1e-14));
}

TEST_CASE("design set spends the full budget on every precoder") {
    const Scenario s = tiny_scenario();
    const auto users = materialize_users(s);
    const DesignSet d = build_designs(s, users);
    const double pt = s.power_watts();

    for (const Precoder* p :
         {&d.near_tradeoff, &d.far_tradeoff, &d.radar_only, &d.near_comm, &d.far_comm}) {
        CHECK(p->entries.squaredNorm() == doctest::Approx(pt).epsilon(1e-12));
        CHECK(p->power_budget == pt);
        CHECK(p->antennas() == 8);
    }
    CHECK(d.radar_only.streams() == 1);
    CHECK(d.near_comm.streams() == 2);
    CHECK(d.near_truth.users() == 2);
    CHECK(d.near_truth.model == ChannelModel::kNear);
}

TEST_CASE("comm noise calibration puts the reference design at the asked snr") {
    const Scenario s = tiny_scenario();
    const auto users = materialize_users(s);
    const ChannelMatrix truth = assemble_channel(s.tx_array(), users, ChannelModel::kNear);
    const double snr_db = 12.0;
    const double noise = comm_noise_power(s, truth, snr_db);

    const Precoder zf = zf_precoder(truth, s.power_watts());
    double mean_signal = 0.0;
    for (int k = 0; k < truth.users(); ++k)
        mean_signal += std::norm((truth.rows.row(k) * zf.entries.col(k))(0, 0));
    mean_signal /= truth.users();
    CHECK(mean_signal / noise == doctest::Approx(db_to_linear(snr_db)).epsilon(1e-12));
}

TEST_CASE("search plans cover the configured lattice and end at full resolution") {
    Scenario s = tiny_scenario();
    s.music.range_min_m = 2.0;
    s.music.range_max_m = 8.0;
    s.music.range_step_m = 0.5;
    s.music.angle_step_deg = 1.0;

    const MusicSearchOptions std_opts = standard_search(s);
    CHECK(std_opts.fine.ranges.front() == 2.0);
    CHECK(std_opts.fine.ranges.back() == doctest::Approx(8.0).epsilon(1e-12));
    // Angle extents sit one step inside +-90 degrees.
    CHECK(std_opts.fine.angles.front() == doctest::Approx(deg_to_rad(-89.0)).epsilon(1e-12));
    CHECK(std_opts.fine.angles.back() == doctest::Approx(deg_to_rad(89.0)).epsilon(1e-12));
    REQUIRE_FALSE(std_opts.plan.empty());
    CHECK(std_opts.plan.back().range_stride == 1);
    CHECK(std_opts.plan.back().angle_stride == 1);

    const MusicSearchOptions est_opts = estimation_search(s);
    const double want_r = s.estimation_music.range_step_m;
    CHECK(est_opts.fine.ranges[1] - est_opts.fine.ranges[0] ==
          doctest::Approx(want_r).epsilon(1e-12));
    CHECK(est_opts.plan.back().range_stride == 1);
}

TEST_CASE("sweep registry exposes exactly the available sweeps") {
    const auto names = sweep_names();
    REQUIRE(names.size() == 7);
    CHECK(names[0] == "estimation");
    CHECK(names[2] == "rate");
    CHECK(names[6] == "power-floor");
    CHECK_THROWS_AS(run_sweep("bogus", tiny_scenario()), std::invalid_argument);
}

TEST_CASE("series lookup names the sweep and the missing series") {
    SweepResult r;
    r.name = "demo";
    r.series.push_back({"present", {1.0, 2.0}});
    CHECK(r.find("present")[1] == 2.0);
    CHECK_THROWS_AS(r.find("absent"), std::out_of_range);
}

TEST_CASE("rate sweep is reproducible byte for byte") {
    const Scenario s = tiny_scenario();
    const SweepResult a = run_rate_sweep(s);
    const SweepResult b = run_rate_sweep(s);
    CHECK(a.table().to_string() == b.table().to_string());
    CHECK(all_finite(a));
    CHECK(a.axis == s.sweeps.transmit_snr_db);
    // Four pipelines plus a per-user SINR track for both tradeoff designs.
    CHECK(a.series.size() == 4 + 2 * 2);
    CHECK(a.find("nfzf_sum_rate").size() == 3);
    // More transmit power never hurts the interference-free design.
    const auto& zf = a.find("nfzf_sum_rate");
    CHECK(zf[1] > zf[0]);
    CHECK(zf[2] > zf[1]);
}

TEST_CASE("qos sweeps run on both floor axes and stay reproducible") {
    const Scenario s = tiny_scenario();
    const SweepResult a = run_power_sweep(s);
    CHECK(a.axis_label == "gamma_db");
    CHECK(a.table().to_string() == run_power_sweep(s).table().to_string());
    const auto& np = a.find("nfbf_power_dbm");
    REQUIRE(np.size() == 2);
    CHECK(std::isfinite(np[0]));
    // A stiffer SINR floor can only cost more power.
    CHECK(np[1] > np[0]);

    const SweepResult f = run_power_floor_sweep(s);
    CHECK(f.axis_label == "g_hat");
    const auto& fp = f.find("ffbf_power_dbm");
    REQUIRE(fp.size() == 2);
    // A taller beampattern floor can only cost more power.
    CHECK(fp[1] > fp[0]);
}

TEST_CASE("saving a sweep produces a csv table and an svg plot") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "nfisac_sweep_test";
    fs::remove_all(dir);

    const Scenario s = tiny_scenario();
    const SweepResult r = run_rate_sweep(s);
    save_sweep(r, dir.string());

    const std::string csv = read_text_file((dir / "rate.csv").string());
    CHECK(csv.find("# sweep: rate") != std::string::npos);
    CHECK(csv.find("transmit_snr_db") != std::string::npos);
    CHECK(csv.find("nfbf_sum_rate") != std::string::npos);

    const std::string svg = read_text_file((dir / "rate.svg").string());
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("nfbf_sum_rate") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("csv tables render full-precision values and nan gaps") {
    CHECK(format_full(std::nan("")) == "nan");
    const double v = 0.1234567890123456789;
    CHECK(std::stod(format_full(v)) == v);

    CsvTable t;
    t.meta.emplace_back("purpose", "check");
    t.columns = {"x", "y"};
    t.rows = {{1.0, 2.5}, {2.0, std::nan("")}};
    const std::string text = t.to_string();
    CHECK(text.find("# purpose: check") != std::string::npos);
    CHECK(text.find("x,y") != std::string::npos);
    CHECK(text.find("nan") != std::string::npos);
}

TEST_CASE("matrices written to disk read back exactly") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "nfisac_csvio_test";
    fs::create_directories(dir);

    Rng rng(77);
    CMatrix m(3, 4);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = rng.cnormal(1.0);
    const std::string base = (dir / "block").string();
    write_complex_matrix(base, m);
    const CMatrix back = read_complex_matrix(base);
    REQUIRE(back.rows() == 3);
    REQUIRE(back.cols() == 4);
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);

    RMatrix r(2, 5);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 5; ++j) r(i, j) = rng.normal();
    const std::string rpath = (dir / "real.csv").string();
    write_real_matrix(rpath, r);
    const RMatrix rback = read_real_matrix(rpath);
    CHECK((rback - r).cwiseAbs().maxCoeff() == 0.0);
    fs::remove_all(dir);
}
