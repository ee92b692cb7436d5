#include "doctest.h"

#include <cmath>

#include "nfisac/config.hpp"

using namespace nfisac;

TEST_CASE("profiles differ only in array size and trial count") {
    const Scenario desk = Scenario::defaults(Profile::kDesk);
    const Scenario paper = Scenario::defaults(Profile::kPaper);
    CHECK(desk.n_tx == 64);
    CHECK(desk.n_rx == 64);
    CHECK(desk.trials == 100);
    CHECK(paper.n_tx == 256);
    CHECK(paper.n_rx == 256);
    CHECK(paper.trials == 500);

    Scenario bridged = paper;
    bridged.n_tx = desk.n_tx;
    bridged.n_rx = desk.n_rx;
    bridged.trials = desk.trials;
    CHECK(bridged == desk);

    CHECK(desk.seed == 12345);
    CHECK(desk.carrier_ghz == 30.0);
    CHECK(desk.power_dbm == 30.0);
    CHECK(desk.snapshots == 64);
    CHECK(desk.eta == 0.5);
    CHECK(desk.users.size() == 2);
    CHECK(desk.users[0].range_m == 5.0);
    CHECK(desk.users[1].range_m == 15.0);
    CHECK(desk.target.range_m == 5.0);
    CHECK(desk.target.angle_deg == 60.0);
}

TEST_CASE("unit conversions match their defining formulas") {
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-14));
    CHECK(watts_to_dbm(dbm_to_watts(17.3)) == doctest::Approx(17.3).epsilon(1e-12));
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(db_to_linear(3.0) == doctest::Approx(std::pow(10.0, 0.3)).epsilon(1e-14));
    CHECK(deg_to_rad(180.0) == doctest::Approx(3.14159265358979).epsilon(1e-12));
    CHECK(rad_to_deg(deg_to_rad(37.5)) == doctest::Approx(37.5).epsilon(1e-13));
}

TEST_CASE("derived scenario quantities carry the configured units") {
    const Scenario s = Scenario::defaults(Profile::kDesk);
    CHECK(s.wavelength() == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(s.spacing() == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(s.power_watts() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.tx_array().n_elements == 64);
    CHECK(s.rx_array().n_elements == 64);
    CHECK(s.target_tx().range == 5.0);
    CHECK(s.target_tx().angle == doctest::Approx(deg_to_rad(60.0)).epsilon(1e-15));
    CHECK(std::abs(s.beta() - cdouble(1.0, 0.0)) <= 1e-15);

    // sigma_w^2 = |beta|^2 L P_t / SNR_r.
    const double want = 1.0 * 64 * 1.0 / db_to_linear(15.0);
    CHECK(s.radar_noise_power() == doctest::Approx(want).epsilon(1e-13));
    CHECK(s.qos_noise_power() == doctest::Approx(dbm_to_watts(-90.0)).epsilon(1e-13));
}

TEST_CASE("serialization round trips and empty text means defaults") {
    const Scenario desk = Scenario::defaults(Profile::kDesk);
    CHECK(parse_scenario("", Profile::kDesk) == desk);
    CHECK(parse_scenario(scenario_to_json(desk), Profile::kDesk) == desk);

    Scenario custom = desk;
    custom.seed = 99;
    custom.users = {UserSpec{3.0, 10.0, 0, {ScattererSpec{2.0, -5.0}}}};
    custom.music.refine = true;
    custom.sweeps.eta = {0.25, 0.75};
    CHECK(parse_scenario(scenario_to_json(custom), Profile::kPaper) == custom);
}

TEST_CASE("partial text overrides only the mentioned keys") {
    const Scenario s = parse_scenario(
        R"({"arrays": {"n_tx": 16}, "snr": {"radar_db": 20.0}, "qos": {"g_hat": 42.0}})",
        Profile::kDesk);
    CHECK(s.n_tx == 16);
    CHECK(s.n_rx == 64);  // untouched desk default
    CHECK(s.radar_snr_db == 20.0);
    CHECK(s.comm_snr_db == 15.0);
    CHECK(s.qos.g_hat == 42.0);
    CHECK(s.qos.gamma_db == 15.0);
    CHECK(s.trials == 100);
}

TEST_CASE("unknown keys and wrong types are named with their full path") {
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"sweeps": {"bogus": 1}})", Profile::kDesk),
                         "config: sweeps.bogus: unknown key", std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"carrier_ghz": "fast"})", Profile::kDesk),
                         "config: carrier_ghz: expected a number", std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"music": {"refine": 1}})", Profile::kDesk),
                         "config: music.refine: expected a boolean", std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_scenario(R"({"sweeps": {"eta": [0.1, "x"]}})", Profile::kDesk),
        "config: sweeps.eta[1]: expected a number", std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"snapshots": 2.5})", Profile::kDesk),
                         "config: snapshots: expected an integer", std::invalid_argument);
    CHECK_THROWS(parse_scenario("{not json", Profile::kDesk));
}

TEST_CASE("physically inconsistent scenarios are rejected") {
    CHECK_THROWS(parse_scenario(R"({"arrays": {"n_tx": 1}})", Profile::kDesk));
    CHECK_THROWS(parse_scenario(R"({"carrier_ghz": -1.0})", Profile::kDesk));
    CHECK_THROWS(parse_scenario(R"({"eta": 1.5})", Profile::kDesk));
    CHECK_THROWS(parse_scenario(R"({"pfa": 0.0})", Profile::kDesk));
    CHECK_THROWS(parse_scenario(R"({"users": []})", Profile::kDesk));
    CHECK_THROWS(parse_scenario(R"({"users": [{"range_m": -2.0}]})", Profile::kDesk));
    CHECK_THROWS(parse_scenario(R"({"users": [{"angle_deg": 90.0}]})", Profile::kDesk));
    CHECK_THROWS(parse_scenario(R"({"target": {"beta_magnitude": 0.0}})", Profile::kDesk));
    CHECK_THROWS(parse_scenario(R"({"music": {"range_step_m": 0.0}})", Profile::kDesk));
    CHECK_THROWS(parse_scenario(R"({"trials": 0})", Profile::kDesk));
}
