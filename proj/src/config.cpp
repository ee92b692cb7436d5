#include "nfisac/config.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace nfisac {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 30.0 + 10.0 * std::log10(watts); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

Scenario Scenario::defaults(Profile profile) {
    Scenario s;
    if (profile == Profile::kDesk) {
        s.n_tx = 64;
        s.n_rx = 64;
        s.trials = 100;
    }
    return s;
}

double Scenario::wavelength() const { return wavelength_from_carrier(carrier_ghz * 1e9); }

double Scenario::power_watts() const { return dbm_to_watts(power_dbm); }

ArrayConfig Scenario::tx_array() const { return ArrayConfig(n_tx, spacing(), wavelength()); }

ArrayConfig Scenario::rx_array() const { return ArrayConfig(n_rx, spacing(), wavelength()); }

PolarCoord Scenario::target_tx() const {
    return PolarCoord(target.range_m, deg_to_rad(target.angle_deg));
}

cdouble Scenario::beta() const {
    return std::polar(target.beta_magnitude, deg_to_rad(target.beta_phase_deg));
}

double Scenario::radar_noise_power() const {
    return std::norm(beta()) * snapshots * power_watts() / db_to_linear(radar_snr_db);
}

double Scenario::qos_noise_power() const { return dbm_to_watts(qos.noise_dbm); }

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

// Marks keys as consumed so finish() can name anything left over.
class Fields {
  public:
    Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj.is_object()) fail(path_.empty() ? "top level" : path_, "expected an object");
    }

    const json* get(const char* key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& item : obj_.items())
            if (!seen_.count(item.key())) fail(join(path_, item.key()), "unknown key");
    }

    const std::string& path() const { return path_; }

  private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::uint64_t as_u64(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        fail(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::vector<double> as_double_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i)
        out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

void parse_user(const json& j, const std::string& path, UserSpec& u) {
    Fields f(j, path);
    if (const json* v = f.get("range_m")) u.range_m = as_double(*v, join(path, "range_m"));
    if (const json* v = f.get("angle_deg")) u.angle_deg = as_double(*v, join(path, "angle_deg"));
    if (const json* v = f.get("paths")) u.paths = as_int(*v, join(path, "paths"));
    if (const json* v = f.get("scatterers")) {
        const std::string sp = join(path, "scatterers");
        if (!v->is_array()) fail(sp, "expected an array");
        u.scatterers.clear();
        for (size_t i = 0; i < v->size(); ++i) {
            const std::string ip = sp + "[" + std::to_string(i) + "]";
            Fields sf((*v)[i], ip);
            ScattererSpec sc;
            if (const json* x = sf.get("range_m")) sc.range_m = as_double(*x, join(ip, "range_m"));
            if (const json* x = sf.get("angle_deg"))
                sc.angle_deg = as_double(*x, join(ip, "angle_deg"));
            sf.finish();
            u.scatterers.push_back(sc);
        }
    }
    f.finish();
}

void check_placement(double range_m, double angle_deg, const std::string& path) {
    if (!(range_m > 0.0)) fail(path, "range_m must be positive");
    if (!(std::abs(angle_deg) < 90.0)) fail(path, "angle_deg must lie strictly inside (-90, 90)");
}

void validate(const Scenario& s) {
    if (s.n_tx < 2 || s.n_rx < 2) fail("arrays", "element counts must be at least 2");
    if (!(s.spacing_over_wavelength > 0.0)) fail("arrays.spacing_over_wavelength", "must be positive");
    if (!(s.carrier_ghz > 0.0)) fail("carrier_ghz", "must be positive");
    if (s.snapshots < 1) fail("snapshots", "must be at least 1");
    if (s.trials < 1) fail("trials", "must be at least 1");
    if (!(s.eta >= 0.0 && s.eta <= 1.0)) fail("eta", "must lie in [0, 1]");
    if (!(s.pfa > 0.0 && s.pfa < 1.0)) fail("pfa", "must lie in (0, 1)");
    if (s.users.empty()) fail("users", "at least one user required");
    for (size_t k = 0; k < s.users.size(); ++k) {
        const std::string path = "users[" + std::to_string(k) + "]";
        const UserSpec& u = s.users[k];
        check_placement(u.range_m, u.angle_deg, path);
        if (u.paths < 0) fail(join(path, "paths"), "must be non-negative");
        for (size_t i = 0; i < u.scatterers.size(); ++i)
            check_placement(u.scatterers[i].range_m, u.scatterers[i].angle_deg,
                            path + ".scatterers[" + std::to_string(i) + "]");
    }
    check_placement(s.target.range_m, s.target.angle_deg, "target");
    if (!(s.target.beta_magnitude > 0.0)) fail("target.beta_magnitude", "must be positive");
    if (!(s.qos.g_hat >= 0.0)) fail("qos.g_hat", "must be non-negative");
    if (!(s.music.range_min_m > 0.0) || s.music.range_max_m < s.music.range_min_m ||
        !(s.music.range_step_m > 0.0) || !(s.music.angle_step_deg > 0.0) ||
        s.music.angle_max_deg < s.music.angle_min_deg)
        fail("music", "bad grid extents");
    if (!(s.estimation_music.range_step_m > 0.0) || !(s.estimation_music.angle_step_deg > 0.0))
        fail("estimation_music", "steps must be positive");
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, Profile profile) {
    Scenario s = Scenario::defaults(profile);
    if (json_text.empty()) return s;

    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }

    Fields top(j, "");
    if (const json* v = top.get("seed")) s.seed = as_u64(*v, "seed");
    if (const json* v = top.get("arrays")) {
        Fields a(*v, "arrays");
        if (const json* x = a.get("n_tx")) s.n_tx = as_int(*x, "arrays.n_tx");
        if (const json* x = a.get("n_rx")) s.n_rx = as_int(*x, "arrays.n_rx");
        if (const json* x = a.get("spacing_over_wavelength"))
            s.spacing_over_wavelength = as_double(*x, "arrays.spacing_over_wavelength");
        a.finish();
    }
    if (const json* v = top.get("carrier_ghz")) s.carrier_ghz = as_double(*v, "carrier_ghz");
    if (const json* v = top.get("power_dbm")) s.power_dbm = as_double(*v, "power_dbm");
    if (const json* v = top.get("snapshots")) s.snapshots = as_int(*v, "snapshots");
    if (const json* v = top.get("eta")) s.eta = as_double(*v, "eta");
    if (const json* v = top.get("trials")) s.trials = as_int(*v, "trials");
    if (const json* v = top.get("snr")) {
        Fields n(*v, "snr");
        if (const json* x = n.get("comm_db")) s.comm_snr_db = as_double(*x, "snr.comm_db");
        if (const json* x = n.get("radar_db")) s.radar_snr_db = as_double(*x, "snr.radar_db");
        n.finish();
    }
    if (const json* v = top.get("pfa")) s.pfa = as_double(*v, "pfa");
    if (const json* v = top.get("users")) {
        if (!v->is_array()) fail("users", "expected an array");
        s.users.clear();
        for (size_t k = 0; k < v->size(); ++k) {
            UserSpec u;
            parse_user((*v)[k], "users[" + std::to_string(k) + "]", u);
            s.users.push_back(std::move(u));
        }
    }
    if (const json* v = top.get("target")) {
        Fields t(*v, "target");
        if (const json* x = t.get("range_m")) s.target.range_m = as_double(*x, "target.range_m");
        if (const json* x = t.get("angle_deg"))
            s.target.angle_deg = as_double(*x, "target.angle_deg");
        if (const json* x = t.get("beta_magnitude"))
            s.target.beta_magnitude = as_double(*x, "target.beta_magnitude");
        if (const json* x = t.get("beta_phase_deg"))
            s.target.beta_phase_deg = as_double(*x, "target.beta_phase_deg");
        t.finish();
    }
    if (const json* v = top.get("qos")) {
        Fields q(*v, "qos");
        if (const json* x = q.get("gamma_db")) s.qos.gamma_db = as_double(*x, "qos.gamma_db");
        if (const json* x = q.get("g_hat")) s.qos.g_hat = as_double(*x, "qos.g_hat");
        if (const json* x = q.get("noise_dbm")) s.qos.noise_dbm = as_double(*x, "qos.noise_dbm");
        q.finish();
    }
    if (const json* v = top.get("music")) {
        Fields m(*v, "music");
        if (const json* x = m.get("range_min_m"))
            s.music.range_min_m = as_double(*x, "music.range_min_m");
        if (const json* x = m.get("range_max_m"))
            s.music.range_max_m = as_double(*x, "music.range_max_m");
        if (const json* x = m.get("range_step_m"))
            s.music.range_step_m = as_double(*x, "music.range_step_m");
        if (const json* x = m.get("angle_min_deg"))
            s.music.angle_min_deg = as_double(*x, "music.angle_min_deg");
        if (const json* x = m.get("angle_max_deg"))
            s.music.angle_max_deg = as_double(*x, "music.angle_max_deg");
        if (const json* x = m.get("angle_step_deg"))
            s.music.angle_step_deg = as_double(*x, "music.angle_step_deg");
        if (const json* x = m.get("refine")) s.music.refine = as_bool(*x, "music.refine");
        m.finish();
    }
    if (const json* v = top.get("estimation_music")) {
        Fields m(*v, "estimation_music");
        if (const json* x = m.get("range_step_m"))
            s.estimation_music.range_step_m = as_double(*x, "estimation_music.range_step_m");
        if (const json* x = m.get("angle_step_deg"))
            s.estimation_music.angle_step_deg = as_double(*x, "estimation_music.angle_step_deg");
        m.finish();
    }
    if (const json* v = top.get("sweeps")) {
        Fields w(*v, "sweeps");
        if (const json* x = w.get("snr_r_db"))
            s.sweeps.snr_r_db = as_double_list(*x, "sweeps.snr_r_db");
        if (const json* x = w.get("detection_snr_db"))
            s.sweeps.detection_snr_db = as_double_list(*x, "sweeps.detection_snr_db");
        if (const json* x = w.get("transmit_snr_db"))
            s.sweeps.transmit_snr_db = as_double_list(*x, "sweeps.transmit_snr_db");
        if (const json* x = w.get("eta")) s.sweeps.eta = as_double_list(*x, "sweeps.eta");
        if (const json* x = w.get("tradeoff_distances_m"))
            s.sweeps.tradeoff_distances_m = as_double_list(*x, "sweeps.tradeoff_distances_m");
        if (const json* x = w.get("target_distance_m"))
            s.sweeps.target_distance_m = as_double_list(*x, "sweeps.target_distance_m");
        if (const json* x = w.get("gamma_db"))
            s.sweeps.gamma_db = as_double_list(*x, "sweeps.gamma_db");
        if (const json* x = w.get("g_hat")) s.sweeps.g_hat = as_double_list(*x, "sweeps.g_hat");
        w.finish();
    }
    top.finish();

    validate(s);
    return s;
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["seed"] = s.seed;
    j["arrays"] = {{"n_tx", s.n_tx},
                   {"n_rx", s.n_rx},
                   {"spacing_over_wavelength", s.spacing_over_wavelength}};
    j["carrier_ghz"] = s.carrier_ghz;
    j["power_dbm"] = s.power_dbm;
    j["snapshots"] = s.snapshots;
    j["eta"] = s.eta;
    j["trials"] = s.trials;
    j["snr"] = {{"comm_db", s.comm_snr_db}, {"radar_db", s.radar_snr_db}};
    j["pfa"] = s.pfa;
    j["users"] = json::array();
    for (const UserSpec& u : s.users) {
        json ju = {{"range_m", u.range_m}, {"angle_deg", u.angle_deg}, {"paths", u.paths}};
        if (!u.scatterers.empty()) {
            ju["scatterers"] = json::array();
            for (const ScattererSpec& sc : u.scatterers)
                ju["scatterers"].push_back({{"range_m", sc.range_m}, {"angle_deg", sc.angle_deg}});
        }
        j["users"].push_back(std::move(ju));
    }
    j["target"] = {{"range_m", s.target.range_m},
                   {"angle_deg", s.target.angle_deg},
                   {"beta_magnitude", s.target.beta_magnitude},
                   {"beta_phase_deg", s.target.beta_phase_deg}};
    j["qos"] = {{"gamma_db", s.qos.gamma_db},
                {"g_hat", s.qos.g_hat},
                {"noise_dbm", s.qos.noise_dbm}};
    j["music"] = {{"range_min_m", s.music.range_min_m},
                  {"range_max_m", s.music.range_max_m},
                  {"range_step_m", s.music.range_step_m},
                  {"angle_min_deg", s.music.angle_min_deg},
                  {"angle_max_deg", s.music.angle_max_deg},
                  {"angle_step_deg", s.music.angle_step_deg},
                  {"refine", s.music.refine}};
    j["estimation_music"] = {{"range_step_m", s.estimation_music.range_step_m},
                             {"angle_step_deg", s.estimation_music.angle_step_deg}};
    j["sweeps"] = {{"snr_r_db", s.sweeps.snr_r_db},
                   {"detection_snr_db", s.sweeps.detection_snr_db},
                   {"transmit_snr_db", s.sweeps.transmit_snr_db},
                   {"eta", s.sweeps.eta},
                   {"tradeoff_distances_m", s.sweeps.tradeoff_distances_m},
                   {"target_distance_m", s.sweeps.target_distance_m},
                   {"gamma_db", s.sweeps.gamma_db},
                   {"g_hat", s.sweeps.g_hat}};
    return j.dump(2) + "\n";
}

}  // namespace nfisac
