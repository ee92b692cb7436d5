#include "nfisac/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include "nfisac/crb.hpp"
#include "nfisac/powermin.hpp"
#include "nfisac/rng.hpp"
#include "nfisac/svgplot.hpp"

namespace nfisac {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// Angle extents trimmed one step inside +-90 degrees, where the polar
// parameterization degenerates.
MusicGrid scenario_grid(const Scenario& s, double r_step_m, double a_step_deg) {
    const double lo = std::max(s.music.angle_min_deg, -90.0 + a_step_deg);
    const double hi = std::min(s.music.angle_max_deg, 90.0 - a_step_deg);
    return MusicGrid::regular(s.music.range_min_m, s.music.range_max_m, r_step_m,
                              deg_to_rad(lo), deg_to_rad(hi), deg_to_rad(a_step_deg));
}

struct Pipeline {
    const char* name;
    const Precoder* precoder;
};

}  // namespace

double rmse(const std::vector<double>& errors) {
    if (errors.empty()) throw std::invalid_argument("rmse: no samples");
    double acc = 0.0;
    for (double e : errors) acc += e * e;
    return std::sqrt(acc / static_cast<double>(errors.size()));
}

const std::vector<double>& SweepResult::find(const std::string& series_name) const {
    for (const SweepSeries& s : series)
        if (s.name == series_name) return s.values;
    throw std::out_of_range("sweep '" + name + "' has no series '" + series_name + "'");
}

CsvTable SweepResult::table() const {
    CsvTable t;
    t.meta.emplace_back("sweep", name);
    t.meta.insert(t.meta.end(), meta.begin(), meta.end());
    t.columns.push_back(axis_label);
    for (const SweepSeries& s : series) t.columns.push_back(s.name);
    for (size_t i = 0; i < axis.size(); ++i) {
        std::vector<double> row;
        row.push_back(axis[i]);
        for (const SweepSeries& s : series) {
            if (s.values.size() != axis.size())
                throw std::logic_error("sweep series length mismatch: " + s.name);
            row.push_back(s.values[i]);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::vector<UserPlacement> materialize_users(const Scenario& s) {
    std::vector<UserPlacement> out;
    const double lambda = s.wavelength();
    for (size_t k = 0; k < s.users.size(); ++k) {
        const UserSpec& u = s.users[k];
        UserPlacement p;
        p.los = PolarCoord(u.range_m, deg_to_rad(u.angle_deg));
        if (!u.scatterers.empty()) {
            for (const ScattererSpec& sc : u.scatterers)
                p.scatterers.emplace_back(sc.range_m, deg_to_rad(sc.angle_deg));
        } else {
            Rng rng = Rng::stream(s.seed, stream_tag("scatter"), k);
            for (int i = 0; i < u.paths; ++i) {
                const double r = rng.uniform(1.0, 30.0);
                const double a = rng.uniform(deg_to_rad(-60.0), deg_to_rad(60.0));
                p.scatterers.emplace_back(r, a);
            }
        }
        Rng rng = Rng::stream(s.seed, stream_tag("gains"), k);
        sample_gains(p, lambda, rng);
        out.push_back(std::move(p));
    }
    return out;
}

TargetTruth target_truth(const Scenario& s) {
    return TargetTruth::from_tx(s.beta(), s.target_tx(), s.tx_array(), s.rx_array());
}

DesignSet build_designs(const Scenario& s, const std::vector<UserPlacement>& users,
                        double eta, const PolarCoord& target) {
    const ArrayConfig tx = s.tx_array();
    const double pt = s.power_watts();

    DesignSet d{.near_tradeoff = {},
                .far_tradeoff = {},
                .radar_only = {},
                .near_comm = {},
                .far_comm = {},
                .near_truth = assemble_channel(tx, users, ChannelModel::kNear)};
    const ChannelMatrix far = assemble_channel(tx, users, ChannelModel::kFar);
    d.near_comm = zf_precoder(d.near_truth, pt);
    d.far_comm = zf_precoder(far, pt);
    const Precoder near_rad = radar_precoder(tx, target, pt, ChannelModel::kNear);
    const Precoder far_rad = radar_precoder(tx, target, pt, ChannelModel::kFar);
    d.near_tradeoff = tradeoff_ls(d.near_comm, near_rad, eta);
    d.far_tradeoff = tradeoff_ls(d.far_comm, far_rad, eta);
    d.radar_only = near_rad;
    return d;
}

DesignSet build_designs(const Scenario& s, const std::vector<UserPlacement>& users) {
    return build_designs(s, users, s.eta, s.target_tx());
}

double comm_noise_power(const Scenario& s, const ChannelMatrix& truth, double snr_db) {
    const Precoder zf = zf_precoder(truth, s.power_watts());
    double mean_signal = 0.0;
    for (int k = 0; k < truth.users(); ++k)
        mean_signal += std::norm((truth.rows.row(k) * zf.entries.col(k))(0, 0));
    mean_signal /= truth.users();
    return mean_signal / db_to_linear(snr_db);
}

MusicSearchOptions standard_search(const Scenario& s) {
    MusicSearchOptions opts = MusicSearchOptions::standard(
        s.rx_array(), scenario_grid(s, s.music.range_step_m, s.music.angle_step_deg));
    opts.parabolic_refine = s.music.refine;
    return opts;
}

MusicSearchOptions estimation_search(const Scenario& s) {
    return MusicSearchOptions::standard(
        s.rx_array(),
        scenario_grid(s, s.estimation_music.range_step_m, s.estimation_music.angle_step_deg));
}

namespace {

void common_meta(SweepResult& out, const Scenario& s) {
    out.meta.emplace_back("seed", std::to_string(s.seed));
    out.meta.emplace_back("n_tx", std::to_string(s.n_tx));
    out.meta.emplace_back("n_rx", std::to_string(s.n_rx));
    out.meta.emplace_back("carrier_ghz", short_num(s.carrier_ghz));
    out.meta.emplace_back("power_dbm", short_num(s.power_dbm));
}

CrbReport induced_crb(const CMatrix& rx_cov, const TargetTruth& truth, const Scenario& s,
                      double noise_power) {
    const ArrayConfig tx = s.tx_array(), rx = s.rx_array();
    const CMatrix g = g_matrix(truth, tx, rx);
    const GDerivatives dg = g_derivatives(truth, tx, rx);
    return crb_matrix_explicit(g, dg, rx_cov, truth.beta, s.snapshots, noise_power);
}

}  // namespace

SweepResult run_estimation_sweep(const Scenario& s) {
    const ArrayConfig tx = s.tx_array(), rx = s.rx_array();
    const auto users = materialize_users(s);
    const TargetTruth truth = target_truth(s);
    const DesignSet d = build_designs(s, users);
    const MusicSearchOptions opts = estimation_search(s);
    const double pt = s.power_watts();
    const double b2 = std::norm(truth.beta);

    const Pipeline pipes[] = {{"nfbf", &d.near_tradeoff},
                              {"ffbf", &d.far_tradeoff},
                              {"radar", &d.radar_only}};

    SweepResult out;
    out.name = "estimation";
    out.axis_label = "snr_r_db";
    out.axis = s.sweeps.snr_r_db;
    out.log_plot = true;
    common_meta(out, s);
    out.meta.emplace_back("trials", std::to_string(s.trials));
    out.meta.emplace_back("snapshots", std::to_string(s.snapshots));
    out.meta.emplace_back("range_step_m", short_num(s.estimation_music.range_step_m));
    out.meta.emplace_back("angle_step_deg", short_num(s.estimation_music.angle_step_deg));

    for (size_t pi = 0; pi < std::size(pipes); ++pi) {
        const Precoder& f = *pipes[pi].precoder;
        const CMatrix rx_cov = tx_covariance(f);
        const std::string base = pipes[pi].name;
        SweepSeries rmse_r{base + "_rmse_range_m", {}};
        SweepSeries rmse_a{base + "_rmse_angle_deg", {}};
        SweepSeries rcrb_r{base + "_rcrb_range_m", {}};
        SweepSeries rcrb_a{base + "_rcrb_angle_deg", {}};

        for (size_t i = 0; i < out.axis.size(); ++i) {
            const double noise = b2 * s.snapshots * pt / db_to_linear(out.axis[i]);
            const CrbReport crb = induced_crb(rx_cov, truth, s, noise);
            rcrb_r.values.push_back(crb.infinite ? kNan : crb.rcrb_range);
            rcrb_a.values.push_back(crb.infinite ? kNan : rad_to_deg(crb.rcrb_angle));

            std::vector<double> err_r(s.trials), err_a(s.trials);
#pragma omp parallel for schedule(static)
            for (int t = 0; t < s.trials; ++t) {
                Rng rng = Rng::stream(s.seed, stream_tag("estimate"), pi, i,
                                      static_cast<std::uint64_t>(t));
                const CMatrix symbols = synthesize_symbols(f.streams(), s.snapshots, rng);
                const EchoBatch echo = synthesize_echo(f, symbols, truth, tx, rx, noise, rng);
                const MusicEstimate est =
                    music_locate(sample_covariance(echo.y), 1, tx, rx, opts);
                err_r[t] = est.tx.range - truth.tx.range;
                err_a[t] = est.tx.angle - truth.tx.angle;
            }
            rmse_r.values.push_back(rmse(err_r));
            rmse_a.values.push_back(rad_to_deg(rmse(err_a)));
        }
        out.series.push_back(std::move(rmse_r));
        out.series.push_back(std::move(rcrb_r));
        out.series.push_back(std::move(rmse_a));
        out.series.push_back(std::move(rcrb_a));
    }
    return out;
}

SweepResult run_detection_sweep(const Scenario& s) {
    const ArrayConfig tx = s.tx_array(), rx = s.rx_array();
    const auto users = materialize_users(s);
    const TargetTruth truth = target_truth(s);
    const DesignSet d = build_designs(s, users);
    const double pt = s.power_watts();
    const double b2 = std::norm(truth.beta);
    const double threshold = threshold_analytic(s.pfa, s.snapshots);

    const Pipeline pipes[] = {{"nfbf", &d.near_tradeoff},
                              {"ffbf", &d.far_tradeoff},
                              {"radar", &d.radar_only}};

    SweepResult out;
    out.name = "detection";
    out.axis_label = "snr_r_db";
    out.axis = s.sweeps.detection_snr_db;
    common_meta(out, s);
    out.meta.emplace_back("trials", std::to_string(s.trials));
    out.meta.emplace_back("snapshots", std::to_string(s.snapshots));
    out.meta.emplace_back("pfa", short_num(s.pfa));
    out.meta.emplace_back("threshold", format_full(threshold));

    for (size_t pi = 0; pi < std::size(pipes); ++pi) {
        const Precoder& f = *pipes[pi].precoder;
        SweepSeries pd{std::string(pipes[pi].name) + "_pd", {}};
        for (size_t i = 0; i < out.axis.size(); ++i) {
            const double noise = b2 * s.snapshots * pt / db_to_linear(out.axis[i]);
            std::vector<int> hits(s.trials, 0);
#pragma omp parallel for schedule(static)
            for (int t = 0; t < s.trials; ++t) {
                Rng rng = Rng::stream(s.seed, stream_tag("detect"), pi, i,
                                      static_cast<std::uint64_t>(t));
                const CMatrix symbols = synthesize_symbols(f.streams(), s.snapshots, rng);
                const EchoBatch echo = synthesize_echo(f, symbols, truth, tx, rx, noise, rng);
                hits[t] = detection_statistic(echo, rx, truth.rx) > threshold ? 1 : 0;
            }
            int total = 0;
            for (int h : hits) total += h;
            pd.values.push_back(static_cast<double>(total) / s.trials);
        }
        out.series.push_back(std::move(pd));
    }
    return out;
}

SweepResult run_rate_sweep(const Scenario& s) {
    const auto users = materialize_users(s);
    const DesignSet d = build_designs(s, users);
    const int k_users = static_cast<int>(users.size());

    const Pipeline pipes[] = {{"nfbf", &d.near_tradeoff},
                              {"ffbf", &d.far_tradeoff},
                              {"nfzf", &d.near_comm},
                              {"ffzf", &d.far_comm}};

    SweepResult out;
    out.name = "rate";
    out.axis_label = "transmit_snr_db";
    out.axis = s.sweeps.transmit_snr_db;
    common_meta(out, s);
    out.meta.emplace_back("eta", short_num(s.eta));

    for (const Pipeline& p : pipes) {
        SweepSeries rate{std::string(p.name) + "_sum_rate", {}};
        for (double snr_db : out.axis)
            rate.values.push_back(sum_rate(d.near_truth, p.precoder->entries,
                                           comm_noise_power(s, d.near_truth, snr_db)));
        out.series.push_back(std::move(rate));
    }
    for (int k = 0; k < k_users; ++k) {
        for (size_t pi = 0; pi < 2; ++pi) {  // tradeoff designs only
            SweepSeries sinr{std::string(pipes[pi].name) + "_user" + std::to_string(k) +
                                 "_sinr_db",
                             {}};
            for (double snr_db : out.axis) {
                const double lin = user_sinr(d.near_truth, pipes[pi].precoder->entries, k,
                                             comm_noise_power(s, d.near_truth, snr_db));
                sinr.values.push_back(10.0 * std::log10(lin));
            }
            out.series.push_back(std::move(sinr));
        }
    }
    return out;
}

SweepResult run_tradeoff_sweep(const Scenario& s) {
    const auto users = materialize_users(s);
    const ArrayConfig tx = s.tx_array(), rx = s.rx_array();
    const ChannelMatrix near_truth = assemble_channel(tx, users, ChannelModel::kNear);
    const double comm_noise = comm_noise_power(s, near_truth, s.comm_snr_db);
    const double radar_noise = s.radar_noise_power();

    SweepResult out;
    out.name = "tradeoff";
    out.axis_label = "eta";
    out.axis = s.sweeps.eta;
    common_meta(out, s);
    out.meta.emplace_back("comm_snr_db", short_num(s.comm_snr_db));
    out.meta.emplace_back("radar_snr_db", short_num(s.radar_snr_db));

    for (double dist : s.sweeps.tradeoff_distances_m) {
        const PolarCoord tgt(dist, deg_to_rad(s.target.angle_deg));
        const TargetTruth truth = TargetTruth::from_tx(s.beta(), tgt, tx, rx);
        const std::string tag = short_num(dist) + "m";

        SweepSeries nr{"nfbf_" + tag + "_rate", {}}, fr{"ffbf_" + tag + "_rate", {}};
        SweepSeries na{"nfbf_" + tag + "_rcrb_angle_deg", {}},
            fa{"ffbf_" + tag + "_rcrb_angle_deg", {}};
        SweepSeries ng{"nfbf_" + tag + "_rcrb_range_m", {}},
            fg{"ffbf_" + tag + "_rcrb_range_m", {}};

        for (double eta : out.axis) {
            const DesignSet d = build_designs(s, users, eta, tgt);
            nr.values.push_back(sum_rate(d.near_truth, d.near_tradeoff.entries, comm_noise));
            fr.values.push_back(sum_rate(d.near_truth, d.far_tradeoff.entries, comm_noise));
            const CrbReport cn =
                induced_crb(tx_covariance(d.near_tradeoff), truth, s, radar_noise);
            const CrbReport cf =
                induced_crb(tx_covariance(d.far_tradeoff), truth, s, radar_noise);
            na.values.push_back(cn.infinite ? kNan : rad_to_deg(cn.rcrb_angle));
            ng.values.push_back(cn.infinite ? kNan : cn.rcrb_range);
            fa.values.push_back(cf.infinite ? kNan : rad_to_deg(cf.rcrb_angle));
            fg.values.push_back(cf.infinite ? kNan : cf.rcrb_range);
        }
        for (auto* sr : {&nr, &fr, &na, &fa, &ng, &fg}) out.series.push_back(std::move(*sr));
    }
    return out;
}

SweepResult run_distance_sweep(const Scenario& s) {
    const auto users = materialize_users(s);
    const ArrayConfig tx = s.tx_array(), rx = s.rx_array();
    const double radar_noise = s.radar_noise_power();

    SweepResult out;
    out.name = "distance";
    out.axis_label = "target_distance_m";
    out.axis = s.sweeps.target_distance_m;
    out.log_plot = true;
    common_meta(out, s);
    out.meta.emplace_back("fraunhofer_m",
                          short_num(fraunhofer_distance(tx.aperture(), tx.wavelength)));
    out.meta.emplace_back("fresnel_m",
                          short_num(fresnel_boundary(tx.aperture(), tx.wavelength)));

    SweepSeries nr{"nfbf_rcrb_range_m", {}}, fr{"ffbf_rcrb_range_m", {}};
    SweepSeries na{"nfbf_rcrb_angle_deg", {}}, fa{"ffbf_rcrb_angle_deg", {}};
    SweepSeries gl{"gain_loss", {}};

    for (double dist : out.axis) {
        const PolarCoord tgt(dist, deg_to_rad(s.target.angle_deg));
        const TargetTruth truth = TargetTruth::from_tx(s.beta(), tgt, tx, rx);
        const DesignSet d = build_designs(s, users, s.eta, tgt);
        const CrbReport cn = induced_crb(tx_covariance(d.near_tradeoff), truth, s, radar_noise);
        const CrbReport cf = induced_crb(tx_covariance(d.far_tradeoff), truth, s, radar_noise);
        nr.values.push_back(cn.infinite ? kNan : cn.rcrb_range);
        na.values.push_back(cn.infinite ? kNan : rad_to_deg(cn.rcrb_angle));
        fr.values.push_back(cf.infinite ? kNan : cf.rcrb_range);
        fa.values.push_back(cf.infinite ? kNan : rad_to_deg(cf.rcrb_angle));
        gl.values.push_back(gain_loss_exact(tx, tgt));
    }
    for (auto* sr : {&nr, &fr, &na, &fa, &gl}) out.series.push_back(std::move(*sr));
    return out;
}

namespace {

// Shared body of the two QoS sweeps; `gamma_db`/`g_hat` give each point's
// floors.
SweepResult qos_sweep(const Scenario& s, const std::string& name, const std::string& axis_label,
                      const std::vector<double>& axis,
                      const std::vector<double>& gamma_db, const std::vector<double>& g_hat) {
    const auto users = materialize_users(s);
    const ArrayConfig tx = s.tx_array();
    const TargetTruth truth = target_truth(s);
    const PolarCoord tgt = s.target_tx();
    const double qos_noise = s.qos_noise_power();
    const double radar_noise = s.radar_noise_power();

    const ChannelMatrix near = assemble_channel(tx, users, ChannelModel::kNear);
    const ChannelMatrix far = assemble_channel(tx, users, ChannelModel::kFar);
    const CVector a_near = near_focusing(tx, tgt);
    const CVector a_far = far_steering(tx, tgt.angle);
    const SdpOptions opts;

    SweepResult out;
    out.name = name;
    out.axis_label = axis_label;
    out.axis = axis;
    common_meta(out, s);
    out.meta.emplace_back("qos_noise_dbm", short_num(s.qos.noise_dbm));
    out.meta.emplace_back("crb_noise_ref_db", short_num(s.radar_snr_db));

    SweepSeries np{"nfbf_power_dbm", {}}, fp{"ffbf_power_dbm", {}};
    SweepSeries nrec{"nfbf_recovered_dbm", {}}, frec{"ffbf_recovered_dbm", {}};
    SweepSeries ncr{"nfbf_rcrb_range_m", {}}, fcr{"ffbf_rcrb_range_m", {}};
    SweepSeries nca{"nfbf_rcrb_angle_deg", {}}, fca{"ffbf_rcrb_angle_deg", {}};

    struct Side {
        const ChannelMatrix* design;
        const CVector* steer;
        SweepSeries* power;
        SweepSeries* recovered;
        SweepSeries* crb_range;
        SweepSeries* crb_angle;
    };
    const Side sides[] = {{&near, &a_near, &np, &nrec, &ncr, &nca},
                          {&far, &a_far, &fp, &frec, &fcr, &fca}};

    for (size_t i = 0; i < axis.size(); ++i) {
        QosSpec qos;
        qos.sinr_floors.assign(users.size(), db_to_linear(gamma_db[i]));
        qos.beampattern_floor = g_hat[i];
        qos.noise_power = qos_noise;

        for (size_t m = 0; m < std::size(sides); ++m) {
            const Side& side = sides[m];
            Rng rng = Rng::stream(s.seed, stream_tag("power"), i, m);
            const SdpSolution sol = minimize_power(*side.design, *side.steer, qos, opts, rng);
            if (sol.status != SdpStatus::kOptimal) {
                side.power->values.push_back(kNan);
                side.recovered->values.push_back(kNan);
                side.crb_range->values.push_back(kNan);
                side.crb_angle->values.push_back(kNan);
                continue;
            }
            side.power->values.push_back(watts_to_dbm(sol.relaxed_power));
            side.recovered->values.push_back(
                sol.recovered ? watts_to_dbm(sol.recovered_power) : kNan);
            CMatrix rx_cov = CMatrix::Zero(tx.n_elements, tx.n_elements);
            for (const CMatrix& b : sol.blocks) rx_cov += b;
            const CrbReport crb = induced_crb(rx_cov, truth, s, radar_noise);
            side.crb_range->values.push_back(crb.infinite ? kNan : crb.rcrb_range);
            side.crb_angle->values.push_back(crb.infinite ? kNan : rad_to_deg(crb.rcrb_angle));
        }
    }
    for (auto* sr : {&np, &fp, &nrec, &frec, &ncr, &fcr, &nca, &fca})
        out.series.push_back(std::move(*sr));
    return out;
}

}  // namespace

SweepResult run_power_sweep(const Scenario& s) {
    const std::vector<double> gh(s.sweeps.gamma_db.size(), s.qos.g_hat);
    SweepResult out = qos_sweep(s, "power", "gamma_db", s.sweeps.gamma_db, s.sweeps.gamma_db, gh);
    out.meta.emplace_back("g_hat", short_num(s.qos.g_hat));
    return out;
}

SweepResult run_power_floor_sweep(const Scenario& s) {
    const std::vector<double> gd(s.sweeps.g_hat.size(), s.qos.gamma_db);
    SweepResult out = qos_sweep(s, "power-floor", "g_hat", s.sweeps.g_hat, gd, s.sweeps.g_hat);
    out.meta.emplace_back("gamma_db", short_num(s.qos.gamma_db));
    return out;
}

std::vector<std::string> sweep_names() {
    return {"estimation", "detection", "rate", "tradeoff", "distance", "power", "power-floor"};
}

SweepResult run_sweep(const std::string& name, const Scenario& s) {
    if (name == "estimation") return run_estimation_sweep(s);
    if (name == "detection") return run_detection_sweep(s);
    if (name == "rate") return run_rate_sweep(s);
    if (name == "tradeoff") return run_tradeoff_sweep(s);
    if (name == "distance") return run_distance_sweep(s);
    if (name == "power") return run_power_sweep(s);
    if (name == "power-floor") return run_power_floor_sweep(s);
    throw std::invalid_argument("unknown sweep: " + name);
}

void save_sweep(const SweepResult& r, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string base = out_dir + "/" + r.name;
    write_text_file(base + ".csv", r.table().to_string());

    PlotSpec plot;
    plot.title = r.name + " sweep";
    plot.x_label = r.axis_label;
    plot.y_label = "value";
    plot.log_y = r.log_plot;
    for (const SweepSeries& s : r.series) plot.series.push_back({s.name, r.axis, s.values});
    write_svg(base + ".svg", plot);
}

}  // namespace nfisac
