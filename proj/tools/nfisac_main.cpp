// Command-line front end: scenario in (JSON, profile defaults underneath),
// CSV/SVG artifacts out. Every header line carries the master seed so a run
// can be reproduced exactly.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nfisac/beamform.hpp"
#include "nfisac/channel.hpp"
#include "nfisac/config.hpp"
#include "nfisac/crb.hpp"
#include "nfisac/csvio.hpp"
#include "nfisac/experiments.hpp"
#include "nfisac/geometry.hpp"
#include "nfisac/powermin.hpp"
#include "nfisac/rng.hpp"
#include "nfisac/sensing.hpp"

namespace {

using namespace nfisac;

struct Options {
    std::string config_path;
    std::string out_dir = "out";
    std::string profile = "desk";
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config_path, "JSON scenario file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out_dir, "output directory (default: out)");
    cmd->add_option("--profile", o.profile, "desk or paper (default: desk)");
    cmd->add_option("--seed", o.seed, "override the scenario seed");
    cmd->add_option("--threads", o.threads, "worker threads (0 = runtime default)");
}

Scenario load_scenario(const Options& o) {
    Profile p;
    if (o.profile == "desk")
        p = Profile::kDesk;
    else if (o.profile == "paper")
        p = Profile::kPaper;
    else
        throw std::invalid_argument("unknown profile '" + o.profile +
                                    "' (expected desk or paper)");
    std::string text;
    if (!o.config_path.empty()) text = read_text_file(o.config_path);
    Scenario s = parse_scenario(text, p);
    if (o.seed) s.seed = *o.seed;
    if (o.threads > 0) omp_set_num_threads(o.threads);
    return s;
}

void banner(const Scenario& s, const char* cmd) {
    std::printf("nfisac %s | seed %llu | arrays %dx%d | %g GHz | %g dBm\n", cmd,
                static_cast<unsigned long long>(s.seed), s.n_tx, s.n_rx, s.carrier_ghz,
                s.power_dbm);
}

std::string out_path(const Options& o, const std::string& file) {
    std::filesystem::create_directories(o.out_dir);
    return o.out_dir + "/" + file;
}

std::vector<std::pair<std::string, std::string>> seed_meta(const Scenario& s) {
    return {{"seed", std::to_string(s.seed)}};
}

int cmd_gainloss(const Options& o) {
    const Scenario s = load_scenario(o);
    banner(s, "gainloss");
    const ArrayConfig tx = s.tx_array();
    std::printf("aperture %g m | fraunhofer %g m | fresnel %g m\n", tx.aperture(),
                fraunhofer_distance(tx.aperture(), tx.wavelength),
                fresnel_boundary(tx.aperture(), tx.wavelength));

    const bool approx_ok = s.n_tx % 2 == 0 && tx.half_wavelength_spacing();
    CsvTable t;
    t.meta = seed_meta(s);
    t.meta.emplace_back("angle_deg", format_full(s.target.angle_deg));
    t.columns = {"distance_m", "loss_exact", "loss_approx"};
    for (double r : s.sweeps.target_distance_m) {
        const PolarCoord p(r, deg_to_rad(s.target.angle_deg));
        t.rows.push_back({r, gain_loss_exact(tx, p),
                          approx_ok ? gain_loss_approx(tx, p)
                                    : std::numeric_limits<double>::quiet_NaN()});
    }
    const std::string path = out_path(o, "gainloss.csv");
    write_text_file(path, t.to_string());
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

int cmd_design(const Options& o) {
    const Scenario s = load_scenario(o);
    banner(s, "design");
    const auto users = materialize_users(s);
    const DesignSet d = build_designs(s, users);
    const ArrayConfig tx = s.tx_array();
    const PolarCoord tgt = s.target_tx();
    const double noise = comm_noise_power(s, d.near_truth, s.comm_snr_db);

    const AmResult am = tradeoff_am(d.near_comm, d.radar_only, s.eta);
    std::printf("alternating refinement: %zu steps, %s, objective %g\n",
                am.objective_trace.size(), am.converged ? "converged" : "hit step cap",
                am.objective_trace.back());

    struct Row {
        const char* name;
        const Precoder* f;
    };
    const Row rows[] = {{"nfbf", &d.near_tradeoff},
                        {"ffbf", &d.far_tradeoff},
                        {"radar", &d.radar_only},
                        {"nfzf", &d.near_comm},
                        {"ffzf", &d.far_comm}};
    for (const Row& r : rows) {
        const CMatrix cov = tx_covariance(*r.f);
        std::printf("%-6s power %g W | target gain %g | sum rate %g bit/s/Hz\n", r.name,
                    std::real(cov.trace()), beampattern_at(cov, tx, tgt),
                    sum_rate(d.near_truth, r.f->entries, noise));
        const std::string base = out_path(o, std::string("precoder_") + r.name);
        write_complex_matrix(base, r.f->entries);
        std::printf("wrote %s_re.csv, %s_im.csv\n", base.c_str(), base.c_str());
    }
    return 0;
}

int cmd_beampattern(const Options& o) {
    const Scenario s = load_scenario(o);
    banner(s, "beampattern");
    const auto users = materialize_users(s);
    const DesignSet d = build_designs(s, users);
    const ArrayConfig tx = s.tx_array();

    std::vector<double> angles;
    for (double a = -90.0; a <= 90.0 + 1e-9; a += 0.5) angles.push_back(deg_to_rad(a));

    CsvTable far;
    far.meta = seed_meta(s);
    far.columns = {"angle_deg", "nfbf", "ffbf", "radar"};
    const RVector bn = beampattern_far(tx_covariance(d.near_tradeoff), tx, angles);
    const RVector bf = beampattern_far(tx_covariance(d.far_tradeoff), tx, angles);
    const RVector br = beampattern_far(tx_covariance(d.radar_only), tx, angles);
    for (size_t i = 0; i < angles.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        far.rows.push_back({rad_to_deg(angles[i]), bn[j], bf[j], br[j]});
    }
    const std::string far_path = out_path(o, "beampattern_far.csv");
    write_text_file(far_path, far.to_string());
    std::printf("wrote %s\n", far_path.c_str());

    // Near-field map of the near-design pattern: rows are ranges, columns
    // angles (degrees in the header).
    std::vector<double> ranges;
    const double r_span = s.music.range_max_m - s.music.range_min_m;
    const double r_step = std::max(s.music.range_step_m, r_span / 120.0);
    for (double r = s.music.range_min_m; r <= s.music.range_max_m + 1e-9; r += r_step)
        ranges.push_back(r);
    std::vector<double> nf_angles;
    for (double a = -89.0; a <= 89.0 + 1e-9; a += 1.0) nf_angles.push_back(deg_to_rad(a));

    const RMatrix map = beampattern_near(tx_covariance(d.near_tradeoff), tx, ranges, nf_angles);
    CsvTable near;
    near.meta = seed_meta(s);
    near.columns.push_back("range_m");
    for (double a : nf_angles) near.columns.push_back(format_full(rad_to_deg(a)));
    for (size_t i = 0; i < ranges.size(); ++i) {
        std::vector<double> row{ranges[i]};
        for (size_t j = 0; j < nf_angles.size(); ++j)
            row.push_back(map(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        near.rows.push_back(std::move(row));
    }
    const std::string near_path = out_path(o, "beampattern_near.csv");
    write_text_file(near_path, near.to_string());
    std::printf("wrote %s\n", near_path.c_str());
    return 0;
}

int cmd_music(const Options& o, bool dump_spectrum) {
    const Scenario s = load_scenario(o);
    banner(s, "music");
    const ArrayConfig tx = s.tx_array(), rx = s.rx_array();
    const auto users = materialize_users(s);
    const DesignSet d = build_designs(s, users);
    const TargetTruth truth = target_truth(s);
    const double noise = s.radar_noise_power();

    Rng rng = Rng::stream(s.seed, stream_tag("cli-music"));
    const CMatrix symbols = synthesize_symbols(d.near_tradeoff.streams(), s.snapshots, rng);
    const EchoBatch echo =
        synthesize_echo(d.near_tradeoff, symbols, truth, tx, rx, noise, rng);
    const CMatrix cov = sample_covariance(echo.y);

    const MusicSearchOptions opts = standard_search(s);
    const MusicEstimate est = music_locate(cov, 1, tx, rx, opts);
    const double thr = threshold_analytic(s.pfa, s.snapshots);
    const double stat = detection_statistic(echo, rx, est.rx);

    std::printf("truth    tx frame: %.4f m, %.4f deg\n", truth.tx.range,
                rad_to_deg(truth.tx.angle));
    std::printf("estimate tx frame: %.4f m, %.4f deg (peak %s)\n", est.tx.range,
                rad_to_deg(est.tx.angle), est.peak_found ? "found" : "not found");
    std::printf("detection statistic %g vs threshold %g (pfa %g): %s\n", stat, thr, s.pfa,
                stat > thr ? "detected" : "missed");

    CsvTable t;
    t.meta = seed_meta(s);
    t.columns = {"truth_range_m", "truth_angle_deg", "est_range_m", "est_angle_deg",
                 "peak_found",    "statistic",       "threshold"};
    t.rows.push_back({truth.tx.range, rad_to_deg(truth.tx.angle), est.tx.range,
                      rad_to_deg(est.tx.angle), est.peak_found ? 1.0 : 0.0, stat, thr});
    const std::string path = out_path(o, "music.csv");
    write_text_file(path, t.to_string());
    std::printf("wrote %s\n", path.c_str());

    if (dump_spectrum) {
        const CMatrix basis = noise_subspace(cov, 1);
        const RMatrix spec = music_spectrum(basis, rx, opts.fine);
        const std::string spath = out_path(o, "music_spectrum.csv");
        write_real_matrix(spath, spec);
        std::printf("wrote %s (%ld x %ld, ranges x angles)\n", spath.c_str(),
                    static_cast<long>(spec.rows()), static_cast<long>(spec.cols()));
    }
    return 0;
}

int cmd_crb(const Options& o) {
    const Scenario s = load_scenario(o);
    banner(s, "crb");
    const ArrayConfig tx = s.tx_array(), rx = s.rx_array();
    const auto users = materialize_users(s);
    const DesignSet d = build_designs(s, users);
    const TargetTruth truth = target_truth(s);
    const double noise = s.radar_noise_power();
    const CMatrix g = g_matrix(truth, tx, rx);
    const GDerivatives dg = g_derivatives(truth, tx, rx);

    CsvTable t;
    t.meta = seed_meta(s);
    t.meta.emplace_back("radar_snr_db", format_full(s.radar_snr_db));
    t.columns = {"design", "rcrb_range_m", "rcrb_angle_deg"};

    struct Row {
        const char* name;
        const Precoder* f;
    };
    const Row rows[] = {{"nfbf", &d.near_tradeoff},
                        {"ffbf", &d.far_tradeoff},
                        {"radar", &d.radar_only}};
    std::string text;
    for (const auto& [key, value] : t.meta) text += "# " + key + ": " + value + "\n";
    text += "design,rcrb_range_m,rcrb_angle_deg\n";
    for (size_t i = 0; i < std::size(rows); ++i) {
        const CrbReport rep =
            crb_matrix_explicit(g, dg, tx_covariance(*rows[i].f), truth.beta, s.snapshots,
                                noise);
        const double rr = rep.infinite ? std::numeric_limits<double>::quiet_NaN()
                                       : rep.rcrb_range;
        const double ra = rep.infinite ? std::numeric_limits<double>::quiet_NaN()
                                       : rad_to_deg(rep.rcrb_angle);
        std::printf("%-6s rcrb range %g m | rcrb angle %g deg%s\n", rows[i].name, rr, ra,
                    rep.infinite ? " (singular)" : "");
        text += std::string(rows[i].name) + "," + format_full(rr) + "," + format_full(ra) +
                "\n";
    }
    const std::string path = out_path(o, "crb.csv");
    write_text_file(path, text);
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

int cmd_powermin(const Options& o) {
    const Scenario s = load_scenario(o);
    banner(s, "powermin");
    const ArrayConfig tx = s.tx_array();
    const auto users = materialize_users(s);
    const ChannelMatrix design = assemble_channel(tx, users, ChannelModel::kNear);
    const CVector steer = near_focusing(tx, s.target_tx());

    QosSpec qos;
    qos.sinr_floors.assign(users.size(), db_to_linear(s.qos.gamma_db));
    qos.beampattern_floor = s.qos.g_hat;
    qos.noise_power = s.qos_noise_power();

    Rng rng = Rng::stream(s.seed, stream_tag("cli-power"));
    const SdpOptions opts;
    const SdpSolution sol = minimize_power(design, steer, qos, opts, rng);
    if (sol.status != SdpStatus::kOptimal) {
        std::printf("infeasible (tightest constraint: %s)\n",
                    sol.infeasible_constraint.c_str());
        return 2;
    }
    std::printf("relaxed power %g dBm (%g W)\n", watts_to_dbm(sol.relaxed_power),
                sol.relaxed_power);
    for (size_t k = 0; k < sol.rank_ratios.size(); ++k)
        std::printf("block %zu rank ratio %g\n", k, sol.rank_ratios[k]);
    if (sol.recovered) {
        std::printf("recovered beams %g dBm (%g W)\n", watts_to_dbm(sol.recovered_power),
                    sol.recovered_power);
        std::vector<CMatrix> blocks;
        for (Eigen::Index k = 0; k < sol.recovered->entries.cols(); ++k) {
            const CVector f = sol.recovered->entries.col(k);
            blocks.push_back(f * f.adjoint());
        }
        const auto names = qos_names(qos);
        const auto slacks = qos_slacks(design, steer, qos, blocks);
        for (size_t i = 0; i < names.size(); ++i)
            std::printf("constraint %-24s slack %g\n", names[i].c_str(), slacks[i]);
        const std::string base = out_path(o, "powermin_precoder");
        write_complex_matrix(base, sol.recovered->entries);
        std::printf("wrote %s_re.csv, %s_im.csv\n", base.c_str(), base.c_str());
    }
    return 0;
}

int cmd_sweep(const Options& o, const std::string& name) {
    const Scenario s = load_scenario(o);
    banner(s, "sweep");
    std::vector<std::string> names;
    if (name == "all")
        names = sweep_names();
    else
        names.push_back(name);
    for (const std::string& n : names) {
        const SweepResult r = run_sweep(n, s);
        save_sweep(r, o.out_dir);
        std::printf("wrote %s/%s.csv and .svg\n", o.out_dir.c_str(), n.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"near-field ISAC beamforming simulator"};
    app.require_subcommand(1);
    Options o;

    CLI::App* gainloss = app.add_subcommand("gainloss", "focusing gain loss vs distance");
    CLI::App* design = app.add_subcommand("design", "build and export the precoders");
    CLI::App* beampattern = app.add_subcommand("beampattern", "transmit beampatterns");
    CLI::App* music = app.add_subcommand("music", "one-shot target localization");
    CLI::App* crb = app.add_subcommand("crb", "estimation bounds per design");
    CLI::App* powermin = app.add_subcommand("powermin", "QoS-constrained power minimum");
    CLI::App* sweep = app.add_subcommand("sweep", "run a named sweep");

    bool dump_spectrum = false;
    music->add_flag("--spectrum", dump_spectrum, "also dump the full spectrum grid");

    std::string sweep_name;
    sweep->add_option("--name", sweep_name, "sweep name or 'all'")->required();

    for (CLI::App* cmd : {gainloss, design, beampattern, music, crb, powermin, sweep})
        add_common(cmd, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gainloss->parsed()) return cmd_gainloss(o);
        if (design->parsed()) return cmd_design(o);
        if (beampattern->parsed()) return cmd_beampattern(o);
        if (music->parsed()) return cmd_music(o, dump_spectrum);
        if (crb->parsed()) return cmd_crb(o);
        if (powermin->parsed()) return cmd_powermin(o);
        if (sweep->parsed()) return cmd_sweep(o, sweep_name);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
