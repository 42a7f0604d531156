#include "oamqkd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "oamqkd/errors.hpp"
#include "oamqkd/rng.hpp"

namespace oamqkd::cli {
namespace fs = std::filesystem;

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

Encoding parse_encoding(const std::string& s) {
    if (s == "hybrid") return Encoding::Hybrid;
    if (s == "polarization") return Encoding::Polarization;
    throw ConfigError("channel.encoding must be 'hybrid' or 'polarization', got '" + s + "'");
}

std::string encoding_name(Encoding e) { return e == Encoding::Hybrid ? "hybrid" : "polarization"; }

// Module validation failures during setup are configuration errors.
template <class Fn>
void validated(Fn&& fn) {
    try {
        fn();
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
}

std::string angle_tag(double deg) {
    std::ostringstream s;
    s << deg;
    auto t = s.str();
    std::replace(t.begin(), t.end(), '.', 'p');
    std::replace(t.begin(), t.end(), '-', 'm');
    return t;
}

}  // namespace

void cmd_simulate(const Config& cfg, std::uint64_t seed, const fs::path& out) {
    SimulationConfig sim;
    auto& src = sim.source;
    src.mu = cfg.get_double("source.mu", src.mu);
    src.nu = cfg.get_double("source.nu", src.nu);
    src.p_mu = cfg.get_double("source.p_mu", src.p_mu);
    src.p_nu = cfg.get_double("source.p_nu", src.p_nu);
    src.p_vac = cfg.get_double("source.p_vac", src.p_vac);
    src.pulse_rate_hz = cfg.get_double("source.pulse_rate_hz", src.pulse_rate_hz);
    src.effective_bitrate = cfg.get_double("source.effective_bitrate", src.effective_bitrate);

    auto& ch = sim.channel;
    ch.eta_ch = cfg.get_double("channel.eta_ch", ch.eta_ch);
    ch.eta_c = cfg.get_double("channel.eta_c", ch.eta_c);
    ch.eta_d = cfg.get_double("channel.eta_d", ch.eta_d);
    ch.e_ch = cfg.get_double("channel.e_ch", ch.e_ch);
    ch.y0 = cfg.get_double("channel.y0", ch.y0);
    ch.encoding = parse_encoding(cfg.get_string("channel.encoding", "hybrid"));
    ch.block_scintillation_sigma = cfg.get_double("channel.scintillation_sigma", ch.block_scintillation_sigma);
    const auto angles = cfg.get_list("channel.theta_deg", {0.0});

    sim.pulses = cfg.get_uint("run.pulses", sim.pulses);
    sim.block_size = cfg.get_uint("run.block_size", sim.block_size);
    sim.workers = static_cast<unsigned>(cfg.get_uint("run.workers", sim.workers));
    cfg.reject_unused();

    if (angles.empty()) throw ConfigError("channel.theta_deg lists no angles");
    if (sim.pulses == 0 || sim.block_size == 0) throw ConfigError("run.pulses and run.block_size must be positive");
    if (sim.pulses < sim.block_size) throw ConfigError("run.pulses is smaller than one block");
    validated([&] {
        src.validate();
        ch.validate();
    });

    const std::uint64_t session_seed = derive_seed(seed, "simulate", 0);
    for (double deg : angles) {
        ch.theta = deg * kDegree;
        const auto session = simulate_session(sim, session_seed);
        const auto obs = estimate_observables(session);
        const std::string suffix = angles.size() == 1 ? "" : "_theta" + angle_tag(deg);

        write_atomic(out / ("session" + suffix + ".csv"), [&](std::ostream& os) { write_session_csv(os, session.blocks); });
        write_atomic(out / ("observables" + suffix + ".txt"), [&](std::ostream& os) {
            os << "# encoding=" << encoding_name(ch.encoding) << " theta_deg=" << format_double(deg)
               << " pulses=" << sim.pulses << " blocks=" << session.blocks.size() << '\n';
            const auto one = session.pooled_single_photon();
            if (one.sifted > 0) {
                os << "# true_q1=" << format_double(session.true_single_photon_gain())
                   << " true_e1=" << format_double(session.true_single_photon_error()) << '\n';
            }
            write_observables(os, obs);
        });
    }
}

void cmd_keyrate(const Config& cfg, const fs::path& out) {
    const std::string method = cfg.get_string("keyrate.method", "decoy");
    if (method != "decoy" && method != "single-photon") {
        throw ConfigError("keyrate.method must be 'decoy' or 'single-photon'");
    }
    ECModel ec;
    ec.f = cfg.get_double("ec.f", ec.f);
    ec.e0 = cfg.get_double("ec.e0", ec.e0);
    validated([&] { ec.validate(); });

    std::vector<DecoyObservables> rows;
    if (const auto input = cfg.get("keyrate.input")) {
        std::ifstream in(*input);
        if (!in) throw ConfigError("cannot open observables file " + *input);
        std::stringstream buffer;
        buffer << in.rdbuf();
        const std::string text = buffer.str();

        // key=value record or CSV with a header row.
        std::istringstream probe(text);
        std::string first;
        while (std::getline(probe, first)) {
            const auto b = first.find_first_not_of(" \t\r");
            if (b != std::string::npos && first[b] != '#') break;
        }
        std::istringstream body(text);
        if (first.find('=') != std::string::npos) {
            rows.push_back(observables_from_config(Config::parse(body, *input)));
        } else {
            rows = observables_from_csv(read_csv(body));
        }
    } else {
        rows.push_back(observables_from_config(cfg, "obs."));
    }
    cfg.reject_unused();
    if (rows.empty()) throw ConfigError("no observables rows to evaluate");

    std::vector<KeyRateBreakdown> results;
    std::string failures;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        try {
            results.push_back(method == "decoy" ? secret_key_rate(rows[i], ec) : single_photon_breakdown(rows[i], ec));
        } catch (const std::exception& e) {
            failures += "row " + std::to_string(i + 1) + ": " + e.what() + "\n";
        }
    }
    if (!failures.empty()) throw DomainError("invalid observables\n" + failures);

    write_atomic(out / "keyrate.csv", [&](std::ostream& os) {
        write_keyrate_header(os);
        for (const auto& r : results) write_keyrate_row(os, r);
    });
}

void cmd_turbulence(const Config& cfg, std::uint64_t seed, const fs::path& out) {
    LinkGeometry geom;
    geom.length_m = cfg.get_double("geometry.length_m", geom.length_m);
    geom.wavelength_m = cfg.get_double("geometry.wavelength_m", geom.wavelength_m);
    const double beam_radius = cfg.get_double("turbulence.beam_radius_m", 0.015);
    validated([&] { geom.validate(); });

    std::optional<double> sigma_mm;
    if (cfg.contains("turbulence.sigma_mm")) sigma_mm = cfg.get_double("turbulence.sigma_mm", 0.0);
    const auto frames_dir = cfg.get("turbulence.frames_dir");
    const bool synthetic = cfg.get_bool("turbulence.synthetic", false);
    if (static_cast<int>(sigma_mm.has_value()) + static_cast<int>(frames_dir.has_value()) + static_cast<int>(synthetic) != 1) {
        throw ConfigError("choose exactly one of --sigma-mm, --frames, --synthetic");
    }

    SpotModel spot;
    std::size_t n_frames = 177;
    double wander_std_mm = 0.33;
    bool dump_frames = false;
    if (synthetic) {
        n_frames = cfg.get_uint("synthetic.frames", n_frames);
        wander_std_mm = cfg.get_double("synthetic.wander_std_mm", wander_std_mm);
        const auto profile = cfg.get_string("synthetic.profile", "annular");
        if (profile != "gaussian" && profile != "annular") {
            throw ConfigError("synthetic.profile must be 'gaussian' or 'annular'");
        }
        spot.profile = profile == "gaussian" ? SpotProfile::Gaussian : SpotProfile::Annular;
        spot.waist_mm = cfg.get_double("synthetic.waist_mm", spot.waist_mm);
        spot.rows = cfg.get_uint("synthetic.rows", spot.rows);
        spot.cols = cfg.get_uint("synthetic.cols", spot.cols);
        spot.pitch_mm = cfg.get_double("synthetic.pitch_mm", spot.pitch_mm);
        dump_frames = cfg.get_bool("synthetic.write_frames", false);
    }
    cfg.reject_unused();

    double sigma_m = 0.0;
    std::string source;
    if (sigma_mm) {
        sigma_m = *sigma_mm * 1e-3;
        source = "direct";
    } else {
        std::vector<IntensityFrame> frames;
        if (frames_dir) {
            std::vector<fs::path> files;
            if (!fs::is_directory(*frames_dir)) throw ConfigError("frame directory not found: " + *frames_dir);
            for (const auto& entry : fs::directory_iterator(*frames_dir)) {
                if (entry.is_regular_file()) files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) frames.push_back(read_frame_file(f));
            source = "frames:" + *frames_dir;
        } else {
            validated([&] { frames = synthesize_frames(n_frames, spot, wander_std_mm * 1e-3, derive_seed(seed, "turbulence", 0)); });
            source = "synthetic";
            if (dump_frames) {
                fs::create_directories(out / "frames");
                for (std::size_t i = 0; i < frames.size(); ++i) {
                    char name[32];
                    std::snprintf(name, sizeof name, "frame_%04zu.txt", i);
                    write_atomic(out / "frames" / name, [&](std::ostream& os) { write_frame(os, frames[i]); });
                }
            }
        }
        if (frames.size() < 2) throw ConfigError("turbulence analysis needs at least two frames");
        const auto samples = centroids(frames);
        write_atomic(out / "centroids.csv", [&](std::ostream& os) { write_centroids_csv(os, samples); });
        sigma_m = wander_sigma(samples);
        n_frames = frames.size();
    }

    const auto est = estimate_turbulence(sigma_m, geom, beam_radius);
    write_atomic(out / "turbulence.txt", [&](std::ostream& os) {
        os << "# source=" << source << (sigma_mm ? "" : " frames=" + std::to_string(n_frames)) << '\n'
           << "# sigma_m is sqrt((sigma_x^2 + sigma_y^2)/2) over centroid displacements\n"
           << "# weak-turbulence beam-wander relation applied unchanged to OAM (annular) spots\n"
           << "sigma_m_m=" << format_double(est.sigma_m) << '\n'
           << "r0_m=" << format_double(est.r0) << '\n'
           << "cn2_si=" << format_double(est.cn2) << '\n'
           << "weak_turbulence_flag=" << (est.weak ? "true" : "false") << '\n';
    });
}

void cmd_sweep(const Config& cfg, const fs::path& out) {
    LinkBudgetParams p;
    p.mu = cfg.get_double("budget.mu", p.mu);
    p.nu = cfg.get_double("budget.nu", p.nu);
    p.e_ch = cfg.get_double("budget.e_ch", p.e_ch);
    p.f = cfg.get_double("budget.f", p.f);
    p.e0 = cfg.get_double("budget.e0", p.e0);
    p.dark_rate_hz = cfg.get_double("budget.dark_rate_hz", p.dark_rate_hz);
    p.gate_s = cfg.get_double("budget.gate_s", p.gate_s);
    validated([&] { p.y0 = cfg.get_double("budget.y0", dark_yield(p.dark_rate_hz, p.gate_s)); });

    std::vector<double> grid;
    if (cfg.contains("sweep.grid")) {
        grid = cfg.get_list("sweep.grid", {});
    } else {
        const double q_min = cfg.get_double("sweep.q_min", 1e-6);
        const double q_max = cfg.get_double("sweep.q_max", 1e-1);
        const auto ppd = static_cast<int>(cfg.get_uint("sweep.points_per_decade", 20));
        validated([&] { grid = log_grid(q_min, q_max, ppd); });
    }
    const double extra_loss = cfg.get_double("sweep.extra_loss", 1.0);
    const double measured_gain = cfg.get_double("sweep.measured_gain", 1.2e-2);
    cfg.reject_unused();

    if (grid.empty()) throw ConfigError("the gain grid is empty");
    if (!(measured_gain > 0.0)) throw ConfigError("sweep.measured_gain must be positive");
    std::vector<RatePoint> curve;
    validated([&] {
        p.validate();
        curve = rate_vs_gain(grid, p, extra_loss);
    });

    std::string g_star = "undefined";
    std::string margin = "undefined";
    try {
        const double g = gain_threshold(p);
        g_star = format_double(g);
        margin = format_double(loss_margin_db(measured_gain, g));
    } catch (const ThresholdUndefinedError& e) {
        std::cerr << "warning: " << e.what() << '\n';
    }

    write_atomic(out / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, curve); });
    write_atomic(out / "threshold.txt", [&](std::ostream& os) {
        os << "g_star=" << g_star << '\n'
           << "measured_gain=" << format_double(measured_gain) << '\n'
           << "loss_margin_db=" << margin << '\n';
    });
}

int run(int argc, char** argv) {
    CLI::App app{"Free-space QKD link simulation and analysis with rotation-invariant hybrid qubits", "oamqkd"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--set", overrides, "override a configuration key (key=value)");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo BB84 + decoy session");

    auto* keyrate = app.add_subcommand("keyrate", "secret key rate from decoy observables");
    std::string input;
    std::string method;
    keyrate->add_option("--input", input, "observables CSV or key=value file");
    keyrate->add_option("--method", method, "decoy | single-photon")->check(CLI::IsMember({"decoy", "single-photon"}));
    std::map<std::string, double> inline_obs;
    for (const char* key : {"mu", "nu", "q_mu", "q_nu", "e_mu", "e_nu", "y0"}) {
        std::string flag = std::string("--") + key;
        std::replace(flag.begin() + 2, flag.end(), '_', '-');
        keyrate->add_option_function<double>(flag, [&inline_obs, key](double v) { inline_obs[key] = v; },
                                             std::string("inline observable ") + key);
    }

    auto* turbulence = app.add_subcommand("turbulence", "beam-wander turbulence estimate");
    std::string frames_dir;
    double sigma_mm = 0.0;
    bool synthetic = false;
    turbulence->add_option("--frames", frames_dir, "directory of text intensity frames");
    turbulence->add_option("--sigma-mm", sigma_mm, "use a known wander deviation in mm");
    turbulence->add_flag("--synthetic", synthetic, "analyse synthetic frames");

    auto* sweep = app.add_subcommand("sweep", "key rate versus gain and the gain threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kSuccess : kUsageError;
    }

    try {
        Config cfg = config_path.empty() ? Config{} : Config::from_file(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        const fs::path out{out_dir};
        fs::create_directories(out);

        if (simulate->parsed()) {
            cmd_simulate(cfg, seed, out);
        } else if (keyrate->parsed()) {
            if (!input.empty()) cfg.set("keyrate.input", input);
            if (!method.empty()) cfg.set("keyrate.method", method);
            for (const auto& [k, v] : inline_obs) cfg.set("obs." + k, format_double(v));
            cmd_keyrate(cfg, out);
        } else if (turbulence->parsed()) {
            if (!frames_dir.empty()) cfg.set("turbulence.frames_dir", frames_dir);
            if (turbulence->count("--sigma-mm") > 0) cfg.set("turbulence.sigma_mm", format_double(sigma_mm));
            if (synthetic) cfg.set("turbulence.synthetic", "true");
            cmd_turbulence(cfg, seed, out);
        } else if (sweep->parsed()) {
            cmd_sweep(cfg, out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kSuccess;
}

}  // namespace oamqkd::cli
