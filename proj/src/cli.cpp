#include "wdc/cli.hpp"

#include "wdc/analysis.hpp"
#include "wdc/error.hpp"
#include "wdc/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace wdc::cli {

namespace fs = std::filesystem;

std::uint64_t slr_noise_seed(std::uint64_t seed)
{
    return cycle_seed(seed, -1);
}

Scenario prepare_scenario(const RunConfig& config, std::uint64_t seed)
{
    Scenario s;
    s.pass = generate_pass(config.pass, config.constants);
    s.slr = simulate_slr(s.pass, config.constants, config.protocol.slr_period,
                         config.sim.slr_timing_noise, slr_noise_seed(seed));
    s.schedules = build_schedules(s.pass, config.protocol, seed);
    return s;
}

void cmd_simulate(const RunConfig& config, const fs::path& out_dir, std::ostream& log)
{
    if (!config.seed)
        throw ConfigError("simulate needs a seed (--seed or \"seed\" in the config)");
    const std::uint64_t seed = *config.seed;
    SimulationConfig sim = config.sim;
    sim.seed = seed;

    const Scenario sc = prepare_scenario(config, seed);
    const SimulationOutput out = simulate_pass(sc.pass, sc.schedules, sim, config.constants);

    fs::create_directories(out_dir);
    {
        auto f = io::open_output(out_dir / "timetags.csv");
        io::write_timetags(f, out.records);
    }
    {
        auto f = io::open_output(out_dir / "truth.jsonl");
        io::write_truth(f, out.truth);
    }
    {
        auto f = io::open_output(out_dir / "track.csv");
        io::write_track(f, sc.pass);
    }
    {
        auto f = io::open_output(out_dir / "slr.csv");
        io::write_slr(f, sc.slr);
    }
    {
        RunConfig resolved = config;
        resolved.output_dir = out_dir.string();
        auto f = io::open_output(out_dir / "config.json");
        f << to_json(resolved).dump(2) << '\n';
    }
    log << "simulate: " << config.scenario << ", seed " << seed << ", " << sc.schedules.size()
        << " cycles, " << out.records.size() << " records -> " << out_dir.string() << '\n';
}

int cmd_analyze(const RunConfig& config, const AnalyzeFiles& files, const fs::path& out_dir,
                std::ostream& log)
{
    std::vector<TimeTagRecord> records;
    {
        auto f = io::open_input(files.timetags);
        records = io::read_timetags(f, files.timetags.string());
    }
    PassTrack pass;
    {
        auto f = io::open_input(files.track);
        pass = io::read_track(f, files.track.string());
    }
    if (pass.size() < 2)
        throw DataError(files.track.string() + ": track has fewer than two samples");

    const fs::path slr_path = files.slr ? *files.slr : files.track.parent_path() / "slr.csv";
    std::vector<SlrObservation> observations;
    {
        auto f = io::open_input(slr_path);
        observations = io::read_slr(f, slr_path.string());
    }
    const SlrVelocityTrack slr(observations, config.constants);

    // Segment timing does not depend on the QRNG bits, so any seed will do.
    const std::vector<CycleSchedule> schedules = build_schedules(pass, config.protocol, 0);

    AnalysisInputs in;
    in.records = records;
    in.pass = &pass;
    in.slr = &slr;
    in.schedules = schedules;
    in.sim = config.sim;
    in.constants = config.constants;
    in.params = config.analysis;
    AnalysisReport report = analyze(in);

    if (files.truth) {
        auto f = io::open_input(*files.truth);
        const std::vector<TruthEntry> truth = io::read_truth(f, files.truth->string());
        compare_with_truth(report, truth, config.sim);
    }

    fs::create_directories(out_dir);
    {
        auto f = io::open_output(out_dir / "report.json");
        f << io::report_to_json(report).dump(2) << '\n';
    }
    {
        auto f = io::open_output(out_dir / "phase_bins.csv");
        io::write_phase_bins(f, report.interference_bins);
    }
    {
        auto f = io::open_output(out_dir / "phase_bins_b1.csv");
        io::write_phase_bins(f, report.whichpath_bins);
    }
    {
        auto f = io::open_output(out_dir / "histograms.csv");
        io::write_histograms(f, report);
    }

    for (const std::string& w : report.warnings)
        log << "warning: " << w << '\n';
    log << "analyze: " << report.analyzed << " of " << report.records << " records analyzed -> "
        << out_dir.string() << '\n';
    return report.has_visibility && report.has_which_path ? ok : data_error;
}

int cmd_verify_causality(const RunConfig& config, const std::optional<fs::path>& track,
                         const std::optional<fs::path>& out_dir, std::ostream& log)
{
    PassTrack pass;
    if (track) {
        auto f = io::open_input(*track);
        pass = io::read_track(f, track->string());
    } else {
        pass = generate_pass(config.pass, config.constants);
    }
    const std::vector<CycleSchedule> schedules =
        build_schedules(pass, config.protocol, config.seed.value_or(0));
    if (schedules.empty()) {
        log << "verify-causality: no cycles to check (empty or too short track)\n";
        return data_error;
    }
    const CausalityReport report = verify_delayed_choice(schedules, pass, config.constants);
    nlohmann::json j = report;
    if (out_dir) {
        fs::create_directories(*out_dir);
        auto f = io::open_output(*out_dir / "causality.json");
        f << j.dump(2) << '\n';
    }
    log << "verify-causality: " << report.cycles.size() << " cycles, "
        << report.violations.size() << " violations, min margin " << std::fixed
        << std::setprecision(3) << report.min_margin_m / 1e3 << " km\n";
    log.unsetf(std::ios::floatfield);
    return report.ok() ? ok : causality_violation;
}

namespace {

std::string num(const nlohmann::json& v, int precision = 4)
{
    if (!v.is_number())
        return "n/a";
    std::ostringstream os;
    os << std::setprecision(precision) << v.get<double>();
    return os.str();
}

} // namespace

void cmd_report(const std::vector<fs::path>& inputs, std::ostream& out)
{
    if (inputs.empty())
        throw ConfigError("report needs at least one JSON file");
    for (const fs::path& p : inputs) {
        auto f = io::open_input(p);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::parse_error& ex) {
            throw DataError(p.string() + ": " + ex.what());
        }
        out << "== " << p.string() << '\n';
        if (j.contains("v_exp")) {
            out << "  visibility      V = " << num(j["v_exp"]) << " +/- " << num(j["sigma_v"])
                << " (scatter " << num(j["sigma_v_scatter"]) << ")\n";
            out << "  residuals       sigma_R = " << num(j["sigma_R"]) << ", within 1.5 sigma: "
                << num(j["residual_coverage"]) << '\n';
            out << "  which-path      p_wp = " << num(j["p_wp"]) << " +/- " << num(j["sigma_p"]) << '\n';
            out << "  classical bound z = " << num(j["z"]) << '\n';
            out << "  mean photons    mu = " << num(j["mu_estimate"]) << '\n';
            if (j.contains("which_path")) {
                const auto& w = j["which_path"];
                out << "  peak separation " << num(w["separation_ns"]) << " ns, peak sigma "
                    << num(w["peak_sigma_ns"]) << " ns\n";
            }
            if (j.contains("count_balance")) {
                const auto& b = j["count_balance"];
                out << "  count balance   central(b=0) " << num(b["central_b0"], 6) << " vs lateral(b=1) "
                    << num(b["lateral_b1"], 6) << ", z = " << num(b["z"]) << '\n';
            }
            if (j.contains("records")) {
                const auto& r = j["records"];
                out << "  records         " << r.value("analyzed", 0) << " analyzed of "
                    << r.value("total", 0) << '\n';
            }
            if (j.contains("truth")) {
                const auto& t = j["truth"];
                out << "  truth           dV = " << num(t["delta_v"]) << ", dp_wp = "
                    << num(t["delta_p_wp"]) << ", phi rms error = " << num(t["phi_rms_error"]) << " rad\n";
            }
            for (const auto& w : j.value("warnings", nlohmann::json::array()))
                out << "  warning         " << w.get<std::string>() << '\n';
        } else if (j.contains("cycles_checked")) {
            out << "  causality       " << (j.value("ok", false) ? "ok" : "VIOLATED") << ", "
                << j.value("cycles_checked", 0) << " cycles, " << j.value("violation_count", 0)
                << " violations, min margin " << num(j["min_margin_km"]) << " km\n";
        } else {
            throw DataError(p.string() + ": neither an analysis nor a causality report");
        }
    }
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Delayed-choice satellite interferometry: simulate passes and analyze time tags"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string truth_path;

    auto* simulate = app.add_subcommand("simulate", "Simulate a pass and write time tags");
    simulate->add_option("--config", config_path, "Scenario JSON")->required();
    simulate->add_option("--seed", seed, "RNG seed (overrides the config)");
    simulate->add_option("--out", out_dir, "Output directory");

    std::string timetags, track, slr;
    auto* analyze_cmd = app.add_subcommand("analyze", "Analyze a time-tag file");
    analyze_cmd->add_option("--config", config_path, "Scenario JSON")->required();
    analyze_cmd->add_option("--out", out_dir, "Output directory");
    analyze_cmd->add_option("--truth", truth_path, "Truth sidecar for closure checks");
    analyze_cmd->add_option("--seed", seed, "Ignored; accepted for symmetry");
    analyze_cmd->add_option("timetags", timetags, "Time-tag CSV")->required();
    analyze_cmd->add_option("track", track, "Pass track CSV")->required();
    analyze_cmd->add_option("slr", slr, "SLR spacing CSV (default: slr.csv beside the track)");

    std::string verify_track;
    auto* verify = app.add_subcommand("verify-causality", "Check choice/reflection separation");
    verify->add_option("--config", config_path, "Scenario JSON")->required();
    verify->add_option("--seed", seed, "QRNG seed for the schedules");
    verify->add_option("--out", out_dir, "Write causality.json here");
    verify->add_option("track", verify_track, "Pass track CSV (default: from the config)");

    std::vector<std::string> report_inputs;
    auto* report = app.add_subcommand("report", "Summarize analysis/causality JSON");
    report->add_option("inputs", report_inputs, "report.json / causality.json files")->required();
    report->add_option("--out", out_dir, "Also write summary.txt here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }

    try {
        if (*report) {
            std::vector<fs::path> paths(report_inputs.begin(), report_inputs.end());
            std::ostringstream text;
            cmd_report(paths, text);
            out << text.str();
            if (!out_dir.empty()) {
                fs::create_directories(out_dir);
                auto f = io::open_output(fs::path(out_dir) / "summary.txt");
                f << text.str();
            }
            return ok;
        }

        RunConfig config = load_config(config_path);
        if (seed) {
            config.seed = *seed;
            config.sim.seed = *seed;
        }
        const fs::path dir = out_dir.empty() ? fs::path(config.output_dir) : fs::path(out_dir);

        if (*simulate) {
            if (!config.seed) {
                err << "error: simulate needs --seed or a \"seed\" field in the config\n";
                return usage;
            }
            cmd_simulate(config, dir, out);
            return ok;
        }
        if (*analyze_cmd) {
            AnalyzeFiles files{timetags, track, std::nullopt, std::nullopt};
            if (!slr.empty())
                files.slr = slr;
            if (!truth_path.empty())
                files.truth = truth_path;
            return cmd_analyze(config, files, dir, out);
        }
        std::optional<fs::path> track_path;
        if (!verify_track.empty())
            track_path = verify_track;
        std::optional<fs::path> verify_out;
        if (!out_dir.empty())
            verify_out = fs::path(out_dir);
        return cmd_verify_causality(config, track_path, verify_out, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return data_error;
    }
}

} // namespace wdc::cli
