#include "wdc/config.hpp"

#include "wdc/error.hpp"

#include <fstream>
#include <set>

namespace wdc {

namespace {

using nlohmann::json;

class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name))
    {
        if (!j_.is_object())
            throw ConfigError(name_ + " must be an object");
    }

    ~Section() noexcept(false)
    {
        if (std::uncaught_exceptions() > 0)
            return;
        for (const auto& [key, value] : j_.items())
            if (!seen_.contains(key))
                throw ConfigError("unknown key " + path(key));
    }

    template <class T>
    void get(const char* key, T& out)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path(key) + " has the wrong type");
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& out)
    {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null())
            return;
        T v{};
        get(key, v);
        out = v;
    }

    bool has(const char* key) const { return j_.contains(key); }

    Section sub(const char* key)
    {
        seen_.insert(key);
        static const json empty = json::object();
        return Section(j_.contains(key) ? j_.at(key) : empty, path(key));
    }

private:
    std::string path(const std::string& key) const { return name_ + "." + key; }

    const json& j_;
    std::string name_;
    std::set<std::string, std::less<>> seen_;
};

} // namespace

void RunConfig::validate() const
{
    pass.validate();
    constants.validate();
    sim.validate();
    protocol.validate();
    if (!(analysis.bin_width > 0.0))
        throw ConfigError("analysis.bin_width_s must be positive");
    const double ratio = analysis.bin_width / sim.tagger_resolution;
    if (std::abs(ratio - std::round(ratio)) > 1e-6)
        throw ConfigError("analysis.bin_width_s must be a multiple of the tagger resolution");
}

RunConfig parse_config(const json& j)
{
    RunConfig c;
    {
        Section root(j, "config");
        root.get("scenario", c.scenario);
        root.get("seed", c.seed);
        root.get("output_dir", c.output_dir);

        {
            Section p = root.sub("pass");
            p.get("altitude_m", c.pass.altitude);
            p.get("min_slant_m", c.pass.min_slant);
            p.get("sample_step_s", c.pass.sample_step);
            std::optional<double> max_slant, duration;
            p.get("max_slant_m", max_slant);
            p.get("duration_s", duration);
            if (max_slant && duration)
                throw ConfigError("pass: give max_slant_m or duration_s, not both");
            if (duration)
                c.pass.duration = *duration;
            if (max_slant)
                c.pass.duration = pass_duration_for_slant(c.pass.altitude, c.pass.min_slant, *max_slant);
        }
        {
            Section k = root.sub("constants");
            k.get("wavelength_m", c.constants.wavelength);
            k.get("mzi_unbalance_s", c.constants.mzi_unbalance);
        }
        {
            Section s = root.sub("simulation");
            s.get("pulse_rate_hz", c.sim.pulse_rate);
            s.get("mu", c.sim.mu);
            s.get("eta_opt", c.sim.eta_opt);
            s.get("eta_det_plus", c.sim.eta_det_plus);
            s.get("eta_det_minus", c.sim.eta_det_minus);
            s.get("jitter_rms_s", c.sim.jitter_rms);
            s.get("tagger_resolution_s", c.sim.tagger_resolution);
            s.get("background_rate_hz", c.sim.background_rate);
            s.get("slr_timing_noise_s", c.sim.slr_timing_noise);
            s.get("threads", c.sim.threads);
            Section im = s.sub("imperfections");
            im.get("visibility", c.sim.imperfections.visibility);
            im.get("whichpath_purity", c.sim.imperfections.whichpath_purity);
            im.get("eta_plus", c.sim.imperfections.eta_plus);
            im.get("eta_minus", c.sim.imperfections.eta_minus);
        }
        {
            Section p = root.sub("protocol");
            p.get("slr_period_s", c.protocol.slr_period);
            p.get("t_trans_s", c.protocol.t_trans);
            p.get("t_shwp_s", c.protocol.t_shwp);
            p.get("cycle_stride", c.protocol.cycle_stride);
            p.get("rtt_scale", c.protocol.rtt_scale);
            std::optional<int> force;
            p.get("force_bit", force);
            if (force) {
                if (*force != 0 && *force != 1)
                    throw ConfigError("protocol.force_bit must be 0 or 1");
                c.protocol.force_bit = std::uint8_t(*force);
            }
        }
        {
            Section a = root.sub("analysis");
            a.get("bin_width_s", c.analysis.bin_width);
        }
    }
    if (c.seed)
        c.sim.seed = *c.seed;
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& ex) {
        throw ConfigError(path.string() + ": " + ex.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c)
{
    json j;
    j["scenario"] = c.scenario;
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    j["output_dir"] = c.output_dir;
    j["pass"] = {{"altitude_m", c.pass.altitude},
                 {"min_slant_m", c.pass.min_slant},
                 {"duration_s", c.pass.duration},
                 {"sample_step_s", c.pass.sample_step}};
    j["constants"] = {{"wavelength_m", c.constants.wavelength},
                      {"mzi_unbalance_s", c.constants.mzi_unbalance}};
    j["simulation"] = {{"pulse_rate_hz", c.sim.pulse_rate},
                       {"mu", c.sim.mu},
                       {"eta_opt", c.sim.eta_opt},
                       {"eta_det_plus", c.sim.eta_det_plus},
                       {"eta_det_minus", c.sim.eta_det_minus},
                       {"jitter_rms_s", c.sim.jitter_rms},
                       {"tagger_resolution_s", c.sim.tagger_resolution},
                       {"background_rate_hz", c.sim.background_rate},
                       {"slr_timing_noise_s", c.sim.slr_timing_noise},
                       {"threads", c.sim.threads},
                       {"imperfections",
                        {{"visibility", c.sim.imperfections.visibility},
                         {"whichpath_purity", c.sim.imperfections.whichpath_purity},
                         {"eta_plus", c.sim.imperfections.eta_plus},
                         {"eta_minus", c.sim.imperfections.eta_minus}}}};
    j["protocol"] = {{"slr_period_s", c.protocol.slr_period},
                     {"t_trans_s", c.protocol.t_trans},
                     {"t_shwp_s", c.protocol.t_shwp},
                     {"cycle_stride", c.protocol.cycle_stride},
                     {"rtt_scale", c.protocol.rtt_scale},
                     {"force_bit", c.protocol.force_bit ? json(int(*c.protocol.force_bit)) : json(nullptr)}};
    j["analysis"] = {{"bin_width_s", c.analysis.bin_width}};
    return j;
}

} // namespace wdc
