#include "wdc/io.hpp"

#include "wdc/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string_view>

namespace wdc::io {

namespace {

class LineReader {
public:
    LineReader(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

    bool next(std::string& line)
    {
        if (!std::getline(is_, line))
            return false;
        ++number_;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        return true;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw DataError(source_ + ":" + std::to_string(number_) + ": " + what);
    }

    void expect_header(std::string_view header)
    {
        std::string line;
        if (!next(line))
            throw DataError(source_ + ":1: missing header line `" + std::string(header) + "`");
        if (line != header)
            fail("expected header `" + std::string(header) + "`, got `" + line + "`");
    }

    std::vector<std::string_view> fields(std::string_view line, std::size_t expected) const
    {
        std::vector<std::string_view> out;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                           : comma - pos));
            if (comma == std::string_view::npos)
                break;
            pos = comma + 1;
        }
        if (out.size() != expected)
            fail("expected " + std::to_string(expected) + " fields, got " +
                 std::to_string(out.size()));
        return out;
    }

    template <class T>
    T number(std::string_view field, const char* name) const
    {
        T value{};
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (ec != std::errc{} || end != field.data() + field.size() || field.empty())
            fail(std::string("malformed ") + name + " `" + std::string(field) + "`");
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(value))
                fail(std::string("non-finite ") + name);
        }
        return value;
    }

private:
    std::istream& is_;
    std::string source_;
    std::size_t number_ = 0;
};

constexpr std::string_view kTagHeader = "tag,channel,cycle,bit";
constexpr std::string_view kTrackHeader = "t,slant,v_r,beta,rtt,phi";
constexpr std::string_view kSlrHeader = "t,delta_t_tx,delta_t_rx";

} // namespace

std::string format_real(double v)
{
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, std::size_t(n));
}

// ---------------------------------------------------------------------------

void write_timetags(std::ostream& os, std::span<const TimeTagRecord> records)
{
    os << kTagHeader << '\n';
    for (const TimeTagRecord& r : records)
        os << r.tag << ',' << to_string(r.channel) << ',' << r.cycle << ',' << int(r.bit) << '\n';
}

std::vector<TimeTagRecord> read_timetags(std::istream& is, const std::string& source)
{
    LineReader in(is, source);
    in.expect_header(kTagHeader);
    std::vector<TimeTagRecord> out;
    std::string line;
    while (in.next(line)) {
        if (line.empty())
            in.fail("empty line");
        const auto f = in.fields(line, 4);
        TimeTagRecord r;
        r.tag = in.number<std::uint64_t>(f[0], "tag");
        if (f[1] == "+")
            r.channel = Detector::plus;
        else if (f[1] == "-")
            r.channel = Detector::minus;
        else
            in.fail("channel must be + or -, got `" + std::string(f[1]) + "`");
        r.cycle = in.number<std::int64_t>(f[2], "cycle");
        const int bit = in.number<int>(f[3], "bit");
        if (bit != 0 && bit != 1)
            in.fail("bit must be 0 or 1");
        r.bit = std::uint8_t(bit);
        out.push_back(r);
    }
    if (is.bad())
        throw DataError(source + ": read error");
    return out;
}

// ---------------------------------------------------------------------------

void write_truth(std::ostream& os, std::span<const TruthEntry> truth)
{
    for (const TruthEntry& e : truth) {
        nlohmann::json j;
        if (e.background) {
            j = {{"slot", nullptr}, {"phi", nullptr}, {"t_ref", nullptr}, {"background", true}};
        } else {
            j = {{"slot", to_string(*e.slot)}, {"phi", e.phi}, {"t_ref", e.t_ref}, {"background", false}};
        }
        os << j.dump() << '\n';
    }
}

std::vector<TruthEntry> read_truth(std::istream& is, const std::string& source)
{
    LineReader in(is, source);
    std::vector<TruthEntry> out;
    std::string line;
    while (in.next(line)) {
        if (line.empty())
            in.fail("empty line");
        try {
            const nlohmann::json j = nlohmann::json::parse(line);
            TruthEntry e;
            e.background = j.at("background").get<bool>();
            if (e.background) {
                e.phi = e.t_ref = std::nan("");
            } else {
                const auto slot = j.at("slot").get<std::string>();
                if (slot == "early")
                    e.slot = Slot::early;
                else if (slot == "central")
                    e.slot = Slot::central;
                else if (slot == "late")
                    e.slot = Slot::late;
                else
                    in.fail("unknown slot `" + slot + "`");
                e.phi = j.at("phi").get<double>();
                e.t_ref = j.at("t_ref").get<double>();
            }
            out.push_back(e);
        } catch (const nlohmann::json::exception& ex) {
            in.fail(ex.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

void write_track(std::ostream& os, const PassTrack& track)
{
    os << kTrackHeader << '\n';
    for (const PassSample& s : track.samples()) {
        os << format_real(s.t) << ',' << format_real(s.slant) << ',' << format_real(s.v_r) << ','
           << format_real(s.beta) << ',' << format_real(s.rtt) << ',' << format_real(s.phi) << '\n';
    }
}

PassTrack read_track(std::istream& is, const std::string& source)
{
    LineReader in(is, source);
    in.expect_header(kTrackHeader);
    std::vector<PassSample> samples;
    std::string line;
    while (in.next(line)) {
        if (line.empty())
            in.fail("empty line");
        const auto f = in.fields(line, 6);
        PassSample s;
        s.t = in.number<double>(f[0], "t");
        s.slant = in.number<double>(f[1], "slant");
        s.v_r = in.number<double>(f[2], "v_r");
        s.beta = in.number<double>(f[3], "beta");
        s.rtt = in.number<double>(f[4], "rtt");
        s.phi = in.number<double>(f[5], "phi");
        samples.push_back(s);
    }
    if (samples.empty())
        return {};
    try {
        return PassTrack(std::move(samples));
    } catch (const std::exception& ex) {
        throw DataError(source + ": " + ex.what());
    }
}

void write_slr(std::ostream& os, std::span<const SlrObservation> observations)
{
    os << kSlrHeader << '\n';
    for (const SlrObservation& o : observations)
        os << format_real(o.t) << ',' << format_real(o.delta_t_tx) << ','
           << format_real(o.delta_t_rx) << '\n';
}

std::vector<SlrObservation> read_slr(std::istream& is, const std::string& source)
{
    LineReader in(is, source);
    in.expect_header(kSlrHeader);
    std::vector<SlrObservation> out;
    std::string line;
    while (in.next(line)) {
        if (line.empty())
            in.fail("empty line");
        const auto f = in.fields(line, 3);
        SlrObservation o;
        o.t = in.number<double>(f[0], "t");
        o.delta_t_tx = in.number<double>(f[1], "delta_t_tx");
        o.delta_t_rx = in.number<double>(f[2], "delta_t_rx");
        out.push_back(o);
    }
    return out;
}

// ---------------------------------------------------------------------------

void write_phase_bins(std::ostream& os, std::span<const PhaseBinStats> bins)
{
    os << "j,phi_center,N+,N-,f+,f-,sigma\n";
    for (const PhaseBinStats& b : bins) {
        os << b.j << ',' << format_real(b.phi_center) << ',' << format_real(b.n_plus) << ','
           << format_real(b.n_minus) << ',' << format_real(b.f_plus) << ','
           << format_real(b.f_minus) << ',' << format_real(b.sigma_f) << '\n';
    }
}

void write_histograms(std::ostream& os, const AnalysisReport& report)
{
    os << "bit,channel,delta_ns,count\n";
    for (int bit : {0, 1}) {
        const auto& pair = bit == 0 ? report.b0 : report.b1;
        for (const DeltaHistogram& h : pair) {
            const char* ch = h.channel ? to_string(*h.channel).data() : "*";
            for (std::size_t i = 0; i < h.size(); ++i)
                os << bit << ',' << ch << ',' << format_real(h.center(i) * 1e9) << ','
                   << h.counts[i] << '\n';
        }
    }
}

nlohmann::json report_to_json(const AnalysisReport& r)
{
    using nlohmann::json;
    auto value_or_null = [](bool ok, double v) { return ok ? json(v) : json(nullptr); };
    json j;
    j["v_exp"] = value_or_null(r.has_visibility, r.visibility.v_exp);
    j["sigma_v"] = value_or_null(r.has_visibility, r.visibility.sigma_v);
    j["sigma_v_scatter"] = value_or_null(r.has_visibility, r.visibility.sigma_v_scatter);
    j["sigma_R"] = value_or_null(r.has_visibility, r.residuals.sigma_r);
    j["residual_coverage"] = value_or_null(r.has_visibility, r.residuals.coverage);
    j["p_wp"] = value_or_null(r.has_which_path, r.which_path.p_wp);
    j["sigma_p"] = value_or_null(r.has_which_path, r.which_path.sigma_p);
    j["z"] = value_or_null(r.has_visibility && r.has_which_path, r.z);
    j["mu_estimate"] = r.mu_estimate;

    j["visibility_fit"] = {{"chi2", r.visibility.chi2}, {"dof", r.visibility.dof},
                           {"residuals", r.visibility.residuals},
                           {"residual_sigmas", r.visibility.sigmas},
                           {"residual_bins", r.visibility.bins}};
    j["which_path"] = {{"n_early", r.which_path.n_early},
                       {"n_central", r.which_path.n_central},
                       {"n_late", r.which_path.n_late},
                       {"separation_ns", r.which_path.separation * 1e9},
                       {"separation_error_ns", r.which_path.separation_error * 1e9},
                       {"peak_sigma_ns", r.which_path.peak_sigma * 1e9},
                       {"peak_sigma_error_ns", r.which_path.peak_sigma_error * 1e9},
                       {"flatness_chi2", r.whichpath_chi2},
                       {"flatness_dof", r.whichpath_dof}};
    j["count_balance"] = {{"central_b0", r.central_counts_b0},
                          {"lateral_b1", r.lateral_counts_b1},
                          {"exposure_b0_pulses", r.exposure_b0},
                          {"exposure_b1_pulses", r.exposure_b1},
                          {"z", r.balance_z}};
    j["photon_budget"] = {{"signal_counts", r.signal_counts},
                          {"accepted_pulses", r.accepted_pulses},
                          {"accepted_time_s", r.accepted_time}};
    j["records"] = {{"total", r.records},
                    {"analyzed", r.analyzed},
                    {"unmatched", r.unmatched},
                    {"discarded", r.discarded}};
    j["warnings"] = r.warnings;
    if (r.truth) {
        const TruthComparison& t = *r.truth;
        j["truth"] = {{"signal", t.signal},
                      {"background", t.background},
                      {"phi_rms_error", t.phi_rms_error},
                      {"phi_max_error", t.phi_max_error},
                      {"p_wp_truth", t.p_wp_truth},
                      {"delta_p_wp", t.delta_p_wp},
                      {"v_configured", t.v_configured},
                      {"delta_v", t.delta_v}};
    }
    return j;
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f)
        throw DataError("cannot open " + path.string());
    return f;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw DataError("cannot write " + path.string());
    return f;
}

} // namespace wdc::io
