#include "wdc/photonics.hpp"

#include "wdc/error.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wdc {

namespace {

constexpr double kNormTolerance = 1e-12;

void check_bit(std::uint8_t b)
{
    if (b > 1)
        throw std::invalid_argument("choice bit must be 0 or 1");
}

} // namespace

std::string_view to_string(Detector d)
{
    return d == Detector::plus ? "+" : "-";
}

std::string_view to_string(Slot s)
{
    switch (s) {
    case Slot::early: return "early";
    case Slot::central: return "central";
    case Slot::late: return "late";
    }
    return "?";
}

Polarization Polarization::diagonal()
{
    const double r = std::numbers::sqrt2 / 2.0;
    return {{r, 0.0}, {r, 0.0}};
}

double PhotonState::norm2() const
{
    double n = 0.0;
    for (const Amplitude& a : amp)
        n += std::norm(a);
    return n;
}

double ReturnState::probability(Detector d, Slot s) const
{
    const auto& pol = at(s);
    const double sign = d == Detector::plus ? 1.0 : -1.0;
    const Amplitude projected = (pol[0] + sign * pol[1]) / std::numbers::sqrt2;
    return std::norm(projected);
}

void ImperfectionModel::validate() const
{
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(visibility))
        throw ConfigError("visibility must lie in [0,1]");
    if (!in_unit(whichpath_purity))
        throw ConfigError("which-path purity must lie in [0,1]");
    if (!(eta_plus > 0.0 && eta_plus <= 1.0) || !(eta_minus > 0.0 && eta_minus <= 1.0))
        throw ConfigError("relative detector efficiencies must lie in (0,1]");
}

double DetectionTable::total() const
{
    double t = 0.0;
    for (const auto& row : p_)
        for (double p : row)
            t += p;
    return t;
}

void to_json(nlohmann::json& j, const DetectionTable& table)
{
    j = nlohmann::json::object();
    for (Detector d : {Detector::plus, Detector::minus}) {
        nlohmann::json row = nlohmann::json::object();
        for (Slot s : {Slot::early, Slot::central, Slot::late})
            row[std::string(to_string(s))] = table(d, s);
        j[std::string(to_string(d))] = row;
    }
}

PhotonState mzi_forward(const Polarization& input)
{
    if (std::abs(input.norm2() - 1.0) > kNormTolerance)
        throw std::invalid_argument("input polarization is not normalized");
    PhotonState s;
    s.amp[PhotonState::kEarlyH] = input.h;
    s.amp[PhotonState::kLateV] = input.v;
    return s;
}

PhotonState shwp_apply(const PhotonState& state, std::uint8_t b)
{
    check_bit(b);
    if (b == 0)
        return state;
    PhotonState out;
    out.amp[PhotonState::kEarlyH] = state.amp[PhotonState::kEarlyV];
    out.amp[PhotonState::kEarlyV] = state.amp[PhotonState::kEarlyH];
    out.amp[PhotonState::kLateH] = state.amp[PhotonState::kLateV];
    out.amp[PhotonState::kLateV] = state.amp[PhotonState::kLateH];
    return out;
}

PhotonState satellite_phase(const PhotonState& state, double phi)
{
    const Amplitude rot = std::polar(1.0, phi);
    PhotonState out = state;
    out.amp[PhotonState::kLateH] *= rot;
    out.amp[PhotonState::kLateV] *= rot;
    return out;
}

ReturnState mzi_return(const PhotonState& state)
{
    // V returns through the short arm, H through the long arm (+dt).
    ReturnState r;
    r.amp[std::size_t(Slot::early)][1] = state.amp[PhotonState::kEarlyV];
    r.amp[std::size_t(Slot::central)][0] = state.amp[PhotonState::kEarlyH];
    r.amp[std::size_t(Slot::central)][1] = state.amp[PhotonState::kLateV];
    r.amp[std::size_t(Slot::late)][0] = state.amp[PhotonState::kLateH];
    return r;
}

ReturnState propagate_chain(double phi, std::uint8_t b)
{
    PhotonState s = mzi_forward(Polarization::diagonal());
    s = shwp_apply(s, 0);
    s = satellite_phase(s, phi);
    s = shwp_apply(s, b);
    return mzi_return(s);
}

DetectionTable detection_table(double phi, std::uint8_t b, const ImperfectionModel& imperfections)
{
    check_bit(b);
    DetectionTable t;
    if (b == 0) {
        const double fringe = imperfections.visibility * std::cos(phi);
        t(Detector::plus, Slot::central) = 0.5 * (1.0 + fringe);
        t(Detector::minus, Slot::central) = 0.5 * (1.0 - fringe);
        return t;
    }
    const double lateral = 0.25 * imperfections.whichpath_purity;
    const double leak = 0.5 * (1.0 - imperfections.whichpath_purity);
    for (Detector d : {Detector::plus, Detector::minus}) {
        t(d, Slot::early) = lateral;
        t(d, Slot::late) = lateral;
        t(d, Slot::central) = leak;
    }
    return t;
}

DetectionTable propagated_table(double phi, std::uint8_t b)
{
    const ReturnState r = propagate_chain(phi, b);
    DetectionTable t;
    for (Detector d : {Detector::plus, Detector::minus})
        for (Slot s : {Slot::early, Slot::central, Slot::late})
            t(d, s) = r.probability(d, s);
    return t;
}

} // namespace wdc
