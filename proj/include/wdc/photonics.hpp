#pragma once

// Hybrid time-bin / polarization photon state and the optical chain:
// outbound MZI, switchable half-wave plate, satellite phase, return MZI, and
// the {+,-} polarization measurement at the monitored exit port.

#include <array>
#include <complex>
#include <cstdint>
#include <string_view>

#include <json.hpp>

namespace wdc {

using Amplitude = std::complex<double>;

enum class Detector : std::uint8_t { plus = 0, minus = 1 };
enum class Slot : std::uint8_t { early = 0, central = 1, late = 2 };

std::string_view to_string(Detector d);
std::string_view to_string(Slot s);

/// Polarization qubit a|H> + b|V>.
struct Polarization {
    Amplitude h{1.0, 0.0};
    Amplitude v{0.0, 0.0};

    static Polarization horizontal() { return {{1.0, 0.0}, {0.0, 0.0}}; }
    static Polarization vertical() { return {{0.0, 0.0}, {1.0, 0.0}}; }
    static Polarization diagonal();
    double norm2() const { return std::norm(h) + std::norm(v); }
};

/// Four-mode state over the fixed basis
///   0: (early,H)  1: (early,V)  2: (late,H)  3: (late,V)
struct PhotonState {
    static constexpr std::size_t kEarlyH = 0;
    static constexpr std::size_t kEarlyV = 1;
    static constexpr std::size_t kLateH = 2;
    static constexpr std::size_t kLateV = 3;

    std::array<Amplitude, 4> amp{};

    double norm2() const;
};

/// Post-MZI amplitudes at the monitored port: [slot][polarization], pol 0 = H, 1 = V.
struct ReturnState {
    std::array<std::array<Amplitude, 2>, 3> amp{};

    const std::array<Amplitude, 2>& at(Slot s) const { return amp[std::size_t(s)]; }
    /// Click probability for detector d in slot s after the {+,-} projection.
    double probability(Detector d, Slot s) const;
};

/// Phenomenological degradations of the ideal chain.
struct ImperfectionModel {
    double visibility = 1.0;        ///< fringe contrast V0 in [0,1]
    double whichpath_purity = 1.0;  ///< fraction of b=1 probability in the lateral peaks
    double eta_plus = 1.0;          ///< relative detector efficiency, (0,1]
    double eta_minus = 1.0;

    void validate() const;
    static ImperfectionModel ideal() { return {}; }
};

class DetectionTable {
public:
    double operator()(Detector d, Slot s) const { return p_[std::size_t(d)][std::size_t(s)]; }
    double& operator()(Detector d, Slot s) { return p_[std::size_t(d)][std::size_t(s)]; }
    double total() const;

private:
    std::array<std::array<double, 3>, 2> p_{};
};

void to_json(nlohmann::json& j, const DetectionTable& table);

/// Outbound MZI: H takes the short arm (early), V the long arm (late).
/// Throws std::invalid_argument if the input is not normalized.
PhotonState mzi_forward(const Polarization& input);

/// b = 0: identity. b = 1: H <-> V inside each time-bin.
PhotonState shwp_apply(const PhotonState& state, std::uint8_t b);

/// Multiplies the late-bin amplitudes by exp(i phi).
PhotonState satellite_phase(const PhotonState& state, double phi);

/// Return MZI followed by post-selection at the monitored port:
/// (early,V) -> early slot, (early,H) and (late,V) -> central slot,
/// (late,H) -> late slot.
ReturnState mzi_return(const PhotonState& state);

/// The full chain for a diagonally polarized input. The outbound sHWP pass is
/// always off; `b` applies on the return pass.
ReturnState propagate_chain(double phi, std::uint8_t b);

/// Closed-form click probabilities with imperfections. Detector efficiency is
/// not applied here.
DetectionTable detection_table(double phi, std::uint8_t b, const ImperfectionModel& imperfections);

/// Table derived by explicit state propagation (ideal apparatus only).
DetectionTable propagated_table(double phi, std::uint8_t b);

} // namespace wdc
