#include <doctest.h>

#include "wdc/error.hpp"
#include "wdc/photonics.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace wdc;

namespace {

constexpr double kTol = 1e-12;
const double kR = 1.0 / std::numbers::sqrt2;

bool close(const Amplitude& a, const Amplitude& b, double tol = kTol)
{
    return std::abs(a - b) <= tol;
}

bool close(const PhotonState& a, const PhotonState& b, double tol = kTol)
{
    for (std::size_t i = 0; i < 4; ++i)
        if (!close(a.amp[i], b.amp[i], tol))
            return false;
    return true;
}

PhotonState random_state(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    PhotonState s;
    for (Amplitude& a : s.amp)
        a = {n(rng), n(rng)};
    const double norm = std::sqrt(s.norm2());
    for (Amplitude& a : s.amp)
        a /= norm;
    return s;
}

PhotonState basis(std::size_t i, Amplitude a = 1.0)
{
    PhotonState s;
    s.amp[i] = a;
    return s;
}

// Independent propagation: the chain written as explicit 4x4 matrices on the
// (eH, eV, lH, lV) basis, then the 6x4 map to (slot, polarization) outputs.
DetectionTable matrix_oracle(double phi, std::uint8_t b)
{
    using C = std::complex<double>;
    C in[4] = {kR, 0.0, 0.0, kR}; // diagonal light after the outbound MZI
    C swap[4][4] = {};
    for (int i = 0; i < 4; ++i)
        swap[i][b ? (i ^ 1) : i] = 1.0;
    C phase[4][4] = {};
    phase[0][0] = phase[1][1] = 1.0;
    phase[2][2] = phase[3][3] = std::polar(1.0, phi);
    C after_phase[4] = {}, after_swap[4] = {};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            after_phase[i] += phase[i][j] * in[j];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            after_swap[i] += swap[i][j] * after_phase[j];
    // rows: (early,H) (early,V) (central,H) (central,V) (late,H) (late,V)
    C route[6][4] = {};
    route[1][1] = 1.0; // early V -> short arm -> early slot
    route[2][0] = 1.0; // early H -> long arm -> central
    route[3][3] = 1.0; // late V -> short arm -> central
    route[4][2] = 1.0; // late H -> long arm -> late slot
    C out[6] = {};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j)
            out[i] += route[i][j] * after_swap[j];
    DetectionTable t;
    for (int slot = 0; slot < 3; ++slot) {
        const C h = out[2 * slot], v = out[2 * slot + 1];
        t(Detector::plus, Slot(slot)) = std::norm((h + v) * kR);
        t(Detector::minus, Slot(slot)) = std::norm((h - v) * kR);
    }
    return t;
}

double max_diff(const DetectionTable& a, const DetectionTable& b)
{
    double m = 0.0;
    for (Detector d : {Detector::plus, Detector::minus})
        for (Slot s : {Slot::early, Slot::central, Slot::late})
            m = std::max(m, std::abs(a(d, s) - b(d, s)));
    return m;
}

} // namespace

TEST_CASE("outbound interferometer routing")
{
    const PhotonState d = mzi_forward(Polarization::diagonal());
    CHECK(close(d.amp[PhotonState::kEarlyH], kR));
    CHECK(close(d.amp[PhotonState::kLateV], kR));
    CHECK(close(d.amp[PhotonState::kEarlyV], 0.0));
    CHECK(close(d.amp[PhotonState::kLateH], 0.0));

    CHECK(close(mzi_forward(Polarization::horizontal()), basis(PhotonState::kEarlyH)));
    for (double theta : {0.0, 0.3, 1.0, std::numbers::pi, -2.0}) {
        const Amplitude ph = std::polar(1.0, theta);
        CHECK(close(mzi_forward({0.0, ph}), basis(PhotonState::kLateV, ph)));
    }
    CHECK_THROWS_AS(mzi_forward({1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("switchable half-wave plate")
{
    std::mt19937_64 rng(1);
    const PhotonState s = random_state(rng);
    CHECK(close(shwp_apply(s, 0), s));
    CHECK(close(shwp_apply(basis(PhotonState::kEarlyH), 1), basis(PhotonState::kEarlyV)));
    CHECK(close(shwp_apply(basis(PhotonState::kLateV), 1), basis(PhotonState::kLateH)));
    CHECK_THROWS_AS(shwp_apply(s, 2), std::invalid_argument);
}

TEST_CASE("satellite phase")
{
    const PhotonState plus = mzi_forward(Polarization::diagonal());
    CHECK(close(satellite_phase(plus, 0.0), plus));
    PhotonState flipped = plus;
    flipped.amp[PhotonState::kLateV] = -kR;
    CHECK(close(satellite_phase(plus, std::numbers::pi), flipped));
}

TEST_CASE("return interferometer routing")
{
    const ReturnState b0 = mzi_return(mzi_forward(Polarization::diagonal()));
    CHECK(close(b0.at(Slot::central)[0], kR));
    CHECK(close(b0.at(Slot::central)[1], kR));
    CHECK(b0.at(Slot::early)[0] == 0.0);
    CHECK(b0.at(Slot::early)[1] == 0.0);
    CHECK(b0.at(Slot::late)[0] == 0.0);
    CHECK(b0.at(Slot::late)[1] == 0.0);

    PhotonState crossed;
    crossed.amp[PhotonState::kEarlyV] = kR;
    crossed.amp[PhotonState::kLateH] = kR;
    const ReturnState b1 = mzi_return(crossed);
    CHECK(b1.at(Slot::central)[0] == 0.0);
    CHECK(b1.at(Slot::central)[1] == 0.0);
    CHECK(close(b1.at(Slot::early)[1], kR));
    CHECK(close(b1.at(Slot::late)[0], kR));

    const ReturnState single = mzi_return(basis(PhotonState::kEarlyV));
    CHECK(single.probability(Detector::plus, Slot::early) +
              single.probability(Detector::minus, Slot::early) ==
          doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("closed-form detection table")
{
    ImperfectionModel ideal;
    const DetectionTable t0 = detection_table(0.0, 0, ideal);
    CHECK(t0(Detector::plus, Slot::central) == 1.0);
    CHECK(t0(Detector::minus, Slot::central) == 0.0);

    ImperfectionModel paper;
    paper.visibility = 0.40;
    const DetectionTable tpi = detection_table(std::numbers::pi, 0, paper);
    CHECK(tpi(Detector::plus, Slot::central) == doctest::Approx(0.30).epsilon(1e-15));
    CHECK(tpi(Detector::minus, Slot::central) == doctest::Approx(0.70).epsilon(1e-15));

    const DetectionTable t1 = detection_table(1.234, 1, ideal);
    for (Detector d : {Detector::plus, Detector::minus}) {
        CHECK(t1(d, Slot::early) == 0.25);
        CHECK(t1(d, Slot::late) == 0.25);
        CHECK(t1(d, Slot::central) == 0.0);
    }

    nlohmann::json j = t1;
    CHECK(j["+"]["early"].get<double>() == 0.25);
    CHECK(j["-"]["central"].get<double>() == 0.0);

    ImperfectionModel bad;
    bad.visibility = 1.2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("propagated chain equals the closed form and the matrix oracle")
{
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / 1000.0;
        for (std::uint8_t b : {0, 1}) {
            const DetectionTable chain = propagated_table(phi, b);
            worst = std::max(worst, max_diff(chain, detection_table(phi, b, ImperfectionModel::ideal())));
            worst = std::max(worst, max_diff(chain, matrix_oracle(phi, b)));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("properties over random states and settings")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> angle(-20.0, 20.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const PhotonState s = random_state(rng);
        const double a = angle(rng), b = angle(rng);

        // Unitarity.
        CHECK(std::abs(shwp_apply(s, 1).norm2() - 1.0) < kTol);
        CHECK(std::abs(satellite_phase(s, a).norm2() - 1.0) < kTol);
        // Involution and phase additivity.
        CHECK(close(shwp_apply(shwp_apply(s, 1), 1), s));
        CHECK(close(satellite_phase(satellite_phase(s, a), b), satellite_phase(s, a + b), 1e-11));

        // The b = 1 chain never reaches the central slot.
        const ReturnState r = propagate_chain(a, 1);
        CHECK(r.at(Slot::central)[0] == 0.0);
        CHECK(r.at(Slot::central)[1] == 0.0);

        ImperfectionModel m;
        m.visibility = unit(rng);
        m.whichpath_purity = unit(rng);
        for (std::uint8_t bit : {0, 1})
            CHECK(std::abs(detection_table(a, bit, m).total() - 1.0) < kTol);
        const DetectionTable t = detection_table(a, 0, m);
        CHECK(std::abs(t(Detector::plus, Slot::central) + t(Detector::minus, Slot::central) - 1.0) < kTol);
    }
}
