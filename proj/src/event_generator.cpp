#include "wdc/event_generator.hpp"

#include "wdc/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace wdc {

void SimulationConfig::validate() const
{
    if (!(pulse_rate > 0.0))
        throw ConfigError("pulse rate must be positive");
    if (!(mu >= 0.0) || !(mu < 0.1))
        throw ConfigError("mean photon number must be in [0, 0.1)");
    auto efficiency = [](double e) { return e > 0.0 && e <= 1.0; };
    if (!efficiency(eta_opt) || !efficiency(eta_det_plus) || !efficiency(eta_det_minus))
        throw ConfigError("efficiencies must lie in (0,1]");
    if (!(jitter_rms >= 0.0))
        throw ConfigError("jitter must be non-negative");
    if (!(tagger_resolution > 0.0))
        throw ConfigError("tagger resolution must be positive");
    if (!(background_rate >= 0.0))
        throw ConfigError("background rate must be non-negative");
    if (!(slr_timing_noise >= 0.0))
        throw ConfigError("SLR timing noise must be non-negative");
    imperfections.validate();
}

double SimulationConfig::channel_efficiency(Detector d) const
{
    return d == Detector::plus ? eta_det_plus * imperfections.eta_plus
                               : eta_det_minus * imperfections.eta_minus;
}

std::uint64_t cycle_seed(std::uint64_t seed, std::int64_t cycle)
{
    auto splitmix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    return splitmix(seed ^ splitmix(static_cast<std::uint64_t>(cycle)));
}

double multi_photon_fraction(double mu)
{
    if (!(mu >= 0.0))
        throw std::domain_error("mean photon number must be non-negative");
    return -std::expm1(-mu) - mu * std::exp(-mu);
}

namespace {

struct Event {
    TimeTagRecord record;
    TruthEntry truth;
};

struct CycleResult {
    std::vector<Event> events;
    std::int64_t accepted_pulses = 0;
};

std::uint64_t quantize(double t, double resolution)
{
    if (!(t >= 0.0))
        throw DataError("negative detection epoch");
    return static_cast<std::uint64_t>(std::llround(t / resolution));
}

CycleResult simulate_cycle(const PassTrack& pass, const CycleSchedule& s,
                           const SimulationConfig& cfg, const PhysicalConstants& constants)
{
    CycleResult out;
    std::mt19937_64 rng(cycle_seed(cfg.seed, s.cycle_index));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 1.0);

    const double eta_plus = cfg.channel_efficiency(Detector::plus);
    const double eta_minus = cfg.channel_efficiency(Detector::minus);
    const double eta_max = std::max(eta_plus, eta_minus);

    // Each pulse carries Poisson(mu) photons that survive independently, so
    // detections are a thinned Poisson process over pulses. Draw candidates
    // at the channel-independent upper rate, then thin per channel.
    const PulseRange pulses = pulses_arriving_in(s, s.tau_window, pass, cfg.pulse_rate);
    out.accepted_pulses = pulses.count();
    if (pulses.count() > 0 && cfg.mu > 0.0) {
        const double rate = double(pulses.count()) * cfg.mu * cfg.eta_opt * eta_max;
        std::poisson_distribution<std::int64_t> n_dist(rate);
        std::uniform_int_distribution<std::int64_t> pulse_dist(pulses.lo, pulses.hi);
        const std::int64_t candidates = n_dist(rng);
        for (std::int64_t i = 0; i < candidates; ++i) {
            const double t_tx = pulses.transmit_epoch(pulse_dist(rng));
            const double rtt = pass.rtt_at(t_tx);
            const double t_ref = t_tx + rtt;
            const double phi = kinematic_phase(pass.beta_at(t_tx + 0.5 * rtt), constants);
            const BitAssignment assign = governing_bit(t_ref, s);
            const DetectionTable table = detection_table(phi, assign.bit, cfg.imperfections);

            double u = uniform(rng) * table.total();
            Detector channel = Detector::minus;
            Slot slot = Slot::late;
            bool chosen = false;
            for (Detector d : {Detector::plus, Detector::minus}) {
                for (Slot sl : {Slot::early, Slot::central, Slot::late}) {
                    const double p = table(d, sl);
                    if (!chosen && u < p) {
                        channel = d;
                        slot = sl;
                        chosen = true;
                    }
                    u -= p;
                }
            }
            const double eta = channel == Detector::plus ? eta_plus : eta_minus;
            if (uniform(rng) * eta_max >= eta)
                continue;

            double offset = 0.0;
            if (slot == Slot::early)
                offset = -constants.mzi_unbalance;
            else if (slot == Slot::late)
                offset = constants.mzi_unbalance;
            const double t_det = t_ref + offset + cfg.jitter_rms * jitter(rng);

            Event e;
            e.record = {quantize(t_det, cfg.tagger_resolution), channel, s.cycle_index, assign.bit};
            e.truth = {slot, phi, t_ref, false};
            out.events.push_back(e);
        }
    }

    if (cfg.background_rate > 0.0) {
        std::poisson_distribution<std::int64_t> n_dist(cfg.background_rate * s.rx_window.length());
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        for (Detector d : {Detector::plus, Detector::minus}) {
            const std::int64_t n = n_dist(rng);
            for (std::int64_t i = 0; i < n; ++i) {
                const double t = s.rx_window.begin + uniform(rng) * s.rx_window.length();
                const BitAssignment assign = governing_bit(t, s);
                Event e;
                e.record = {quantize(t, cfg.tagger_resolution), d, s.cycle_index, assign.bit};
                e.truth = {std::nullopt, nan, nan, true};
                out.events.push_back(e);
            }
        }
    }

    std::stable_sort(out.events.begin(), out.events.end(),
                     [](const Event& a, const Event& b) { return a.record < b.record; });
    return out;
}

} // namespace

SimulationOutput simulate_pass(const PassTrack& pass, std::span<const CycleSchedule> schedules,
                               const SimulationConfig& config, const PhysicalConstants& constants)
{
    config.validate();
    constants.validate();
    for (const CycleSchedule& s : schedules) {
        if (!pass.covers(s.tx_window.begin) || !pass.covers(s.rx_window.end))
            throw DataError("schedule for cycle " + std::to_string(s.cycle_index) +
                            " extends beyond the pass track");
    }

    std::vector<CycleResult> results(schedules.size());
    unsigned workers = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::max<std::size_t>(schedules.size(), 1)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i = next++; i < schedules.size(); i = next++) {
            if (failed)
                return;
            try {
                results[i] = simulate_cycle(pass, schedules[i], config, constants);
            } catch (...) {
                if (!failed.exchange(true))
                    failure = std::current_exception();
                return;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);

    // Cycles are disjoint in time, so concatenation in schedule order keeps
    // tags sorted as long as the schedules are.
    SimulationOutput out;
    std::size_t total = 0;
    for (const CycleResult& r : results)
        total += r.events.size();
    out.records.reserve(total);
    out.truth.reserve(total);
    for (const CycleResult& r : results) {
        out.accepted_pulses += r.accepted_pulses;
        for (const Event& e : r.events) {
            out.records.push_back(e.record);
            out.truth.push_back(e.truth);
        }
    }
    if (!std::is_sorted(out.records.begin(), out.records.end())) {
        std::vector<std::size_t> order(out.records.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return out.records[a] < out.records[b]; });
        SimulationOutput sorted;
        sorted.accepted_pulses = out.accepted_pulses;
        for (std::size_t i : order) {
            sorted.records.push_back(out.records[i]);
            sorted.truth.push_back(out.truth[i]);
        }
        return sorted;
    }
    return out;
}

} // namespace wdc
