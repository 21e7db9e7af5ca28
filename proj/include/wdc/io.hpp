#pragma once

// File formats. Time tags: CSV `tag,channel,cycle,bit`. Truth: JSON lines.
// Tracks: CSV with a header, reals written with 17 significant digits so
// they round-trip exactly. Readers throw DataError naming the source line.

#include "wdc/analysis.hpp"
#include "wdc/event_generator.hpp"
#include "wdc/orbit_kinematics.hpp"

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace wdc::io {

std::string format_real(double v);

void write_timetags(std::ostream& os, std::span<const TimeTagRecord> records);
std::vector<TimeTagRecord> read_timetags(std::istream& is, const std::string& source = "timetags");

void write_truth(std::ostream& os, std::span<const TruthEntry> truth);
std::vector<TruthEntry> read_truth(std::istream& is, const std::string& source = "truth");

/// Columns t,slant,v_r,beta,rtt,phi.
void write_track(std::ostream& os, const PassTrack& track);
PassTrack read_track(std::istream& is, const std::string& source = "track");

/// Columns t,delta_t_tx,delta_t_rx.
void write_slr(std::ostream& os, std::span<const SlrObservation> observations);
std::vector<SlrObservation> read_slr(std::istream& is, const std::string& source = "slr");

/// Columns j,phi_center,N+,N-,f+,f-,sigma.
void write_phase_bins(std::ostream& os, std::span<const PhaseBinStats> bins);
/// Columns bit,channel,delta_ns,count for the per-bit, per-channel histograms.
void write_histograms(std::ostream& os, const AnalysisReport& report);

nlohmann::json report_to_json(const AnalysisReport& report);

/// Open helpers that throw DataError with the path on failure.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

} // namespace wdc::io
