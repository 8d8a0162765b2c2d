#pragma once

// Sweep jobs behind the command-line subcommands. Every job writes CSV files
// whose first line is a metadata comment carrying the input hash, the seed
// and the tool version.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "metaqed/workbench/device.hpp"

namespace metaqed::workbench {

inline constexpr const char* kVersion = "0.3.0";

enum class Subcommand { Spectrum, Dispersion, Modes, RabiMap, FitG, T1, Stark, DesignScan };

const char* to_string(Subcommand s);
std::optional<Subcommand> subcommand_from_string(const std::string& s);

struct StarkOptions {
    double qubit_ghz = 6.275;
    double mode_ghz = 6.588;
    bool frequency_axis = false;
    bool standard_formula = false;
    double max_photons = 10.0;  ///< on-resonance nbar at the largest power
};

struct JobManifest {
    Subcommand subcommand = Subcommand::Spectrum;
    std::filesystem::path device;
    std::filesystem::path out_dir = ".";
    std::optional<double> fmin_ghz;
    std::optional<double> fmax_ghz;
    std::optional<int> points;
    std::uint64_t seed = 0;
    StarkOptions stark;
    /// Cache directory; empty disables caching.
    std::filesystem::path cache_dir;
};

struct JobResult {
    std::vector<std::filesystem::path> files;
    std::string input_hash;
    bool from_cache = false;
};

/// Runs the job and writes its CSV files into manifest.out_dir.
JobResult run_job(const JobManifest& manifest);

/// Same, with an already parsed description (the hash covers its
/// canonical serialization).
JobResult run_job(const JobManifest& manifest, const DeviceDescription& device);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& data);

}  // namespace metaqed::workbench
