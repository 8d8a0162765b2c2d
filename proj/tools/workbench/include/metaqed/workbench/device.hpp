#pragma once

// Device description files: JSON with the unit carried in every numeric field
// name (L_l_nH, C_Q_fF, length_mm, ...).

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <metaqed/coupling.hpp>
#include <metaqed/hamiltonian.hpp>
#include <metaqed/metamaterial.hpp>
#include <metaqed/purcell.hpp>

namespace metaqed::workbench {

struct CpwRhtl {
    double length_mm = 4.9;
    double z0_ohm = 50.0;
    double eps_eff = 7.56;
    double internal_q = 1e5;
    double tap_from_output_mm = 0.9;

    bool operator==(const CpwRhtl&) const = default;
};

struct MetamaterialSection {
    int n_l = 42;
    double l_l_nh = 0.7;
    double c_l_ff = 250.0;
    double l_r_nh = 0.03;
    double c_r_ff = 25.0;
    double c_cm_in_ff = 30.0;
    double c_cm_out_ff = 25.0;
    double cell_length_um = 100.0;
    double loss_tangent = 1e-5;
    double coupler_loss_tangent = 1e-5;
    double r0_ohm = 50.0;
    CpwRhtl rhtl;

    bool operator==(const MetamaterialSection&) const = default;
};

struct QubitSection {
    std::optional<double> f01_max_ghz;
    double c_q_ff = 48.0;
    double c_j_ff = 2.5;
    double c_qr_ff = 4.8;
    double c_qm_ff = 4.3;
    std::optional<double> e_c_ghz;  ///< derived from C_sigma when absent
    double e_j0_ghz = 37.0;
    double n_g = 0.0;
    double asymmetry = 0.0;
    int n_max = 10;

    bool operator==(const QubitSection&) const = default;
};

struct ReadoutSection {
    std::optional<double> f_r_ghz;  ///< measured fundamental, informational
    std::optional<double> q_total;
    std::optional<double> g_r_mhz;
    double c_cr_in_ff = 1.0;
    double c_cr_out_ff = 2.0;
    double l_a_mm = 6.88;
    double l_b_mm = 0.792;
    double z0_ohm = 50.0;
    double eps_eff = 7.56;
    double r0_ohm = 50.0;
    std::optional<double> alpha_per_m;

    bool operator==(const ReadoutSection&) const = default;
};

/// High-impedance redesign applied on top of the measured chip. The LHTL
/// keeps its infrared cutoff sqrt(L_l C_l) while sqrt(L_l / C_l) becomes Z_M.
struct HypotheticalSection {
    int n_l = 82;
    double z_m_ohm = 200.0;
    int n_r = 20;
    double l_rh_nh = 0.35;
    double c_rh_ff = 9.5;
    double c_qm_ff = 50.0;
    double c_q_ff = 50.0;
    int tap_from_output_cells = 4;
    std::optional<double> e_c_ghz;
    std::optional<double> e_j0_ghz;

    bool operator==(const HypotheticalSection&) const = default;
};

struct SweepDefaults {
    double fmin_ghz = 4.0;
    double fmax_ghz = 10.0;
    int points = 20001;
    int m_max = 1;  ///< Fock truncation per mode in rabi-map
    double t1_floor_us = 13.0;
    double t1_floor_ref_ghz = 4.5;
    double design_fmin_ghz = 7.85;
    double design_fmax_ghz = 8.45;
    int design_modes = 4;

    bool operator==(const SweepDefaults&) const = default;
};

struct DeviceDescription {
    std::string name;
    MetamaterialSection metamaterial;
    QubitSection qubit;
    ReadoutSection readout;
    std::optional<HypotheticalSection> hypothetical;
    SweepDefaults sweep;

    bool operator==(const DeviceDescription&) const = default;
};

/// Reads and validates; throws ValidationError listing every failure with
/// its field path.
DeviceDescription parse_device(const std::filesystem::path& path);
DeviceDescription parse_device_json(const nlohmann::json& j);
DeviceDescription parse_device_text(const std::string& text);

nlohmann::json serialize_device(const DeviceDescription& d);
std::string serialize_device_text(const DeviceDescription& d);

/// Model objects for the device, with the hypothetical section applied when
/// present.
struct DeviceModel {
    HybridResonatorSpec resonator;
    QubitCircuit qubit;
    EnvironmentSpec environment;
    double f01_max_ghz = 0.0;
};

DeviceModel build_model(const DeviceDescription& d);

/// e^2 / (2 C_sigma h) in GHz, C_sigma = C_Q + 2 C_J + C_QR + C_QM (fF).
double charging_energy_ghz(double c_sigma_ff);

}  // namespace metaqed::workbench
