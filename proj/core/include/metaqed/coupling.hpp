#pragma once

// Qubit-mode coupling strengths: quantum fits of vacuum-Rabi branches and
// semiclassical extraction from simulated transmission with the qubit
// modelled as a tunable LC oscillator.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "metaqed/hamiltonian.hpp"
#include "metaqed/metamaterial.hpp"
#include "metaqed/modes.hpp"
#include "metaqed/purcell.hpp"

namespace metaqed {

/// Bare 0-1 frequency of the transmon alone, GHz.
double bare_f01(const TransmonSpec& t, double phi);
/// Reduced flux in [0, 1/2] where bare f01 equals f_ghz.
double flux_for_f01(const TransmonSpec& t, double f_ghz);
/// Josephson energy (GHz) giving bare f01 = f_ghz at the spec's E_C.
double ej_for_f01(const TransmonSpec& t, double f_ghz);
/// |<0|n|1>| of the transmon tuned to f01 = f_ghz.
double n01_at_frequency(const TransmonSpec& t, double f_ghz);

struct CrossingPoint {
    double phi = 0.0;
    double f_ghz = 0.0;
};

struct EjFit {
    double ej0_ghz = 0.0;
    double rms_ghz = 0.0;
};

/// E_J0 minimizing sum (f01(phi_k; E_J0) - f_k)^2 with E_C etc. taken from
/// `base`. One point is solved exactly; several points at one flux are a
/// FitError.
EjFit fit_global_ej0(const std::vector<CrossingPoint>& points, const TransmonSpec& base);

struct SplittingObservation {
    std::size_t mode_index = 0;
    std::vector<double> phi;
    std::vector<double> lower_ghz;
    std::vector<double> upper_ghz;

    void validate() const;
};

/// Forward model: the two dressed levels (relative to the ground state) with
/// the largest weight on span{|q1; 0>, |q0; 1_mode>}, ascending.
SplittingObservation synthesize_splitting(const CoupledSystemSpec& spec, std::size_t mode,
                                          const std::vector<double>& phis);

enum class CouplingMethod { QuantumFit, Semiclassical, CoupledModeFit };
const char* to_string(CouplingMethod m);

/// Both conventions are kept: `g_prefactor` multiplies n (a + a^dag) in the
/// Hamiltonian, `g_halfsplit` = g_prefactor |<0|n|1>| is half the minimum
/// splitting of an isolated crossing.
struct CouplingEstimate {
    std::size_t mode_index = 0;
    double omega = 0.0;        ///< mode frequency, rad/s
    double g_prefactor = 0.0;  ///< rad/s
    double g_halfsplit = 0.0;  ///< rad/s
    CouplingMethod method = CouplingMethod::QuantumFit;
    double residual = 0.0;     ///< GHz (fits) or rad/s resolution (semiclassical)
};

struct CouplingSet {
    std::vector<CouplingEstimate> modes;
    double ej0_ghz = 0.0;
};

struct QuantumFitContext {
    TransmonSpec transmon;
    double mode_f_ghz = 0.0;
    int m_max = 3;
};

/// Single-mode Hamiltonian fit of g (only free parameter) to both branches.
CouplingEstimate fit_g_quantum(const SplittingObservation& obs, const QuantumFitContext& ctx);
/// Sum of squared branch residuals (GHz^2) at prefactor g (GHz).
double quantum_fit_objective(const SplittingObservation& obs, const QuantumFitContext& ctx,
                             double g_ghz);

/// Lumped qubit model used for the semiclassical extraction.
struct QubitCircuit {
    QubitCapacitances caps;
    double c_qm = 4.3e-15;
    std::optional<ReadoutBranch> readout;  ///< attached through its own C_QR
    TransmonSpec transmon;                 ///< only for the prefactor conversion

    double total_capacitance() const;
};

/// L = (Phi_0 / 2 pi)^2 / E_J with E_J in GHz.
double inductance_for_ej(double ej_ghz);
/// Nominal qubit frequency 1/sqrt(L C_total).
double lc_frequency(const QubitCircuit& q, double inductance);
double inductance_for_frequency(const QubitCircuit& q, double omega);

/// Shunt admittance presented at the tap: C_QM in series with the qubit node
/// (shunt capacitance, optional inductance, readout branch). Without an
/// inductance this is the loading that defines the bare modes.
LumpedElement qubit_tap_load(const QubitCircuit& q, std::optional<double> inductance);

/// Lorentzian catalog of the resonator with the bare qubit load at the tap.
ModeCatalog bare_mode_catalog(const HybridResonatorSpec& spec, const QubitCircuit& q,
                              const FrequencyGrid& coarse, const CatalogOptions& options = {});

struct SemiclassicalOptions {
    int coarse_points = 17;
    std::size_t spectrum_points = 801;
    /// Sweep of the nominal qubit frequency, as a fraction of the smaller
    /// half-spacing to the neighbouring modes.
    double sweep_fraction = 0.6;
    int max_recentre = 6;
    double peak_prominence_db = 0.5;
};

/// Sweeps the qubit inductance through mode `mode_index` of `bare` and
/// returns half the minimum separation of the two branches bracketing it.
/// Throws ResolutionError when no sweep point resolves both branches.
CouplingEstimate extract_g_semiclassical(const HybridResonatorSpec& spec, const QubitCircuit& q,
                                         const ModeCatalog& bare, std::size_t mode_index,
                                         const SemiclassicalOptions& options = {});

/// g_i / (w_{i+1} - w_i) using the half-splitting g; empty for the last mode.
std::vector<std::optional<double>> superstrong_ratio(const CouplingSet& couplings,
                                                     const ModeCatalog& catalog);

struct DesignScanOptions {
    double f_lo_ghz = 7.85;
    double f_hi_ghz = 8.45;
    std::size_t modes = 4;
    /// Bare modes on each side of the window kept in the model at fixed
    /// frequency with a free coupling.
    std::size_t guard_modes = 2;
    int sweep_points = 41;
    double sweep_margin_ghz = 0.35;
    std::size_t spectrum_points = 1501;
    double peak_prominence_db = 1.0;
};

struct DesignScanResult {
    ModeCatalog bare;
    std::vector<std::size_t> window_modes;  ///< indices into `bare`
    CouplingSet couplings;
    std::vector<double> fitted_mode_ghz;
    double qubit_scale = 1.0;               ///< qubit frequency / nominal LC frequency
    std::vector<double> sweep_ghz;          ///< nominal qubit frequency per column
    std::vector<std::vector<double>> branches_ghz;
    std::vector<std::optional<double>> ratios;
    double residual_ghz = 0.0;
};

/// Sweeps the qubit across the modes in [f_lo, f_hi] and fits a coupled-mode
/// model (qubit plus the window modes, single-excitation sector) to every
/// resolved transmission peak.
DesignScanResult design_scan(const HybridResonatorSpec& spec, const QubitCircuit& q,
                             const ModeCatalog& bare, const DesignScanOptions& options = {});

}  // namespace metaqed
