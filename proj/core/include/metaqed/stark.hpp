#pragma once

// Dispersive ac Stark shift of the qubit 0-1 line from a driven mode.
//
// Sign convention: sigma_z(ground) = -1, so a positive chi raises the 0-1
// transition frequency.

#include <vector>

namespace metaqed {

enum class ChiFormula {
    Paper,     ///< g^2 eta / (delta eta - delta^2)
    Standard,  ///< g^2 eta / (delta (delta + eta))
};

/// All rates in rad/s.
struct StarkScenario {
    double omega_q = 0.0;  ///< qubit 0-1 frequency
    double eta = 0.0;      ///< anharmonicity f12 - f01 (negative for a transmon)
    double omega_mode = 0.0;
    double kappa = 0.0;
    double g = 0.0;
    double omega_drive = 0.0;
    double drive = 0.0;    ///< effective drive amplitude Omega

    double detuning() const { return omega_q - omega_mode; }
};

/// Per-photon shift. Throws SingularityError within 1e-6 |eta| of a pole.
double chi(const StarkScenario& s, ChiFormula formula = ChiFormula::Paper);
/// Omega^2 / ((omega_mode - omega_drive)^2 + kappa^2 / 4)
double mean_photons(const StarkScenario& s);
/// chi * nbar
double stark_shift(const StarkScenario& s, ChiFormula formula = ChiFormula::Paper);

/// Drive power P maps to Omega^2 = scale * P.
struct PowerCalibration {
    double scale = 1.0;
    double omega_squared(double power) const { return scale * power; }
};

/// Least-squares scale through the origin from (power, observed shift) pairs
/// at a fixed detuning.
PowerCalibration calibrate_power(const StarkScenario& s, const std::vector<double>& power,
                                 const std::vector<double>& shift,
                                 ChiFormula formula = ChiFormula::Paper);

enum class SweepAxis { DrivePower, DriveFrequency };

struct StarkMapColumn {
    double sweep_value = 0.0;  ///< power (calibration units) or drive frequency (rad/s)
    double qubit_line = 0.0;   ///< shifted 0-1 frequency, rad/s
    double nbar = 0.0;
    double chi = 0.0;          ///< rad/s per photon
};

struct StarkMap {
    SweepAxis axis = SweepAxis::DrivePower;
    std::vector<StarkMapColumn> columns;
};

/// Power sweeps use `base.omega_drive`; frequency sweeps hold Omega^2 at
/// calibration.omega_squared(power).
StarkMap stark_map(const StarkScenario& base, SweepAxis axis, const std::vector<double>& values,
                   const PowerCalibration& calibration = {}, double power = 1.0,
                   ChiFormula formula = ChiFormula::Paper);

}  // namespace metaqed
