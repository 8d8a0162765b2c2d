#include "metaqed/stark.hpp"

#include <cmath>
#include <sstream>

#include "metaqed/errors.hpp"

namespace metaqed {

namespace {

constexpr double kPoleGuard = 1e-6;

void check_scenario(const StarkScenario& s) {
    if (!(s.kappa > 0.0)) throw DomainError("stark: kappa must be > 0");
    if (s.eta == 0.0 || !std::isfinite(s.eta)) throw DomainError("stark: eta must be nonzero");
}

}  // namespace

double chi(const StarkScenario& s, ChiFormula formula) {
    if (s.eta == 0.0 || !std::isfinite(s.eta)) throw DomainError("chi: eta must be nonzero");
    const double d = s.detuning();
    const double guard = kPoleGuard * std::abs(s.eta);
    if (std::abs(d) < guard) throw SingularityError("chi: qubit resonant with mode", "delta = 0");
    if (formula == ChiFormula::Paper) {
        if (std::abs(d - s.eta) < guard)
            throw SingularityError("chi: detuning equals anharmonicity", "delta = eta");
        return s.g * s.g * s.eta / (d * s.eta - d * d);
    }
    if (std::abs(d + s.eta) < guard)
        throw SingularityError("chi: detuning equals minus anharmonicity", "delta = -eta");
    return s.g * s.g * s.eta / (d * (d + s.eta));
}

double mean_photons(const StarkScenario& s) {
    if (!(s.kappa > 0.0)) throw DomainError("mean_photons: kappa must be > 0");
    const double d = s.omega_mode - s.omega_drive;
    return s.drive * s.drive / (d * d + 0.25 * s.kappa * s.kappa);
}

double stark_shift(const StarkScenario& s, ChiFormula formula) {
    check_scenario(s);
    return chi(s, formula) * mean_photons(s);
}

PowerCalibration calibrate_power(const StarkScenario& s, const std::vector<double>& power,
                                 const std::vector<double>& shift, ChiFormula formula) {
    if (power.size() != shift.size() || power.empty())
        throw DomainError("calibrate_power: need matching, nonempty power/shift samples");
    check_scenario(s);
    StarkScenario unit = s;
    unit.drive = 1.0;
    const double per_omega2 = stark_shift(unit, formula);  // shift per unit Omega^2
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < power.size(); ++i) {
        num += power[i] * shift[i];
        den += power[i] * power[i];
    }
    if (den == 0.0 || per_omega2 == 0.0)
        throw FitError("calibrate_power: degenerate calibration data");
    return {num / den / per_omega2};
}

StarkMap stark_map(const StarkScenario& base, SweepAxis axis, const std::vector<double>& values,
                   const PowerCalibration& calibration, double power, ChiFormula formula) {
    check_scenario(base);
    StarkMap map;
    map.axis = axis;
    const double c = chi(base, formula);
    for (double v : values) {
        StarkScenario s = base;
        if (axis == SweepAxis::DrivePower) {
            if (v < 0.0) throw DomainError("stark_map: negative drive power");
            s.drive = std::sqrt(calibration.omega_squared(v));
        } else {
            s.omega_drive = v;
            s.drive = std::sqrt(calibration.omega_squared(power));
        }
        StarkMapColumn col;
        col.sweep_value = v;
        col.nbar = mean_photons(s);
        col.chi = c;
        col.qubit_line = s.omega_q + c * col.nbar;
        map.columns.push_back(col);
    }
    return map;
}

}  // namespace metaqed
