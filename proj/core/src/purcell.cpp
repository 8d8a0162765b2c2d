#include "metaqed/purcell.hpp"

#include <cmath>
#include <limits>

#include "metaqed/errors.hpp"

namespace metaqed {

namespace {

const Complex kI{0.0, 1.0};

Complex parallel(Complex a, Complex b) {
    const Complex den = a + b;
    if (std::abs(den) < kDenominatorGuard) throw NumericError("parallel impedance: a + b = 0");
    return a * b / den;
}

Complex terminated_line(const TLineSegment& seg, Complex z_load, double omega) {
    return one_port_input_impedance(tline_abcd(seg, omega), z_load);
}

}  // namespace

double ReadoutBranch::attenuation() const {
    return alpha ? *alpha : 1e-5 * kPi / (2.0 * length_a);
}

void ReadoutBranch::validate() const {
    if (!(c_qr > 0.0 && c_in > 0.0 && c_out > 0.0))
        throw DomainError("readout branch: capacitances must be > 0");
    if (!(length_a > 0.0 && length_b > 0.0))
        throw DomainError("readout branch: lengths must be > 0");
    if (!(z0 > 0.0 && r0 > 0.0 && eps_eff > 0.0))
        throw DomainError("readout branch: Z0, R0 and eps_eff must be > 0");
    if (attenuation() < 0.0) throw DomainError("readout branch: attenuation must be >= 0");
}

void MetamaterialBranch::validate() const {
    cell.validate();
    if (!(c_qm > 0.0 && c_in > 0.0 && c_out > 0.0))
        throw DomainError("metamaterial branch: capacitances must be > 0");
    if (!(length_output_side > 0.0 && length_lhtl_side > 0.0))
        throw DomainError("metamaterial branch: lengths must be > 0");
    if (cells < 1) throw DomainError("metamaterial branch: need at least one LHTL cell");
    if (!(z0 > 0.0 && r0 > 0.0 && eps_eff > 0.0 && internal_q > 0.0))
        throw DomainError("metamaterial branch: Z0, R0, eps_eff, Q must be > 0");
}

void EnvironmentSpec::validate() const {
    readout.validate();
    metamaterial.validate();
}

Complex readout_node_impedance(const ReadoutBranch& r, double omega) {
    const TLineSegment a{r.z0, r.length_a, r.eps_eff, FixedAttenuation{r.attenuation()}};
    const TLineSegment b{r.z0, r.length_b, r.eps_eff, FixedAttenuation{r.attenuation()}};
    const Complex za = terminated_line(a, capacitor_impedance(r.c_in, omega) + r.r0, omega);
    const Complex zb = terminated_line(b, capacitor_impedance(r.c_out, omega) + r.r0, omega);
    return parallel(za, zb);
}

Complex readout_impedance(const ReadoutBranch& r, double omega) {
    return capacitor_impedance(r.c_qr, omega) + readout_node_impedance(r, omega);
}

Complex metamaterial_impedance(const MetamaterialBranch& m, double omega) {
    const TLineSegment out_side{m.z0, m.length_output_side, m.eps_eff, InternalQ{m.internal_q}};
    const TLineSegment lhtl_side{m.z0, m.length_lhtl_side, m.eps_eff, InternalQ{m.internal_q}};
    const Complex z_ma = terminated_line(
        out_side, capacitor_impedance(m.c_out, omega, m.coupler_loss_tangent) + m.r0, omega);
    const Complex z_s = capacitor_impedance(m.c_in, omega, m.coupler_loss_tangent) + m.r0;
    const Complex z_lhtl = lhtl_input_impedance(m.cell, m.cells, z_s, omega);
    const Complex z_mb = terminated_line(lhtl_side, z_lhtl, omega);
    return capacitor_impedance(m.c_qm, omega) + parallel(z_ma, z_mb);
}

Complex environment_admittance(const EnvironmentSpec& env, double omega) {
    const Complex zr = readout_impedance(env.readout, omega);
    const Complex zm = metamaterial_impedance(env.metamaterial, omega);
    if (std::abs(zr) < kDenominatorGuard || std::abs(zm) < kDenominatorGuard)
        throw NumericError("environment_admittance: vanishing branch impedance");
    return 1.0 / zr + 1.0 / zm;
}

double floor_constant_for(double t1_seconds, double f_ghz) {
    if (!(t1_seconds > 0.0) || !(f_ghz > 0.0))
        throw DomainError("floor_constant_for: T1 and frequency must be > 0");
    return t1_seconds * ghz_to_omega(f_ghz);
}

double default_floor_constant() { return floor_constant_for(13e-6, 4.5); }

T1Curve t1_curve(const std::function<Complex(double)>& admittance, double shunt_capacitance,
                 double floor_constant, const FrequencyGrid& grid) {
    if (!(shunt_capacitance > 0.0)) throw DomainError("t1_curve: qubit capacitance must be > 0");
    if (!(floor_constant > 0.0)) throw DomainError("t1_curve: floor constant A must be > 0");
    T1Curve c;
    c.floor_constant = floor_constant;
    c.points.reserve(grid.size());
    for (double w : grid) {
        T1Point p;
        p.omega = w;
        p.re_y = admittance(w).real();
        p.t1_floor = floor_constant / w;
        if (p.re_y > 0.0) {
            p.t1_purcell = shunt_capacitance / p.re_y;
            p.t1_total = 1.0 / (1.0 / p.t1_purcell + 1.0 / p.t1_floor);
        } else {
            p.flagged = true;
            p.t1_purcell = std::numeric_limits<double>::infinity();
            p.t1_total = p.t1_floor;
        }
        c.points.push_back(p);
    }
    return c;
}

T1Curve t1_curve(const EnvironmentSpec& env, const QubitCapacitances& caps,
                 double floor_constant, const FrequencyGrid& grid) {
    env.validate();
    if (!(caps.c_q > 0.0) || !(caps.c_j > 0.0))
        throw DomainError("t1_curve: C_Q and C_J must be > 0");
    return t1_curve([&env](double w) { return environment_admittance(env, w); }, caps.shunt(),
                    floor_constant, grid);
}

}  // namespace metaqed
