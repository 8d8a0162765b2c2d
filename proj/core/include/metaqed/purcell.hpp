#pragma once

// Qubit environment admittance and multimode Purcell-limited T1.

#include <functional>
#include <optional>
#include <vector>

#include "metaqed/metamaterial.hpp"
#include "metaqed/network.hpp"

namespace metaqed {

/// Readout resonator seen through C_QR: two line sections on either side of
/// the qubit coupling point, each terminated by its coupler and R_0.
struct ReadoutBranch {
    double c_qr = 4.8e-15;
    double length_a = 6.88e-3;
    double length_b = 0.792e-3;
    double z0 = 50.0;
    double c_in = 1e-15;   ///< C_cR^in, terminates section A
    double c_out = 2e-15;  ///< C_cR^out, terminates section B
    double r0 = 50.0;
    double eps_eff = 7.56;
    /// Attenuation in 1/m; defaults to 1e-5 pi / (2 l_A).
    std::optional<double> alpha;

    double attenuation() const;
    void validate() const;
};

/// Hybrid metamaterial seen through C_QM: an output-side RHTL section to the
/// output coupler in parallel with the LHTL-side RHTL section terminated by
/// the LHTL (which is itself terminated by the input coupler and R_0).
struct MetamaterialBranch {
    double c_qm = 4.3e-15;
    double length_output_side = 0.9e-3;
    double length_lhtl_side = 4.0e-3;
    double z0 = 50.0;
    double eps_eff = 7.56;
    double internal_q = 1e5;
    LhtlCell cell;
    int cells = 42;
    double c_in = 30e-15;
    double c_out = 25e-15;
    double r0 = 50.0;
    double coupler_loss_tangent = 0.0;

    void validate() const;
};

struct EnvironmentSpec {
    ReadoutBranch readout;
    MetamaterialBranch metamaterial;

    void validate() const;
};

/// 1/(i w C_QR) + (1/Z_RA + 1/Z_RB)^-1
Complex readout_impedance(const ReadoutBranch& r, double omega);
/// The same without the C_QR series term (impedance at the coupling point).
Complex readout_node_impedance(const ReadoutBranch& r, double omega);
/// 1/(i w C_QM) + (1/Z_MA + 1/Z_MB)^-1 with Z_MB terminated by Z_LHTL.
Complex metamaterial_impedance(const MetamaterialBranch& m, double omega);
/// Y = 1/Z_R + 1/Z_M
Complex environment_admittance(const EnvironmentSpec& env, double omega);

struct QubitCapacitances {
    double c_q = 48e-15;
    double c_j = 2.5e-15;
    double shunt() const { return c_q + 2.0 * c_j; }
};

/// A such that A / w equals `t1_seconds` at `f_ghz`.
double floor_constant_for(double t1_seconds, double f_ghz);
/// 13 us at 4.5 GHz.
double default_floor_constant();

struct T1Point {
    double omega = 0.0;
    double t1_total = 0.0;    ///< s
    double t1_purcell = 0.0;  ///< s, +inf where flagged
    double t1_floor = 0.0;    ///< s
    double re_y = 0.0;        ///< S
    bool flagged = false;     ///< Re Y <= 0
};

struct T1Curve {
    double floor_constant = 0.0;
    std::vector<T1Point> points;
};

T1Curve t1_curve(const EnvironmentSpec& env, const QubitCapacitances& caps,
                 double floor_constant, const FrequencyGrid& grid);
/// Same combination for an arbitrary environment admittance.
T1Curve t1_curve(const std::function<Complex(double)>& admittance, double shunt_capacitance,
                 double floor_constant, const FrequencyGrid& grid);

}  // namespace metaqed
