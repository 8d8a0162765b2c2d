#pragma once

// Left-handed transmission-line (LHTL) unit cell, its analytic dispersion and
// input impedance, and the hybrid LHTL/RHTL resonator network.

#include <functional>
#include <variant>
#include <vector>

#include "metaqed/network.hpp"

namespace metaqed {

/// One LHTL unit cell: series C_l (with stray series L_r) and shunt L_l (with
/// stray shunt C_r).
struct LhtlCell {
    double series_capacitance = 0.0;     ///< C_l, F
    double shunt_inductance = 0.0;       ///< L_l, H
    double parasitic_inductance = 0.0;   ///< L_r, H
    double parasitic_capacitance = 0.0;  ///< C_r, F
    double cell_length = 1e-4;           ///< dx, m (only k*dx enters the models)
    double loss_tangent = 0.0;           ///< applied to C_l and C_r

    void validate() const;

    /// i w L_r + 1/(i w C_l)
    Complex series_impedance(double omega) const;
    /// i w C_r + 1/(i w L_l)
    Complex shunt_admittance(double omega) const;
};

/// w_IR = 1/(2 sqrt(L_l C_l)) of the ideal (parasitic-free) cell.
double ideal_infrared_cutoff(double shunt_inductance, double series_capacitance);

struct BandEdges {
    double infrared = 0.0;   ///< lower edge of the left-handed band, rad/s
    double lh_top = 0.0;     ///< upper edge of the left-handed band (inf for an ideal cell)
    double rh_bottom = 0.0;  ///< lower edge of the right-handed band (inf for an ideal cell)
};

/// Band edges of the lossless cell.
BandEdges band_edges(const LhtlCell& cell);

struct DispersionPoint {
    double omega = 0.0;
    Complex k_dx;       ///< Bloch phase per cell, radians
    bool passband = false;
    Complex z0l;        ///< (i w L_r + 1/(i w C_l)) / (2 i sin(k dx / 2))
};

struct DispersionResult {
    std::vector<DispersionPoint> points;
};

/// Lossless dispersion relation
///   k dx = acos[1 - 1/2 (w L_r - 1/(w C_l)) (w C_r - 1/(w L_l))]
/// on the principal branch, Re(k dx) in [0, pi]. Outside the passband the
/// imaginary part is >= 0 so exp(i k N dx) decays with N.
DispersionPoint dispersion_at(const LhtlCell& cell, double omega);
DispersionResult dispersion(const LhtlCell& cell, const FrequencyGrid& grid);

/// Impedance looking into an N-cell LHTL whose far end is terminated in
/// z_termination, using the closed-form Bloch-wave expression with reflection
/// coefficient
///   Gamma = (Zs e^{-ik dx/2} - Z0l) / (Zs e^{ik dx/2} + Z0l).
/// Seen from the measuring end each cell is a series branch followed by a
/// shunt branch. The cell's loss tangent is included through complex Z and Y.
Complex lhtl_input_impedance(const LhtlCell& cell, int cells, Complex z_termination,
                             double omega);
std::vector<Complex> lhtl_input_impedance(const LhtlCell& cell, int cells,
                                          const std::function<Complex(double)>& z_termination,
                                          const FrequencyGrid& grid);

/// Explicit N-cell ladder, input side first: shunt (L_l || C_r), then series
/// (C_l + L_r), per cell.
std::shared_ptr<const Network> lhtl_ladder(const LhtlCell& cell);

struct DistributedRhtl {
    TLineSegment line;  ///< full RHTL length
};

struct LumpedRhtl {
    int cells = 0;
    double series_inductance = 0.0;  ///< H per cell
    double shunt_capacitance = 0.0;  ///< F per cell
    double loss_tangent = 0.0;
};

struct HybridResonatorSpec {
    int lhtl_cells = 42;
    LhtlCell cell;
    double input_coupling = 0.0;   ///< C_cM^in, F
    double output_coupling = 0.0;  ///< C_cM^out, F
    std::variant<DistributedRhtl, LumpedRhtl> rhtl;
    /// Qubit tap measured from the output coupler: metres for a distributed
    /// RHTL, whole cells for a lumped one.
    double tap_from_output = 0.9e-3;
    double r0 = 50.0;
    double coupler_loss_tangent = 0.0;

    void validate() const;
};

/// input coupler -> N LHTL cells -> RHTL (probe node at the tap) -> output coupler.
Network build_hybrid_network(const HybridResonatorSpec& spec);

/// LHTL-only resonator: input coupler -> N cells -> output coupler.
Network build_lhtl_resonator(const LhtlCell& cell, int cells, double input_coupling,
                             double output_coupling, double coupler_loss_tangent = 0.0);

/// S21 between the metamaterial ports.
SpectrumTrace spectrum(const HybridResonatorSpec& spec, const FrequencyGrid& grid);
/// S21 with a shunt load (qubit branch) attached at the tap.
SpectrumTrace spectrum(const HybridResonatorSpec& spec, const FrequencyGrid& grid,
                       const LumpedElement& tap_load);

}  // namespace metaqed
