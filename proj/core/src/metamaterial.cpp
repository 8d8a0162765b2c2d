#include "metaqed/metamaterial.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "metaqed/errors.hpp"

namespace metaqed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const Complex kI{0.0, 1.0};

// Im(k) >= 0 so that exp(i k N dx) decays toward increasing cell index.
Complex decaying_branch(Complex k) { return k.imag() < 0.0 ? -k : k; }

Complex bloch_impedance(Complex z_series, Complex k_dx) {
    const Complex s = std::sin(0.5 * k_dx);
    if (std::abs(s) < kDenominatorGuard)
        throw NumericError("LHTL Bloch impedance: sin(k dx / 2) underflow");
    return z_series / (2.0 * kI * s);
}

}  // namespace

void LhtlCell::validate() const {
    if (!(series_capacitance > 0.0)) throw DomainError("LhtlCell: C_l must be > 0");
    if (!(shunt_inductance > 0.0)) throw DomainError("LhtlCell: L_l must be > 0");
    if (parasitic_inductance < 0.0) throw DomainError("LhtlCell: L_r must be >= 0");
    if (parasitic_capacitance < 0.0) throw DomainError("LhtlCell: C_r must be >= 0");
    if (!(cell_length > 0.0)) throw DomainError("LhtlCell: cell length must be > 0");
    if (loss_tangent < 0.0) throw DomainError("LhtlCell: loss tangent must be >= 0");
}

Complex LhtlCell::series_impedance(double omega) const {
    return kI * omega * parasitic_inductance +
           capacitor_impedance(series_capacitance, omega, loss_tangent);
}

Complex LhtlCell::shunt_admittance(double omega) const {
    return capacitor_admittance(parasitic_capacitance, omega, loss_tangent) +
           1.0 / (kI * omega * shunt_inductance);
}

double ideal_infrared_cutoff(double shunt_inductance, double series_capacitance) {
    return 1.0 / (2.0 * std::sqrt(shunt_inductance * series_capacitance));
}

BandEdges band_edges(const LhtlCell& cell) {
    cell.validate();
    const double a = cell.parasitic_inductance * cell.series_capacitance;
    const double b = cell.shunt_inductance * cell.parasitic_capacitance;
    const double c = cell.shunt_inductance * cell.series_capacitance;
    // Edges of the lossless band where cos(k dx) = -1, as a quadratic in w^2:
    //   a b u^2 - (a + b + 4c) u + 1 = 0.
    const double p = a + b + 4.0 * c;
    const double disc = p * p - 4.0 * a * b;
    BandEdges e;
    e.infrared = std::sqrt(2.0 / (p + std::sqrt(disc)));
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    e.lh_top = hi > 0.0 ? 1.0 / std::sqrt(hi) : kInf;
    e.rh_bottom = lo > 0.0 ? 1.0 / std::sqrt(lo) : kInf;
    return e;
}

DispersionPoint dispersion_at(const LhtlCell& cell, double omega) {
    if (!(omega > 0.0)) throw DomainError("dispersion: omega must be > 0");
    const double x = 1.0 - 0.5 *
                               (omega * cell.parasitic_inductance -
                                1.0 / (omega * cell.series_capacitance)) *
                               (omega * cell.parasitic_capacitance -
                                1.0 / (omega * cell.shunt_inductance));
    DispersionPoint p;
    p.omega = omega;
    if (x >= -1.0 && x <= 1.0) {
        p.k_dx = std::acos(x);
        p.passband = true;
    } else if (x > 1.0) {
        p.k_dx = Complex(0.0, std::acosh(x));
    } else {
        p.k_dx = Complex(kPi, std::acosh(-x));
    }
    const Complex z_series = kI * omega * cell.parasitic_inductance +
                             1.0 / (kI * omega * cell.series_capacitance);
    p.z0l = bloch_impedance(z_series, p.k_dx);
    return p;
}

DispersionResult dispersion(const LhtlCell& cell, const FrequencyGrid& grid) {
    cell.validate();
    DispersionResult r;
    r.points.reserve(grid.size());
    for (double w : grid) r.points.push_back(dispersion_at(cell, w));
    return r;
}

Complex lhtl_input_impedance(const LhtlCell& cell, int cells, Complex z_termination,
                             double omega) {
    if (cells < 1) throw DomainError("lhtl_input_impedance: need at least one cell");
    if (!(omega > 0.0)) throw DomainError("lhtl_input_impedance: omega must be > 0");
    const Complex z = cell.series_impedance(omega);
    const Complex y = cell.shunt_admittance(omega);
    const Complex k = decaying_branch(std::acos(1.0 + 0.5 * z * y));
    const Complex z0l = bloch_impedance(z, k);

    const Complex half = std::exp(0.5 * kI * k);
    const Complex gamma_den = z_termination * half + z0l;
    if (std::abs(gamma_den) < kDenominatorGuard)
        throw NumericError("lhtl_input_impedance: reflection coefficient pole");
    const Complex gamma = (z_termination / half - z0l) / gamma_den;

    // Numerator and denominator of the Bloch expression multiplied by
    // exp(i k N dx); with Im(k) >= 0 every exponential stays bounded.
    const double n = static_cast<double>(cells);
    const Complex num = std::exp(2.0 * kI * k * n) + gamma;
    const Complex den = std::exp(kI * k * (2.0 * n - 0.5)) - gamma * half;
    if (std::abs(den) < kDenominatorGuard)
        throw NumericError("lhtl_input_impedance: vanishing denominator");
    const Complex out = z0l * num / den;
    if (!std::isfinite(out.real()) || !std::isfinite(out.imag()))
        throw NumericError("lhtl_input_impedance: non-finite result");
    return out;
}

std::vector<Complex> lhtl_input_impedance(const LhtlCell& cell, int cells,
                                          const std::function<Complex(double)>& z_termination,
                                          const FrequencyGrid& grid) {
    cell.validate();
    std::vector<Complex> out;
    out.reserve(grid.size());
    for (double w : grid) out.push_back(lhtl_input_impedance(cell, cells, z_termination(w), w));
    return out;
}

std::shared_ptr<const Network> lhtl_ladder(const LhtlCell& cell) {
    cell.validate();
    auto net = std::make_shared<Network>();
    const LhtlCell c = cell;
    net->add(LumpedElement{ElementKind::ShuntAdmittance,
                           [c](double w) { return c.shunt_admittance(w); }},
             "L_l||C_r");
    net->add(LumpedElement{ElementKind::SeriesImpedance,
                           [c](double w) { return c.series_impedance(w); }},
             "C_l+L_r");
    return net;
}

void HybridResonatorSpec::validate() const {
    std::vector<std::string> bad;
    if (lhtl_cells < 1) bad.emplace_back("lhtl_cells must be >= 1");
    try {
        cell.validate();
    } catch (const DomainError& e) {
        bad.emplace_back(e.what());
    }
    if (!(input_coupling > 0.0)) bad.emplace_back("input coupling capacitance must be > 0");
    if (!(output_coupling > 0.0)) bad.emplace_back("output coupling capacitance must be > 0");
    if (!(r0 > 0.0)) bad.emplace_back("r0 must be > 0");
    if (const auto* d = std::get_if<DistributedRhtl>(&rhtl)) {
        if (!(d->line.length > 0.0)) bad.emplace_back("RHTL length must be > 0");
        if (!(tap_from_output >= 0.0 && tap_from_output <= d->line.length))
            bad.emplace_back("tap position outside RHTL extent");
    } else {
        const auto& l = std::get<LumpedRhtl>(rhtl);
        if (l.cells < 1) bad.emplace_back("lumped RHTL needs >= 1 cell");
        if (!(l.series_inductance > 0.0) || !(l.shunt_capacitance > 0.0))
            bad.emplace_back("lumped RHTL L and C must be > 0");
        if (tap_from_output < 0.0 || tap_from_output > l.cells ||
            tap_from_output != std::floor(tap_from_output))
            bad.emplace_back("lumped RHTL tap must be a whole cell index within the line");
    }
    if (!bad.empty()) {
        std::ostringstream os;
        os << "HybridResonatorSpec invalid:";
        for (const auto& s : bad) os << ' ' << s << ';';
        throw DomainError(os.str());
    }
}

Network build_hybrid_network(const HybridResonatorSpec& spec) {
    spec.validate();
    Network net;
    net.add(LumpedElement::series_capacitor(spec.input_coupling, spec.coupler_loss_tangent),
            "C_cM_in");
    net.add(lhtl_ladder(spec.cell), spec.lhtl_cells, "LHTL");
    if (const auto* d = std::get_if<DistributedRhtl>(&spec.rhtl)) {
        TLineSegment far = d->line;
        far.length = d->line.length - spec.tap_from_output;
        TLineSegment near = d->line;
        near.length = spec.tap_from_output;
        net.add(far, "RHTL");
        net.mark_probe();
        net.add(near, "RHTL");
    } else {
        const auto& l = std::get<LumpedRhtl>(spec.rhtl);
        auto cell = std::make_shared<Network>();
        cell->add(LumpedElement::series_inductor(l.series_inductance), "L_RH");
        cell->add(LumpedElement::shunt_capacitor(l.shunt_capacitance, l.loss_tangent), "C_RH");
        const int near = static_cast<int>(spec.tap_from_output);
        net.add(cell, l.cells - near, "RHTL");
        net.mark_probe();
        net.add(cell, near, "RHTL");
    }
    net.add(LumpedElement::series_capacitor(spec.output_coupling, spec.coupler_loss_tangent),
            "C_cM_out");
    return net;
}

Network build_lhtl_resonator(const LhtlCell& cell, int cells, double input_coupling,
                             double output_coupling, double coupler_loss_tangent) {
    if (cells < 1) throw DomainError("build_lhtl_resonator: need at least one cell");
    Network net;
    net.add(LumpedElement::series_capacitor(input_coupling, coupler_loss_tangent), "C_cM_in");
    net.add(lhtl_ladder(cell), cells, "LHTL");
    net.add(LumpedElement::series_capacitor(output_coupling, coupler_loss_tangent), "C_cM_out");
    return net;
}

SpectrumTrace spectrum(const HybridResonatorSpec& spec, const FrequencyGrid& grid) {
    return network_spectrum(build_hybrid_network(spec), grid, spec.r0);
}

SpectrumTrace spectrum(const HybridResonatorSpec& spec, const FrequencyGrid& grid,
                       const LumpedElement& tap_load) {
    return network_spectrum(build_hybrid_network(spec), grid, spec.r0, tap_load);
}

}  // namespace metaqed
