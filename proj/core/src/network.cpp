#include "metaqed/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "metaqed/errors.hpp"

namespace metaqed {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_positive_omega(double omega, const char* where) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        std::ostringstream os;
        os << where << ": angular frequency must be finite and > 0 (got " << omega << ")";
        throw DomainError(os.str());
    }
}

}  // namespace

FrequencyGrid::FrequencyGrid(std::vector<double> omega) : omega_(std::move(omega)) {
    if (omega_.empty()) throw DomainError("FrequencyGrid: empty grid");
    for (std::size_t i = 0; i < omega_.size(); ++i) {
        if (!(omega_[i] > 0.0) || !std::isfinite(omega_[i]))
            throw DomainError("FrequencyGrid: points must be finite and > 0");
        if (i > 0 && !(omega_[i] > omega_[i - 1]))
            throw DomainError("FrequencyGrid: points must be strictly increasing");
    }
}

FrequencyGrid FrequencyGrid::linear_ghz(double f_min_ghz, double f_max_ghz, std::size_t n) {
    if (n == 0) throw DomainError("FrequencyGrid: need at least one point");
    if (n == 1) return FrequencyGrid({ghz_to_omega(f_min_ghz)});
    if (!(f_max_ghz > f_min_ghz)) throw DomainError("FrequencyGrid: f_max must exceed f_min");
    std::vector<double> w(n);
    const double step = (f_max_ghz - f_min_ghz) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = ghz_to_omega(f_min_ghz + step * static_cast<double>(i));
    w.back() = ghz_to_omega(f_max_ghz);
    return FrequencyGrid(std::move(w));
}

Abcd operator*(const Abcd& l, const Abcd& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c,
            l.c * r.b + l.d * r.d};
}

Abcd ScaledAbcd::unscaled() const {
    const double f = std::exp(log_scale);
    return {m.a * f, m.b * f, m.c * f, m.d * f};
}

ScaledAbcd operator*(const ScaledAbcd& l, const ScaledAbcd& r) {
    ScaledAbcd out{l.m * r.m, l.log_scale + r.log_scale};
    const double big = std::max({std::abs(out.m.a), std::abs(out.m.b), std::abs(out.m.c),
                                 std::abs(out.m.d)});
    if (big > 1e100 && std::isfinite(big)) {
        out.m = {out.m.a / big, out.m.b / big, out.m.c / big, out.m.d / big};
        out.log_scale += std::log(big);
    }
    return out;
}

Abcd reversed(const Abcd& m) {
    const Complex det = m.det();
    if (std::abs(det) < kDenominatorGuard) throw NumericError("reversed: singular chain matrix");
    return {m.d / det, m.b / det, m.c / det, m.a / det};
}

Complex capacitor_admittance(double farads, double omega, double loss_tangent) {
    return Complex(0.0, omega * farads) * Complex(1.0, -loss_tangent);
}

Complex capacitor_impedance(double farads, double omega, double loss_tangent) {
    const Complex y = capacitor_admittance(farads, omega, loss_tangent);
    if (std::abs(y) < kDenominatorGuard)
        throw NumericError("capacitor_impedance: vanishing admittance");
    return 1.0 / y;
}

LumpedElement LumpedElement::series(Complex z) {
    return {ElementKind::SeriesImpedance, [z](double) { return z; }};
}

LumpedElement LumpedElement::shunt(Complex y) {
    return {ElementKind::ShuntAdmittance, [y](double) { return y; }};
}

LumpedElement LumpedElement::series_capacitor(double farads, double loss_tangent) {
    return {ElementKind::SeriesImpedance,
            [=](double w) { return capacitor_impedance(farads, w, loss_tangent); }};
}

LumpedElement LumpedElement::series_inductor(double henries) {
    return {ElementKind::SeriesImpedance, [=](double w) { return Complex(0.0, w * henries); }};
}

LumpedElement LumpedElement::shunt_capacitor(double farads, double loss_tangent) {
    return {ElementKind::ShuntAdmittance,
            [=](double w) { return capacitor_admittance(farads, w, loss_tangent); }};
}

LumpedElement LumpedElement::shunt_inductor(double henries) {
    return {ElementKind::ShuntAdmittance,
            [=](double w) { return 1.0 / Complex(0.0, w * henries); }};
}

double TLineSegment::beta(double omega) const {
    return omega * std::sqrt(eps_eff) / kSpeedOfLight;
}

double TLineSegment::alpha(double omega) const {
    if (const auto* fixed = std::get_if<FixedAttenuation>(&loss)) return fixed->alpha;
    return beta(omega) / (2.0 * std::get<InternalQ>(loss).q);
}

Abcd element_abcd(const LumpedElement& el, double omega) {
    require_positive_omega(omega, "element_abcd");
    if (!el.immittance) throw DomainError("element_abcd: element has no value");
    const Complex v = el.immittance(omega);
    if (!finite(v)) throw DomainError("element_abcd: non-finite element value");
    if (el.kind == ElementKind::SeriesImpedance) return {1.0, v, 0.0, 1.0};
    return {1.0, 0.0, v, 1.0};
}

Abcd tline_abcd(const TLineSegment& seg, double omega) {
    require_positive_omega(omega, "tline_abcd");
    if (!(seg.z0 > 0.0) || !std::isfinite(seg.z0))
        throw DomainError("tline_abcd: characteristic impedance must be > 0");
    if (seg.length < 0.0) throw DomainError("tline_abcd: negative length");
    if (!(seg.eps_eff > 0.0)) throw DomainError("tline_abcd: eps_eff must be > 0");
    const double a = seg.alpha(omega);
    if (a < 0.0) throw DomainError("tline_abcd: attenuation must be >= 0");
    const Complex gl = seg.gamma(omega) * seg.length;
    const Complex ch = std::cosh(gl);
    const Complex sh = std::sinh(gl);
    return {ch, seg.z0 * sh, sh / seg.z0, ch};
}

Abcd cascade(std::span<const Abcd> ports) {
    if (ports.empty()) throw DomainError("cascade: empty sequence");
    Abcd acc = ports.front();
    for (std::size_t i = 1; i < ports.size(); ++i) acc = acc * ports[i];
    return acc;
}

Complex abcd_to_s21(const Abcd& m, double r_source, double r_load) {
    if (!(r_source > 0.0) || !(r_load > 0.0))
        throw DomainError("abcd_to_s21: port impedances must be > 0");
    const Complex den = m.a * r_load + m.b + m.c * r_source * r_load + m.d * r_source;
    if (std::abs(den) < kDenominatorGuard || !finite(den))
        throw NumericError("abcd_to_s21: vanishing or non-finite denominator");
    return 2.0 * std::sqrt(r_source * r_load) / den;
}

Complex abcd_to_s21(const ScaledAbcd& s, double r_source, double r_load) {
    if (!(r_source > 0.0) || !(r_load > 0.0))
        throw DomainError("abcd_to_s21: port impedances must be > 0");
    const Abcd& m = s.m;
    const Complex den = m.a * r_load + m.b + m.c * r_source * r_load + m.d * r_source;
    if (std::abs(den) < kDenominatorGuard || !finite(den))
        throw NumericError("abcd_to_s21: vanishing or non-finite denominator");
    return 2.0 * std::sqrt(r_source * r_load) / den * std::exp(-s.log_scale);
}

Complex one_port_input_impedance(const Abcd& m, Complex z_load) {
    const Complex den = m.c * z_load + m.d;
    if (std::abs(den) < kDenominatorGuard || !finite(den))
        throw NumericError("one_port_input_impedance: vanishing or non-finite denominator");
    return (m.a * z_load + m.b) / den;
}

Network& Network::add(LumpedElement el, std::string label) {
    stages_.push_back({std::move(el), 1, std::move(label)});
    return *this;
}

Network& Network::add(TLineSegment seg, std::string label) {
    stages_.push_back({seg, 1, std::move(label)});
    return *this;
}

Network& Network::add(std::shared_ptr<const Network> sub, int repeat, std::string label) {
    if (!sub) throw DomainError("Network::add: null sub-network");
    if (repeat < 0) throw DomainError("Network::add: negative repeat count");
    stages_.push_back({std::move(sub), repeat, std::move(label)});
    return *this;
}

Network& Network::mark_probe() {
    probe_ = stages_.size();
    return *this;
}

ScaledAbcd Network::range(std::size_t first, std::size_t last, double omega) const {
    ScaledAbcd acc;
    for (std::size_t i = first; i < last; ++i) {
        const Stage& st = stages_[i];
        const ScaledAbcd one = std::visit(
            [omega](const auto& item) -> ScaledAbcd {
                using T = std::decay_t<decltype(item)>;
                if constexpr (std::is_same_v<T, LumpedElement>)
                    return {element_abcd(item, omega)};
                else if constexpr (std::is_same_v<T, TLineSegment>)
                    return {tline_abcd(item, omega)};
                else
                    return item->abcd_scaled(omega);
            },
            st.item);
        for (int r = 0; r < st.repeat; ++r) acc = acc * one;
    }
    return acc;
}

Abcd Network::abcd(double omega) const { return abcd_scaled(omega).unscaled(); }

Abcd Network::abcd(double omega, const LumpedElement& probe_load) const {
    return abcd_scaled(omega, probe_load).unscaled();
}

ScaledAbcd Network::abcd_scaled(double omega) const { return range(0, stages_.size(), omega); }

ScaledAbcd Network::abcd_scaled(double omega, const LumpedElement& probe_load) const {
    if (!probe_) throw DomainError("Network::abcd: network has no probe node");
    if (probe_load.kind != ElementKind::ShuntAdmittance)
        throw DomainError("Network::abcd: probe load must be a shunt element");
    return range(0, *probe_, omega) * ScaledAbcd{element_abcd(probe_load, omega)} *
           range(*probe_, stages_.size(), omega);
}

Abcd Network::abcd_before_probe(double omega) const {
    if (!probe_) throw DomainError("Network: no probe node");
    return range(0, *probe_, omega).unscaled();
}

Abcd Network::abcd_after_probe(double omega) const {
    if (!probe_) throw DomainError("Network: no probe node");
    return range(*probe_, stages_.size(), omega).unscaled();
}

std::pair<Complex, Complex> Network::probe_impedances(double omega, Complex z_source,
                                                      Complex z_load) const {
    if (!probe_) throw DomainError("Network: no probe node");
    const Abcd before = range(0, *probe_, omega).m;
    const Abcd after = range(*probe_, stages_.size(), omega).m;
    // The reversed chain is [d b; c a] / det; det and the scale cancel.
    return {one_port_input_impedance({before.d, before.b, before.c, before.a}, z_source),
            one_port_input_impedance(after, z_load)};
}

std::vector<double> SpectrumTrace::magnitude() const {
    std::vector<double> out(s21.size());
    for (std::size_t i = 0; i < s21.size(); ++i) out[i] = std::abs(s21[i]);
    return out;
}

SpectrumTrace network_spectrum(const Network& net, const FrequencyGrid& grid, double r0) {
    SpectrumTrace t;
    t.omega = grid.omega();
    t.s21.reserve(grid.size());
    for (double w : grid) t.s21.push_back(abcd_to_s21(net.abcd_scaled(w), r0, r0));
    return t;
}

SpectrumTrace network_spectrum(const Network& net, const FrequencyGrid& grid, double r0,
                               const LumpedElement& probe_load) {
    SpectrumTrace t;
    t.omega = grid.omega();
    t.s21.reserve(grid.size());
    for (double w : grid) t.s21.push_back(abcd_to_s21(net.abcd_scaled(w, probe_load), r0, r0));
    return t;
}

}  // namespace metaqed
