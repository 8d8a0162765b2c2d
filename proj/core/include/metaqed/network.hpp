#pragma once

// Two-port (ABCD / chain matrix) network algebra.
//
// Harmonic convention is exp(+i w t): an inductor is i w L, a capacitor
// 1/(i w C). All quantities are SI (rad/s, H, F, Ohm, m).

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace metaqed {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;

/// |denominator| below this is reported as a NumericError.
inline constexpr double kDenominatorGuard = 1e-300;

inline double ghz_to_omega(double f_ghz) { return kTwoPi * f_ghz * 1e9; }
inline double omega_to_ghz(double omega) { return omega / kTwoPi * 1e-9; }

/// Strictly increasing, positive angular frequencies.
class FrequencyGrid {
public:
    explicit FrequencyGrid(std::vector<double> omega);

    /// n points, inclusive, in GHz.
    static FrequencyGrid linear_ghz(double f_min_ghz, double f_max_ghz, std::size_t n);
    static FrequencyGrid single(double omega) { return FrequencyGrid({omega}); }

    std::size_t size() const noexcept { return omega_.size(); }
    double operator[](std::size_t i) const { return omega_[i]; }
    const std::vector<double>& omega() const noexcept { return omega_; }
    auto begin() const noexcept { return omega_.begin(); }
    auto end() const noexcept { return omega_.end(); }

private:
    std::vector<double> omega_;
};

/// Chain matrix of a two-port at a single frequency.
struct Abcd {
    Complex a{1.0};
    Complex b{0.0};
    Complex c{0.0};
    Complex d{1.0};

    static Abcd identity() { return {}; }
    Complex det() const { return a * d - b * c; }
};

Abcd operator*(const Abcd& lhs, const Abcd& rhs);

/// exp(log_scale) * m. Long cascades deep in a stop band overflow a plain
/// double; products of scaled matrices are renormalised as they grow.
struct ScaledAbcd {
    Abcd m;
    double log_scale = 0.0;

    /// exp(log_scale) * m, which may overflow.
    Abcd unscaled() const;
};

ScaledAbcd operator*(const ScaledAbcd& lhs, const ScaledAbcd& rhs);

/// Same network seen from the other port.
Abcd reversed(const Abcd& m);

enum class ElementKind { SeriesImpedance, ShuntAdmittance };

/// A single series impedance or shunt admittance; `immittance(w)` returns Z(w)
/// for series elements and Y(w) for shunt elements.
struct LumpedElement {
    ElementKind kind = ElementKind::SeriesImpedance;
    std::function<Complex(double)> immittance;

    static LumpedElement series(Complex z);
    static LumpedElement shunt(Complex y);
    static LumpedElement series_capacitor(double farads, double loss_tangent = 0.0);
    static LumpedElement series_inductor(double henries);
    static LumpedElement shunt_capacitor(double farads, double loss_tangent = 0.0);
    static LumpedElement shunt_inductor(double henries);
};

/// Lossy capacitor: Y = i w C (1 - i tan(delta)).
Complex capacitor_admittance(double farads, double omega, double loss_tangent = 0.0);
Complex capacitor_impedance(double farads, double omega, double loss_tangent = 0.0);

/// Attenuation fixed in 1/m, independent of frequency.
struct FixedAttenuation {
    double alpha = 0.0;
};

/// Attenuation chosen so the line alone has internal quality factor q:
/// alpha(w) = beta(w) / (2 q).
struct InternalQ {
    double q = 1e5;
};

struct TLineSegment {
    double z0 = 50.0;      ///< characteristic impedance, Ohm
    double length = 0.0;   ///< m
    double eps_eff = 1.0;  ///< effective relative permittivity
    std::variant<FixedAttenuation, InternalQ> loss = FixedAttenuation{};

    double beta(double omega) const;
    double alpha(double omega) const;
    Complex gamma(double omega) const { return {alpha(omega), beta(omega)}; }
};

Abcd element_abcd(const LumpedElement& el, double omega);
Abcd tline_abcd(const TLineSegment& seg, double omega);

/// Ordered product, input side first. Throws DomainError on an empty span.
Abcd cascade(std::span<const Abcd> ports);

/// S21 between a real source impedance r_source and load r_load.
Complex abcd_to_s21(const Abcd& port, double r_source, double r_load);
/// As above; underflows to 0 for very large scales instead of failing.
Complex abcd_to_s21(const ScaledAbcd& port, double r_source, double r_load);

/// Input impedance at port 1 with port 2 terminated in z_load.
Complex one_port_input_impedance(const Abcd& port, Complex z_load);

class Network;

/// One block of a composite network, optionally repeated.
struct Stage {
    std::variant<LumpedElement, TLineSegment, std::shared_ptr<const Network>> item;
    int repeat = 1;
    std::string label;
};

/// Ordered composition of stages with an optional probe node between two
/// stages. A shunt load can be attached at the probe node at evaluation time.
class Network {
public:
    Network() = default;

    Network& add(LumpedElement el, std::string label = {});
    Network& add(TLineSegment seg, std::string label = {});
    Network& add(std::shared_ptr<const Network> sub, int repeat, std::string label = {});
    /// Marks the node after the stages added so far as the probe node.
    Network& mark_probe();

    const std::vector<Stage>& stages() const noexcept { return stages_; }
    std::optional<std::size_t> probe() const noexcept { return probe_; }

    Abcd abcd(double omega) const;
    /// Evaluates with `probe_load` (a shunt element) attached at the probe node.
    Abcd abcd(double omega, const LumpedElement& probe_load) const;
    ScaledAbcd abcd_scaled(double omega) const;
    ScaledAbcd abcd_scaled(double omega, const LumpedElement& probe_load) const;

    /// Chain matrices of the parts on either side of the probe node.
    Abcd abcd_before_probe(double omega) const;
    Abcd abcd_after_probe(double omega) const;

    /// Impedances seen from the probe node looking toward port 1 (terminated
    /// in z_source) and toward port 2 (terminated in z_load). Evaluated on
    /// scaled matrices, so long stop-band cascades do not overflow.
    std::pair<Complex, Complex> probe_impedances(double omega, Complex z_source,
                                                 Complex z_load) const;

private:
    ScaledAbcd range(std::size_t first, std::size_t last, double omega) const;

    std::vector<Stage> stages_;
    std::optional<std::size_t> probe_;
};

/// Complex S21 sampled on a frequency grid.
struct SpectrumTrace {
    std::vector<double> omega;
    std::vector<Complex> s21;

    std::size_t size() const noexcept { return omega.size(); }
    std::vector<double> magnitude() const;
};

/// S21 of `net` between equal real port impedances over a grid.
SpectrumTrace network_spectrum(const Network& net, const FrequencyGrid& grid, double r0);
/// As above with a shunt load attached at the probe node.
SpectrumTrace network_spectrum(const Network& net, const FrequencyGrid& grid, double r0,
                               const LumpedElement& probe_load);

}  // namespace metaqed
