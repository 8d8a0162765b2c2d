#pragma once

// Resonance detection and Lorentzian line fits on |S21|^2.

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "metaqed/network.hpp"

namespace metaqed {

struct PeakOptions {
    /// Minimum topographic prominence of |S21| in dB.
    double min_prominence_db = 3.0;
    /// Minimum separation between accepted peaks, rad/s. Lower peaks lose.
    double min_spacing = 0.0;
    /// Maxima with |S21| below this are ignored.
    double floor = 1e-12;
};

/// Local maxima of |S21| passing the prominence/spacing filters, ascending.
std::vector<std::size_t> find_peaks(const SpectrumTrace& trace, const PeakOptions& options = {});

struct ModeRecord {
    double omega = 0.0;      ///< centre, rad/s
    double kappa = 0.0;      ///< full width at half maximum of |S21|^2, rad/s
    double q = 0.0;          ///< omega / kappa
    double peak_s21 = 0.0;   ///< |S21| at the fitted peak (amplitude + baseline)
    double residual = 0.0;   ///< RMS fit residual, normalised to the peak power
    double amplitude = 0.0;  ///< Lorentzian power amplitude
    double baseline = 0.0;   ///< constant power baseline
};

/// Least-squares fit of
///   |S21|^2 = A (kappa/2)^2 / ((w - w0)^2 + (kappa/2)^2) + baseline
/// to trace points [first, last). Throws FitError when the window has fewer
/// than 7 points, no interior maximum, or the optimizer does not converge.
ModeRecord fit_lorentzian(const SpectrumTrace& trace, std::size_t first, std::size_t last);

/// Joint two-Lorentzian fit (shared baseline) for overlapping lines. `guess_a`
/// and `guess_b` are trace indices of the two maxima.
std::pair<ModeRecord, ModeRecord> fit_lorentzian_pair(const SpectrumTrace& trace,
                                                      std::size_t first, std::size_t last,
                                                      std::size_t guess_a,
                                                      std::size_t guess_b);

struct CatalogOptions {
    PeakOptions peaks;
    double window_half_widths = 3.0;  ///< fit window, in estimated half widths
    double overlap_factor = 1.5;      ///< joint fit when spacing < factor * (hw_a + hw_b)
    std::size_t local_points = 241;   ///< samples per locally refined window
};

struct CatalogWarning {
    double omega = 0.0;
    std::string message;
};

struct ModeCatalog {
    std::vector<ModeRecord> modes;  ///< strictly ascending in omega
    std::vector<CatalogWarning> warnings;

    /// w_{i+1} - w_i
    std::vector<double> spacings() const;
};

/// find_peaks followed by a fit per peak on the given samples.
ModeCatalog catalog(const SpectrumTrace& trace, const CatalogOptions& options = {});

/// Peaks located on `coarse` samples of `s21`, then each line re-sampled on
/// its own window and fitted. Use when linewidths approach the coarse step.
ModeCatalog catalog_refined(const std::function<Complex(double)>& s21,
                            const FrequencyGrid& coarse, const CatalogOptions& options = {});

/// Sum of Lorentzian power lines on top of a baseline, sqrt'ed to |S21|.
SpectrumTrace synthesize_trace(const std::vector<ModeRecord>& modes, const FrequencyGrid& grid,
                               double baseline = 0.0);

}  // namespace metaqed
