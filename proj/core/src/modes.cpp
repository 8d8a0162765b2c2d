#include "metaqed/modes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "metaqed/errors.hpp"
#include "metaqed/least_squares.hpp"

namespace metaqed {

namespace {

constexpr std::size_t kMinFitPoints = 7;

double to_db(double mag) { return 20.0 * std::log10(std::max(mag, 1e-300)); }

std::vector<double> power_of(const SpectrumTrace& t, std::size_t first, std::size_t last) {
    std::vector<double> p(last - first);
    for (std::size_t i = first; i < last; ++i) p[i - first] = std::norm(t.s21[i]);
    return p;
}

// Distance from index i to the half-power crossing on one side, linearly
// interpolated. Stops at a valley (power rising again) or at `stop`.
struct SideWidth {
    double distance = 0.0;
    bool crossed = false;
};

SideWidth side_width(const std::vector<double>& w, const std::vector<double>& p, std::size_t i,
                     int dir) {
    const double half = 0.5 * p[i];
    std::size_t j = i;
    while (true) {
        const bool at_edge = dir < 0 ? j == 0 : j + 1 >= p.size();
        if (at_edge) return {std::abs(w[j] - w[i]), false};
        const std::size_t k = dir < 0 ? j - 1 : j + 1;
        if (p[k] <= half) {
            const double t = (p[j] - half) / (p[j] - p[k]);
            return {std::abs(w[j] + t * (w[k] - w[j]) - w[i]), true};
        }
        if (p[k] > p[j]) return {std::abs(w[j] - w[i]), false};
        j = k;
    }
}

double half_width_at(const std::vector<double>& w, const std::vector<double>& p, std::size_t i) {
    const SideWidth l = side_width(w, p, i, -1);
    const SideWidth r = side_width(w, p, i, +1);
    if (l.crossed && r.crossed) return 0.5 * (l.distance + r.distance);
    if (l.crossed) return l.distance;
    if (r.crossed) return r.distance;
    const double d = std::max(l.distance, r.distance);
    if (d > 0.0) return d;
    // Isolated sample: one grid step.
    if (i + 1 < w.size()) return w[i + 1] - w[i];
    return i > 0 ? w[i] - w[i - 1] : 1.0;
}

// K Lorentzian lines plus a shared constant on scaled coordinates
// x = (w - centre) / scale, y = |S21|^2 / y_max. Per line: x0, h (half
// width), a (height); last parameter: baseline.
struct LineModel {
    std::vector<double> x;
    std::vector<double> y;
    int lines = 1;

    double eval(const Eigen::VectorXd& p, double xv) const {
        double s = p[3 * lines];
        for (int k = 0; k < lines; ++k) {
            const double d = xv - p[3 * k];
            const double h2 = p[3 * k + 1] * p[3 * k + 1];
            s += p[3 * k + 2] * h2 / (d * d + h2);
        }
        return s;
    }

    void residuals(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
        for (std::size_t i = 0; i < x.size(); ++i)
            r[static_cast<Eigen::Index>(i)] = eval(p, x[i]) - y[i];
    }

    void jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            for (int k = 0; k < lines; ++k) {
                const double d = x[i] - p[3 * k];
                const double h = p[3 * k + 1];
                const double a = p[3 * k + 2];
                const double den = d * d + h * h;
                j(row, 3 * k) = 2.0 * a * h * h * d / (den * den);
                j(row, 3 * k + 1) = 2.0 * a * h * d * d / (den * den);
                j(row, 3 * k + 2) = h * h / den;
            }
            j(row, 3 * lines) = 1.0;
        }
    }
};

std::vector<ModeRecord> fit_lines(const SpectrumTrace& trace, std::size_t first, std::size_t last,
                                  const std::vector<std::size_t>& guesses) {
    if (last > trace.size() || first >= last)
        throw DomainError("fit_lorentzian: window outside trace");
    const std::size_t n = last - first;
    if (n < kMinFitPoints) {
        std::ostringstream os;
        os << "fit_lorentzian: window has " << n << " points, need >= " << kMinFitPoints;
        throw FitError(os.str());
    }
    std::vector<double> w(trace.omega.begin() + static_cast<std::ptrdiff_t>(first),
                          trace.omega.begin() + static_cast<std::ptrdiff_t>(last));
    std::vector<double> p = power_of(trace, first, last);

    const auto peak_it = std::max_element(p.begin(), p.end());
    const std::size_t peak = static_cast<std::size_t>(peak_it - p.begin());
    if (peak == 0 || peak + 1 == n)
        throw FitError("fit_lorentzian: no interior maximum in window (monotone data)");
    const double y_max = *peak_it;
    if (!(y_max > 0.0) || !std::isfinite(y_max))
        throw FitError("fit_lorentzian: window has no positive power");

    const int lines = static_cast<int>(guesses.size());
    std::vector<std::size_t> local(guesses.size());
    for (std::size_t k = 0; k < guesses.size(); ++k) {
        if (guesses[k] < first || guesses[k] >= last)
            throw DomainError("fit_lorentzian: guess outside window");
        local[k] = guesses[k] - first;
    }

    double scale = 0.0;
    std::vector<double> hw(local.size());
    for (std::size_t k = 0; k < local.size(); ++k) {
        hw[k] = half_width_at(w, p, local[k]);
        scale += hw[k];
    }
    scale /= static_cast<double>(local.size());
    const double centre = w[local.front()];

    LineModel model;
    model.lines = lines;
    model.x.resize(n);
    model.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        model.x[i] = (w[i] - centre) / scale;
        model.y[i] = p[i] / y_max;
    }
    const double base0 = *std::min_element(model.y.begin(), model.y.end());

    Eigen::VectorXd x0(3 * lines + 1);
    for (int k = 0; k < lines; ++k) {
        const auto lk = local[static_cast<std::size_t>(k)];
        x0[3 * k] = model.x[lk];
        x0[3 * k + 1] = hw[static_cast<std::size_t>(k)] / scale;
        x0[3 * k + 2] = std::max(model.y[lk] - base0, 1e-3);
    }
    x0[3 * lines] = base0;

    LeastSquaresProblem prob;
    prob.residual_count = n;
    prob.residuals = [&model](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        model.residuals(x, r);
    };
    prob.jacobian = [&model](const Eigen::VectorXd& x, Eigen::MatrixXd& j) {
        model.jacobian(x, j);
    };
    const LeastSquaresResult res = solve_least_squares(prob, x0);

    auto fail = [&](const std::string& why) {
        std::ostringstream diag;
        diag << "status=" << res.status << " (" << res.message << ") evaluations="
             << res.evaluations << " rms=" << res.rms << " window=[" << omega_to_ghz(w.front())
             << ", " << omega_to_ghz(w.back()) << "] GHz";
        throw FitError("fit_lorentzian: " + why, diag.str());
    };
    if (!res.converged) fail("optimizer did not converge");

    std::vector<ModeRecord> out;
    for (int k = 0; k < lines; ++k) {
        ModeRecord m;
        m.omega = centre + res.x[3 * k] * scale;
        m.kappa = 2.0 * std::abs(res.x[3 * k + 1]) * scale;
        m.amplitude = res.x[3 * k + 2] * y_max;
        m.baseline = res.x[3 * lines] * y_max;
        if (!(m.kappa > 0.0) || !std::isfinite(m.kappa)) fail("non-positive linewidth");
        if (!(m.amplitude > 0.0)) fail("non-positive line amplitude");
        if (m.omega < w.front() || m.omega > w.back()) fail("centre left the fit window");
        m.q = m.omega / m.kappa;
        m.peak_s21 = std::sqrt(std::max(m.amplitude + m.baseline, 0.0));
        m.residual = res.rms;
        out.push_back(m);
    }
    std::sort(out.begin(), out.end(),
              [](const ModeRecord& a, const ModeRecord& b) { return a.omega < b.omega; });
    return out;
}

std::size_t index_at_or_above(const std::vector<double>& w, double v) {
    return static_cast<std::size_t>(std::lower_bound(w.begin(), w.end(), v) - w.begin());
}

// Window [first, last) for [lo, hi] in omega, widened to at least kMinFitPoints.
std::pair<std::size_t, std::size_t> window_indices(const std::vector<double>& w, double lo,
                                                   double hi) {
    std::size_t first = index_at_or_above(w, lo);
    std::size_t last = std::min(index_at_or_above(w, hi) + 1, w.size());
    if (first > 0 && w[first] > lo) --first;
    while (last - first < kMinFitPoints && (first > 0 || last < w.size())) {
        if (first > 0) --first;
        if (last < w.size() && last - first < kMinFitPoints) ++last;
    }
    return {first, last};
}

struct Candidate {
    std::size_t index;  // index in the trace the fit runs on
    double omega;
    double half_width;
};

// Groups adjacent candidates into singles and overlapping pairs and fits them.
void fit_candidates(const SpectrumTrace& trace, const std::vector<Candidate>& cand,
                    const CatalogOptions& opt, ModeCatalog& cat) {
    std::size_t i = 0;
    while (i < cand.size()) {
        const Candidate& a = cand[i];
        const bool pair = i + 1 < cand.size() &&
                          cand[i + 1].omega - a.omega <
                              opt.overlap_factor * (a.half_width + cand[i + 1].half_width);
        try {
            if (pair) {
                const Candidate& b = cand[i + 1];
                const auto [first, last] =
                    window_indices(trace.omega, a.omega - opt.window_half_widths * a.half_width,
                                   b.omega + opt.window_half_widths * b.half_width);
                auto rec = fit_lines(trace, first, last, {a.index, b.index});
                cat.modes.insert(cat.modes.end(), rec.begin(), rec.end());
            } else {
                const auto [first, last] =
                    window_indices(trace.omega, a.omega - opt.window_half_widths * a.half_width,
                                   a.omega + opt.window_half_widths * a.half_width);
                cat.modes.push_back(fit_lines(trace, first, last, {a.index}).front());
            }
        } catch (const FitError& e) {
            std::string msg = e.what();
            if (!e.diagnostics().empty()) msg += " [" + e.diagnostics() + "]";
            cat.warnings.push_back({a.omega, msg});
        }
        i += pair ? 2 : 1;
    }
}

void finalize(ModeCatalog& cat) {
    std::sort(cat.modes.begin(), cat.modes.end(),
              [](const ModeRecord& a, const ModeRecord& b) { return a.omega < b.omega; });
    std::vector<ModeRecord> kept;
    for (const auto& m : cat.modes) {
        if (!kept.empty() && !(m.omega > kept.back().omega)) {
            cat.warnings.push_back({m.omega, "duplicate mode dropped (fit collapsed onto neighbour)"});
            continue;
        }
        kept.push_back(m);
    }
    cat.modes = std::move(kept);
}

}  // namespace

std::vector<std::size_t> find_peaks(const SpectrumTrace& trace, const PeakOptions& opt) {
    const std::size_t n = trace.size();
    if (n < 3) throw DomainError("find_peaks: trace needs at least 3 points");
    const std::vector<double> mag = trace.magnitude();

    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(mag[i] > mag[i - 1]) || mag[i] < opt.floor) continue;
        // Plateaus: take the middle of a run of equal values.
        std::size_t j = i;
        while (j + 1 < n && mag[j + 1] == mag[i]) ++j;
        if (j + 1 >= n || !(mag[j + 1] < mag[i])) {
            i = j;
            continue;
        }
        const std::size_t centre = (i + j) / 2;

        double left_min = mag[i];
        for (std::size_t k = i; k-- > 0;) {
            if (mag[k] > mag[i]) break;
            left_min = std::min(left_min, mag[k]);
        }
        double right_min = mag[i];
        for (std::size_t k = j + 1; k < n; ++k) {
            if (mag[k] > mag[i]) break;
            right_min = std::min(right_min, mag[k]);
        }
        const double base = std::max(left_min, right_min);
        if (to_db(mag[i]) - to_db(base) >= opt.min_prominence_db) peaks.push_back(centre);
        i = j;
    }

    if (opt.min_spacing > 0.0 && peaks.size() > 1) {
        std::vector<std::size_t> order(peaks.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return mag[peaks[a]] > mag[peaks[b]];
        });
        std::vector<bool> removed(peaks.size(), false);
        for (std::size_t oi : order) {
            if (removed[oi]) continue;
            for (std::size_t k = 0; k < peaks.size(); ++k) {
                if (k == oi || removed[k]) continue;
                if (std::abs(trace.omega[peaks[k]] - trace.omega[peaks[oi]]) < opt.min_spacing)
                    removed[k] = true;
            }
        }
        std::vector<std::size_t> kept;
        for (std::size_t k = 0; k < peaks.size(); ++k)
            if (!removed[k]) kept.push_back(peaks[k]);
        peaks = std::move(kept);
    }
    return peaks;
}

ModeRecord fit_lorentzian(const SpectrumTrace& trace, std::size_t first, std::size_t last) {
    if (last > trace.size() || first >= last)
        throw DomainError("fit_lorentzian: window outside trace");
    std::size_t best = first;
    for (std::size_t i = first; i < last; ++i)
        if (std::norm(trace.s21[i]) > std::norm(trace.s21[best])) best = i;
    return fit_lines(trace, first, last, {best}).front();
}

std::pair<ModeRecord, ModeRecord> fit_lorentzian_pair(const SpectrumTrace& trace,
                                                      std::size_t first, std::size_t last,
                                                      std::size_t guess_a,
                                                      std::size_t guess_b) {
    auto r = fit_lines(trace, first, last, {guess_a, guess_b});
    return {r[0], r[1]};
}

std::vector<double> ModeCatalog::spacings() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < modes.size(); ++i)
        out.push_back(modes[i].omega - modes[i - 1].omega);
    return out;
}

ModeCatalog catalog(const SpectrumTrace& trace, const CatalogOptions& opt) {
    ModeCatalog cat;
    if (trace.size() < 3) return cat;
    const auto peaks = find_peaks(trace, opt.peaks);
    const std::vector<double> p = power_of(trace, 0, trace.size());
    std::vector<Candidate> cand;
    for (std::size_t i : peaks)
        cand.push_back({i, trace.omega[i], half_width_at(trace.omega, p, i)});
    fit_candidates(trace, cand, opt, cat);
    finalize(cat);
    return cat;
}

ModeCatalog catalog_refined(const std::function<Complex(double)>& s21,
                            const FrequencyGrid& coarse, const CatalogOptions& opt) {
    SpectrumTrace tr;
    tr.omega = coarse.omega();
    tr.s21.reserve(coarse.size());
    for (double w : coarse) tr.s21.push_back(s21(w));
    ModeCatalog cat;
    if (tr.size() < 3) return cat;
    const auto peaks = find_peaks(tr, opt.peaks);
    const std::vector<double> p = power_of(tr, 0, tr.size());
    auto power = [&](double w) { return std::norm(s21(w)); };

    struct Refined {
        double omega, power, half_width;
    };
    std::vector<Refined> lines;
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        const std::size_t i = peaks[k];
        const double lo = tr.omega[i - 1];
        const double hi = tr.omega[i + 1];
        const auto best = boost::math::tools::brent_find_minima(
            [&](double w) { return -power(w); }, lo, hi, 52);
        double w0 = best.first;
        double p0 = -best.second;
        if (p[i] > p0) {
            w0 = tr.omega[i];
            p0 = p[i];
        }
        // Valley positions bound the half-power search on either side.
        auto valley = [&](std::size_t from, std::size_t to) {
            std::size_t m = from;
            for (std::size_t j = std::min(from, to); j <= std::max(from, to); ++j)
                if (p[j] < p[m]) m = j;
            return tr.omega[m];
        };
        const double left_bound = valley(k > 0 ? peaks[k - 1] : 0, i);
        const double right_bound = valley(i, k + 1 < peaks.size() ? peaks[k + 1] : tr.size() - 1);
        auto crossing = [&](double a, double b) -> std::pair<double, bool> {
            const double half = 0.5 * p0;
            if (power(b) > half) return {std::abs(b - w0), false};
            std::uintmax_t it = 100;
            const auto r = boost::math::tools::toms748_solve(
                [&](double w) { return power(w) - half; }, std::min(a, b), std::max(a, b),
                boost::math::tools::eps_tolerance<double>(40), it);
            return {std::abs(0.5 * (r.first + r.second) - w0), true};
        };
        const auto l = left_bound < w0 ? crossing(w0, left_bound) : std::pair{0.0, false};
        const auto r = right_bound > w0 ? crossing(w0, right_bound) : std::pair{0.0, false};
        double hw;
        if (l.second && r.second)
            hw = 0.5 * (l.first + r.first);
        else if (l.second)
            hw = l.first;
        else if (r.second)
            hw = r.first;
        else
            hw = std::max({l.first, r.first, hi - lo});
        lines.push_back({w0, p0, hw});
    }

    const std::size_t npts = std::max<std::size_t>(opt.local_points, 4 * kMinFitPoints);
    auto sample = [&](double lo, double hi) {
        SpectrumTrace t;
        t.omega.resize(npts);
        t.s21.resize(npts);
        lo = std::max(lo, 1e-3 * coarse[0]);
        for (std::size_t j = 0; j < npts; ++j) {
            t.omega[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(npts - 1);
            t.s21[j] = s21(t.omega[j]);
        }
        return t;
    };
    auto nearest = [](const SpectrumTrace& t, double w) {
        std::size_t j = index_at_or_above(t.omega, w);
        if (j >= t.size()) return t.size() - 1;
        if (j > 0 && w - t.omega[j - 1] < t.omega[j] - w) --j;
        return j;
    };

    std::size_t i = 0;
    while (i < lines.size()) {
        const Refined& a = lines[i];
        const bool pair = i + 1 < lines.size() &&
                          lines[i + 1].omega - a.omega <
                              opt.overlap_factor * (a.half_width + lines[i + 1].half_width);
        try {
            if (pair) {
                const Refined& b = lines[i + 1];
                const auto t = sample(a.omega - opt.window_half_widths * a.half_width,
                                      b.omega + opt.window_half_widths * b.half_width);
                auto rec = fit_lines(t, 0, t.size(), {nearest(t, a.omega), nearest(t, b.omega)});
                cat.modes.insert(cat.modes.end(), rec.begin(), rec.end());
            } else {
                const auto t = sample(a.omega - opt.window_half_widths * a.half_width,
                                      a.omega + opt.window_half_widths * a.half_width);
                cat.modes.push_back(fit_lines(t, 0, t.size(), {nearest(t, a.omega)}).front());
            }
        } catch (const FitError& e) {
            std::string msg = e.what();
            if (!e.diagnostics().empty()) msg += " [" + e.diagnostics() + "]";
            cat.warnings.push_back({a.omega, msg});
        }
        i += pair ? 2 : 1;
    }
    finalize(cat);
    return cat;
}

SpectrumTrace synthesize_trace(const std::vector<ModeRecord>& modes, const FrequencyGrid& grid,
                               double baseline) {
    SpectrumTrace t;
    t.omega = grid.omega();
    t.s21.reserve(grid.size());
    for (double w : grid) {
        double pw = baseline;
        for (const auto& m : modes) {
            const double h = 0.5 * m.kappa;
            const double d = w - m.omega;
            pw += m.amplitude * h * h / (d * d + h * h);
        }
        t.s21.emplace_back(std::sqrt(std::max(pw, 0.0)), 0.0);
    }
    return t;
}

}  // namespace metaqed
