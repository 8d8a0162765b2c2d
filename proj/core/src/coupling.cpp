#include "metaqed/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "metaqed/errors.hpp"
#include "metaqed/least_squares.hpp"

namespace metaqed {

namespace {

constexpr double kFluxQuantum = 2.067833848e-15;  // Wb
constexpr double kPlanck = 6.62607015e-34;        // J s
const Complex kI{0.0, 1.0};

template <class F>
double root_in(F f, double lo, double hi, const char* what) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw DomainError(std::string(what) + ": target out of range");
    std::uintmax_t it = 200;
    const auto r = boost::math::tools::toms748_solve(
        f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50), it);
    return 0.5 * (r.first + r.second);
}

// Indices (excluding the ground state) of the two levels with the largest
// weight on span{|q1;0>, |q0;1_mode>}, returned in ascending energy order.
std::pair<Eigen::Index, Eigen::Index> crossing_pair(const CoupledSystemSpec& spec,
                                                    std::size_t mode, const EigenPairs& ep,
                                                    const Eigen::MatrixXd& tvec) {
    const std::vector<int> vac(spec.modes.size(), 0);
    std::vector<int> one = vac;
    one[mode] = 1;
    std::vector<std::pair<double, Eigen::Index>> w;
    for (Eigen::Index j = 1; j < ep.values.size(); ++j) {
        const auto psi = ep.vectors.col(j);
        w.emplace_back(bare_state_weight(spec, tvec, psi, 1, vac) +
                           bare_state_weight(spec, tvec, psi, 0, one),
                       j);
    }
    if (w.size() < 2) throw NumericError("crossing_pair: too few levels");
    std::partial_sort(w.begin(), w.begin() + 2, w.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    return {std::min(w[0].second, w[1].second), std::max(w[0].second, w[1].second)};
}

int levels_for(const CoupledSystemSpec& spec) {
    const auto dim = static_cast<int>(spec.dimension());
    return std::min(dim, 2 + 2 * static_cast<int>(spec.modes.size()) + 4);
}

CoupledSystemSpec single_mode(const QuantumFitContext& ctx, double g_ghz) {
    CoupledSystemSpec s;
    s.transmon = ctx.transmon;
    ModeSpec m = ModeSpec::from_ghz(ctx.mode_f_ghz, g_ghz * 1e3, ctx.m_max);
    s.modes.push_back(m);
    return s;
}

// Model branches and their derivatives d/dg at each observed flux.
void model_branches(const SplittingObservation& obs, const QuantumFitContext& ctx, double g,
                    Eigen::VectorXd* values, Eigen::VectorXd* derivs) {
    const CoupledSystemSpec spec = single_mode(ctx, g);
    const SparseMatrix c = coupling_operator(spec, 0);
    const std::size_t n = obs.phi.size();
    for (std::size_t k = 0; k < n; ++k) {
        const EigenPairs ep = diagonalize(spec, obs.phi[k], levels_for(spec));
        const EigenPairs tl =
            transmon_levels(spec.transmon, obs.phi[k], spec.transmon.charge_states());
        const auto [lo, hi] = crossing_pair(spec, 0, ep, tl.vectors);
        const auto r = static_cast<Eigen::Index>(2 * k);
        if (values) {
            (*values)[r] = ep.values[lo] - ep.values[0];
            (*values)[r + 1] = ep.values[hi] - ep.values[0];
        }
        if (derivs) {
            auto hf = [&](Eigen::Index j) {
                const Eigen::VectorXd v = ep.vectors.col(j);
                return v.dot(c * v);
            };
            const double d0 = hf(0);
            (*derivs)[r] = hf(lo) - d0;
            (*derivs)[r + 1] = hf(hi) - d0;
        }
    }
}

Eigen::VectorXd observed_vector(const SplittingObservation& obs) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(2 * obs.phi.size()));
    for (std::size_t k = 0; k < obs.phi.size(); ++k) {
        y[static_cast<Eigen::Index>(2 * k)] = obs.lower_ghz[k];
        y[static_cast<Eigen::Index>(2 * k + 1)] = obs.upper_ghz[k];
    }
    return y;
}

// Local transmission peaks near a mode, refined off-grid by Brent's method.
class LocalSpectrum {
public:
    LocalSpectrum(const Network& net, double r0, double lo, double hi, std::size_t points)
        : net_(net), r0_(r0) {
        omega_.resize(points);
        before_.resize(points);
        after_.resize(points);
        for (std::size_t j = 0; j < points; ++j) {
            omega_[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1);
            before_[j] = net.abcd_before_probe(omega_[j]);
            after_[j] = net.abcd_after_probe(omega_[j]);
        }
    }

    std::vector<double> peaks(const LumpedElement& load, double prominence_db) const {
        SpectrumTrace t;
        t.omega = omega_;
        t.s21.resize(omega_.size());
        for (std::size_t j = 0; j < omega_.size(); ++j)
            t.s21[j] = abcd_to_s21(before_[j] * element_abcd(load, omega_[j]) * after_[j], r0_, r0_);
        PeakOptions po;
        po.min_prominence_db = prominence_db;
        std::vector<double> out;
        for (std::size_t i : find_peaks(t, po)) {
            auto neg_power = [&](double w) {
                return -std::norm(abcd_to_s21(net_.abcd_scaled(w, load), r0_, r0_));
            };
            const auto r = boost::math::tools::brent_find_minima(neg_power, omega_[i - 1],
                                                                 omega_[i + 1], 40);
            out.push_back(-r.second >= std::norm(t.s21[i]) ? r.first : omega_[i]);
        }
        return out;
    }

private:
    const Network& net_;
    double r0_;
    std::vector<double> omega_;
    std::vector<Abcd> before_, after_;
};

}  // namespace

double bare_f01(const TransmonSpec& t, double phi) {
    const EigenPairs lv = transmon_levels(t, phi, 2);
    return lv.values[1] - lv.values[0];
}

double flux_for_f01(const TransmonSpec& t, double f_ghz) {
    return root_in([&](double phi) { return bare_f01(t, phi) - f_ghz; }, 0.0, 0.5,
                   "flux_for_f01");
}

double ej_for_f01(const TransmonSpec& t, double f_ghz) {
    if (!(f_ghz > 0.0)) throw DomainError("ej_for_f01: frequency must be > 0");
    TransmonSpec u = t;
    u.asymmetry = 0.0;
    auto f = [&](double ej) {
        u.ej0_ghz = ej;
        return bare_f01(u, 0.0) - f_ghz;
    };
    double hi = (f_ghz + t.ec_ghz) * (f_ghz + t.ec_ghz) / (8.0 * t.ec_ghz) + 1.0;
    while (f(hi) < 0.0) hi *= 2.0;
    return root_in(f, 1e-9, hi, "ej_for_f01");
}

double n01_at_frequency(const TransmonSpec& t, double f_ghz) {
    TransmonSpec u = t;
    u.asymmetry = 0.0;
    u.ej0_ghz = ej_for_f01(t, f_ghz);
    return charge_matrix_element(u, 0.0, 0, 1);
}

EjFit fit_global_ej0(const std::vector<CrossingPoint>& points, const TransmonSpec& base) {
    if (points.empty()) throw FitError("fit_global_ej0: no crossing points");
    base.validate();
    auto f01_with = [&](double ej0, double phi) {
        TransmonSpec t = base;
        t.ej0_ghz = ej0;
        return bare_f01(t, phi);
    };
    // Per-point exact solutions bound the search interval.
    std::vector<double> single;
    for (const auto& p : points) {
        if (std::abs(std::cos(kPi * p.phi)) < 1e-6 && base.asymmetry == 0.0) continue;
        double hi = 1.0;
        while (f01_with(hi, p.phi) < p.f_ghz && hi < 1e6) hi *= 2.0;
        try {
            single.push_back(root_in([&](double e) { return f01_with(e, p.phi) - p.f_ghz; },
                                     1e-9, hi, "fit_global_ej0"));
        } catch (const DomainError&) {
        }
    }
    if (single.empty()) throw FitError("fit_global_ej0: no crossing point constrains E_J0");

    EjFit out;
    if (points.size() == 1) {
        out.ej0_ghz = single.front();
        return out;
    }
    const bool all_same = std::all_of(points.begin(), points.end(), [&](const CrossingPoint& p) {
        return p.phi == points.front().phi;
    });
    if (all_same) throw FitError("fit_global_ej0: all crossing points share one flux value");

    auto sse = [&](double ej0) {
        double s = 0.0;
        for (const auto& p : points) {
            const double d = f01_with(ej0, p.phi) - p.f_ghz;
            s += d * d;
        }
        return s;
    };
    const auto [mn, mx] = std::minmax_element(single.begin(), single.end());
    std::uintmax_t it = 200;
    const auto r = boost::math::tools::brent_find_minima(sse, 0.5 * *mn, 2.0 * *mx, 50, it);
    out.ej0_ghz = r.first;
    out.rms_ghz = std::sqrt(r.second / static_cast<double>(points.size()));
    return out;
}

void SplittingObservation::validate() const {
    if (phi.empty()) throw DomainError("SplittingObservation: empty flux grid");
    if (lower_ghz.size() != phi.size() || upper_ghz.size() != phi.size())
        throw DomainError("SplittingObservation: branch arrays must match the flux grid");
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (i > 0 && !(phi[i] > phi[i - 1]))
            throw DomainError("SplittingObservation: flux grid must be strictly increasing");
        if (!(upper_ghz[i] >= lower_ghz[i]))
            throw DomainError("SplittingObservation: upper branch below lower branch");
    }
}

SplittingObservation synthesize_splitting(const CoupledSystemSpec& spec, std::size_t mode,
                                          const std::vector<double>& phis) {
    if (mode >= spec.modes.size()) throw DomainError("synthesize_splitting: bad mode index");
    SplittingObservation obs;
    obs.mode_index = mode;
    for (double phi : phis) {
        const EigenPairs ep = diagonalize(spec, phi, levels_for(spec));
        const EigenPairs tl = transmon_levels(spec.transmon, phi, spec.transmon.charge_states());
        const auto [lo, hi] = crossing_pair(spec, mode, ep, tl.vectors);
        obs.phi.push_back(phi);
        obs.lower_ghz.push_back(ep.values[lo] - ep.values[0]);
        obs.upper_ghz.push_back(ep.values[hi] - ep.values[0]);
    }
    return obs;
}

const char* to_string(CouplingMethod m) {
    switch (m) {
        case CouplingMethod::QuantumFit: return "quantum-fit";
        case CouplingMethod::Semiclassical: return "semiclassical";
        case CouplingMethod::CoupledModeFit: return "coupled-mode-fit";
    }
    return "unknown";
}

double quantum_fit_objective(const SplittingObservation& obs, const QuantumFitContext& ctx,
                             double g_ghz) {
    obs.validate();
    Eigen::VectorXd m(static_cast<Eigen::Index>(2 * obs.phi.size()));
    model_branches(obs, ctx, g_ghz, &m, nullptr);
    return (m - observed_vector(obs)).squaredNorm();
}

CouplingEstimate fit_g_quantum(const SplittingObservation& obs, const QuantumFitContext& ctx) {
    obs.validate();
    if (!(ctx.mode_f_ghz > 0.0)) throw DomainError("fit_g_quantum: mode frequency must be > 0");
    const Eigen::VectorXd y = observed_vector(obs);
    const double n01 = n01_at_frequency(ctx.transmon, ctx.mode_f_ghz);

    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < obs.phi.size(); ++k)
        min_gap = std::min(min_gap, obs.upper_ghz[k] - obs.lower_ghz[k]);
    Eigen::VectorXd x0(1);
    x0[0] = std::max(0.5 * min_gap / n01, 1e-5);

    LeastSquaresProblem prob;
    prob.residual_count = static_cast<std::size_t>(y.size());
    prob.residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        model_branches(obs, ctx, x[0], &r, nullptr);
        r -= y;
    };
    prob.jacobian = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& j) {
        Eigen::VectorXd d(y.size());
        model_branches(obs, ctx, x[0], nullptr, &d);
        j.col(0) = d;
    };
    LeastSquaresOptions opt;
    opt.max_evaluations = 400;
    opt.ftol = 1e-12;
    opt.xtol = 1e-12;
    const LeastSquaresResult res = solve_least_squares(prob, x0, opt);
    if (!res.converged) {
        std::ostringstream os;
        os << "status=" << res.status << " (" << res.message << ") evaluations="
           << res.evaluations << " g_start=" << x0[0] << " GHz g_end=" << res.x[0]
           << " GHz rms=" << res.rms;
        throw FitError("fit_g_quantum: optimizer did not converge", os.str());
    }
    CouplingEstimate e;
    e.mode_index = obs.mode_index;
    e.omega = ghz_to_omega(ctx.mode_f_ghz);
    e.g_prefactor = ghz_to_omega(std::abs(res.x[0]));
    e.g_halfsplit = e.g_prefactor * n01;
    e.method = CouplingMethod::QuantumFit;
    e.residual = res.rms;
    return e;
}

double QubitCircuit::total_capacitance() const {
    return caps.shunt() + c_qm + (readout ? readout->c_qr : 0.0);
}

double inductance_for_ej(double ej_ghz) {
    if (!(ej_ghz > 0.0)) throw DomainError("inductance_for_ej: E_J must be > 0");
    const double phi0 = kFluxQuantum / kTwoPi;
    return phi0 * phi0 / (kPlanck * ej_ghz * 1e9);
}

double lc_frequency(const QubitCircuit& q, double inductance) {
    if (!(inductance > 0.0)) throw DomainError("lc_frequency: inductance must be > 0");
    return 1.0 / std::sqrt(inductance * q.total_capacitance());
}

double inductance_for_frequency(const QubitCircuit& q, double omega) {
    if (!(omega > 0.0)) throw DomainError("inductance_for_frequency: omega must be > 0");
    return 1.0 / (omega * omega * q.total_capacitance());
}

LumpedElement qubit_tap_load(const QubitCircuit& q, std::optional<double> inductance) {
    if (!(q.c_qm > 0.0)) throw DomainError("qubit_tap_load: C_QM must be > 0");
    if (inductance && !(*inductance > 0.0))
        throw DomainError("qubit_tap_load: inductance must be > 0");
    const QubitCircuit qc = q;
    return {ElementKind::ShuntAdmittance, [qc, inductance](double w) {
                Complex y = capacitor_admittance(qc.caps.shunt(), w);
                if (inductance) y += 1.0 / (kI * w * *inductance);
                if (qc.readout) y += 1.0 / readout_impedance(*qc.readout, w);
                if (std::abs(y) < kDenominatorGuard) return Complex(0.0);
                const Complex z = capacitor_impedance(qc.c_qm, w) + 1.0 / y;
                if (std::abs(z) < kDenominatorGuard)
                    throw NumericError("qubit_tap_load: series resonance of the tap branch");
                return 1.0 / z;
            }};
}

ModeCatalog bare_mode_catalog(const HybridResonatorSpec& spec, const QubitCircuit& q,
                              const FrequencyGrid& coarse, const CatalogOptions& options) {
    const Network net = build_hybrid_network(spec);
    const LumpedElement load = qubit_tap_load(q, std::nullopt);
    const double r0 = spec.r0;
    return catalog_refined(
        [&](double w) { return abcd_to_s21(net.abcd_scaled(w, load), r0, r0); }, coarse, options);
}

CouplingEstimate extract_g_semiclassical(const HybridResonatorSpec& spec, const QubitCircuit& q,
                                         const ModeCatalog& bare, std::size_t mode_index,
                                         const SemiclassicalOptions& opt) {
    if (mode_index >= bare.modes.size())
        throw DomainError("extract_g_semiclassical: mode index outside the catalog");
    const double wi = bare.modes[mode_index].omega;
    const double below =
        mode_index > 0 ? wi - bare.modes[mode_index - 1].omega : std::numeric_limits<double>::infinity();
    const double above = mode_index + 1 < bare.modes.size()
                             ? bare.modes[mode_index + 1].omega - wi
                             : std::numeric_limits<double>::infinity();
    if (!std::isfinite(below) && !std::isfinite(above))
        throw DomainError("extract_g_semiclassical: need at least two catalog modes");
    const double w_lo = 0.5 * (std::isfinite(below) ? below : above);
    const double w_hi = 0.5 * (std::isfinite(above) ? above : below);

    const Network net = build_hybrid_network(spec);
    const LocalSpectrum local(net, spec.r0, wi - w_lo, wi + w_hi, opt.spectrum_points);
    const double unresolved = 4.0 * (w_lo + w_hi);
    auto separation = [&](double nu) {
        const LumpedElement load = qubit_tap_load(q, inductance_for_frequency(q, nu));
        const std::vector<double> pk = local.peaks(load, opt.peak_prominence_db);
        double best = unresolved;
        for (std::size_t k = 0; k + 1 < pk.size(); ++k)
            if (pk[k] < wi && pk[k + 1] > wi) best = std::min(best, pk[k + 1] - pk[k]);
        return best;
    };

    const double span = opt.sweep_fraction * std::min(w_lo, w_hi);
    double centre = wi;
    for (int attempt = 0; attempt <= opt.max_recentre; ++attempt) {
        const int n = std::max(opt.coarse_points, 5);
        std::vector<double> nu(static_cast<std::size_t>(n)), sep(nu.size());
        for (int k = 0; k < n; ++k) {
            nu[static_cast<std::size_t>(k)] = centre - span + 2.0 * span * k / (n - 1);
            sep[static_cast<std::size_t>(k)] = separation(nu[static_cast<std::size_t>(k)]);
        }
        const double smin = *std::min_element(sep.begin(), sep.end());
        if (smin >= unresolved) {
            centre += attempt % 2 == 0 ? span * (attempt + 1) : -span * (attempt + 1);
            continue;
        }
        // Midpoint of a plateau of equal minima.
        std::vector<std::size_t> at;
        for (std::size_t k = 0; k < sep.size(); ++k)
            if (sep[k] == smin) at.push_back(k);
        const std::size_t kbest = at[at.size() / 2];
        if (kbest == 0 || kbest + 1 == sep.size()) {
            centre = nu[kbest];
            continue;
        }
        std::uintmax_t it = 80;
        const auto r = boost::math::tools::brent_find_minima(separation, nu[kbest - 1],
                                                             nu[kbest + 1], 40, it);
        const double sep_min = std::min(r.second, smin);
        CouplingEstimate e;
        e.mode_index = mode_index;
        e.omega = wi;
        e.g_halfsplit = 0.5 * sep_min;
        e.g_prefactor =
            e.g_halfsplit / n01_at_frequency(q.transmon, omega_to_ghz(wi));
        e.method = CouplingMethod::Semiclassical;
        e.residual = std::abs(smin - sep_min);
        return e;
    }
    std::ostringstream os;
    os << "extract_g_semiclassical: branches around " << omega_to_ghz(wi)
       << " GHz not resolved; refine the spectrum or widen the sweep";
    throw ResolutionError(os.str());
}

std::vector<std::optional<double>> superstrong_ratio(const CouplingSet& couplings,
                                                     const ModeCatalog& catalog) {
    std::vector<std::optional<double>> out;
    for (const auto& c : couplings.modes) {
        if (c.mode_index >= catalog.modes.size())
            throw DomainError("superstrong_ratio: coupling refers to a mode outside the catalog");
        if (c.mode_index + 1 >= catalog.modes.size()) {
            out.emplace_back();
            continue;
        }
        const double dw = catalog.modes[c.mode_index + 1].omega - catalog.modes[c.mode_index].omega;
        out.emplace_back(c.g_halfsplit / dw);
    }
    return out;
}

DesignScanResult design_scan(const HybridResonatorSpec& spec, const QubitCircuit& q,
                             const ModeCatalog& bare, const DesignScanOptions& opt) {
    DesignScanResult res;
    res.bare = bare;
    for (std::size_t i = 0; i < bare.modes.size(); ++i) {
        const double f = omega_to_ghz(bare.modes[i].omega);
        if (f >= opt.f_lo_ghz && f <= opt.f_hi_ghz && res.window_modes.size() < opt.modes)
            res.window_modes.push_back(i);
    }
    if (res.window_modes.size() != opt.modes) {
        std::ostringstream os;
        os << "design_scan: found " << res.window_modes.size() << " modes in [" << opt.f_lo_ghz
           << ", " << opt.f_hi_ghz << "] GHz, expected " << opt.modes;
        throw FitError(os.str());
    }
    const std::size_t m = opt.modes;
    const std::size_t first = res.window_modes.front();
    const std::size_t last = res.window_modes.back();
    const double w_first = bare.modes[first].omega;
    const double w_last = bare.modes[last].omega;
    const double gap_lo = first > 0 ? w_first - bare.modes[first - 1].omega
                                    : bare.modes[first + 1].omega - w_first;
    const double gap_hi = last + 1 < bare.modes.size() ? bare.modes[last + 1].omega - w_last
                                                       : w_last - bare.modes[last - 1].omega;
    const double obs_lo = w_first - 0.5 * gap_lo;
    const double obs_hi = w_last + 0.5 * gap_hi;

    const Network net = build_hybrid_network(spec);
    const LocalSpectrum local(net, spec.r0, obs_lo, obs_hi, opt.spectrum_points);
    const double nu_lo = omega_to_ghz(w_first) - opt.sweep_margin_ghz;
    const double nu_hi = omega_to_ghz(w_last) + opt.sweep_margin_ghz;
    std::vector<double> obs_nu, obs_f;
    for (int k = 0; k < opt.sweep_points; ++k) {
        const double nu = nu_lo + (nu_hi - nu_lo) * k / std::max(opt.sweep_points - 1, 1);
        const LumpedElement load = qubit_tap_load(q, inductance_for_frequency(q, ghz_to_omega(nu)));
        std::vector<double> br;
        for (double w : local.peaks(load, opt.peak_prominence_db)) {
            br.push_back(omega_to_ghz(w));
            obs_nu.push_back(nu);
            obs_f.push_back(omega_to_ghz(w));
        }
        res.sweep_ghz.push_back(nu);
        res.branches_ghz.push_back(std::move(br));
    }
    if (obs_f.size() < 2 * m + 1) throw FitError("design_scan: too few resolved branches");

    // Neighbouring modes outside the window still pull on the branches when
    // g approaches the spacing; they enter with bare frequencies held fixed.
    std::vector<double> guard_f;
    for (std::size_t k = 1; k <= opt.guard_modes; ++k) {
        if (first >= k) guard_f.push_back(omega_to_ghz(bare.modes[first - k].omega));
        if (last + k < bare.modes.size()) guard_f.push_back(omega_to_ghz(bare.modes[last + k].omega));
    }
    const std::size_t ng = guard_f.size();

    // Parameters: qubit scale s, mode frequencies f_i, couplings g_i, guard
    // couplings (GHz).
    const auto np = static_cast<Eigen::Index>(2 * m + 1 + ng);
    const auto dim = static_cast<Eigen::Index>(m + ng + 1);
    auto eigen_branches = [m, ng, dim, &guard_f](const Eigen::VectorXd& p, double nu) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        h(0, 0) = p[0] * nu;
        for (std::size_t i = 0; i < m; ++i) {
            const auto r = static_cast<Eigen::Index>(i + 1);
            h(r, r) = p[r];
            h(0, r) = h(r, 0) = p[static_cast<Eigen::Index>(m + 1 + i)];
        }
        for (std::size_t j = 0; j < ng; ++j) {
            const auto r = static_cast<Eigen::Index>(m + 1 + j);
            h(r, r) = guard_f[j];
            h(0, r) = h(r, 0) = p[static_cast<Eigen::Index>(2 * m + 1 + j)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
        return Eigen::VectorXd(es.eigenvalues());
    };
    auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        double cached_nu = std::numeric_limits<double>::quiet_NaN();
        Eigen::VectorXd ev;
        for (std::size_t k = 0; k < obs_f.size(); ++k) {
            if (obs_nu[k] != cached_nu) {
                ev = eigen_branches(p, obs_nu[k]);
                cached_nu = obs_nu[k];
            }
            r[static_cast<Eigen::Index>(k)] = (ev.array() - obs_f[k]).abs().minCoeff();
        }
    };

    Eigen::VectorXd x0(np);
    const double g_guess = 0.5 * omega_to_ghz(w_last - w_first) / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        x0[static_cast<Eigen::Index>(i + 1)] = omega_to_ghz(bare.modes[res.window_modes[i]].omega);
        x0[static_cast<Eigen::Index>(m + 1 + i)] = g_guess;
    }
    for (std::size_t j = 0; j < ng; ++j) x0[static_cast<Eigen::Index>(2 * m + 1 + j)] = g_guess;
    Eigen::VectorXd r(static_cast<Eigen::Index>(obs_f.size()));
    double best = std::numeric_limits<double>::infinity();
    double best_s = 1.0;
    for (double s = 0.80; s <= 1.20; s += 0.001) {
        x0[0] = s;
        residuals(x0, r);
        if (r.squaredNorm() < best) {
            best = r.squaredNorm();
            best_s = s;
        }
    }
    x0[0] = best_s;

    LeastSquaresProblem prob;
    prob.residual_count = obs_f.size();
    prob.residuals = residuals;
    LeastSquaresOptions lso;
    lso.max_evaluations = 20000;
    lso.ftol = 1e-12;
    lso.xtol = 1e-12;
    const LeastSquaresResult fit = solve_least_squares(prob, x0, lso);
    if (!fit.converged) {
        std::ostringstream os;
        os << "status=" << fit.status << " (" << fit.message << ") rms=" << fit.rms;
        throw FitError("design_scan: coupled-mode fit did not converge", os.str());
    }
    res.qubit_scale = fit.x[0];
    res.residual_ghz = fit.rms;
    for (std::size_t i = 0; i < m; ++i) {
        const double f = fit.x[static_cast<Eigen::Index>(i + 1)];
        const double g = std::abs(fit.x[static_cast<Eigen::Index>(m + 1 + i)]);
        res.fitted_mode_ghz.push_back(f);
        CouplingEstimate e;
        e.mode_index = res.window_modes[i];
        e.omega = bare.modes[e.mode_index].omega;
        e.g_halfsplit = ghz_to_omega(g);
        e.g_prefactor = e.g_halfsplit / n01_at_frequency(q.transmon, f);
        e.method = CouplingMethod::CoupledModeFit;
        e.residual = fit.rms;
        res.couplings.modes.push_back(e);
    }
    res.ratios = superstrong_ratio(res.couplings, bare);
    return res;
}

}  // namespace metaqed
