// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <metaqed/coupling.hpp>
#include <metaqed/errors.hpp>
#include <metaqed/hamiltonian.hpp>
#include <metaqed/metamaterial.hpp>
#include <metaqed/modes.hpp>
#include <metaqed/purcell.hpp>
#include <metaqed/stark.hpp>
#include <metaqed/workbench/device.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gen.hpp"
#include "nodal_oracle.hpp"

using namespace metaqed;
namespace wb = metaqed::workbench;

namespace {

const Complex kI{0.0, 1.0};
const std::string kData = METAQED_DATA_DIR;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, std::string note) {
        pass = pass && ok;
        notes.push_back(fmt::format("{}{}", ok ? "" : "FAIL ", note));
    }
};

struct Criterion {
    int id;
    const char* title;
    double limit_s;
    std::function<Outcome()> run;
};

wb::DeviceModel paper_model() { return wb::build_model(wb::parse_device(kData + "/paper-device.json")); }
wb::DeviceModel table2_model() { return wb::build_model(wb::parse_device(kData + "/table2-device.json")); }

std::size_t count_between(const ModeCatalog& cat, double lo, double hi) {
    return static_cast<std::size_t>(std::count_if(cat.modes.begin(), cat.modes.end(), [&](const ModeRecord& m) {
        return m.omega > lo && m.omega < hi;
    }));
}

// Semiclassical half-splitting couplings (MHz) of every catalog mode below f_max.
std::vector<std::pair<double, double>> coupling_curve(const wb::DeviceModel& m, const ModeCatalog& cat,
                                                      double f_max_ghz) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < cat.modes.size(); ++i) {
        const double f = omega_to_ghz(cat.modes[i].omega);
        if (f >= f_max_ghz) continue;
        const auto e = extract_g_semiclassical(m.resonator, m.qubit, cat, i);
        out.emplace_back(f, omega_to_ghz(e.g_halfsplit) * 1e3);
    }
    return out;
}

Outcome transmon_frequency() {
    Outcome o;
    const TransmonSpec t{0.31, 37.0};
    const double f = bare_f01(t, 0.0);
    o.check(std::abs(f / 9.25 - 1.0) <= 0.01, fmt::format("f01(0) = {:.4f} GHz, target 9.25 GHz +/- 1%", f));
    return o;
}

Outcome mode_count() {
    Outcome o;
    const auto model = paper_model();
    const LhtlCell c = model.resonator.cell;
    const auto edges = band_edges(c);
    for (int n : {5, 10, 42}) {
        const Network net = build_lhtl_resonator(c, n, model.resonator.input_coupling,
                                                 model.resonator.output_coupling,
                                                 model.resonator.coupler_loss_tangent);
        const auto cat = catalog_refined([&](double w) { return abcd_to_s21(net.abcd_scaled(w), 50.0, 50.0); },
                                         FrequencyGrid::linear_ghz(1.0, 45.0, 20001));
        const auto got = count_between(cat, 0.9 * edges.infrared, edges.lh_top);
        o.check(got == static_cast<std::size_t>(n), fmt::format("LHTL-only N={}: {} passband modes", n, got));
    }
    const auto cat = bare_mode_catalog(model.resonator, model.qubit, FrequencyGrid::linear_ghz(3.0, 9.25, 20001));
    const auto below = count_between(cat, 0.0, ghz_to_omega(9.25));
    o.check(below >= 19 && below <= 23, fmt::format("hybrid device: {} modes below 9.25 GHz, target 21 +/- 2", below));
    return o;
}

std::vector<double> fluxes_around(const TransmonSpec& t, double f, double hw, int points) {
    const double lo = flux_for_f01(t, f + hw);
    const double hi = flux_for_f01(t, f - hw);
    std::vector<double> phis;
    for (int k = 0; k < points; ++k) phis.push_back(lo + (hi - lo) * k / (points - 1));
    return phis;
}

Outcome coupling_round_trip() {
    Outcome o;
    const TransmonSpec t{0.31, 37.0};
    const double f = 7.8;
    for (double g : {5.0, 22.0, 100.0}) {
        CoupledSystemSpec spec;
        spec.transmon = t;
        spec.modes.push_back(ModeSpec::from_ghz(f, g / n01_at_frequency(t, f)));
        const auto obs = synthesize_splitting(spec, 0, fluxes_around(t, f, std::max(0.15, 4e-3 * g), 21));
        const auto e = fit_g_quantum(obs, {t, f, 3});
        const double got = omega_to_ghz(e.g_halfsplit) * 1e3;
        o.check(std::abs(got / g - 1.0) <= 0.01, fmt::format("g = {} MHz refit to {:.4f} MHz", g, got));
    }
    CoupledSystemSpec two;
    two.transmon = t;
    two.modes.push_back(ModeSpec::from_ghz(7.8, 22.0 / n01_at_frequency(t, 7.8)));
    two.modes.push_back(ModeSpec::from_ghz(8.05, 24.0 / n01_at_frequency(t, 8.05)));
    const auto obs = synthesize_splitting(two, 0, fluxes_around(t, 7.8, 0.06, 13));
    const double single = omega_to_ghz(fit_g_quantum(obs, {t, 7.8, 3}).g_halfsplit) * 1e3;
    o.check(std::abs(single / 22.0 - 1.0) <= 0.05,
            fmt::format("single-mode fit of two-mode data: {:.3f} MHz vs 22 MHz", single));
    return o;
}

std::size_t interior_minima(const std::vector<std::pair<double, double>>& curve) {
    std::size_t n = 0;
    for (std::size_t i = 1; i + 1 < curve.size(); ++i)
        if (curve[i].second < curve[i - 1].second && curve[i].second < curve[i + 1].second) ++n;
    return n;
}

Outcome coupling_shape() {
    Outcome o;
    const auto model = paper_model();
    const auto cat = bare_mode_catalog(model.resonator, model.qubit, FrequencyGrid::linear_ghz(3.0, 9.25, 20001));
    const auto curve = coupling_curve(model, cat, model.f01_max_ghz);
    const bool monotone = std::is_sorted(curve.begin(), curve.end(), [](auto& a, auto& b) { return a.second < b.second; });
    o.check(!monotone && curve.size() > 2, fmt::format("g_i over {} modes is non-monotonic", curve.size()));
    const auto peak = *std::max_element(curve.begin(), curve.end(), [](auto& a, auto& b) { return a.second < b.second; });
    o.check(peak.first >= 7.3 && peak.first <= 8.3,
            fmt::format("maximum {:.2f} MHz at {:.3f} GHz, target 7.3-8.3 GHz", peak.second, peak.first));
    o.check(peak.second >= 22.0 / 1.5 && peak.second <= 22.0 * 1.5,
            fmt::format("maximum magnitude {:.2f} MHz within x1.5 of 22 MHz", peak.second));

    // Hypothetical qubit with a 20 GHz sweet spot to reach the higher modes.
    wb::DeviceModel ext = model;
    ext.qubit.transmon.ej0_ghz = ej_for_f01(ext.qubit.transmon, 20.0);
    const auto wide = bare_mode_catalog(ext.resonator, ext.qubit, FrequencyGrid::linear_ghz(3.0, 19.5, 40001));
    const auto ext_curve = coupling_curve(ext, wide, 19.0);
    const auto dips = interior_minima(ext_curve);
    o.check(dips >= 2, fmt::format("extended sweep to 19 GHz ({} modes): {} dips", ext_curve.size(), dips));
    return o;
}

Outcome superstrong_design() {
    Outcome o;
    const auto model = table2_model();
    const auto cat = bare_mode_catalog(model.resonator, model.qubit, FrequencyGrid::linear_ghz(7.05, 9.25, 8001));
    const auto res = design_scan(model.resonator, model.qubit, cat);
    const double f_ref[] = {7.91, 8.04, 8.17, 8.31};
    const double g_ref[] = {220.0, 193.0, 180.0, 178.0};
    if (res.couplings.modes.size() != 4) {
        o.check(false, fmt::format("design scan returned {} modes", res.couplings.modes.size()));
        return o;
    }
    double r_min = std::numeric_limits<double>::infinity(), r_max = 0.0;
    bool all_above = true;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& c = res.couplings.modes[i];
        const double f = omega_to_ghz(c.omega);
        const double g = omega_to_ghz(c.g_halfsplit) * 1e3;
        o.check(std::abs(f - f_ref[i]) <= 0.05, fmt::format("mode {:.4f} GHz vs {} GHz", f, f_ref[i]));
        o.check(std::abs(g / g_ref[i] - 1.0) <= 0.15, fmt::format("g {:.1f} MHz vs {} MHz", g, g_ref[i]));
        const double r = res.ratios[i].value_or(0.0);
        all_above = all_above && r > 1.0;
        r_min = std::min(r_min, r);
        r_max = std::max(r_max, r);
    }
    o.check(all_above, fmt::format("g_i/dw_i in [{:.3f}, {:.3f}], all > 1", r_min, r_max));
    o.check(r_max >= 1.28 && r_min <= 1.84, "ratio range overlaps 1.28-1.84");
    return o;
}

Outcome purcell_curve() {
    Outcome o;
    const auto d = wb::parse_device(kData + "/paper-device.json");
    const auto model = wb::build_model(d);
    const double a = floor_constant_for(d.sweep.t1_floor_us * 1e-6, d.sweep.t1_floor_ref_ghz);

    const auto low = t1_curve(model.environment, model.qubit.caps, a, FrequencyGrid::linear_ghz(3.5, 4.5, 1001));
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& p : low.points) {
        lo = std::min(lo, p.t1_total * 1e6);
        hi = std::max(hi, p.t1_total * 1e6);
    }
    o.check(lo >= 10.0 && hi <= 19.0, fmt::format("T1 over 3.5-4.5 GHz spans {:.2f}-{:.2f} us", lo, hi));

    const auto cat = bare_mode_catalog(model.resonator, model.qubit, FrequencyGrid::linear_ghz(5.5, 9.25, 20001));
    const auto curve = t1_curve(model.environment, model.qubit.caps, a, FrequencyGrid::linear_ghz(5.5, 9.25, 400001));
    std::vector<std::size_t> minima;
    for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) {
        const double t = curve.points[i].t1_total;
        if (t < curve.points[i - 1].t1_total && t < curve.points[i + 1].t1_total) minima.push_back(i);
    }
    std::size_t aligned = 0, sub_us = 0;
    std::vector<std::size_t> dips;
    for (const auto& m : cat.modes) {
        std::size_t best = minima.empty() ? 0 : minima.front();
        for (auto i : minima)
            if (std::abs(curve.points[i].omega - m.omega) < std::abs(curve.points[best].omega - m.omega)) best = i;
        if (!minima.empty() && std::abs(curve.points[best].omega - m.omega) <= m.kappa) {
            ++aligned;
            dips.push_back(best);
            if (curve.points[best].t1_total < 1e-6) ++sub_us;
        }
    }
    o.check(aligned == cat.modes.size() && sub_us == aligned,
            fmt::format("{} modes: {} dips within one linewidth, {} below 1 us", cat.modes.size(), aligned, sub_us));

    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < dips.size(); ++k) {
        double peak = 0.0;
        for (std::size_t i = dips[k]; i <= dips[k + 1]; ++i) peak = std::max(peak, curve.points[i].t1_total);
        const double dip = std::max(curve.points[dips[k]].t1_total, curve.points[dips[k + 1]].t1_total);
        worst = std::min(worst, peak / dip);
    }
    o.check(worst >= 5.0, fmt::format("smallest recovery between adjacent dips x{:.1f}", worst));
    return o;
}

Outcome stark_model() {
    Outcome o;
    StarkScenario s;
    s.omega_q = ghz_to_omega(6.275);
    s.omega_mode = ghz_to_omega(6.588);
    s.omega_drive = s.omega_mode + ghz_to_omega(4e-4);
    s.eta = ghz_to_omega(-0.31);
    s.kappa = ghz_to_omega(1e-3);
    s.g = ghz_to_omega(0.015);

    std::vector<double> power;
    for (int k = 0; k <= 40; ++k) power.push_back(0.025 * k);
    const auto map = stark_map(s, SweepAxis::DrivePower, power, PowerCalibration{ghz_to_omega(1e-3) * ghz_to_omega(1e-3)});
    double sxy = 0.0, sxx = 0.0;
    for (const auto& c : map.columns) {
        sxy += c.sweep_value * (c.qubit_line - s.omega_q);
        sxx += c.sweep_value * c.sweep_value;
    }
    const double slope = sxy / sxx;
    double resid = 0.0;
    for (const auto& c : map.columns)
        resid = std::max(resid, std::abs(c.qubit_line - s.omega_q - slope * c.sweep_value));
    const double rel = resid / std::abs(slope * power.back());
    o.check(rel < 1e-9, fmt::format("linear fit of shift vs power, max relative residual {:.2e}", rel));

    gen::Source src(77);
    double nbar_err = 0.0;
    for (int k = 0; k < 200; ++k) {
        StarkScenario r = s;
        r.kappa = ghz_to_omega(src.log_uniform(1e-4, 1e-2));
        r.drive = ghz_to_omega(src.log_uniform(1e-5, 1e-1));
        r.omega_drive = r.omega_mode;
        const double expect = 4.0 * r.drive * r.drive / (r.kappa * r.kappa);
        nbar_err = std::max(nbar_err, std::abs(mean_photons(r) / expect - 1.0));
    }
    o.check(nbar_err <= 4.0 * std::numeric_limits<double>::epsilon(),
            fmt::format("on-resonance nbar = 4 Omega^2/kappa^2, max relative error {:.1e}", nbar_err));

    // Device values: anharmonicity of the transmon at 6.275 GHz, coupling and
    // linewidth of the catalog modes nearest the two drives.
    const auto model = paper_model();
    CoupledSystemSpec bare;
    bare.transmon = model.qubit.transmon;
    const double eta = transition_frequencies(bare, flux_for_f01(bare.transmon, 6.275)).anharmonicity;
    const auto cat = bare_mode_catalog(model.resonator, model.qubit, FrequencyGrid::linear_ghz(5.6, 7.0, 6001));
    auto scenario = [&](double f_mode) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < cat.modes.size(); ++i)
            if (std::abs(cat.modes[i].omega - ghz_to_omega(f_mode)) < std::abs(cat.modes[idx].omega - ghz_to_omega(f_mode)))
                idx = i;
        StarkScenario d;
        d.omega_q = ghz_to_omega(6.275);
        d.eta = ghz_to_omega(eta);
        d.omega_mode = d.omega_drive = ghz_to_omega(f_mode);
        d.kappa = cat.modes[idx].kappa;
        d.g = extract_g_semiclassical(model.resonator, model.qubit, cat, idx).g_halfsplit;
        d.drive = 0.5 * d.kappa;
        return d;
    };
    const auto a = scenario(6.003), b = scenario(6.588);
    for (auto f : {ChiFormula::Paper, ChiFormula::Standard}) {
        const double ca = omega_to_ghz(chi(a, f)) * 1e3, cb = omega_to_ghz(chi(b, f)) * 1e3;
        o.check(ca * cb < 0.0, fmt::format("{} formula: chi(6.003) = {:+.4f} MHz, chi(6.588) = {:+.4f} MHz (eta {:.4f} GHz)",
                                           f == ChiFormula::Paper ? "paper" : "standard", ca, cb, eta));
    }
    return o;
}

Outcome oracle_suites() {
    Outcome o;
    gen::Source src(5);
    double worst_mna = 0.0;
    for (int cells = 1; cells <= 5; ++cells) {
        const double cs = src.log_uniform(50e-15, 500e-15), ll = src.log_uniform(0.2e-9, 2e-9);
        const double cp = src.log_uniform(5e-15, 50e-15), lp = src.log_uniform(0.01e-9, 0.1e-9);
        const double cc = src.log_uniform(10e-15, 100e-15);
        const LhtlCell cell{cs, ll, lp, cp, 1e-4, 0.0};
        Network net;
        net.add(LumpedElement::series_capacitor(cc)).add(lhtl_ladder(cell), cells).add(LumpedElement::series_capacitor(cc));
        for (double f = 1.0; f <= 15.0; f += 0.37) {
            const double w = ghz_to_omega(f);
            oracle::Netlist nl;
            const int in = nl.add_node();
            int node = nl.add_node();
            nl.add(in, node, 1.0 / (kI * w * cc));
            for (int k = 0; k < cells; ++k) {
                nl.add(node, -1, 1.0 / (kI * w * cp));
                nl.add(node, -1, kI * w * ll);
                const int mid = nl.add_node(), next = nl.add_node();
                nl.add(node, mid, kI * w * lp);
                nl.add(mid, next, 1.0 / (kI * w * cs));
                node = next;
            }
            const int out = nl.add_node();
            nl.add(node, out, 1.0 / (kI * w * cc));
            worst_mna = std::max(worst_mna, gen::rel_err(abcd_to_s21(net.abcd(w), 50.0, 50.0), nl.s21(in, out, 50.0, 50.0)));
        }
    }
    o.check(worst_mna <= 1e-9, fmt::format("ABCD cascade vs nodal analysis (1-5 cells): max rel err {:.1e}", worst_mna));

    const LhtlCell c{250e-15, 0.7e-9, 0.03e-9, 25e-15, 1e-4, 1e-5};
    const auto e = band_edges(c);
    double worst_z = 0.0;
    for (int n = 1; n <= 8; ++n) {
        for (int k = 0; k < 40; ++k) {
            const double w = src.uniform(e.infrared * 1.0001, e.lh_top * 0.9999);
            const Complex zt = capacitor_impedance(30e-15, w) + 50.0;
            oracle::Netlist nl;
            const int port = nl.add_node();
            int node = port;
            for (int j = 0; j < n; ++j) {
                const int next = nl.add_node();
                nl.add(node, next, c.series_impedance(w));
                nl.add(next, -1, 1.0 / c.shunt_admittance(w));
                node = next;
            }
            nl.add(node, -1, zt);
            worst_z = std::max(worst_z, gen::rel_err(lhtl_input_impedance(c, n, zt, w), nl.input_impedance(port)));
        }
    }
    o.check(worst_z <= 1e-6, fmt::format("closed-form Z_LHTL vs explicit ladder (N <= 8): max rel err {:.1e}", worst_z));

    const TransmonSpec t{0.31, 37.0};
    CoupledSystemSpec small{t, {ModeSpec::from_ghz(7.81, 22.0 / n01_at_frequency(t, 7.81))}};
    CoupledSystemSpec large = small;
    large.transmon.n_max = 15;
    large.modes[0].m_max = 6;
    double worst_e = 0.0;
    for (double phi : {0.0, flux_for_f01(t, 7.81), 0.4}) {
        const auto a = diagonalize(small, phi, 5).values;
        const auto b = diagonalize(large, phi, 5).values;
        worst_e = std::max(worst_e, (a - b).cwiseAbs().maxCoeff());
    }
    o.check(worst_e <= 1e-4, fmt::format("lowest 5 levels, n_max 10/m_max 3 vs 15/6: max diff {:.1e} GHz", worst_e));
    return o;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "transmon frequency", 1.0, transmon_frequency},
        {2, "mode count", 30.0, mode_count},
        {3, "coupling round trip", 120.0, coupling_round_trip},
        {4, "coupling shape", 300.0, coupling_shape},
        {5, "superstrong design", 300.0, superstrong_design},
        {6, "Purcell curve", 60.0, purcell_curve},
        {7, "Stark model", 10.0, stark_model},
        {8, "oracle suites", 120.0, oracle_suites},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.check(secs <= c.limit_s, fmt::format("runtime {:.2f} s, limit {:.0f} s", secs, c.limit_s));
        if (!o.pass) ++failed;
        fmt::print("criterion {} {}: {}\n", c.id, c.title, o.pass ? "PASS" : "FAIL");
        for (const auto& n : o.notes) fmt::print("    {}\n", n);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
