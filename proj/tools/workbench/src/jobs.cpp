#include "metaqed/workbench/jobs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <system_error>
#include <unistd.h>
#include <utility>

#include <fmt/format.h>
#include <openssl/evp.h>

#include <metaqed/errors.hpp>
#include <metaqed/hamiltonian.hpp>
#include <metaqed/stark.hpp>

namespace metaqed::workbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Files = std::vector<std::pair<std::string, std::string>>;

struct Subcommands {
    Subcommand value;
    const char* name;
};

constexpr Subcommands kNames[] = {
    {Subcommand::Spectrum, "spectrum"}, {Subcommand::Dispersion, "dispersion"},
    {Subcommand::Modes, "modes"},       {Subcommand::RabiMap, "rabi-map"},
    {Subcommand::FitG, "fit-g"},        {Subcommand::T1, "t1"},
    {Subcommand::Stark, "stark"},       {Subcommand::DesignScan, "design-scan"},
};

// CSV body with a single metadata comment line ahead of the header.
class Csv {
public:
    Csv(const std::string& meta, std::initializer_list<const char*> columns) {
        out_ = meta;
        bool first = true;
        for (const char* c : columns) {
            if (!first) out_ += ',';
            out_ += c;
            first = false;
        }
        out_ += '\n';
    }

    Csv& num(double v) {
        sep();
        out_ += fmt::format("{:.12g}", v);
        return *this;
    }
    Csv& num(long long v) {
        sep();
        out_ += fmt::format("{}", v);
        return *this;
    }
    Csv& str(const std::string& s) {
        sep();
        out_ += s;
        return *this;
    }
    Csv& empty() {
        sep();
        return *this;
    }
    void end() {
        out_ += '\n';
        fresh_ = true;
        ++rows_;
    }
    std::size_t rows() const { return rows_; }
    std::string take() { return std::move(out_); }

private:
    void sep() {
        if (!fresh_) out_ += ',';
        fresh_ = false;
    }
    std::string out_;
    bool fresh_ = true;
    std::size_t rows_ = 0;
};

struct Grid {
    double fmin, fmax;
    int points;

    FrequencyGrid frequencies() const {
        return FrequencyGrid::linear_ghz(fmin, fmax, static_cast<std::size_t>(points));
    }
};

Grid grid_for(const JobManifest& m, double fmin, double fmax, int points) {
    Grid g{m.fmin_ghz.value_or(fmin), m.fmax_ghz.value_or(fmax), m.points.value_or(points)};
    std::vector<std::string> failures;
    if (!(g.fmin > 0.0)) failures.push_back("--fmin: must be > 0");
    if (!(g.fmax > g.fmin)) failures.push_back("--fmax: must exceed --fmin");
    if (g.points < 2) failures.push_back("--points: must be >= 2");
    if (!failures.empty()) throw ValidationError(std::move(failures));
    return g;
}

double to_db(Complex s) { return 20.0 * std::log10(std::max(std::abs(s), 1e-300)); }

// Modes around [lo, hi] GHz with enough margin that every mode inside has
// both neighbours in the catalog.
ModeCatalog catalog_around(const DeviceModel& model, double lo, double hi, double margin) {
    const double a = std::max(lo - margin, 0.1);
    const auto points = static_cast<std::size_t>(std::max(4001.0, (hi - a + margin) * 4000.0));
    return bare_mode_catalog(model.resonator, model.qubit,
                             FrequencyGrid::linear_ghz(a, hi + margin, points));
}

// Qubit environment admittance. The measured chip uses the closed-form
// branch impedances; a lumped-RHTL redesign is evaluated from its network.
std::function<Complex(double)> environment(const DeviceDescription& d, const DeviceModel& model) {
    if (!d.hypothetical) {
        const EnvironmentSpec env = model.environment;
        env.validate();
        return [env](double w) { return environment_admittance(env, w); };
    }
    auto net = std::make_shared<Network>(build_hybrid_network(model.resonator));
    const double r0 = model.resonator.r0;
    const double c_qm = model.qubit.c_qm;
    const ReadoutBranch readout = *model.qubit.readout;
    return [net, r0, c_qm, readout](double w) {
        const auto [zl, zr] = net->probe_impedances(w, r0, r0);
        const Complex zm = capacitor_impedance(c_qm, w) + zl * zr / (zl + zr);
        return 1.0 / readout_impedance(readout, w) + 1.0 / zm;
    };
}

Files job_spectrum(const JobManifest& m, const DeviceDescription& d, const std::string& meta) {
    const DeviceModel model = build_model(d);
    const Grid g = grid_for(m, d.sweep.fmin_ghz, d.sweep.fmax_ghz, d.sweep.points);
    const auto t = spectrum(model.resonator, g.frequencies(), qubit_tap_load(model.qubit, std::nullopt));
    Csv csv(meta, {"f_GHz", "s21_re", "s21_im", "s21_dB"});
    for (std::size_t i = 0; i < t.size(); ++i) {
        csv.num(omega_to_ghz(t.omega[i])).num(t.s21[i].real()).num(t.s21[i].imag()).num(to_db(t.s21[i]));
        csv.end();
    }
    return {{"spectrum.csv", csv.take()}};
}

Files job_dispersion(const JobManifest& m, const DeviceDescription& d, const std::string& meta) {
    const DeviceModel model = build_model(d);
    const Grid g = grid_for(m, 0.5, 70.0, 2001);
    const auto res = dispersion(model.resonator.cell, g.frequencies());
    Csv csv(meta, {"f_GHz", "kdx_re", "kdx_im", "passband", "Z0l_re_ohm", "Z0l_im_ohm"});
    for (const auto& p : res.points) {
        csv.num(omega_to_ghz(p.omega)).num(p.k_dx.real()).num(p.k_dx.imag());
        csv.num(static_cast<long long>(p.passband)).num(p.z0l.real()).num(p.z0l.imag());
        csv.end();
    }
    return {{"dispersion.csv", csv.take()}};
}

Files job_modes(const JobManifest& m, const DeviceDescription& d, const std::string& meta) {
    const DeviceModel model = build_model(d);
    const Grid g = grid_for(m, d.sweep.fmin_ghz, d.sweep.fmax_ghz, d.sweep.points);
    const auto cat = bare_mode_catalog(model.resonator, model.qubit, g.frequencies());
    Csv csv(meta, {"f_GHz", "kappa_MHz", "Q", "peak_dB", "residual"});
    for (const auto& mode : cat.modes) {
        csv.num(omega_to_ghz(mode.omega)).num(omega_to_ghz(mode.kappa) * 1e3).num(mode.q);
        csv.num(to_db(mode.peak_s21)).num(mode.residual);
        csv.end();
    }
    return {{"modes.csv", csv.take()}};
}

Files job_fit_g(const JobManifest& m, const DeviceDescription& d, const std::string& meta) {
    const DeviceModel model = build_model(d);
    const Grid g = grid_for(m, d.sweep.fmin_ghz, std::min(d.sweep.fmax_ghz, model.f01_max_ghz),
                            d.sweep.points);
    const auto cat = bare_mode_catalog(model.resonator, model.qubit, g.frequencies());
    Csv csv(meta, {"mode_index", "f_GHz", "g_MHz_prefactor", "g_MHz_halfsplit", "method", "residual"});
    for (std::size_t i = 0; i < cat.modes.size(); ++i) {
        if (omega_to_ghz(cat.modes[i].omega) >= model.f01_max_ghz) continue;
        const auto e = extract_g_semiclassical(model.resonator, model.qubit, cat, i);
        csv.num(static_cast<long long>(i)).num(omega_to_ghz(e.omega));
        csv.num(omega_to_ghz(e.g_prefactor) * 1e3).num(omega_to_ghz(e.g_halfsplit) * 1e3);
        csv.str(to_string(e.method)).num(omega_to_ghz(e.residual) * 1e3);
        csv.end();
    }
    return {{"fit-g.csv", csv.take()}};
}

Files job_rabi_map(const JobManifest& m, const DeviceDescription& d, const std::string& meta) {
    const DeviceModel model = build_model(d);
    const Grid g = grid_for(m, 7.7, 8.4, 201);
    const auto cat = catalog_around(model, g.fmin, g.fmax, 0.5);
    CoupledSystemSpec spec;
    spec.transmon = model.qubit.transmon;
    for (std::size_t i = 0; i < cat.modes.size(); ++i) {
        const double f = omega_to_ghz(cat.modes[i].omega);
        if (f < g.fmin || f > g.fmax) continue;
        const auto e = extract_g_semiclassical(model.resonator, model.qubit, cat, i);
        ModeSpec mode;
        mode.omega = e.omega;
        mode.g = e.g_prefactor;
        mode.m_max = d.sweep.m_max;
        spec.modes.push_back(mode);
    }
    if (spec.modes.empty())
        throw ValidationError({fmt::format("--fmin/--fmax: no modes in [{}, {}] GHz", g.fmin, g.fmax)});
    spec.validate();

    // Flux range over which bare f01 covers the window with some margin.
    const double top = std::min(g.fmax + 0.3, model.f01_max_ghz);
    const double phi_lo = flux_for_f01(spec.transmon, top);
    const double phi_hi = flux_for_f01(spec.transmon, std::max(g.fmin - 0.3, 0.5));
    std::vector<double> phis;
    for (int k = 0; k < g.points; ++k) phis.push_back(phi_lo + (phi_hi - phi_lo) * k / (g.points - 1));

    EigenOptions eo;
    eo.seed = m.seed;
    const int levels = static_cast<int>(spec.modes.size()) + 2;
    const auto ladder = eigenladder_over_flux(spec, phis, levels, eo);
    Csv csv(meta, {"flux", "level", "energy_GHz", "label", "flag", "bare_state"});
    for (const auto& p : ladder.points) {
        for (std::size_t l = 0; l < p.energies.size(); ++l) {
            csv.num(p.phi).num(static_cast<long long>(l)).num(p.energies[l] - p.energies[0]);
            csv.num(static_cast<long long>(p.labels[l])).num(static_cast<long long>(p.flagged[l]));
            csv.str(p.bare[l]);
            csv.end();
        }
    }
    return {{"rabi-map.csv", csv.take()}};
}

Files job_t1(const JobManifest& m, const DeviceDescription& d, const std::string& meta) {
    const DeviceModel model = build_model(d);
    const Grid g = grid_for(m, 1.0, d.sweep.fmax_ghz, d.sweep.points);
    const double a = floor_constant_for(d.sweep.t1_floor_us * 1e-6, d.sweep.t1_floor_ref_ghz);
    const auto curve = t1_curve(environment(d, model), model.qubit.caps.shunt(), a, g.frequencies());
    Csv csv(meta, {"f_GHz", "T1_us_total", "T1_us_purcell", "T1_us_floor", "flag"});
    for (const auto& p : curve.points) {
        csv.num(omega_to_ghz(p.omega)).num(p.t1_total * 1e6);
        if (p.flagged)
            csv.empty();
        else
            csv.num(p.t1_purcell * 1e6);
        csv.num(p.t1_floor * 1e6).num(static_cast<long long>(p.flagged));
        csv.end();
    }
    return {{"t1.csv", csv.take()}};
}

Files job_stark(const JobManifest& m, const DeviceDescription& d, const std::string& meta) {
    const DeviceModel model = build_model(d);
    const auto& so = m.stark;
    const auto cat = catalog_around(model, so.mode_ghz, so.mode_ghz, 0.4);
    if (cat.modes.size() < 2) throw ResolutionError("stark: no resolvable mode near the requested frequency");
    std::size_t idx = 0;
    for (std::size_t i = 1; i < cat.modes.size(); ++i)
        if (std::abs(omega_to_ghz(cat.modes[i].omega) - so.mode_ghz) <
            std::abs(omega_to_ghz(cat.modes[idx].omega) - so.mode_ghz))
            idx = i;
    const auto e = extract_g_semiclassical(model.resonator, model.qubit, cat, idx);

    CoupledSystemSpec bare;
    bare.transmon = model.qubit.transmon;
    const double phi = flux_for_f01(bare.transmon, so.qubit_ghz);
    StarkScenario s;
    s.omega_q = ghz_to_omega(so.qubit_ghz);
    s.eta = ghz_to_omega(transition_frequencies(bare, phi).anharmonicity);
    // The drive sits at the requested frequency; the catalog mode nearest to
    // it only supplies the linewidth and the coupling.
    s.omega_mode = ghz_to_omega(so.mode_ghz);
    s.kappa = cat.modes[idx].kappa;
    s.g = e.g_halfsplit;
    s.omega_drive = s.omega_mode;
    const ChiFormula formula = so.standard_formula ? ChiFormula::Standard : ChiFormula::Paper;
    // Unit power drives max_photons on resonance.
    const PowerCalibration cal{so.max_photons * 0.25 * s.kappa * s.kappa};

    std::vector<double> values;
    StarkMap map;
    if (so.frequency_axis) {
        const double k = omega_to_ghz(s.kappa);
        const Grid g = grid_for(m, omega_to_ghz(s.omega_mode) - 5.0 * k, omega_to_ghz(s.omega_mode) + 5.0 * k, 201);
        for (int i = 0; i < g.points; ++i)
            values.push_back(ghz_to_omega(g.fmin + (g.fmax - g.fmin) * i / (g.points - 1)));
        map = stark_map(s, SweepAxis::DriveFrequency, values, cal, 1.0, formula);
    } else {
        const int n = m.points.value_or(101);
        if (n < 2) throw ValidationError({"--points: must be >= 2"});
        for (int i = 0; i < n; ++i) values.push_back(static_cast<double>(i) / (n - 1));
        map = stark_map(s, SweepAxis::DrivePower, values, cal, 1.0, formula);
    }
    Csv csv(meta, {so.frequency_axis ? "drive_GHz" : "power", "qubit_line_GHz", "nbar", "chi_MHz"});
    for (const auto& c : map.columns) {
        csv.num(so.frequency_axis ? omega_to_ghz(c.sweep_value) : c.sweep_value);
        csv.num(omega_to_ghz(c.qubit_line)).num(c.nbar).num(omega_to_ghz(c.chi) * 1e3);
        csv.end();
    }
    return {{"stark.csv", csv.take()}};
}

Files job_design_scan(const JobManifest& m, const DeviceDescription& d, const std::string& meta) {
    const DeviceModel model = build_model(d);
    DesignScanOptions opt;
    opt.f_lo_ghz = m.fmin_ghz.value_or(d.sweep.design_fmin_ghz);
    opt.f_hi_ghz = m.fmax_ghz.value_or(d.sweep.design_fmax_ghz);
    opt.modes = static_cast<std::size_t>(d.sweep.design_modes);
    if (m.points) opt.sweep_points = *m.points;
    if (!(opt.f_hi_ghz > opt.f_lo_ghz)) throw ValidationError({"--fmax: must exceed --fmin"});
    const auto cat = catalog_around(model, opt.f_lo_ghz, opt.f_hi_ghz, 0.8);
    const auto res = design_scan(model.resonator, model.qubit, cat, opt);

    Csv csv(meta, {"mode_index", "f_GHz", "fitted_f_GHz", "g_MHz_prefactor", "g_MHz_halfsplit",
                   "spacing_MHz", "ratio"});
    for (std::size_t i = 0; i < res.couplings.modes.size(); ++i) {
        const auto& c = res.couplings.modes[i];
        csv.num(static_cast<long long>(c.mode_index)).num(omega_to_ghz(c.omega)).num(res.fitted_mode_ghz[i]);
        csv.num(omega_to_ghz(c.g_prefactor) * 1e3).num(omega_to_ghz(c.g_halfsplit) * 1e3);
        if (res.ratios[i]) {
            csv.num(omega_to_ghz(cat.modes[c.mode_index + 1].omega - c.omega) * 1e3).num(*res.ratios[i]);
        } else {
            csv.empty().empty();
        }
        csv.end();
    }
    Csv branches(meta, {"qubit_GHz", "branch_GHz"});
    for (std::size_t k = 0; k < res.sweep_ghz.size(); ++k)
        for (double f : res.branches_ghz[k]) {
            branches.num(res.sweep_ghz[k]).num(f);
            branches.end();
        }
    return {{"design-scan.csv", csv.take()}, {"design-scan-branches.csv", branches.take()}};
}

json manifest_json(const JobManifest& m) {
    json j = {{"subcommand", to_string(m.subcommand)}, {"seed", m.seed}};
    if (m.fmin_ghz) j["fmin_GHz"] = *m.fmin_ghz;
    if (m.fmax_ghz) j["fmax_GHz"] = *m.fmax_ghz;
    if (m.points) j["points"] = *m.points;
    if (m.subcommand == Subcommand::Stark)
        j["stark"] = {{"qubit_GHz", m.stark.qubit_ghz},
                      {"mode_GHz", m.stark.mode_ghz},
                      {"frequency_axis", m.stark.frequency_axis},
                      {"standard_formula", m.stark.standard_formula},
                      {"max_photons", m.stark.max_photons}};
    return j;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Write to a sibling temporary and rename over the target.
void write_atomic(const fs::path& target, const std::string& content) {
    const fs::path tmp = target.string() + fmt::format(".tmp{}", ::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

Files compute(const JobManifest& m, const DeviceDescription& d, const std::string& meta) {
    switch (m.subcommand) {
        case Subcommand::Spectrum: return job_spectrum(m, d, meta);
        case Subcommand::Dispersion: return job_dispersion(m, d, meta);
        case Subcommand::Modes: return job_modes(m, d, meta);
        case Subcommand::RabiMap: return job_rabi_map(m, d, meta);
        case Subcommand::FitG: return job_fit_g(m, d, meta);
        case Subcommand::T1: return job_t1(m, d, meta);
        case Subcommand::Stark: return job_stark(m, d, meta);
        case Subcommand::DesignScan: return job_design_scan(m, d, meta);
    }
    throw DomainError("run_job: unknown subcommand");
}

}  // namespace

const char* to_string(Subcommand s) {
    for (const auto& n : kNames)
        if (n.value == s) return n.name;
    return "unknown";
}

std::optional<Subcommand> subcommand_from_string(const std::string& s) {
    for (const auto& n : kNames)
        if (s == n.name) return n.value;
    return std::nullopt;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

JobResult run_job(const JobManifest& manifest) {
    return run_job(manifest, parse_device(manifest.device));
}

JobResult run_job(const JobManifest& manifest, const DeviceDescription& device) {
    JobResult result;
    const std::string canonical =
        serialize_device(device).dump() + "\n" + manifest_json(manifest).dump() + "\n" + kVersion;
    result.input_hash = sha256_hex(canonical);
    const std::string meta =
        fmt::format("# metaqed {} command={} input_sha256={} seed={}\n", kVersion,
                    to_string(manifest.subcommand), result.input_hash, manifest.seed);

    fs::create_directories(manifest.out_dir);
    const fs::path cached = manifest.cache_dir.empty() ? fs::path{} : manifest.cache_dir / result.input_hash;

    Files files;
    if (!cached.empty() && fs::is_directory(cached)) {
        for (const auto& entry : fs::directory_iterator(cached))
            files.emplace_back(entry.path().filename().string(), read_file(entry.path()));
        std::sort(files.begin(), files.end());
        result.from_cache = !files.empty();
    }
    if (!result.from_cache) {
        files = compute(manifest, device, meta);
        std::sort(files.begin(), files.end());
        if (!cached.empty()) {
            // Publish the entry with one rename so readers never see a partial set.
            fs::create_directories(manifest.cache_dir);
            const fs::path staging = cached.string() + fmt::format(".tmp{}", ::getpid());
            fs::remove_all(staging);
            fs::create_directories(staging);
            for (const auto& [name, body] : files) write_atomic(staging / name, body);
            std::error_code ec;
            fs::rename(staging, cached, ec);
            if (ec) fs::remove_all(staging);
        }
    }
    for (const auto& [name, body] : files) {
        write_atomic(manifest.out_dir / name, body);
        result.files.push_back(manifest.out_dir / name);
    }
    return result;
}

}  // namespace metaqed::workbench
