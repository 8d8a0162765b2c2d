#include <metaqed/errors.hpp>
#include <metaqed/workbench/device.hpp>
#include <metaqed/workbench/jobs.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "gen.hpp"

using namespace metaqed;
using namespace metaqed::workbench;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kData = METAQED_DATA_DIR;

json load_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

// Fresh scratch directory per test, removed afterwards.
class Scratch {
public:
    Scratch() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() /
               (std::string("metaqed-") + info->test_suite_name() + "-" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Scratch() { fs::remove_all(dir_); }
    const fs::path& path() const { return dir_; }
    fs::path operator/(const std::string& s) const { return dir_ / s; }

private:
    fs::path dir_;
};

std::vector<std::string> failures_for(const json& j) {
    try {
        parse_device_json(j);
    } catch (const ValidationError& e) {
        return e.failures();
    }
    return {};
}

bool mentions(const std::vector<std::string>& failures, const std::string& needle) {
    for (const auto& f : failures)
        if (f.find(needle) != std::string::npos) return true;
    return false;
}

JobManifest manifest(Subcommand sub, const fs::path& device, const fs::path& out) {
    JobManifest m;
    m.subcommand = sub;
    m.device = device;
    m.out_dir = out;
    return m;
}

int run_cli(const std::string& args, const fs::path& stderr_file = {}) {
    std::string cmd = std::string(METAQED_CLI_PATH) + " " + args + " > /dev/null";
    cmd += stderr_file.empty() ? " 2>/dev/null" : " 2>" + stderr_file.string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ParseDevice, BundledPaperDeviceMatchesTables) {
    const auto d = parse_device(kData / "paper-device.json");
    EXPECT_EQ(d.name, "paper-device");
    EXPECT_EQ(d.metamaterial.n_l, 42);
    EXPECT_EQ(d.metamaterial.l_l_nh, 0.7);
    EXPECT_EQ(d.metamaterial.c_l_ff, 250.0);
    EXPECT_EQ(d.metamaterial.l_r_nh, 0.03);
    EXPECT_EQ(d.metamaterial.c_r_ff, 25.0);
    EXPECT_EQ(d.metamaterial.c_cm_in_ff, 30.0);
    EXPECT_EQ(d.metamaterial.c_cm_out_ff, 25.0);
    EXPECT_EQ(d.qubit.f01_max_ghz, 9.25);
    EXPECT_EQ(d.qubit.c_q_ff, 48.0);
    EXPECT_EQ(d.qubit.c_j_ff, 2.5);
    EXPECT_EQ(d.qubit.c_qr_ff, 4.8);
    EXPECT_EQ(d.qubit.c_qm_ff, 4.3);
    EXPECT_EQ(d.qubit.e_c_ghz, 0.31);
    EXPECT_EQ(d.qubit.e_j0_ghz, 37.0);
    EXPECT_EQ(d.readout.f_r_ghz, 7.07);
    EXPECT_EQ(d.readout.q_total, 15463.0);
    EXPECT_EQ(d.readout.g_r_mhz, 65.0);
    EXPECT_EQ(d.readout.c_cr_in_ff, 1.0);
    EXPECT_EQ(d.readout.c_cr_out_ff, 2.0);
    EXPECT_FALSE(d.hypothetical);
}

TEST(ParseDevice, BundledTable2DeviceCarriesOverrides) {
    const auto d = parse_device(kData / "table2-device.json");
    ASSERT_TRUE(d.hypothetical);
    const auto& h = *d.hypothetical;
    EXPECT_EQ(h.n_l, 82);
    EXPECT_EQ(h.z_m_ohm, 200.0);
    EXPECT_EQ(h.n_r, 20);
    EXPECT_EQ(h.l_rh_nh, 0.35);
    EXPECT_EQ(h.c_rh_ff, 9.5);
    EXPECT_EQ(h.c_qm_ff, 50.0);
    EXPECT_EQ(h.c_q_ff, 50.0);
    EXPECT_EQ(d.metamaterial, parse_device(kData / "paper-device.json").metamaterial);
}

TEST(ParseDevice, MissingInductanceIsNamedByPath) {
    json j = load_json(kData / "paper-device.json");
    j["metamaterial"].erase("L_l_nH");
    const auto f = failures_for(j);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0], "metamaterial.L_l_nH: missing required field");
    EXPECT_THROW(parse_device_json(j), ValidationError);
}

TEST(ParseDevice, CollectsEveryFailure) {
    json j = load_json(kData / "paper-device.json");
    j["metamaterial"].erase("L_l_nH");
    j["qubit"]["C_Q_fF"] = -1.0;
    j["readout"]["C_cR_in"] = 1.0;
    j["metamaterial"]["rhtl"]["eps_eff"] = "7.56";
    const auto f = failures_for(j);
    EXPECT_EQ(f.size(), 4u);
    EXPECT_TRUE(mentions(f, "metamaterial.L_l_nH: missing"));
    EXPECT_TRUE(mentions(f, "qubit.C_Q_fF: must be > 0"));
    EXPECT_TRUE(mentions(f, "readout.C_cR_in: unknown field"));
    EXPECT_TRUE(mentions(f, "metamaterial.rhtl.eps_eff: expected a number"));
}

TEST(ParseDevice, EveryRequiredFieldIsEnforced) {
    const json base = load_json(kData / "table2-device.json");
    const std::vector<std::string> required = {
        "/metamaterial/N_l", "/metamaterial/L_l_nH", "/metamaterial/C_l_fF",
        "/metamaterial/L_r_nH", "/metamaterial/C_r_fF", "/metamaterial/C_cM_in_fF",
        "/metamaterial/C_cM_out_fF", "/metamaterial/rhtl", "/metamaterial/rhtl/length_mm",
        "/metamaterial/rhtl/tap_from_output_mm", "/qubit/C_Q_fF", "/qubit/C_J_fF",
        "/qubit/C_QR_fF", "/qubit/C_QM_fF", "/qubit/E_J0_GHz", "/readout/C_cR_in_fF",
        "/readout/C_cR_out_fF", "/hypothetical/N_l", "/hypothetical/Z_M_ohm", "/hypothetical/N_r",
        "/hypothetical/L_RH_nH", "/hypothetical/C_RH_fF", "/hypothetical/C_QM_fF",
        "/hypothetical/C_Q_fF", "/metamaterial", "/qubit", "/readout",
    };
    for (const auto& ptr : required) {
        json j = base;
        const json::json_pointer p(ptr);
        j[p.parent_pointer()].erase(p.back());
        std::string dotted = ptr.substr(1);
        std::replace(dotted.begin(), dotted.end(), '/', '.');
        const auto f = failures_for(j);
        EXPECT_TRUE(mentions(f, dotted + ": missing required field")) << ptr;
    }
}

TEST(ParseDevice, EveryInvariantHasARejectingFixture) {
    struct Case {
        const char* pointer;
        json value;
        const char* expect;
    };
    const std::vector<Case> cases = {
        {"/metamaterial/N_l", 0, "metamaterial.N_l: must be >= 1"},
        {"/metamaterial/N_l", 4.5, "metamaterial.N_l: expected an integer"},
        {"/metamaterial/L_l_nH", "0.7 nH", "metamaterial.L_l_nH: expected a number"},
        {"/metamaterial/L_l_nH", 0.0, "metamaterial.L_l_nH: must be > 0"},
        {"/metamaterial/C_l_fF", -250.0, "metamaterial.C_l_fF: must be > 0"},
        {"/metamaterial/L_r_nH", -0.03, "metamaterial.L_r_nH: must be >= 0"},
        {"/metamaterial/C_r_fF", -1.0, "metamaterial.C_r_fF: must be >= 0"},
        {"/metamaterial/C_cM_in_fF", 0.0, "metamaterial.C_cM_in_fF: must be > 0"},
        {"/metamaterial/C_cM_out_fF", 0.0, "metamaterial.C_cM_out_fF: must be > 0"},
        {"/metamaterial/loss_tangent", -1e-5, "metamaterial.loss_tangent: must be >= 0"},
        {"/metamaterial/L_l", 0.7, "metamaterial.L_l: unknown field"},
        {"/metamaterial/rhtl", 4.9, "metamaterial.rhtl: expected an object"},
        {"/metamaterial/rhtl/tap_from_output_mm", 4.9,
         "metamaterial.rhtl.tap_from_output_mm: must be shorter than length_mm"},
        {"/metamaterial/rhtl/internal_Q", 0.0, "metamaterial.rhtl.internal_Q: must be > 0"},
        {"/qubit/C_J_fF", 0.0, "qubit.C_J_fF: must be > 0"},
        {"/qubit/asymmetry", 1.5, "qubit.asymmetry: must lie in [0, 1]"},
        {"/qubit/n_max", 0, "qubit.n_max: must be >= 1"},
        {"/qubit/E_C_GHz", 0.5, "qubit.E_C_GHz: 0.5 GHz is inconsistent with C_sigma"},
        {"/qubit/C_QM_fF", 20.0, "qubit.E_C_GHz: 0.31 GHz is inconsistent with C_sigma"},
        {"/qubit/f01_max_GHz", 8.0, "qubit.f01_max_GHz: 8 GHz is inconsistent"},
        {"/readout/Z0_ohm", -50.0, "readout.Z0_ohm: must be > 0"},
        {"/readout/alpha_per_m", -1.0, "readout.alpha_per_m: must be >= 0"},
        {"/hypothetical/tap_from_output_cells", 20, "hypothetical.tap_from_output_cells: must be smaller"},
        {"/hypothetical/E_C_GHz", 0.31, "hypothetical.E_C_GHz: 0.31 GHz is inconsistent"},
        {"/hypothetical/N_r", 0, "hypothetical.N_r: must be >= 1"},
        {"/sweep/fmax_GHz", 3.0, "sweep.fmax_GHz: must exceed fmin_GHz"},
        {"/sweep/design_fmax_GHz", 7.0, "sweep.design_fmax_GHz: must exceed design_fmin_GHz"},
        {"/sweep/points", 1, "sweep.points: must be >= 2"},
        {"/sweep/m_max", 0, "sweep.m_max: must be >= 1"},
        {"/sweep/fmin_GHz", std::nan(""), "sweep.fmin_GHz: must be finite"},
        {"/version", 2, "version: unknown field"},
    };
    const json base = load_json(kData / "table2-device.json");
    ASSERT_TRUE(failures_for(base).empty());
    for (const auto& c : cases) {
        json j = base;
        j[json::json_pointer(c.pointer)] = c.value;
        const auto f = failures_for(j);
        EXPECT_TRUE(mentions(f, c.expect)) << c.pointer << " gave "
                                           << (f.empty() ? std::string("no failure") : f.front());
    }
    EXPECT_THROW(parse_device_text("{ \"metamaterial\": "), ValidationError);
    EXPECT_THROW(parse_device_json(json::array()), ValidationError);
    EXPECT_THROW(parse_device(kData / "does-not-exist.json"), ValidationError);
}

TEST(ParseDevice, RoundTripIsIdentity) {
    for (const char* name : {"paper-device.json", "table2-device.json"}) {
        const auto d = parse_device(kData / name);
        const auto again = parse_device_text(serialize_device_text(d));
        EXPECT_EQ(again, d) << name;
        EXPECT_EQ(serialize_device_text(again), serialize_device_text(d));
    }
}

TEST(ParseDevice, RoundTripHoldsForRandomDescriptions) {
    gen::Source src(31);
    for (int trial = 0; trial < 200; ++trial) {
        DeviceDescription d;
        d.name = "random-" + std::to_string(trial);
        auto& m = d.metamaterial;
        m.n_l = src.integer(1, 200);
        m.l_l_nh = src.log_uniform(0.1, 10.0);
        m.c_l_ff = src.log_uniform(10.0, 1000.0);
        m.l_r_nh = src.uniform(0.0, 0.1);
        m.c_r_ff = src.uniform(0.0, 50.0);
        m.c_cm_in_ff = src.log_uniform(1.0, 100.0);
        m.c_cm_out_ff = src.log_uniform(1.0, 100.0);
        m.rhtl.length_mm = src.uniform(1.0, 10.0);
        m.rhtl.tap_from_output_mm = src.uniform(0.01, 0.99) * m.rhtl.length_mm;
        d.qubit.c_q_ff = src.uniform(20.0, 100.0);
        d.qubit.c_qm_ff = src.uniform(1.0, 60.0);
        d.qubit.e_j0_ghz = src.uniform(10.0, 60.0);
        d.qubit.asymmetry = src.uniform(0.0, 1.0);
        if (src.coin()) d.readout.alpha_per_m = src.uniform(0.0, 1e-2);
        if (src.coin()) {
            HypotheticalSection h;
            h.n_r = src.integer(2, 40);
            h.tap_from_output_cells = src.integer(1, h.n_r - 1);
            h.z_m_ohm = src.uniform(20.0, 300.0);
            d.hypothetical = h;
        }
        const auto again = parse_device_text(serialize_device_text(d));
        ASSERT_EQ(again, d) << serialize_device_text(d);
    }
}

TEST(DeviceModel, ChargingEnergyFromCapacitances) {
    EXPECT_NEAR(charging_energy_ghz(62.1), 0.3119, 1e-4);
    EXPECT_NEAR(charging_energy_ghz(109.8), 0.1764, 1e-4);
    EXPECT_THROW(charging_energy_ghz(0.0), DomainError);
}

TEST(DeviceModel, HypotheticalKeepsCutoffAndSetsImpedance) {
    const auto base = build_model(parse_device(kData / "paper-device.json"));
    const auto d = parse_device(kData / "table2-device.json");
    const auto m = build_model(d);
    const auto& c0 = base.resonator.cell;
    const auto& c = m.resonator.cell;
    EXPECT_NEAR(c.shunt_inductance * c.series_capacitance, c0.shunt_inductance * c0.series_capacitance,
                1e-12 * c0.shunt_inductance * c0.series_capacitance);
    EXPECT_NEAR(std::sqrt(c.shunt_inductance / c.series_capacitance), 200.0, 1e-9);
    EXPECT_EQ(m.resonator.lhtl_cells, 82);
    ASSERT_TRUE(std::holds_alternative<LumpedRhtl>(m.resonator.rhtl));
    EXPECT_EQ(std::get<LumpedRhtl>(m.resonator.rhtl).cells, 20);
    EXPECT_EQ(m.resonator.tap_from_output, 4.0);
    EXPECT_EQ(m.qubit.c_qm, 50e-15);
    EXPECT_EQ(m.qubit.transmon.ec_ghz, 0.176);
    EXPECT_NEAR(base.f01_max_ghz, 9.25, 0.0925);
}

TEST(Jobs, Sha256KnownDigests) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Jobs, SubcommandNamesRoundTrip) {
    for (auto s : {Subcommand::Spectrum, Subcommand::Dispersion, Subcommand::Modes, Subcommand::RabiMap,
                   Subcommand::FitG, Subcommand::T1, Subcommand::Stark, Subcommand::DesignScan})
        EXPECT_EQ(subcommand_from_string(to_string(s)), s);
    EXPECT_FALSE(subcommand_from_string("plot"));
}

TEST(Jobs, SpectrumShapeContract) {
    Scratch tmp;
    auto m = manifest(Subcommand::Spectrum, kData / "paper-device.json", tmp.path());
    m.fmin_ghz = 4.0;
    m.fmax_ghz = 10.0;
    m.points = 20001;
    const auto r = run_job(m);
    ASSERT_EQ(r.files.size(), 1u);
    const auto lines = lines_of(slurp(r.files[0]));
    ASSERT_EQ(lines.size(), 20003u);
    EXPECT_EQ(lines[0].rfind("# metaqed ", 0), 0u);
    EXPECT_NE(lines[0].find("input_sha256=" + r.input_hash), std::string::npos);
    EXPECT_NE(lines[0].find("seed=0"), std::string::npos);
    EXPECT_NE(lines[0].find(kVersion), std::string::npos);
    EXPECT_EQ(lines[1], "f_GHz,s21_re,s21_im,s21_dB");
    double prev = 0.0;
    for (std::size_t i = 2; i < lines.size(); ++i) {
        const double f = std::stod(lines[i].substr(0, lines[i].find(',')));
        EXPECT_GT(f, prev);
        prev = f;
    }
    EXPECT_NEAR(prev, 10.0, 1e-12);
}

TEST(Jobs, OutputsAreDeterministic) {
    Scratch tmp;
    for (auto sub : {Subcommand::Modes, Subcommand::RabiMap, Subcommand::Stark}) {
        auto m = manifest(sub, kData / "paper-device.json", tmp / "a");
        m.seed = 1234;
        const auto a = run_job(m);
        m.out_dir = tmp / "b";
        const auto b = run_job(m);
        ASSERT_EQ(a.files.size(), b.files.size());
        for (std::size_t i = 0; i < a.files.size(); ++i)
            EXPECT_EQ(slurp(a.files[i]), slurp(b.files[i])) << to_string(sub);
        EXPECT_EQ(a.input_hash, b.input_hash);
    }
}

TEST(Jobs, HashCoversDescriptionManifestAndSeed) {
    Scratch tmp;
    auto d = parse_device(kData / "paper-device.json");
    auto m = manifest(Subcommand::Dispersion, {}, tmp.path());
    m.points = 11;
    const auto h0 = run_job(m, d).input_hash;
    m.seed = 7;
    const auto h1 = run_job(m, d).input_hash;
    m.out_dir = tmp / "elsewhere";
    EXPECT_EQ(run_job(m, d).input_hash, h1);
    d.metamaterial.c_r_ff = 24.0;
    const auto h2 = run_job(m, d).input_hash;
    m.points = 12;
    const auto h3 = run_job(m, d).input_hash;
    const std::set<std::string> distinct{h0, h1, h2, h3};
    EXPECT_EQ(distinct.size(), 4u);
    EXPECT_NE(slurp(tmp / "elsewhere" / "dispersion.csv").find("seed=7"), std::string::npos);
}

TEST(Jobs, CachedResultsMatchFreshOnes) {
    Scratch tmp;
    for (auto [sub, device] : {std::pair{Subcommand::T1, "paper-device.json"},
                               std::pair{Subcommand::DesignScan, "table2-device.json"}}) {
        auto m = manifest(sub, kData / device, tmp / "fresh");
        m.points = sub == Subcommand::T1 ? 501 : 21;
        const auto fresh = run_job(m);
        EXPECT_FALSE(fresh.from_cache);

        m.cache_dir = tmp / "cache";
        m.out_dir = tmp / "first";
        const auto first = run_job(m);
        EXPECT_FALSE(first.from_cache);
        m.out_dir = tmp / "second";
        const auto second = run_job(m);
        EXPECT_TRUE(second.from_cache);
        ASSERT_EQ(second.files.size(), fresh.files.size());
        for (std::size_t i = 0; i < fresh.files.size(); ++i) {
            EXPECT_EQ(fresh.files[i].filename(), second.files[i].filename());
            EXPECT_EQ(slurp(fresh.files[i]), slurp(second.files[i]));
            EXPECT_EQ(slurp(first.files[i]), slurp(second.files[i]));
        }
        EXPECT_TRUE(fs::is_directory(tmp / "cache" / first.input_hash));
    }
}

TEST(Jobs, FitGCoversEveryModeBelowTheQubitMaximum) {
    Scratch tmp;
    const auto r = run_job(manifest(Subcommand::FitG, kData / "paper-device.json", tmp.path()));
    const auto modes = run_job(manifest(Subcommand::Modes, kData / "paper-device.json", tmp.path()));
    std::size_t below = 0;
    for (const auto& line : lines_of(slurp(modes.files[0])))
        if (!line.empty() && line[0] != '#' && line[0] != 'f' && std::stod(line) < 9.25) ++below;
    const auto lines = lines_of(slurp(r.files[0]));
    ASSERT_EQ(lines.size(), below + 2);
    const auto model = build_model(parse_device(kData / "paper-device.json"));
    for (std::size_t i = 2; i < lines.size(); ++i) {
        std::vector<std::string> cols;
        std::istringstream in(lines[i]);
        for (std::string c; std::getline(in, c, ',');) cols.push_back(c);
        ASSERT_EQ(cols.size(), 6u);
        EXPECT_GT(std::stod(cols[2]), 0.0);
        const double n01 = n01_at_frequency(model.qubit.transmon, std::stod(cols[1]));
        EXPECT_NEAR(std::stod(cols[3]) / std::stod(cols[2]), n01, 1e-6 * n01);
        EXPECT_EQ(cols[4], "semiclassical");
    }
}

TEST(Jobs, DesignScanReportsFourSuperstrongRatios) {
    Scratch tmp;
    const auto r = run_job(manifest(Subcommand::DesignScan, kData / "table2-device.json", tmp.path()));
    ASSERT_EQ(r.files.size(), 2u);
    EXPECT_EQ(r.files[0].filename(), "design-scan-branches.csv");
    const auto lines = lines_of(slurp(tmp / "design-scan.csv"));
    ASSERT_EQ(lines.size(), 6u);
    for (std::size_t i = 2; i < lines.size(); ++i)
        EXPECT_GT(std::stod(lines[i].substr(lines[i].rfind(',') + 1)), 1.0) << lines[i];
    EXPECT_GT(lines_of(slurp(r.files[0])).size(), 40u);
}

TEST(Jobs, StarkDriveCasesShiftOppositely) {
    Scratch tmp;
    auto last_line_chi = [&](double mode_ghz) {
        auto m = manifest(Subcommand::Stark, kData / "paper-device.json", tmp.path());
        m.stark.mode_ghz = mode_ghz;
        const auto lines = lines_of(slurp(run_job(m).files[0]));
        return std::stod(lines.back().substr(lines.back().rfind(',') + 1));
    };
    EXPECT_LT(last_line_chi(6.003) * last_line_chi(6.588), 0.0);
}

TEST(Jobs, GridOverridesAreValidated) {
    Scratch tmp;
    auto m = manifest(Subcommand::Spectrum, kData / "paper-device.json", tmp.path());
    m.fmin_ghz = 6.0;
    m.fmax_ghz = 5.0;
    EXPECT_THROW(run_job(m), ValidationError);
    m.fmax_ghz = 7.0;
    m.points = 1;
    EXPECT_THROW(run_job(m), ValidationError);
}

TEST(Cli, ExitStatuses) {
    Scratch tmp;
    const std::string dev = (kData / "paper-device.json").string();
    const std::string out = " --out " + tmp.path().string();
    EXPECT_EQ(run_cli("dispersion --device " + dev + out + " --points 101"), 0);
    EXPECT_TRUE(fs::exists(tmp / "dispersion.csv"));

    json j = load_json(kData / "paper-device.json");
    j["metamaterial"].erase("L_l_nH");
    const fs::path bad = tmp / "bad.json";
    std::ofstream(bad) << j.dump();
    EXPECT_EQ(run_cli("spectrum --device " + bad.string() + out, tmp / "err.txt"), 1);
    EXPECT_NE(slurp(tmp / "err.txt").find("metamaterial.L_l_nH"), std::string::npos);
    EXPECT_NE(slurp(tmp / "err.txt").find("spectrum"), std::string::npos);

    EXPECT_EQ(run_cli("spectrum --device " + dev + out + " --fmin 7 --fmax 6"), 1);
    EXPECT_EQ(run_cli("spectrum --device " + dev + out + " --points many"), 1);
    EXPECT_EQ(run_cli("plot --device " + dev + out), 1);
    EXPECT_EQ(run_cli("spectrum" + out), 1);

    const std::string t2 = (kData / "table2-device.json").string();
    EXPECT_EQ(run_cli("design-scan --device " + t2 + out + " --fmin 7.9 --fmax 7.91", tmp / "err.txt"), 2);
    EXPECT_NE(slurp(tmp / "err.txt").find("design-scan"), std::string::npos);
}

TEST(Cli, CacheFlagReusesResults) {
    Scratch tmp;
    const std::string common = "modes --device " + (kData / "paper-device.json").string() +
                               " --seed 5 --cache-dir " + (tmp / "cache").string();
    EXPECT_EQ(run_cli(common + " --out " + (tmp / "a").string()), 0);
    EXPECT_EQ(run_cli(common + " --out " + (tmp / "b").string(), tmp / "err.txt"), 0);
    EXPECT_NE(slurp(tmp / "err.txt").find("served from cache"), std::string::npos);
    EXPECT_EQ(slurp(tmp / "a" / "modes.csv"), slurp(tmp / "b" / "modes.csv"));
}
