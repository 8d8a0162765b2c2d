#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <metaqed/errors.hpp>
#include <metaqed/workbench/jobs.hpp>

namespace wb = metaqed::workbench;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

struct Flags {
    std::string device;
    std::string out = ".";
    std::optional<double> fmin, fmax;
    std::optional<int> points;
    std::uint64_t seed = 0;
    std::string cache_dir;
    std::string axis = "power";
    std::string formula = "paper";
    wb::StarkOptions stark;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--device", f.device, "device description (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
    sub->add_option("--fmin", f.fmin, "lower frequency, GHz");
    sub->add_option("--fmax", f.fmax, "upper frequency, GHz");
    sub->add_option("--points", f.points, "number of sweep points");
    sub->add_option("--seed", f.seed, "random seed recorded in the outputs")->capture_default_str();
    sub->add_option("--cache-dir", f.cache_dir, "reuse results keyed by input hash");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid metamaterial / transmon workbench"};
    app.set_version_flag("--version", wb::kVersion);
    app.require_subcommand(1);

    Flags flags;
    const std::pair<wb::Subcommand, const char*> commands[] = {
        {wb::Subcommand::Spectrum, "S21 of the metamaterial with the idle qubit attached"},
        {wb::Subcommand::Dispersion, "Bloch phase and impedance of one LHTL cell"},
        {wb::Subcommand::Modes, "Lorentzian mode catalog"},
        {wb::Subcommand::RabiMap, "dressed levels versus flux"},
        {wb::Subcommand::FitG, "semiclassical coupling per mode below f01_max"},
        {wb::Subcommand::T1, "Purcell-limited T1 with the loss floor"},
        {wb::Subcommand::Stark, "AC Stark shift of the qubit line"},
        {wb::Subcommand::DesignScan, "coupling to spacing ratios of a mode window"},
    };
    for (const auto& [cmd, help] : commands) {
        CLI::App* sub = app.add_subcommand(wb::to_string(cmd), help);
        add_common(sub, flags);
        if (cmd == wb::Subcommand::Stark) {
            sub->add_option("--qubit-GHz", flags.stark.qubit_ghz, "qubit 0-1 frequency")->capture_default_str();
            sub->add_option("--mode-GHz", flags.stark.mode_ghz, "driven mode (nearest catalog mode)")
                ->capture_default_str();
            sub->add_option("--axis", flags.axis, "sweep axis")
                ->check(CLI::IsMember({"power", "frequency"}))
                ->capture_default_str();
            sub->add_option("--formula", flags.formula, "dispersive shift formula")
                ->check(CLI::IsMember({"paper", "standard"}))
                ->capture_default_str();
            sub->add_option("--max-photons", flags.stark.max_photons, "resonant nbar at unit power")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    wb::JobManifest m;
    m.subcommand = *wb::subcommand_from_string(name);
    m.device = flags.device;
    m.out_dir = flags.out;
    m.fmin_ghz = flags.fmin;
    m.fmax_ghz = flags.fmax;
    m.points = flags.points;
    m.seed = flags.seed;
    m.cache_dir = flags.cache_dir;
    m.stark = flags.stark;
    m.stark.frequency_axis = flags.axis == "frequency";
    m.stark.standard_formula = flags.formula == "standard";

    try {
        const auto result = wb::run_job(m);
        for (const auto& f : result.files) std::cout << f.string() << '\n';
        if (result.from_cache) std::cerr << fmt::format("metaqed {}: served from cache\n", name);
        return EXIT_SUCCESS;
    } catch (const metaqed::ValidationError& e) {
        std::cerr << fmt::format("metaqed {}: {}\n", name, e.what());
        return kExitValidation;
    } catch (const metaqed::DomainError& e) {
        std::cerr << fmt::format("metaqed {}: invalid input: {}\n", name, e.what());
        return kExitValidation;
    } catch (const metaqed::ConfigError& e) {
        std::cerr << fmt::format("metaqed {}: invalid configuration: {}\n", name, e.what());
        return kExitValidation;
    } catch (const metaqed::NumericError& e) {
        std::cerr << fmt::format("metaqed {}: numerical failure: {}\n", name, e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << fmt::format("metaqed {}: {}\n", name, e.what());
        return kExitNumeric;
    }
}
