#include "metaqed/workbench/device.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include <metaqed/errors.hpp>

namespace metaqed::workbench {

using nlohmann::json;

namespace {

constexpr double kElectronCharge = 1.602176634e-19;
constexpr double kPlanck = 6.62607015e-34;

enum class Need { Required, Optional };

using Check = std::function<const char*(double)>;

const char* positive(double v) { return v > 0.0 ? nullptr : "must be > 0"; }
const char* non_negative(double v) { return v >= 0.0 ? nullptr : "must be >= 0"; }
const char* any_finite(double) { return nullptr; }
const char* at_least_one(double v) { return v >= 1.0 ? nullptr : "must be >= 1"; }
const char* at_least_two(double v) { return v >= 2.0 ? nullptr : "must be >= 2"; }
const char* asymmetry_range(double v) {
    return v >= 0.0 && v <= 1.0 ? nullptr : "must lie in [0, 1]";
}

// Walks one JSON object, recording failures under its dotted path and
// remembering which keys were consumed so leftovers can be reported.
class Section {
public:
    Section(const json* obj, std::string path, std::vector<std::string>& failures)
        : obj_(obj), path_(std::move(path)), failures_(failures) {}

    bool present() const { return obj_ != nullptr; }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void fail(const std::string& key, const std::string& message) {
        failures_.push_back(at(key) + ": " + message);
    }

    void number(const char* key, double& out, Need need, const Check& check) {
        const json* v = take(key, need);
        if (!v) return;
        if (!v->is_number()) {
            fail(key, "expected a number");
            return;
        }
        const double x = v->get<double>();
        if (!std::isfinite(x)) {
            fail(key, "must be finite");
            return;
        }
        if (const char* msg = check(x)) {
            fail(key, msg);
            return;
        }
        out = x;
    }

    void number(const char* key, std::optional<double>& out, const Check& check) {
        double x = 0.0;
        const std::size_t before = failures_.size();
        if (!obj_ || !obj_->contains(key)) return;
        number(key, x, Need::Optional, check);
        if (failures_.size() == before) out = x;
    }

    void integer(const char* key, int& out, Need need, const Check& check) {
        const json* v = take(key, need);
        if (!v) return;
        if (!v->is_number_integer()) {
            fail(key, "expected an integer");
            return;
        }
        const auto x = v->get<long long>();
        if (const char* msg = check(static_cast<double>(x))) {
            fail(key, msg);
            return;
        }
        out = static_cast<int>(x);
    }

    void text(const char* key, std::string& out) {
        const json* v = take(key, Need::Optional);
        if (!v) return;
        if (!v->is_string()) {
            fail(key, "expected a string");
            return;
        }
        out = v->get<std::string>();
    }

    Section child(const char* key, Need need) {
        const json* v = take(key, need);
        if (v && !v->is_object()) {
            fail(key, "expected an object");
            v = nullptr;
        }
        return Section(v, at(key), failures_);
    }

    void reject_unknown() {
        if (!obj_) return;
        for (const auto& [k, v] : obj_->items())
            if (!used_.count(k)) fail(k, "unknown field (check the name and unit suffix)");
    }

private:
    const json* take(const char* key, Need need) {
        used_.insert(key);
        if (!obj_) return nullptr;
        const auto it = obj_->find(key);
        if (it == obj_->end()) {
            if (need == Need::Required) fail(key, "missing required field");
            return nullptr;
        }
        return &*it;
    }

    const json* obj_;
    std::string path_;
    std::vector<std::string>& failures_;
    std::set<std::string> used_;
};

void read_metamaterial(Section s, MetamaterialSection& m) {
    s.integer("N_l", m.n_l, Need::Required, at_least_one);
    s.number("L_l_nH", m.l_l_nh, Need::Required, positive);
    s.number("C_l_fF", m.c_l_ff, Need::Required, positive);
    s.number("L_r_nH", m.l_r_nh, Need::Required, non_negative);
    s.number("C_r_fF", m.c_r_ff, Need::Required, non_negative);
    s.number("C_cM_in_fF", m.c_cm_in_ff, Need::Required, positive);
    s.number("C_cM_out_fF", m.c_cm_out_ff, Need::Required, positive);
    s.number("cell_length_um", m.cell_length_um, Need::Optional, positive);
    s.number("loss_tangent", m.loss_tangent, Need::Optional, non_negative);
    s.number("coupler_loss_tangent", m.coupler_loss_tangent, Need::Optional, non_negative);
    s.number("R0_ohm", m.r0_ohm, Need::Optional, positive);
    Section r = s.child("rhtl", Need::Required);
    if (r.present()) {
        r.number("length_mm", m.rhtl.length_mm, Need::Required, positive);
        r.number("Z0_ohm", m.rhtl.z0_ohm, Need::Optional, positive);
        r.number("eps_eff", m.rhtl.eps_eff, Need::Optional, positive);
        r.number("internal_Q", m.rhtl.internal_q, Need::Optional, positive);
        r.number("tap_from_output_mm", m.rhtl.tap_from_output_mm, Need::Required, positive);
        if (m.rhtl.tap_from_output_mm >= m.rhtl.length_mm)
            r.fail("tap_from_output_mm", "must be shorter than length_mm");
        r.reject_unknown();
    }
    s.reject_unknown();
}

void read_qubit(Section s, QubitSection& q) {
    s.number("f01_max_GHz", q.f01_max_ghz, positive);
    s.number("C_Q_fF", q.c_q_ff, Need::Required, positive);
    s.number("C_J_fF", q.c_j_ff, Need::Required, positive);
    s.number("C_QR_fF", q.c_qr_ff, Need::Required, positive);
    s.number("C_QM_fF", q.c_qm_ff, Need::Required, positive);
    s.number("E_C_GHz", q.e_c_ghz, positive);
    s.number("E_J0_GHz", q.e_j0_ghz, Need::Required, positive);
    s.number("n_g", q.n_g, Need::Optional, any_finite);
    s.number("asymmetry", q.asymmetry, Need::Optional, asymmetry_range);
    s.integer("n_max", q.n_max, Need::Optional, at_least_one);
    s.reject_unknown();
}

void read_readout(Section s, ReadoutSection& r) {
    s.number("f_R_GHz", r.f_r_ghz, positive);
    s.number("Q_total", r.q_total, positive);
    s.number("g_R_MHz", r.g_r_mhz, positive);
    s.number("C_cR_in_fF", r.c_cr_in_ff, Need::Required, positive);
    s.number("C_cR_out_fF", r.c_cr_out_ff, Need::Required, positive);
    s.number("l_A_mm", r.l_a_mm, Need::Optional, positive);
    s.number("l_B_mm", r.l_b_mm, Need::Optional, positive);
    s.number("Z0_ohm", r.z0_ohm, Need::Optional, positive);
    s.number("eps_eff", r.eps_eff, Need::Optional, positive);
    s.number("R0_ohm", r.r0_ohm, Need::Optional, positive);
    s.number("alpha_per_m", r.alpha_per_m, non_negative);
    s.reject_unknown();
}

void read_hypothetical(Section s, HypotheticalSection& h) {
    s.integer("N_l", h.n_l, Need::Required, at_least_one);
    s.number("Z_M_ohm", h.z_m_ohm, Need::Required, positive);
    s.integer("N_r", h.n_r, Need::Required, at_least_one);
    s.number("L_RH_nH", h.l_rh_nh, Need::Required, positive);
    s.number("C_RH_fF", h.c_rh_ff, Need::Required, positive);
    s.number("C_QM_fF", h.c_qm_ff, Need::Required, positive);
    s.number("C_Q_fF", h.c_q_ff, Need::Required, positive);
    s.integer("tap_from_output_cells", h.tap_from_output_cells, Need::Optional, at_least_one);
    if (h.tap_from_output_cells >= h.n_r)
        s.fail("tap_from_output_cells", "must be smaller than N_r");
    s.number("E_C_GHz", h.e_c_ghz, positive);
    s.number("E_J0_GHz", h.e_j0_ghz, positive);
    s.reject_unknown();
}

void read_sweep(Section s, SweepDefaults& w) {
    s.number("fmin_GHz", w.fmin_ghz, Need::Optional, positive);
    s.number("fmax_GHz", w.fmax_ghz, Need::Optional, positive);
    s.integer("points", w.points, Need::Optional, at_least_two);
    s.integer("m_max", w.m_max, Need::Optional, at_least_one);
    s.number("t1_floor_us", w.t1_floor_us, Need::Optional, positive);
    s.number("t1_floor_ref_GHz", w.t1_floor_ref_ghz, Need::Optional, positive);
    s.number("design_fmin_GHz", w.design_fmin_ghz, Need::Optional, positive);
    s.number("design_fmax_GHz", w.design_fmax_ghz, Need::Optional, positive);
    s.integer("design_modes", w.design_modes, Need::Optional, at_least_one);
    if (w.fmin_ghz >= w.fmax_ghz) s.fail("fmax_GHz", "must exceed fmin_GHz");
    if (w.design_fmin_ghz >= w.design_fmax_ghz) s.fail("design_fmax_GHz", "must exceed design_fmin_GHz");
    s.reject_unknown();
}

double sigma_ff(double c_q, double c_j, double c_qr, double c_qm) {
    return c_q + 2.0 * c_j + c_qr + c_qm;
}

// Cross-field consistency that needs the whole description.
void check_consistency(const DeviceDescription& d, std::vector<std::string>& failures) {
    const auto& q = d.qubit;
    const double c_sigma = sigma_ff(q.c_q_ff, q.c_j_ff, q.c_qr_ff, q.c_qm_ff);
    const double ec = charging_energy_ghz(c_sigma);
    if (q.e_c_ghz && std::abs(*q.e_c_ghz / ec - 1.0) > 0.05)
        failures.push_back(fmt::format(
            "qubit.E_C_GHz: {} GHz is inconsistent with C_sigma = {} fF (expects {:.4f} GHz)",
            *q.e_c_ghz, c_sigma, ec));
    if (q.f01_max_ghz) {
        TransmonSpec t;
        t.ec_ghz = q.e_c_ghz.value_or(ec);
        t.ej0_ghz = q.e_j0_ghz;
        t.ng = q.n_g;
        t.n_max = q.n_max;
        const double f = bare_f01(t, 0.0);
        if (std::abs(f / *q.f01_max_ghz - 1.0) > 0.02)
            failures.push_back(fmt::format(
                "qubit.f01_max_GHz: {} GHz is inconsistent with E_J0 and E_C (model gives {:.4f} GHz)",
                *q.f01_max_ghz, f));
    }
    if (d.hypothetical && d.hypothetical->e_c_ghz) {
        const auto& h = *d.hypothetical;
        const double hc = sigma_ff(h.c_q_ff, q.c_j_ff, q.c_qr_ff, h.c_qm_ff);
        const double hec = charging_energy_ghz(hc);
        if (std::abs(*h.e_c_ghz / hec - 1.0) > 0.05)
            failures.push_back(fmt::format(
                "hypothetical.E_C_GHz: {} GHz is inconsistent with C_sigma = {} fF (expects {:.4f} GHz)",
                *h.e_c_ghz, hc, hec));
    }
}

}  // namespace

double charging_energy_ghz(double c_sigma_ff) {
    if (!(c_sigma_ff > 0.0)) throw DomainError("charging_energy_ghz: C_sigma must be > 0");
    return kElectronCharge * kElectronCharge / (2.0 * c_sigma_ff * 1e-15) / kPlanck * 1e-9;
}

DeviceDescription parse_device_json(const json& j) {
    std::vector<std::string> failures;
    DeviceDescription d;
    if (!j.is_object()) throw ValidationError({"<root>: expected a JSON object"});
    Section root(&j, "", failures);
    root.text("name", d.name);
    if (auto s = root.child("metamaterial", Need::Required); s.present()) read_metamaterial(s, d.metamaterial);
    if (auto s = root.child("qubit", Need::Required); s.present()) read_qubit(s, d.qubit);
    if (auto s = root.child("readout", Need::Required); s.present()) read_readout(s, d.readout);
    if (auto s = root.child("hypothetical", Need::Optional); s.present()) {
        d.hypothetical.emplace();
        read_hypothetical(s, *d.hypothetical);
    }
    if (auto s = root.child("sweep", Need::Optional); s.present()) read_sweep(s, d.sweep);
    root.reject_unknown();
    if (failures.empty()) check_consistency(d, failures);
    if (!failures.empty()) throw ValidationError(std::move(failures));
    return d;
}

DeviceDescription parse_device_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError({std::string("<file>: not valid JSON: ") + e.what()});
    }
    return parse_device_json(j);
}

DeviceDescription parse_device(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError({path.string() + ": cannot open device file"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_device_text(ss.str());
}

json serialize_device(const DeviceDescription& d) {
    json j;
    j["name"] = d.name;
    const auto& m = d.metamaterial;
    j["metamaterial"] = {
        {"N_l", m.n_l},
        {"L_l_nH", m.l_l_nh},
        {"C_l_fF", m.c_l_ff},
        {"L_r_nH", m.l_r_nh},
        {"C_r_fF", m.c_r_ff},
        {"C_cM_in_fF", m.c_cm_in_ff},
        {"C_cM_out_fF", m.c_cm_out_ff},
        {"cell_length_um", m.cell_length_um},
        {"loss_tangent", m.loss_tangent},
        {"coupler_loss_tangent", m.coupler_loss_tangent},
        {"R0_ohm", m.r0_ohm},
        {"rhtl",
         {{"length_mm", m.rhtl.length_mm},
          {"Z0_ohm", m.rhtl.z0_ohm},
          {"eps_eff", m.rhtl.eps_eff},
          {"internal_Q", m.rhtl.internal_q},
          {"tap_from_output_mm", m.rhtl.tap_from_output_mm}}},
    };
    const auto& q = d.qubit;
    json jq = {
        {"C_Q_fF", q.c_q_ff}, {"C_J_fF", q.c_j_ff},   {"C_QR_fF", q.c_qr_ff},
        {"C_QM_fF", q.c_qm_ff}, {"E_J0_GHz", q.e_j0_ghz}, {"n_g", q.n_g},
        {"asymmetry", q.asymmetry}, {"n_max", q.n_max},
    };
    if (q.f01_max_ghz) jq["f01_max_GHz"] = *q.f01_max_ghz;
    if (q.e_c_ghz) jq["E_C_GHz"] = *q.e_c_ghz;
    j["qubit"] = jq;
    const auto& r = d.readout;
    json jr = {
        {"C_cR_in_fF", r.c_cr_in_ff}, {"C_cR_out_fF", r.c_cr_out_ff}, {"l_A_mm", r.l_a_mm},
        {"l_B_mm", r.l_b_mm},         {"Z0_ohm", r.z0_ohm},           {"eps_eff", r.eps_eff},
        {"R0_ohm", r.r0_ohm},
    };
    if (r.f_r_ghz) jr["f_R_GHz"] = *r.f_r_ghz;
    if (r.q_total) jr["Q_total"] = *r.q_total;
    if (r.g_r_mhz) jr["g_R_MHz"] = *r.g_r_mhz;
    if (r.alpha_per_m) jr["alpha_per_m"] = *r.alpha_per_m;
    j["readout"] = jr;
    if (d.hypothetical) {
        const auto& h = *d.hypothetical;
        json jh = {
            {"N_l", h.n_l},         {"Z_M_ohm", h.z_m_ohm}, {"N_r", h.n_r},
            {"L_RH_nH", h.l_rh_nh}, {"C_RH_fF", h.c_rh_ff}, {"C_QM_fF", h.c_qm_ff},
            {"C_Q_fF", h.c_q_ff},   {"tap_from_output_cells", h.tap_from_output_cells},
        };
        if (h.e_c_ghz) jh["E_C_GHz"] = *h.e_c_ghz;
        if (h.e_j0_ghz) jh["E_J0_GHz"] = *h.e_j0_ghz;
        j["hypothetical"] = jh;
    }
    const auto& w = d.sweep;
    j["sweep"] = {
        {"fmin_GHz", w.fmin_ghz},
        {"fmax_GHz", w.fmax_ghz},
        {"points", w.points},
        {"m_max", w.m_max},
        {"t1_floor_us", w.t1_floor_us},
        {"t1_floor_ref_GHz", w.t1_floor_ref_ghz},
        {"design_fmin_GHz", w.design_fmin_ghz},
        {"design_fmax_GHz", w.design_fmax_ghz},
        {"design_modes", w.design_modes},
    };
    return j;
}

std::string serialize_device_text(const DeviceDescription& d) {
    return serialize_device(d).dump(2) + "\n";
}

DeviceModel build_model(const DeviceDescription& d) {
    const auto& m = d.metamaterial;
    const auto& q = d.qubit;
    DeviceModel out;

    LhtlCell cell{m.c_l_ff * 1e-15, m.l_l_nh * 1e-9, m.l_r_nh * 1e-9,
                  m.c_r_ff * 1e-15, m.cell_length_um * 1e-6, m.loss_tangent};

    auto& env = out.environment;
    env.readout.c_qr = q.c_qr_ff * 1e-15;
    env.readout.length_a = d.readout.l_a_mm * 1e-3;
    env.readout.length_b = d.readout.l_b_mm * 1e-3;
    env.readout.z0 = d.readout.z0_ohm;
    env.readout.c_in = d.readout.c_cr_in_ff * 1e-15;
    env.readout.c_out = d.readout.c_cr_out_ff * 1e-15;
    env.readout.r0 = d.readout.r0_ohm;
    env.readout.eps_eff = d.readout.eps_eff;
    env.readout.alpha = d.readout.alpha_per_m;

    auto& mb = env.metamaterial;
    mb.c_qm = q.c_qm_ff * 1e-15;
    mb.length_output_side = m.rhtl.tap_from_output_mm * 1e-3;
    mb.length_lhtl_side = (m.rhtl.length_mm - m.rhtl.tap_from_output_mm) * 1e-3;
    mb.z0 = m.rhtl.z0_ohm;
    mb.eps_eff = m.rhtl.eps_eff;
    mb.internal_q = m.rhtl.internal_q;
    mb.cell = cell;
    mb.cells = m.n_l;
    mb.c_in = m.c_cm_in_ff * 1e-15;
    mb.c_out = m.c_cm_out_ff * 1e-15;
    mb.r0 = m.r0_ohm;
    mb.coupler_loss_tangent = m.coupler_loss_tangent;

    auto& r = out.resonator;
    r.lhtl_cells = m.n_l;
    r.cell = cell;
    r.input_coupling = m.c_cm_in_ff * 1e-15;
    r.output_coupling = m.c_cm_out_ff * 1e-15;
    r.rhtl = DistributedRhtl{TLineSegment{m.rhtl.z0_ohm, m.rhtl.length_mm * 1e-3, m.rhtl.eps_eff,
                                          InternalQ{m.rhtl.internal_q}}};
    r.tap_from_output = m.rhtl.tap_from_output_mm * 1e-3;
    r.r0 = m.r0_ohm;
    r.coupler_loss_tangent = m.coupler_loss_tangent;

    auto& qc = out.qubit;
    qc.caps = {q.c_q_ff * 1e-15, q.c_j_ff * 1e-15};
    qc.c_qm = q.c_qm_ff * 1e-15;
    qc.readout = env.readout;
    qc.transmon.ec_ghz = q.e_c_ghz.value_or(
        charging_energy_ghz(sigma_ff(q.c_q_ff, q.c_j_ff, q.c_qr_ff, q.c_qm_ff)));
    qc.transmon.ej0_ghz = q.e_j0_ghz;
    qc.transmon.ng = q.n_g;
    qc.transmon.asymmetry = q.asymmetry;
    qc.transmon.n_max = q.n_max;

    if (d.hypothetical) {
        const auto& h = *d.hypothetical;
        const double root = std::sqrt(cell.shunt_inductance * cell.series_capacitance);
        r.cell.shunt_inductance = root * h.z_m_ohm;
        r.cell.series_capacitance = root / h.z_m_ohm;
        r.lhtl_cells = h.n_l;
        r.rhtl = LumpedRhtl{h.n_r, h.l_rh_nh * 1e-9, h.c_rh_ff * 1e-15, m.loss_tangent};
        r.tap_from_output = h.tap_from_output_cells;
        qc.caps.c_q = h.c_q_ff * 1e-15;
        qc.c_qm = h.c_qm_ff * 1e-15;
        qc.transmon.ec_ghz = h.e_c_ghz.value_or(
            charging_energy_ghz(sigma_ff(h.c_q_ff, q.c_j_ff, q.c_qr_ff, h.c_qm_ff)));
        qc.transmon.ej0_ghz = h.e_j0_ghz.value_or(q.e_j0_ghz);
    }
    r.validate();
    out.f01_max_ghz = bare_f01(qc.transmon, 0.0);
    return out;
}

}  // namespace metaqed::workbench
