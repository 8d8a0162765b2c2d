#include "metaqed/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "metaqed/errors.hpp"
#include "metaqed/network.hpp"

namespace metaqed {

namespace {

std::size_t mode_space(const CoupledSystemSpec& spec) {
    std::size_t d = 1;
    for (const auto& m : spec.modes) d *= static_cast<std::size_t>(m.m_max + 1);
    return d;
}

// Stride of mode i inside the mode sub-space (mode 0 is most significant).
std::vector<std::size_t> mode_strides(const CoupledSystemSpec& spec) {
    std::vector<std::size_t> s(spec.modes.size(), 1);
    for (std::size_t i = spec.modes.size(); i-- > 1;)
        s[i - 1] = s[i] * static_cast<std::size_t>(spec.modes[i].m_max + 1);
    return s;
}

Eigen::MatrixXd transmon_matrix(const TransmonSpec& t, double phi) {
    const int q = t.charge_states();
    const double ej = ej_at_flux(t, phi);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(q, q);
    for (int k = 0; k < q; ++k) {
        const double n = static_cast<double>(k - t.n_max) - t.ng;
        h(k, k) = 4.0 * t.ec_ghz * n * n;
        if (k + 1 < q) {
            h(k, k + 1) = -0.5 * ej;
            h(k + 1, k) = -0.5 * ej;
        }
    }
    return h;
}

// Weight of each bare product state (transmon eigenstate j, mode index mi)
// in `psi`: rows = mode index, cols = transmon eigenstate.
Eigen::MatrixXd bare_weights(const Eigen::Ref<const Eigen::VectorXd>& psi,
                             const Eigen::MatrixXd& u, std::size_t mdim) {
    const auto q = u.rows();
    Eigen::Map<const Eigen::MatrixXd> m(psi.data(), static_cast<Eigen::Index>(mdim), q);
    return (m * u).cwiseAbs2();
}

BareLabel label_from_weights(const Eigen::MatrixXd& w, const CoupledSystemSpec& spec) {
    Eigen::Index r = 0, c = 0;
    BareLabel l;
    l.weight = w.maxCoeff(&r, &c);
    l.qubit = static_cast<int>(c);
    auto rem = static_cast<std::size_t>(r);
    const auto strides = mode_strides(spec);
    for (std::size_t i = 0; i < spec.modes.size(); ++i) {
        l.photons.push_back(static_cast<int>(rem / strides[i]));
        rem %= strides[i];
    }
    return l;
}

}  // namespace

void TransmonSpec::validate() const {
    if (!(ec_ghz > 0.0)) throw ConfigError("transmon: E_C must be > 0");
    if (!(ej0_ghz > 0.0)) throw ConfigError("transmon: E_J0 must be > 0");
    if (n_max < 1) throw ConfigError("transmon: n_max must be >= 1");
    if (!(std::abs(asymmetry) <= 1.0)) throw ConfigError("transmon: |asymmetry| must be <= 1");
    if (!std::isfinite(ng)) throw ConfigError("transmon: n_g must be finite");
}

double ej_at_flux(const TransmonSpec& t, double phi) {
    const double c = std::cos(kPi * phi);
    const double s = std::sin(kPi * phi);
    if (t.asymmetry == 0.0) return t.ej0_ghz * std::abs(c);
    return t.ej0_ghz * std::sqrt(c * c + t.asymmetry * t.asymmetry * s * s);
}

ModeSpec ModeSpec::from_ghz(double f_ghz, double g_mhz, int m_max) {
    return {ghz_to_omega(f_ghz), ghz_to_omega(g_mhz * 1e-3), m_max};
}

double ModeSpec::f_ghz() const { return omega_to_ghz(omega); }
double ModeSpec::g_ghz() const { return omega_to_ghz(g); }

std::size_t CoupledSystemSpec::dimension() const {
    return static_cast<std::size_t>(transmon.charge_states()) * mode_space(*this);
}

void CoupledSystemSpec::validate() const {
    transmon.validate();
    double dim = transmon.charge_states();
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i].m_max < 1) {
            std::ostringstream os;
            os << "mode " << i << ": Fock truncation must be >= 1";
            throw ConfigError(os.str());
        }
        if (!(modes[i].omega > 0.0) || !std::isfinite(modes[i].g)) {
            std::ostringstream os;
            os << "mode " << i << ": frequency must be > 0 and g finite";
            throw ConfigError(os.str());
        }
        dim *= modes[i].m_max + 1;
    }
    if (dim > static_cast<double>(dimension_cap)) {
        std::ostringstream os;
        os << "Hilbert dimension " << dim << " exceeds cap " << dimension_cap;
        throw ConfigError(os.str());
    }
}

SparseMatrix build_hamiltonian(const CoupledSystemSpec& spec, double phi) {
    spec.validate();
    const int q = spec.transmon.charge_states();
    const std::size_t mdim = mode_space(spec);
    const auto strides = mode_strides(spec);
    const auto dim = static_cast<Eigen::Index>(spec.dimension());
    const double ej = ej_at_flux(spec.transmon, phi);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(dim) * (3 + 2 * spec.modes.size()));
    for (int k = 0; k < q; ++k) {
        const double n = static_cast<double>(k - spec.transmon.n_max);
        const double nc = n - spec.transmon.ng;
        for (std::size_t mi = 0; mi < mdim; ++mi) {
            const auto row = static_cast<Eigen::Index>(static_cast<std::size_t>(k) * mdim + mi);
            double diag = 4.0 * spec.transmon.ec_ghz * nc * nc;
            std::size_t rem = mi;
            for (std::size_t i = 0; i < spec.modes.size(); ++i) {
                const auto m = static_cast<int>(rem / strides[i]);
                rem %= strides[i];
                diag += spec.modes[i].f_ghz() * (m + 0.5);
                if (m + 1 <= spec.modes[i].m_max && n != 0.0) {
                    const double v = spec.modes[i].g_ghz() * n * std::sqrt(m + 1.0);
                    const auto col = row + static_cast<Eigen::Index>(strides[i]);
                    trip.emplace_back(row, col, v);
                    trip.emplace_back(col, row, v);
                }
            }
            trip.emplace_back(row, row, diag);
            if (k + 1 < q) {
                const auto col = row + static_cast<Eigen::Index>(mdim);
                trip.emplace_back(row, col, -0.5 * ej);
                trip.emplace_back(col, row, -0.5 * ej);
            }
        }
    }
    SparseMatrix h(dim, dim);
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

SparseMatrix coupling_operator(const CoupledSystemSpec& spec, std::size_t mode) {
    spec.validate();
    if (mode >= spec.modes.size()) throw DomainError("coupling_operator: mode index out of range");
    const int q = spec.transmon.charge_states();
    const std::size_t mdim = mode_space(spec);
    const auto strides = mode_strides(spec);
    const auto dim = static_cast<Eigen::Index>(spec.dimension());
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < q; ++k) {
        const double n = static_cast<double>(k - spec.transmon.n_max);
        if (n == 0.0) continue;
        for (std::size_t mi = 0; mi < mdim; ++mi) {
            const auto m = static_cast<int>((mi / strides[mode]) %
                                            static_cast<std::size_t>(spec.modes[mode].m_max + 1));
            if (m + 1 > spec.modes[mode].m_max) continue;
            const auto row = static_cast<Eigen::Index>(static_cast<std::size_t>(k) * mdim + mi);
            const auto col = row + static_cast<Eigen::Index>(strides[mode]);
            const double v = n * std::sqrt(m + 1.0);
            trip.emplace_back(row, col, v);
            trip.emplace_back(col, row, v);
        }
    }
    SparseMatrix c(dim, dim);
    c.setFromTriplets(trip.begin(), trip.end());
    return c;
}

EigenPairs transmon_levels(const TransmonSpec& t, double phi, int count) {
    t.validate();
    if (count < 1 || count > t.charge_states())
        throw DomainError("transmon_levels: invalid level count");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(transmon_matrix(t, phi));
    if (es.info() != Eigen::Success) throw NumericError("transmon_levels: eigensolver failed");
    EigenPairs out;
    out.values = es.eigenvalues().head(count);
    out.vectors = es.eigenvectors().leftCols(count);
    return out;
}

double charge_matrix_element(const TransmonSpec& t, double phi, int i, int j) {
    const int need = std::max(i, j) + 1;
    const EigenPairs lv = transmon_levels(t, phi, need);
    double s = 0.0;
    for (int k = 0; k < t.charge_states(); ++k)
        s += lv.vectors(k, i) * static_cast<double>(k - t.n_max) * lv.vectors(k, j);
    return std::abs(s);
}

std::string BareLabel::str() const {
    std::ostringstream os;
    os << 'q' << qubit;
    for (int m : photons) os << ':' << m;
    return os.str();
}

double bare_state_weight(const CoupledSystemSpec& spec, const Eigen::MatrixXd& transmon_vectors,
                         const Eigen::Ref<const Eigen::VectorXd>& psi, int qubit,
                         const std::vector<int>& photons) {
    if (photons.size() != spec.modes.size())
        throw DomainError("bare_state_weight: one photon number per mode required");
    if (qubit < 0 || qubit >= transmon_vectors.cols())
        throw DomainError("bare_state_weight: qubit level out of range");
    const auto strides = mode_strides(spec);
    const std::size_t mdim = mode_space(spec);
    std::size_t mi = 0;
    for (std::size_t i = 0; i < photons.size(); ++i) {
        if (photons[i] < 0 || photons[i] > spec.modes[i].m_max)
            throw DomainError("bare_state_weight: photon number outside truncation");
        mi += static_cast<std::size_t>(photons[i]) * strides[i];
    }
    double amp = 0.0;
    const int q = spec.transmon.charge_states();
    for (int k = 0; k < q; ++k)
        amp += transmon_vectors(k, qubit) *
               psi[static_cast<Eigen::Index>(static_cast<std::size_t>(k) * mdim + mi)];
    return amp * amp;
}

EigenPairs diagonalize(const CoupledSystemSpec& spec, double phi, int levels,
                       const EigenOptions& options) {
    const SparseMatrix h = build_hamiltonian(spec, phi);
    const auto count = std::min<Eigen::Index>(levels, h.rows());
    return lowest_eigenpairs(h, count, options);
}

EigenLadder eigenladder_over_flux(const CoupledSystemSpec& spec, const std::vector<double>& phis,
                                  int levels, const EigenOptions& options) {
    for (std::size_t i = 1; i < phis.size(); ++i)
        if (!(phis[i] > phis[i - 1]))
            throw DomainError("eigenladder_over_flux: flux grid must be strictly increasing");
    const std::size_t mdim = mode_space(spec);
    EigenLadder ladder;
    Eigen::MatrixXd prev;
    std::vector<int> prev_labels;
    for (double phi : phis) {
        const EigenPairs ep = diagonalize(spec, phi, levels, options);
        const auto k = static_cast<int>(ep.values.size());
        LadderPoint pt;
        pt.phi = phi;
        pt.energies.assign(ep.values.data(), ep.values.data() + k);
        pt.flagged.assign(static_cast<std::size_t>(k), false);

        const EigenPairs tl = transmon_levels(spec.transmon, phi, spec.transmon.charge_states());
        for (int j = 0; j < k; ++j)
            pt.bare.push_back(
                label_from_weights(bare_weights(ep.vectors.col(j), tl.vectors, mdim), spec).str());

        if (prev.size() == 0) {
            pt.labels.resize(static_cast<std::size_t>(k));
            std::iota(pt.labels.begin(), pt.labels.end(), 0);
        } else {
            const Eigen::MatrixXd ov = (prev.transpose() * ep.vectors).cwiseAbs2();
            struct Cand {
                double o;
                int p, c;
            };
            std::vector<Cand> cands;
            for (int p = 0; p < ov.rows(); ++p)
                for (int c = 0; c < ov.cols(); ++c) cands.push_back({ov(p, c), p, c});
            std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
                if (a.o != b.o) return a.o > b.o;
                return a.c < b.c;
            });
            pt.labels.assign(static_cast<std::size_t>(k), -1);
            std::vector<bool> used_prev(static_cast<std::size_t>(ov.rows()), false);
            for (const auto& cd : cands) {
                if (cd.o < 0.5) break;
                if (used_prev[static_cast<std::size_t>(cd.p)] ||
                    pt.labels[static_cast<std::size_t>(cd.c)] != -1)
                    continue;
                used_prev[static_cast<std::size_t>(cd.p)] = true;
                pt.labels[static_cast<std::size_t>(cd.c)] = prev_labels[static_cast<std::size_t>(cd.p)];
            }
            // Unmatched levels keep the remaining labels in energy order.
            std::vector<int> spare;
            for (std::size_t p = 0; p < used_prev.size(); ++p)
                if (!used_prev[p]) spare.push_back(prev_labels[p]);
            std::sort(spare.begin(), spare.end());
            std::size_t s = 0;
            for (int c = 0; c < k; ++c)
                if (pt.labels[static_cast<std::size_t>(c)] == -1) {
                    pt.labels[static_cast<std::size_t>(c)] = spare[s++];
                    pt.flagged[static_cast<std::size_t>(c)] = true;
                }
        }
        prev = ep.vectors;
        prev_labels = pt.labels;
        ladder.points.push_back(std::move(pt));
    }
    return ladder;
}

TransitionSet transition_frequencies(const CoupledSystemSpec& spec, double phi,
                                     LevelSource source, int search_levels) {
    TransitionSet ts;
    if (source == LevelSource::Bare || spec.modes.empty()) {
        const EigenPairs lv = transmon_levels(spec.transmon, phi, 3);
        ts.f01 = lv.values[1] - lv.values[0];
        ts.f12 = lv.values[2] - lv.values[1];
    } else {
        const EigenPairs ep = diagonalize(spec, phi, search_levels);
        const std::size_t mdim = mode_space(spec);
        const EigenPairs tl = transmon_levels(spec.transmon, phi, spec.transmon.charge_states());
        double e[3];
        for (int q = 0; q < 3; ++q) {
            double best = -1.0;
            Eigen::Index at = -1;
            for (Eigen::Index j = 0; j < ep.values.size(); ++j) {
                const double w = bare_weights(ep.vectors.col(j), tl.vectors, mdim)(0, q);
                if (w > best) {
                    best = w;
                    at = j;
                }
            }
            if (best < 0.5) {
                std::ostringstream os;
                os << "transition_frequencies: qubit level " << q
                   << " not tracked among the lowest " << search_levels << " dressed levels";
                throw NumericError(os.str());
            }
            e[q] = ep.values[at];
        }
        ts.f01 = e[1] - e[0];
        ts.f12 = e[2] - e[1];
    }
    ts.anharmonicity = ts.f12 - ts.f01;
    return ts;
}

}  // namespace metaqed
