#pragma once

// Charge-basis transmon coupled to harmonic modes:
//   H/h = 4 E_C (n - n_g)^2 - E_J/2 sum(|n+1><n| + h.c.)
//         + sum_i f_i (m_i + 1/2) + sum_i g_i n (a_i + a_i^dag)
// assembled in GHz, tensor order transmon (x) mode_1 (x) ... (x) mode_k.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "metaqed/eigensolver.hpp"

namespace metaqed {

struct TransmonSpec {
    double ec_ghz = 0.31;
    double ej0_ghz = 37.0;
    double ng = 0.0;
    double asymmetry = 0.0;  ///< (E_J1 - E_J2)/(E_J1 + E_J2)
    int n_max = 10;          ///< charge states -n_max..n_max

    void validate() const;
    int charge_states() const { return 2 * n_max + 1; }
};

/// E_J0 sqrt(cos^2(pi phi) + d^2 sin^2(pi phi)); phi = Phi/Phi_0.
double ej_at_flux(const TransmonSpec& t, double phi);

struct ModeSpec {
    double omega = 0.0;  ///< rad/s
    double g = 0.0;      ///< charge-coupling prefactor, rad/s
    int m_max = 3;       ///< Fock states 0..m_max

    static ModeSpec from_ghz(double f_ghz, double g_mhz, int m_max = 3);
    double f_ghz() const;
    double g_ghz() const;
};

struct CoupledSystemSpec {
    TransmonSpec transmon;
    std::vector<ModeSpec> modes;
    std::size_t dimension_cap = 200000;

    std::size_t dimension() const;
    /// Throws ConfigError on bad truncation or when the cap is exceeded.
    void validate() const;
};

SparseMatrix build_hamiltonian(const CoupledSystemSpec& spec, double phi);
/// dH/dg_i in GHz per GHz: n (x) (a_i + a_i^dag).
SparseMatrix coupling_operator(const CoupledSystemSpec& spec, std::size_t mode);

/// Bare transmon: `count` lowest energies (GHz) and eigenvectors in the charge basis.
EigenPairs transmon_levels(const TransmonSpec& t, double phi, int count);

/// |<i|n|j>| between bare transmon eigenstates.
double charge_matrix_element(const TransmonSpec& t, double phi, int i, int j);

/// Bare product state |q; m_1 ... m_k> with the largest weight in `state`.
struct BareLabel {
    int qubit = 0;
    std::vector<int> photons;
    double weight = 0.0;

    std::string str() const;  ///< "q1:0:2:0"
};

/// |<q; m_1 .. m_k | psi>|^2 where the qubit state is a bare transmon
/// eigenvector (columns of `transmon_vectors`).
double bare_state_weight(const CoupledSystemSpec& spec, const Eigen::MatrixXd& transmon_vectors,
                         const Eigen::Ref<const Eigen::VectorXd>& psi, int qubit,
                         const std::vector<int>& photons);

EigenPairs diagonalize(const CoupledSystemSpec& spec, double phi, int levels,
                       const EigenOptions& options = {});

struct LadderPoint {
    double phi = 0.0;
    std::vector<double> energies;  ///< ascending, GHz
    std::vector<int> labels;       ///< tracked identity per energy index; a permutation
    std::vector<bool> flagged;     ///< overlap with previous point < 0.5
    std::vector<std::string> bare; ///< dominant bare product state per level
};

struct EigenLadder {
    std::vector<LadderPoint> points;
};

/// Diagonalizes at each flux point and tracks levels by maximal overlap with
/// the previous point. Levels whose best overlap falls below 0.5 are flagged
/// and take the leftover labels in energy order.
EigenLadder eigenladder_over_flux(const CoupledSystemSpec& spec, const std::vector<double>& phis,
                                  int levels, const EigenOptions& options = {});

enum class LevelSource { Bare, Dressed };

struct TransitionSet {
    double f01 = 0.0;
    double f12 = 0.0;
    double anharmonicity = 0.0;  ///< f12 - f01
};

/// Bare: transmon alone. Dressed: levels with the largest overlap on
/// |q0;0..>, |q1;0..>, |q2;0..> among the lowest `search_levels`.
TransitionSet transition_frequencies(const CoupledSystemSpec& spec, double phi,
                                     LevelSource source = LevelSource::Bare,
                                     int search_levels = 24);

}  // namespace metaqed
