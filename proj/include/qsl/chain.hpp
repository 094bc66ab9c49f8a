#pragma once
// XY chain with transverse field (PBC, even N), drive h1 e^{-t/tauH} Sz_N on the
// last site. Jordan-Wigner + Bogoliubov free-fermion diagonalization in the
// antiperiodic (even-parity) sector; second-order time-ordered Dyson amplitudes
// with closed-form time integrals; overlap/ML/MT observables truncated at O(h1^2).

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "qsl/core.hpp"

namespace qsl {

using cplx = std::complex<double>;

struct ChainParams {
    int N = 100;        // even, >= 4
    double J = 1.0;
    double gamma = 0.5;  // anisotropy in [0,1]
    double h0 = 1.0;
    double h1 = 1.0;
    double tauH = 0.01;  // drive decay time > 0

    bool operator==(const ChainParams&) const = default;
};

struct QuasiparticleSpectrum {
    std::vector<double> momenta;  // k = +/-(2m-1)pi/N, positives first
    std::vector<double> energies; // eps_k = sqrt(xi^2 + delta^2) >= 0
    std::vector<double> u, v;     // Bogoliubov pair per mode, u^2 + v^2 = 1
    double ground_energy = 0.0;   // quasiparticle vacuum energy
};

struct PerturbationMatrixElements {
    double m00 = 0.0;                         // <vac|Sz_N|vac>
    std::vector<std::pair<int, int>> pairs;   // mode index pairs p < q
    std::vector<cplx> m2;                     // <pq|Sz_N|vac> per pair
    std::vector<double> pair_energy;          // eps_p + eps_q
    std::vector<double> b;                    // pair->pair contraction block B_ab, N*N row-major
    double sz2_vacuum = 0.25;                 // <(Sz_N)^2> in any state, exact
};

struct DysonState {
    double tau = 0.0;
    cplx a0_1{};                // first-order vacuum -> vacuum
    cplx a0_2{};                // second-order vacuum -> vacuum
    std::vector<cplx> a2_1;     // first-order vacuum -> pair, per elems.pairs
    std::vector<cplx> a2_2;     // second-order pair corrections
};

struct StrengthFactors {
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    double d = 0.0;  // 1/tauH^2 + (min pair energy)^2
};

// per-node observables over [0, tau] plus the final-state overlap
struct ChainTrajectory {
    TimeGrid grid;
    ObservableSeries energy;   // <H(t)> in the normalized truncated state
    ObservableSeries std_dev;  // sqrt of the normalized variance
    double omega_tau = 1.0;    // |A0(tau)| / norm(tau)
    double e0 = 0.0;           // E_gs + h1 * m00 (full H at t=0 in the start state)
};

// default observable grid: the generic dt <= min(0.01, tau/1000) ceiling,
// tightened to dt <= tauH so the drive transient is actually resolved (the
// frozen tail keeps the extra nodes cheap); capped at 4e6 steps
TimeGrid chain_default_grid(const ChainParams& p, double tau);

QuasiparticleSpectrum diagonalize(const ChainParams& p);

PerturbationMatrixElements szn_matrix_elements(const QuasiparticleSpectrum& spec,
                                               const ChainParams& p);

DysonState dyson_amplitudes(const QuasiparticleSpectrum& spec,
                            const PerturbationMatrixElements& elems,
                            const ChainParams& p, double tau);

struct ChainOverlap {
    cplx a00;      // normalized vacuum->vacuum amplitude
    double omega;  // |a00|
};
ChainOverlap chain_overlap(const DysonState& state);

ChainTrajectory chain_trajectory(const ChainParams& p, double tau, std::size_t steps = 0);

std::optional<double> chain_ml_energy(const ChainTrajectory& traj);
double chain_mt_variance(const ChainTrajectory& traj);

StrengthFactors strength_factors(const ChainParams& p, const QuasiparticleSpectrum& spec);

BoundReport chain_report(const ChainParams& p, double tau, std::size_t steps = 0);

}  // namespace qsl
