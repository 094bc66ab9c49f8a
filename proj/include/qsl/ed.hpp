#pragma once
// Brute-force oracle for the driven chain on the full 2^N space (N <= 12):
// dense Hamiltonian in the sigma^z product basis, Lanczos ground state,
// stepped unitary propagation, and exact bound reports.
//
// Basis convention: bit j-1 of the index is 1 when site j points down, so
// sigma^z_j |b> = (1 - 2 b_{j-1}) |b>.

#include <complex>
#include <vector>

#include "qsl/chain.hpp"
#include "qsl/core.hpp"

namespace qsl {

struct DenseOperator {
    int sites = 0;
    std::size_t dim = 0;
    std::vector<cplx> a;  // row-major dim x dim

    cplx& at(std::size_t r, std::size_t c) { return a[r * dim + c]; }
    const cplx& at(std::size_t r, std::size_t c) const { return a[r * dim + c]; }
};

// H(t) = H0 + h1 e^{-t/tauH} sigma^z_N / 2; accepts even N in [2, 12]
DenseOperator dense_hamiltonian(const ChainParams& p, double t);

double hermiticity_error(const DenseOperator& h);

// all eigenvalues, ascending (small N helper for spectrum-level checks)
std::vector<double> dense_spectrum(const DenseOperator& h);

struct GroundStateResult {
    double energy = 0.0;
    std::vector<cplx> vec;
    double residual = 0.0;  // ||H psi - E psi||
};

// minimal eigenpair by Lanczos with full reorthogonalization
GroundStateResult ground_state(const DenseOperator& h);

enum class EvolveScheme {
    midpoint4,  // H frozen mid-step, fourth-order Taylor of the exponential
    rk4,        // classical RK4 with stage-time Hamiltonians
};

struct DenseTrajectory {
    TimeGrid grid;
    std::vector<std::vector<cplx>> states;  // one per node
};

// steps psi0 across the grid; norm is re-checked (never renormalized) per node
// and drift beyond 1e-9 raises a step-size error
DenseTrajectory evolve(const std::vector<cplx>& psi0, const ChainParams& p,
                       const TimeGrid& grid, EvolveScheme scheme = EvolveScheme::midpoint4);

// exact bound report on the same observable grid the perturbative path uses;
// integrates the drive window with fine RK4 substeps, then rotates through the
// H0 eigenbasis once the drive has decayed to nothing
BoundReport exact_report(const ChainParams& p, double tau, std::size_t steps = 0);

}  // namespace qsl
