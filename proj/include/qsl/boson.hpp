#pragma once
// Driven two-level bosonic mode: H = A(n + 1/2) + V(t) a + V*(t) a^dag restricted
// to the lowest doublet, V(t) = V0 e^{i omega t}. Closed-form amplitudes in all
// three discriminant regimes plus an RK4 oracle for cross-checking.

#include <complex>
#include <vector>

#include "qsl/core.hpp"

namespace qsl {

using cplx = std::complex<double>;

struct DriveParams {
    double A = 1.0;      // level spacing; E0 = A/2, E1 = 3A/2
    double omega = 2.0;  // drive frequency
    double V0 = 0.475;   // coupling strength >= 0

    bool operator==(const DriveParams&) const = default;
};

enum class Regime { oscillatory, degenerate, mixed_exponential };

struct RegimeInfo {
    Regime regime;
    double disc;  // 4 V0^2 - (omega - A)^2
};

struct CharacteristicRoots {
    cplx lp, lm;  // roots of s^2 - i(omega-A) s + V0^2 with Re(lp) >= Re(lm)
};

struct AmplitudePair {
    cplx c0, c1;          // raw solution of the coupled ODE (c0(0)=1, c0'(0)=0)
    cplx c0_bar, c1_bar;  // normalized, |c0_bar|^2 + |c1_bar|^2 = 1
};

double discriminant(const DriveParams& p);
RegimeInfo classify(const DriveParams& p);
CharacteristicRoots characteristic_roots(const DriveParams& p);

// closed-form amplitudes at time t; raw fields track the literal solution and can
// grow like e^{sqrt(disc) t/2} in the mixed regime, normalized fields stay exact
AmplitudePair amplitudes(const DriveParams& p, double t);

// RK4 integration of the same first-order system on a uniform grid (oracle)
std::vector<AmplitudePair> rk4_amplitudes(const DriveParams& p, double t_end, double dt);

// |c0_bar(tau)|: the starting state is the lower level
double overlap(const DriveParams& p, double tau);

// instantaneous <H>(t) in the normalized state
double ml_energy(const DriveParams& p, double t, const AmplitudePair& a);

// instantaneous normalized energy variance
double energy_variance(const DriveParams& p, double t, const AmplitudePair& a);

// full bound report on the default grid (or steps override)
BoundReport boson_report(const DriveParams& p, double tau, std::size_t steps = 0);

}  // namespace qsl
