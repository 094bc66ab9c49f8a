#include "qsl/boson.hpp"

#include <cmath>
#include <stdexcept>

namespace qsl {

namespace {
constexpr double kDegenerateTol = 1e-12;
constexpr cplx I{0.0, 1.0};

void validate(const DriveParams& p) {
    if (!(p.A > 0.0)) throw std::invalid_argument("boson: A must be > 0");
    if (p.V0 < 0.0) throw std::invalid_argument("boson: V0 must be >= 0");
}
}  // namespace

double discriminant(const DriveParams& p) {
    const double d = p.omega - p.A;
    return 4.0 * p.V0 * p.V0 - d * d;
}

RegimeInfo classify(const DriveParams& p) {
    validate(p);
    const double disc = discriminant(p);
    if (std::abs(disc) <= kDegenerateTol) return {Regime::degenerate, disc};
    return {disc < 0.0 ? Regime::oscillatory : Regime::mixed_exponential, disc};
}

CharacteristicRoots characteristic_roots(const DriveParams& p) {
    validate(p);
    const double d = p.omega - p.A;
    const double disc = discriminant(p);
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return {cplx{s / 2.0, d / 2.0}, cplx{-s / 2.0, d / 2.0}};
    }
    const double s = std::sqrt(-disc);
    return {cplx{0.0, (d + s) / 2.0}, cplx{0.0, (d - s) / 2.0}};
}

AmplitudePair amplitudes(const DriveParams& p, double t) {
    validate(p);
    const double d = p.omega - p.A;
    AmplitudePair out;

    if (p.V0 == 0.0) {  // drive off: the system never leaves the lower level
        out.c0 = out.c0_bar = 1.0;
        out.c1 = out.c1_bar = 0.0;
        return out;
    }

    const double disc = discriminant(p);
    cplx f0, f0p;        // c0 and c0' with the dominant factor e^{lp t} divided out
    double lead_re;      // Re(lp) t — log-magnitude of that factor
    double lead_im;      // Im(lp) t — its phase
    if (std::abs(disc) <= kDegenerateTol) {
        // double root lam = i d / 2; c0 = (1 - lam t) e^{lam t}
        const cplx lam = 0.5 * I * d;
        lead_re = 0.0;
        lead_im = lam.imag() * t;
        f0 = 1.0 - lam * t;
        f0p = -lam * lam * t;
    } else {
        const auto [lp, lm] = characteristic_roots(p);
        const cplx g = std::exp((lm - lp) * t);         // |g| <= 1 in every regime
        const cplx den = lp - lm;
        if (std::abs(den) < 1e-6) {
            // near-degenerate seam: series in (lm - lp) t keeps cancellation at bay
            const cplx eps = lm - lp;
            const cplx lam = 0.5 * (lp + lm);
            f0 = 1.0 - lam * t + 0.5 * lam * t * t * eps;
            f0p = -lam * lam * t * (1.0 + 0.5 * eps * t);
        } else {
            f0 = (lp * g - lm) / den;
            f0p = lp * lm * (g - 1.0) / den;
        }
        lead_re = lp.real() * t;
        lead_im = lp.imag() * t;
    }

    const cplx f1 = (I / p.V0) * std::exp(-I * d * t) * f0p;
    const double norm = std::hypot(std::abs(f0), std::abs(f1));
    // e^{lp t} is common to c0 and c1: its magnitude cancels under normalization
    // and its phase is global, so the normalized pair never touches lead_re
    const cplx phase = std::exp(cplx{0.0, lead_im});
    out.c0_bar = phase * f0 / norm;
    out.c1_bar = phase * f1 / norm;
    const cplx lead = std::exp(cplx{lead_re, lead_im});  // may overflow to inf for
    out.c0 = lead * f0;                                  // extreme t; raw fields only
    out.c1 = lead * f1;
    return out;
}

std::vector<AmplitudePair> rk4_amplitudes(const DriveParams& p, double t_end, double dt) {
    validate(p);
    if (!(t_end >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("rk4_amplitudes: bad grid");
    const double d = p.omega - p.A;
    const auto n = static_cast<std::size_t>(std::llround(t_end / dt));

    auto deriv = [&](double t, cplx c0, cplx c1, cplx& d0, cplx& d1) {
        const cplx e = std::exp(I * d * t);
        d0 = -I * p.V0 * e * c1;
        d1 = I * p.V0 * std::conj(e) * c0;
    };

    std::vector<AmplitudePair> traj;
    traj.reserve(n + 1);
    cplx c0 = 1.0, c1 = 0.0;
    auto push = [&](cplx a0, cplx a1) {
        AmplitudePair ap;
        ap.c0 = a0;
        ap.c1 = a1;
        const double norm = std::hypot(std::abs(a0), std::abs(a1));
        ap.c0_bar = a0 / norm;
        ap.c1_bar = a1 / norm;
        traj.push_back(ap);
    };
    push(c0, c1);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        cplx k10, k11, k20, k21, k30, k31, k40, k41;
        deriv(t, c0, c1, k10, k11);
        deriv(t + dt / 2, c0 + dt / 2 * k10, c1 + dt / 2 * k11, k20, k21);
        deriv(t + dt / 2, c0 + dt / 2 * k20, c1 + dt / 2 * k21, k30, k31);
        deriv(t + dt, c0 + dt * k30, c1 + dt * k31, k40, k41);
        c0 += dt / 6.0 * (k10 + 2.0 * k20 + 2.0 * k30 + k40);
        c1 += dt / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41);
        push(c0, c1);
    }
    return traj;
}

double overlap(const DriveParams& p, double tau) {
    return std::min(std::abs(amplitudes(p, tau).c0_bar), 1.0);
}

double ml_energy(const DriveParams& p, double t, const AmplitudePair& a) {
    const cplx Vt = p.V0 * std::exp(I * p.omega * t);
    const cplx cross = std::conj(Vt) * std::conj(a.c1_bar) * a.c0_bar * std::exp(I * p.A * t);
    return p.A * (std::norm(a.c1_bar) + 0.5) + 2.0 * cross.real();
}

double energy_variance(const DriveParams& p, double t, const AmplitudePair& a) {
    const double E0 = 0.5 * p.A, E1 = 1.5 * p.A;
    const cplx Vt = p.V0 * std::exp(I * p.omega * t);
    const cplx cross = std::conj(Vt) * std::conj(a.c1_bar) * a.c0_bar * std::exp(I * p.A * t);
    const double h2 = E0 * E0 * std::norm(a.c0_bar) + E1 * E1 * std::norm(a.c1_bar) +
                      p.V0 * p.V0 + 2.0 * (E0 + E1) * cross.real();
    const double e = ml_energy(p, t, a);
    return h2 - e * e;
}

BoundReport boson_report(const DriveParams& p, double tau, std::size_t steps) {
    validate(p);
    TimeGrid grid = steps >= 2 ? TimeGrid{tau, steps} : default_grid(tau);
    ObservableSeries energy{grid, {}}, var{grid, {}};
    energy.values.reserve(grid.nodes());
    var.values.reserve(grid.nodes());
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double t = grid.node(i);
        const AmplitudePair a = amplitudes(p, t);
        energy.values.push_back(ml_energy(p, t, a));
        var.values.push_back(energy_variance(p, t, a));
    }
    ObservableSeries sd{grid, {}};
    sd.values.reserve(grid.nodes());
    for (double v : var.values) {
        if (v < -1e-12) throw std::runtime_error("boson_report: negative variance");
        sd.values.push_back(std::sqrt(std::max(v, 0.0)));
    }
    const double e0 = 0.5 * p.A;  // start in the lower level: E(0) = A/2
    return assemble_report(tau, overlap(p, tau), energy, e0, sd);
}

}  // namespace qsl
