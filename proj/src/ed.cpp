#include "qsl/ed.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <stdexcept>

namespace qsl {

namespace {

constexpr cplx I{0.0, 1.0};

void validate_ed(const ChainParams& p) {
    if (p.N < 2 || p.N > 12 || p.N % 2 != 0)
        throw std::invalid_argument("ed: N must be even and within [2, 12]");
    if (!(p.tauH > 0.0)) throw std::invalid_argument("ed: tauH must be > 0");
}

double drive_field(const ChainParams& p, double t) { return p.h1 * std::exp(-t / p.tauH); }

// out += H(t) * in, matrix-free
void apply_h(const ChainParams& p, double t, const cplx* in, cplx* out, std::size_t dim) {
    const int n = p.N;
    const double f = drive_field(p, t);
    const unsigned last = 1u << (n - 1);
    for (std::size_t b = 0; b < dim; ++b) {
        const int pops = std::popcount(static_cast<unsigned>(b));
        double diag = -p.h0 * (n - 2 * pops);
        diag += 0.5 * f * ((b & last) ? -1.0 : 1.0);
        out[b] += diag * in[b];
    }
    // bond (i, i+1 mod N): flips both spins; amplitude J when the two bits differ
    // (hopping), J*gamma when equal (pair creation) — the XY couplings combined
    for (int i = 0; i < n; ++i) {
        const unsigned mask = (1u << i) | (1u << ((i + 1) % n));
        for (std::size_t b = 0; b < dim; ++b) {
            const bool bi = b & (1u << i);
            const bool bj = b & (1u << ((i + 1) % n));
            const double amp = (bi == bj) ? p.J * p.gamma : p.J;
            out[b ^ mask] += amp * in[b];
        }
    }
}

std::vector<cplx> h_times(const ChainParams& p, double t, const std::vector<cplx>& in) {
    std::vector<cplx> out(in.size(), cplx{});
    apply_h(p, t, in.data(), out.data(), in.size());
    return out;
}

double norm_of(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const cplx& x : v) s += std::norm(x);
    return std::sqrt(s);
}

cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

}  // namespace

DenseOperator dense_hamiltonian(const ChainParams& p, double t) {
    validate_ed(p);
    DenseOperator h;
    h.sites = p.N;
    h.dim = std::size_t{1} << p.N;
    h.a.assign(h.dim * h.dim, cplx{});
    std::vector<cplx> unit(h.dim, cplx{}), col(h.dim);
    for (std::size_t c = 0; c < h.dim; ++c) {
        unit[c] = 1.0;
        std::fill(col.begin(), col.end(), cplx{});
        apply_h(p, t, unit.data(), col.data(), h.dim);
        for (std::size_t r = 0; r < h.dim; ++r) h.at(r, c) = col[r];
        unit[c] = 0.0;
    }
    if (hermiticity_error(h) > 1e-12) throw std::runtime_error("dense_hamiltonian: not Hermitian");
    return h;
}

double hermiticity_error(const DenseOperator& h) {
    double worst = 0.0;
    for (std::size_t r = 0; r < h.dim; ++r)
        for (std::size_t c = r; c < h.dim; ++c)
            worst = std::max(worst, std::abs(h.at(r, c) - std::conj(h.at(c, r))));
    return worst;
}

std::vector<double> dense_spectrum(const DenseOperator& h) {
    Eigen::MatrixXcd m(h.dim, h.dim);
    for (std::size_t r = 0; r < h.dim; ++r)
        for (std::size_t c = 0; c < h.dim; ++c) m(r, c) = h.at(r, c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense_spectrum: eigensolver failed");
    std::vector<double> out(h.dim);
    for (std::size_t i = 0; i < h.dim; ++i) out[i] = es.eigenvalues()[static_cast<long>(i)];
    return out;
}

GroundStateResult ground_state(const DenseOperator& h) {
    const std::size_t dim = h.dim;
    auto matvec = [&](const std::vector<cplx>& x) {
        std::vector<cplx> y(dim, cplx{});
        for (std::size_t r = 0; r < dim; ++r) {
            cplx acc{};
            const cplx* row = h.a.data() + r * dim;
            for (std::size_t c = 0; c < dim; ++c) acc += row[c] * x[c];
            y[r] = acc;
        }
        return y;
    };

    // Lanczos with full reorthogonalization; deterministic start vector
    const std::size_t max_iter = std::min<std::size_t>(dim, 220);
    std::vector<std::vector<cplx>> basis;
    std::vector<double> alpha, beta;
    std::vector<cplx> q(dim);
    for (std::size_t i = 0; i < dim; ++i)
        q[i] = cplx{1.0 + std::cos(1.7 * static_cast<double>(i)), std::sin(0.9 * static_cast<double>(i))};
    {
        const double nq = norm_of(q);
        for (auto& x : q) x /= nq;
    }
    std::size_t converged_at = 0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        basis.push_back(q);
        std::vector<cplx> w = matvec(q);
        const double a = dot(q, w).real();
        alpha.push_back(a);
        for (std::size_t i = 0; i < dim; ++i) w[i] -= a * q[i];
        if (!beta.empty()) {
            const auto& qm = basis[basis.size() - 2];
            for (std::size_t i = 0; i < dim; ++i) w[i] -= beta.back() * qm[i];
        }
        for (const auto& bvec : basis) {  // full reorthogonalization
            const cplx ov = dot(bvec, w);
            for (std::size_t i = 0; i < dim; ++i) w[i] -= ov * bvec[i];
        }
        const double b = norm_of(w);
        const long m = static_cast<long>(alpha.size());
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (long i = 0; i < m; ++i) {
            tri(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        // Ritz residual for the lowest pair: beta_m * |bottom of its eigenvector|
        const double ritz = b * std::abs(es.eigenvectors()(m - 1, 0));
        if (it > 4 && ritz < 1e-12) {
            converged_at = it + 1;
            break;
        }
        if (b < 1e-13) {  // invariant subspace exhausted
            converged_at = it + 1;
            break;
        }
        beta.push_back(b);
        for (std::size_t i = 0; i < dim; ++i) q[i] = w[i] / b;
    }
    if (converged_at == 0) converged_at = alpha.size();

    const long m = static_cast<long>(converged_at);
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (long i = 0; i < m; ++i) {
        tri(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m && static_cast<std::size_t>(i) < beta.size())
            tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);

    GroundStateResult res;
    res.energy = es.eigenvalues()[0];
    res.vec.assign(dim, cplx{});
    for (long j = 0; j < m; ++j) {
        const double w = es.eigenvectors()(j, 0);
        const auto& bj = basis[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < dim; ++i) res.vec[i] += w * bj[i];
    }
    const double nv = norm_of(res.vec);
    for (auto& x : res.vec) x /= nv;

    std::vector<cplx> hv = matvec(res.vec);
    for (std::size_t i = 0; i < dim; ++i) hv[i] -= res.energy * res.vec[i];
    res.residual = norm_of(hv);
    if (res.residual > 1e-10) throw std::runtime_error("ground_state: residual above 1e-10");
    return res;
}

namespace {

void step_midpoint4(const ChainParams& p, double t, double dt, std::vector<cplx>& psi) {
    // Taylor expansion of exp(-i H_mid dt) through fourth order
    const double tm = t + 0.5 * dt;
    const std::size_t dim = psi.size();
    std::vector<cplx> term = psi, next(dim);
    const cplx factor = -I * dt;
    for (int k = 1; k <= 4; ++k) {
        std::fill(next.begin(), next.end(), cplx{});
        apply_h(p, tm, term.data(), next.data(), dim);
        const cplx scale = factor / static_cast<double>(k);
        for (std::size_t i = 0; i < dim; ++i) {
            term[i] = scale * next[i];
            psi[i] += term[i];
        }
    }
}

void step_rk4(const ChainParams& p, double t, double dt, std::vector<cplx>& psi) {
    const std::size_t dim = psi.size();
    auto rhs = [&](double tt, const std::vector<cplx>& x) {
        std::vector<cplx> y(dim, cplx{});
        apply_h(p, tt, x.data(), y.data(), dim);
        for (auto& v : y) v *= -I;
        return y;
    };
    std::vector<cplx> k1 = rhs(t, psi), tmp(dim);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * dt * k1[i];
    std::vector<cplx> k2 = rhs(t + 0.5 * dt, tmp);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * dt * k2[i];
    std::vector<cplx> k3 = rhs(t + 0.5 * dt, tmp);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + dt * k3[i];
    std::vector<cplx> k4 = rhs(t + dt, tmp);
    for (std::size_t i = 0; i < dim; ++i)
        psi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void advance(const ChainParams& p, EvolveScheme scheme, double t, double dt,
             std::vector<cplx>& psi) {
    if (scheme == EvolveScheme::midpoint4) step_midpoint4(p, t, dt, psi);
    else step_rk4(p, t, dt, psi);
}

}  // namespace

DenseTrajectory evolve(const std::vector<cplx>& psi0, const ChainParams& p,
                       const TimeGrid& grid, EvolveScheme scheme) {
    validate_ed(p);
    const std::size_t dim = std::size_t{1} << p.N;
    if (psi0.size() != dim) throw std::invalid_argument("evolve: psi0 dimension mismatch");
    if (grid.steps < 2) throw std::invalid_argument("evolve: grid needs >= 2 steps");

    DenseTrajectory traj;
    traj.grid = grid;
    traj.states.reserve(grid.nodes());
    std::vector<cplx> psi = psi0;
    traj.states.push_back(psi);
    const double dt = grid.dt();
    for (std::size_t i = 0; i < grid.steps; ++i) {
        advance(p, scheme, grid.node(i), dt, psi);
        if (std::abs(norm_of(psi) - 1.0) > 1e-9)
            throw std::runtime_error("evolve: norm drift beyond 1e-9 (reduce step size)");
        traj.states.push_back(psi);
    }
    return traj;
}

BoundReport exact_report(const ChainParams& p, double tau, std::size_t steps) {
    validate_ed(p);
    if (!(tau > 0.0)) throw std::invalid_argument("exact_report: tau must be > 0");
    const std::size_t dim = std::size_t{1} << p.N;
    const TimeGrid grid = steps >= 2 ? TimeGrid{tau, steps} : chain_default_grid(p, tau);

    // H0 eigenbasis: start state and the post-drive free rotation
    Eigen::MatrixXd h0(dim, dim);
    {
        ChainParams p0 = p;
        p0.h1 = 0.0;
        std::vector<cplx> unit(dim, cplx{}), col(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            unit[c] = 1.0;
            std::fill(col.begin(), col.end(), cplx{});
            apply_h(p0, 0.0, unit.data(), col.data(), dim);
            for (std::size_t r = 0; r < dim; ++r) h0(static_cast<long>(r), static_cast<long>(c)) = col[r].real();
            unit[c] = 0.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h0);
    if (es.info() != Eigen::Success) throw std::runtime_error("exact_report: eigensolver failed");

    std::vector<cplx> psi0(dim);
    for (std::size_t i = 0; i < dim; ++i) psi0[i] = es.eigenvectors()(static_cast<long>(i), 0);

    const unsigned last = 1u << (p.N - 1);
    auto sz_last = [&](const std::vector<cplx>& v) {
        double s = 0.0;
        for (std::size_t b = 0; b < dim; ++b)
            s += 0.5 * ((b & last) ? -1.0 : 1.0) * std::norm(v[b]);
        return s;
    };
    const double e0 = es.eigenvalues()[0] + p.h1 * sz_last(psi0);

    ObservableSeries energy{grid, std::vector<double>(grid.nodes())};
    ObservableSeries sd{grid, std::vector<double>(grid.nodes())};

    if (p.h1 == 0.0) {  // eigenstate: pure phase evolution, all observables exact
        std::fill(energy.values.begin(), energy.values.end(), es.eigenvalues()[0]);
        std::fill(sd.values.begin(), sd.values.end(), 0.0);
        return assemble_report(tau, 1.0, energy, e0, sd);
    }

    auto measure = [&](const std::vector<cplx>& psi, double t, double& e_out, double& sd_out) {
        std::vector<cplx> hpsi(dim, cplx{});
        apply_h(p, t, psi.data(), hpsi.data(), dim);
        const double n2 = norm_of(psi);
        const double nn = n2 * n2;
        const double e = dot(psi, hpsi).real() / nn;
        const double h2 = dot(hpsi, hpsi).real() / nn;
        const double var = h2 - e * e;
        if (var < -1e-12) throw std::runtime_error("exact_report: negative variance");
        e_out = e;
        sd_out = std::sqrt(std::max(var, 0.0));
    };

    // drive window: fine RK4 substeps between observable nodes
    const double t_window = 46.0 * p.tauH;
    std::size_t window_node = grid.nodes() - 1;
    if (t_window < tau)
        window_node = std::min<std::size_t>(
            static_cast<std::size_t>(std::ceil(t_window / grid.dt())), grid.nodes() - 1);

    const double dt_rk = std::min(p.tauH / 500.0, grid.dt());
    const auto substeps = static_cast<std::size_t>(std::ceil(grid.dt() / dt_rk - 1e-12));

    std::vector<cplx> psi = psi0;
    measure(psi, 0.0, energy.values[0], sd.values[0]);
    for (std::size_t i = 0; i < window_node; ++i) {
        const double t0 = grid.node(i);
        const double h = grid.dt() / static_cast<double>(substeps);
        for (std::size_t s2 = 0; s2 < substeps; ++s2) step_rk4(p, t0 + s2 * h, h, psi);
        const double drift = std::abs(norm_of(psi) - 1.0);
        if (drift > 1e-9) throw std::runtime_error("exact_report: norm drift beyond 1e-9");
        measure(psi, grid.node(i + 1), energy.values[i + 1], sd.values[i + 1]);
    }
    // past the window the drive is ~1e-20: observables frozen, evolution free
    for (std::size_t i = window_node + 1; i < grid.nodes(); ++i) {
        energy.values[i] = energy.values[window_node];
        sd.values[i] = sd.values[window_node];
    }

    double omega;
    {
        const double t_left = tau - grid.node(window_node);
        Eigen::VectorXcd cw(dim), c0(dim);
        Eigen::VectorXcd psiv(dim), psi0v(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            psiv[static_cast<long>(i)] = psi[i];
            psi0v[static_cast<long>(i)] = psi0[i];
        }
        cw = es.eigenvectors().transpose().cast<cplx>() * psiv;
        c0 = es.eigenvectors().transpose().cast<cplx>() * psi0v;
        cplx ov{};
        for (std::size_t n = 0; n < dim; ++n) {
            const double ph = -es.eigenvalues()[static_cast<long>(n)] * t_left;
            ov += std::conj(c0[static_cast<long>(n)]) * cw[static_cast<long>(n)] *
                  std::exp(cplx{0.0, ph});
        }
        omega = std::min(std::abs(ov), 1.0);
    }

    return assemble_report(tau, omega, energy, e0, sd);
}

}  // namespace qsl
