#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsl/chain.hpp"
#include "qsl/ed.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

using qsl::ChainParams;
using qsl::cplx;

namespace {

double expectation(const qsl::DenseOperator& h, const std::vector<cplx>& psi) {
    cplx acc{};
    for (std::size_t r = 0; r < h.dim; ++r) {
        cplx row{};
        for (std::size_t c = 0; c < h.dim; ++c) row += h.at(r, c) * psi[c];
        acc += std::conj(psi[r]) * row;
    }
    return acc.real();
}

double overlap_abs(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return std::abs(acc);
}

double state_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
    return std::sqrt(acc);
}

double norm2(const std::vector<cplx>& a) {
    double acc = 0.0;
    for (const cplx& z : a) acc += std::norm(z);
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("dense Hamiltonian is Hermitian for assorted parameters") {
    const ChainParams sets[] = {
        {4, 1.0, 0.5, 1.0, 1.0, 0.01},
        {4, 0.7, 0.9, 0.2, 1.7, 0.03},
        {6, 1.3, 0.1, 1.5, 0.4, 0.005},
        {6, 0.2, 1.0, 0.0, 2.0, 0.1},
    };
    for (const auto& p : sets)
        for (double t : {0.0, 0.013, 1.0}) {
            auto h = qsl::dense_hamiltonian(p, t);
            CHECK(qsl::hermiticity_error(h) <= 1e-12);
        }
}

TEST_CASE("drive term is diagonal and lives on the last site only") {
    ChainParams p{4, 0.9, 0.6, 1.1, 1.3, 0.02};
    const double t = 0.017;
    auto ht = qsl::dense_hamiltonian(p, t);
    ChainParams off = p;
    off.h1 = 0.0;
    auto h0 = qsl::dense_hamiltonian(off, 0.0);
    const double f = p.h1 * std::exp(-t / p.tauH);
    for (std::size_t r = 0; r < ht.dim; ++r)
        for (std::size_t c = 0; c < ht.dim; ++c) {
            const cplx diff = ht.at(r, c) - h0.at(r, c);
            if (r != c) {
                CHECK(std::abs(diff) == 0.0);
            } else {
                // sigma^z on site N: bit N-1 of the basis index (1 = down)
                const double sz = (r >> (p.N - 1)) & 1u ? -1.0 : 1.0;
                CHECK(diff.real() == doctest::Approx(0.5 * f * sz).epsilon(1e-14));
                CHECK(diff.imag() == 0.0);
            }
        }
}

TEST_CASE("two-site check: isotropic bond at zero field has eigenvalues +-2J, doubled") {
    // the periodic wrap makes sites 1-2 interact through two identical bonds
    ChainParams p{2, 1.0, 1.0, 0.0, 0.0, 0.01};
    auto eigs = qsl::dense_spectrum(qsl::dense_hamiltonian(p, 0.0));
    REQUIRE(eigs.size() == 4);
    CHECK(eigs[0] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(eigs[1] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(eigs[2] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eigs[3] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("dimension guard rails") {
    CHECK_THROWS_AS(qsl::dense_hamiltonian(ChainParams{14, 1, 0.5, 1, 1, 0.01}, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(qsl::dense_hamiltonian(ChainParams{3, 1, 0.5, 1, 1, 0.01}, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(qsl::dense_hamiltonian(ChainParams{4, 1, 0.5, 1, 1, 0.0}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("ground state: decoupled spins align with the field") {
    ChainParams p{6, 0.0, 0.5, 0.8, 0.0, 0.01};
    auto gs = qsl::ground_state(qsl::dense_hamiltonian(p, 0.0));
    CHECK(gs.energy == doctest::Approx(-6.0 * 0.8).epsilon(1e-12));
    CHECK(gs.residual <= 1e-10);
    CHECK(std::norm(gs.vec[0]) == doctest::Approx(1.0).epsilon(1e-12));  // all-up index 0
}

TEST_CASE("ground state: variational energy and residual") {
    const ChainParams sets[] = {
        {4, 1.0, 0.5, 1.0, 0.0, 0.01},
        {6, 0.8, 0.3, 0.6, 0.0, 0.01},
        {6, 1.0, 1.0, 0.05, 0.0, 0.01},  // near-degenerate doublet in the ordered phase
    };
    for (const auto& p : sets) {
        auto h = qsl::dense_hamiltonian(p, 0.0);
        auto gs = qsl::ground_state(h);
        CHECK(gs.residual <= 1e-10);
        CHECK(norm2(gs.vec) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(expectation(h, gs.vec) == doctest::Approx(gs.energy).epsilon(1e-10));
        auto eigs = qsl::dense_spectrum(h);
        CHECK(gs.energy == doctest::Approx(eigs[0]).epsilon(1e-10));
    }
}

TEST_CASE("ground energies agree with the free-fermion solution") {
    for (int N : {4, 6, 8, 10}) {
        for (double gamma : {0.2, 0.5, 1.0}) {
            ChainParams p{N, 1.0, gamma, 1.0, 0.0, 0.01};
            auto gs = qsl::ground_state(qsl::dense_hamiltonian(p, 0.0));
            auto spec = qsl::diagonalize(p);
            CHECK(std::abs(gs.energy - spec.ground_energy) <= 1e-9);
        }
    }
}

TEST_CASE("spectrum is symmetric about zero when both fields vanish") {
    for (const auto& p : {ChainParams{4, 1.0, 0.7, 0.0, 0.0, 0.01},
                          ChainParams{6, 0.9, 0.3, 0.0, 0.0, 0.01}}) {
        auto eigs = qsl::dense_spectrum(qsl::dense_hamiltonian(p, 0.0));
        const std::size_t n = eigs.size();
        for (std::size_t i = 0; i < n; ++i)
            CHECK(eigs[i] == doctest::Approx(-eigs[n - 1 - i]).epsilon(1e-9));
    }
}

TEST_CASE("undriven evolution: flat energy, unit overlap, no norm drift") {
    ChainParams p{4, 1.0, 0.5, 1.0, 0.0, 0.01};
    auto h = qsl::dense_hamiltonian(p, 0.0);
    auto gs = qsl::ground_state(h);
    qsl::TimeGrid grid{10.0, 20000};
    auto traj = qsl::evolve(gs.vec, p, grid);
    REQUIRE(traj.states.size() == grid.nodes());

    double max_e_drift = 0.0, max_norm_drift = 0.0;
    const double e_ref = expectation(h, traj.states.front());
    for (const auto& psi : traj.states) {
        max_e_drift = std::max(max_e_drift, std::abs(expectation(h, psi) - e_ref));
        max_norm_drift = std::max(max_norm_drift, std::abs(norm2(psi) - 1.0));
    }
    CHECK(max_e_drift <= 1e-10);
    CHECK(max_norm_drift <= 1e-9);
    // ground state only picks up a phase
    CHECK(overlap_abs(traj.states.front(), traj.states.back()) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("step halving cuts the final-state error by 16 within a factor 2") {
    // static Hamiltonian, generic superposition start
    ChainParams p{4, 1.0, 0.5, 1.0, 0.0, 0.01};
    std::vector<cplx> psi0(16);
    for (std::size_t i = 0; i < psi0.size(); ++i)
        psi0[i] = cplx{std::cos(1.1 * static_cast<double>(i) + 0.3),
                       std::sin(0.7 * static_cast<double>(i))};
    double n0 = norm2(psi0);
    for (auto& z : psi0) z /= n0;

    const double tau = 1.0;
    auto final_state = [&](std::size_t steps, qsl::EvolveScheme scheme) {
        auto traj = qsl::evolve(psi0, p, qsl::TimeGrid{tau, steps}, scheme);
        return traj.states.back();
    };
    // grids stay fine enough that the built-in norm guard never trips: the
    // fourth-order Taylor step is not exactly unitary, so dt = tau/50 would
    // abort before the order measurement
    for (auto scheme : {qsl::EvolveScheme::midpoint4, qsl::EvolveScheme::rk4}) {
        auto ref = final_state(12800, scheme);
        const double e_coarse = state_distance(final_state(400, scheme), ref);
        const double e_fine = state_distance(final_state(800, scheme), ref);
        const double ratio = e_coarse / e_fine;
        CHECK(ratio > 8.0);
        CHECK(ratio < 32.0);
    }

    // with the drive on, the stage-time scheme keeps fourth order too
    ChainParams pd{4, 1.0, 0.5, 1.0, 1.0, 0.05};
    auto drive_final = [&](std::size_t steps) {
        auto traj = qsl::evolve(psi0, pd, qsl::TimeGrid{0.5, steps}, qsl::EvolveScheme::rk4);
        return traj.states.back();
    };
    auto dref = drive_final(16000);
    const double dc = state_distance(drive_final(250), dref);
    const double df = state_distance(drive_final(500), dref);
    CHECK(dc / df > 8.0);
    CHECK(dc / df < 32.0);
}

TEST_CASE("the two stepping schemes land on the same state") {
    ChainParams p{6, 1.0, 0.3, 0.8, 0.5, 0.05};
    auto gs = qsl::ground_state(qsl::dense_hamiltonian(ChainParams{6, 1.0, 0.3, 0.8, 0.0, 0.05}, 0.0));
    qsl::TimeGrid grid{0.5, 100000};
    std::vector<cplx> a, b;
    {
        auto traj = qsl::evolve(gs.vec, p, grid, qsl::EvolveScheme::midpoint4);
        a = traj.states.back();
    }  // scoped: keep only one full trajectory alive at a time
    {
        auto traj = qsl::evolve(gs.vec, p, grid, qsl::EvolveScheme::rk4);
        b = traj.states.back();
    }
    CHECK(state_distance(a, b) <= 1e-8);
}

TEST_CASE("norm drift stays below 1e-9 across a long default-resolution run") {
    ChainParams p{4, 1.0, 0.2, 1.0, 1.0, 0.01};
    auto h0 = qsl::dense_hamiltonian(ChainParams{4, 1.0, 0.2, 1.0, 0.0, 0.01}, 0.0);
    auto gs = qsl::ground_state(h0);
    const double dt = std::min(p.tauH / 20.0, 0.005);
    qsl::TimeGrid grid{100.0, static_cast<std::size_t>(std::ceil(100.0 / dt))};
    // evolve itself throws past 1e-9 drift; sharpen the bound on the survivors
    auto traj = qsl::evolve(gs.vec, p, grid);
    double worst = 0.0;
    for (const auto& psi : traj.states) worst = std::max(worst, std::abs(norm2(psi) - 1.0));
    CHECK(worst <= 1e-9);
}

TEST_CASE("exact report: desk reference values") {
    ChainParams p{8, 1.0, 0.2, 1.0, 1.0, 0.01};
    auto rep = qsl::exact_report(p, 100.0);
    CHECK(rep.omega_abs == doctest::Approx(0.999997930178).epsilon(1e-9));
    CHECK(rep.bures_angle == doctest::Approx(0.00203461199).epsilon(1e-7));
    CHECK(rep.dE_mt == doctest::Approx(5.975991521548e-03).epsilon(1e-7));
    REQUIRE(rep.R_mt.has_value());
    CHECK(*rep.R_mt == doctest::Approx(0.340464338).epsilon(1e-7));
    CHECK(!rep.dE_ml.has_value());  // mean energy drops under this drive
    CHECK(!rep.R_ml.has_value());
    CHECK(rep.tau >= *rep.R_mt);
}

TEST_CASE("exact report with the drive off is exactly trivial") {
    ChainParams p{6, 1.0, 0.5, 1.0, 0.0, 0.01};
    auto rep = qsl::exact_report(p, 50.0);
    CHECK(rep.omega_abs == 1.0);
    CHECK(rep.bures_angle == 0.0);
    CHECK(rep.dE_mt == 0.0);
    REQUIRE(rep.R_mt.has_value());
    CHECK(*rep.R_mt == 0.0);
    REQUIRE(rep.R_ml.has_value());
    CHECK(*rep.R_ml == 0.0);
}

TEST_CASE("speed limit holds on randomized parameters") {
    std::mt19937 rng(911u);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    for (int sample = 0; sample < 50; ++sample) {
        ChainParams p{8, uni(0.5, 1.5), uni(0.05, 1.0), uni(0.3, 2.0), uni(0.25, 1.0),
                      uni(0.005, 0.05)};
        const double tau = uni(5.0, 50.0);
        auto rep = qsl::exact_report(p, tau);
        CHECK(rep.omega_abs <= 1.0);
        CHECK(rep.bures_angle >= 0.0);
        if (rep.R_mt) CHECK(tau >= *rep.R_mt - 1e-9);
        if (rep.R_ml) CHECK(tau >= *rep.R_ml - 1e-9);
    }
}
