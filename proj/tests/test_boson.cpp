#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsl/boson.hpp"

#include <cmath>
#include <vector>

using qsl::DriveParams;

namespace {
// the three parameter sets used throughout: weak drive (disc < 0), strong drive
// (disc > 0), and a tuned point exactly on the degenerate seam
const DriveParams kWeak{1.0, 2.0, 0.475};
const DriveParams kStrong{6.0, 4.0, 3.0};
const DriveParams kSeam{1.0, 1.6, 0.3};
}  // namespace

TEST_CASE("discriminant on the three reference parameter sets") {
    CHECK(qsl::discriminant(kWeak) == doctest::Approx(-0.0975).epsilon(1e-12));
    CHECK(qsl::discriminant(kStrong) == 32.0);
    CHECK(qsl::discriminant(DriveParams{1.0, 2.0, 0.5}) == 0.0);
    CHECK(qsl::discriminant(kSeam) == doctest::Approx(0.0));
}

TEST_CASE("regime classification follows the discriminant sign with 1e-12 tolerance") {
    CHECK(qsl::classify(kWeak).regime == qsl::Regime::oscillatory);
    CHECK(qsl::classify(kStrong).regime == qsl::Regime::mixed_exponential);
    CHECK(qsl::classify(DriveParams{1.0, 2.0, 0.5}).regime == qsl::Regime::degenerate);
    // a hair off the seam still counts as degenerate within the tolerance band
    CHECK(qsl::classify(DriveParams{1.0, 2.0, 0.5 + 1e-13}).regime == qsl::Regime::degenerate);
    CHECK(qsl::classify(DriveParams{1.0, 2.0, 0.5 + 1e-6}).regime == qsl::Regime::mixed_exponential);
    CHECK(qsl::classify(DriveParams{1.0, 2.0, 0.5 - 1e-6}).regime == qsl::Regime::oscillatory);
}

TEST_CASE("characteristic roots: ordering and the two closed forms") {
    auto strong = qsl::characteristic_roots(kStrong);
    CHECK(strong.lp.real() == doctest::Approx(std::sqrt(32.0) / 2.0).epsilon(1e-14));
    CHECK(strong.lp.imag() == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(strong.lm.real() == doctest::Approx(-std::sqrt(32.0) / 2.0).epsilon(1e-14));
    CHECK(strong.lm.imag() == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(strong.lp.real() >= strong.lm.real());

    // oscillatory: both roots purely imaginary
    auto weak = qsl::characteristic_roots(kWeak);
    CHECK(weak.lp.real() == 0.0);
    CHECK(weak.lm.real() == 0.0);
    const double s = std::sqrt(0.0975);
    CHECK(weak.lp.imag() == doctest::Approx((1.0 + s) / 2.0).epsilon(1e-12));
    CHECK(weak.lm.imag() == doctest::Approx((1.0 - s) / 2.0).epsilon(1e-12));

    auto seam = qsl::characteristic_roots(DriveParams{1.0, 2.0, 0.5});
    CHECK(seam.lp == seam.lm);
    CHECK(seam.lp.imag() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("amplitudes start at (1, 0) in every regime") {
    for (const auto& p : {kWeak, kStrong, kSeam}) {
        auto a = qsl::amplitudes(p, 0.0);
        CHECK(std::abs(a.c0 - 1.0) < 1e-14);
        CHECK(std::abs(a.c1) < 1e-14);
        CHECK(std::abs(a.c0_bar - 1.0) < 1e-14);
        CHECK(std::abs(a.c1_bar) < 1e-14);
    }
}

TEST_CASE("normalized amplitudes have unit norm at all times") {
    for (const auto& p : {kWeak, kStrong, kSeam}) {
        for (double t : {0.3, 1.7, 10.0, 55.5, 200.0, 500.0}) {
            auto a = qsl::amplitudes(p, t);
            const double n = std::norm(a.c0_bar) + std::norm(a.c1_bar);
            CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("normalization survives raw-amplitude overflow in the growing regime") {
    // Re(lp) t ~ 1700 here: e^{lp t} is not representable, raw fields blow up,
    // the factored normalized pair must not care
    auto a = qsl::amplitudes(kStrong, 600.0);
    CHECK(std::isfinite(a.c0_bar.real()));
    CHECK(std::isfinite(a.c1_bar.real()));
    CHECK(std::norm(a.c0_bar) + std::norm(a.c1_bar) == doctest::Approx(1.0).epsilon(1e-12));
    double om = qsl::overlap(kStrong, 600.0);
    CHECK(om >= 0.0);
    CHECK(om <= 1.0);
}

TEST_CASE("closed form matches the RK4 oracle in every regime") {
    for (const auto& p : {kWeak, kStrong, kSeam}) {
        const double t_end = 5.0, dt = 1e-4;
        auto traj = qsl::rk4_amplitudes(p, t_end, dt);
        REQUIRE(traj.size() == 50001);
        auto closed = qsl::amplitudes(p, t_end);
        const auto& num = traj.back();
        CHECK(std::abs(closed.c0_bar - num.c0_bar) < 1e-8);
        CHECK(std::abs(closed.c1_bar - num.c1_bar) < 1e-8);
        // raw solution compared relatively (it grows in the strong regime)
        CHECK(std::abs(closed.c0 - num.c0) / std::abs(num.c0) < 1e-8);
    }
}

TEST_CASE("amplitudes vary continuously across the degenerate seam") {
    DriveParams just_off{1.0, 2.0, 0.5 + 3e-13};
    for (double t : {1.0, 7.0, 20.0}) {
        auto on = qsl::amplitudes(DriveParams{1.0, 2.0, 0.5}, t);
        auto off = qsl::amplitudes(just_off, t);
        CHECK(std::abs(on.c0_bar - off.c0_bar) < 1e-5);
        CHECK(std::abs(on.c1_bar - off.c1_bar) < 1e-5);
    }
}

TEST_CASE("initial energy and variance: E(0) = A/2, var(0) = V0^2") {
    for (const auto& p : {kWeak, kStrong, kSeam}) {
        auto a = qsl::amplitudes(p, 0.0);
        CHECK(qsl::ml_energy(p, 0.0, a) == doctest::Approx(0.5 * p.A).epsilon(1e-14));
        CHECK(qsl::energy_variance(p, 0.0, a) == doctest::Approx(p.V0 * p.V0).epsilon(1e-12));
    }
}

TEST_CASE("at omega = 2A the energy spread is pinned at V0 for all times") {
    // with the drive at twice the level spacing the variance stays V0^2 exactly,
    // so the MT denominator equals V0 on any grid
    for (double t : {0.0, 3.3, 17.0, 42.5, 88.8}) {
        auto a = qsl::amplitudes(kWeak, t);
        CHECK(qsl::energy_variance(kWeak, t, a) == doctest::Approx(0.475 * 0.475).epsilon(1e-10));
    }
    auto rep = qsl::boson_report(kWeak, 123.0);
    CHECK(rep.dE_mt == doctest::Approx(0.475).epsilon(1e-12));
}

TEST_CASE("weak-drive reports: frozen values, MT only") {
    struct Row {
        double tau, C, R_mt;
    };
    // regression anchors from the shipped implementation (9 significant digits)
    const Row rows[] = {
        {50.0, 0.75970721, 1.5993836},
        {100.0, 0.27165223, 0.571899431},
        {150.0, 0.759257176, 1.59843616},
        {200.0, 0.4636676, 0.976142315},
    };
    for (const auto& r : rows) {
        auto rep = qsl::boson_report(kWeak, r.tau);
        CHECK(rep.bures_angle == doctest::Approx(r.C).epsilon(1e-8));
        CHECK(rep.dE_mt == doctest::Approx(0.475).epsilon(1e-12));
        REQUIRE(rep.R_mt.has_value());
        CHECK(*rep.R_mt == doctest::Approx(r.R_mt).epsilon(1e-8));
        // mean energy never rises above E(0) here: ML side flagged, not faulted
        CHECK(!rep.dE_ml.has_value());
        CHECK(!rep.R_ml.has_value());
        CHECK(rep.tau >= *rep.R_mt);
    }
}

TEST_CASE("strong-drive reports: overlap plateau and frozen denominators") {
    struct Row {
        double tau, dE_mt, dE_ml, R_mt, R_ml;
    };
    const Row rows[] = {
        {50.0, 4.12149497, 3.97872246, 0.190561476, 0.197399585},
        {100.0, 4.1223003, 3.98936123, 0.190524248, 0.196873163},
    };
    for (const auto& r : rows) {
        auto rep = qsl::boson_report(kStrong, r.tau);
        // long-time overlap saturates at 1/sqrt(2): bures angle pi/4
        CHECK(rep.omega_abs == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
        CHECK(rep.bures_angle == doctest::Approx(std::acos(-1.0) / 4.0).epsilon(1e-8));
        CHECK(rep.dE_mt == doctest::Approx(r.dE_mt).epsilon(1e-8));
        REQUIRE(rep.dE_ml.has_value());
        CHECK(*rep.dE_ml == doctest::Approx(r.dE_ml).epsilon(1e-8));
        REQUIRE(rep.R_mt.has_value());
        CHECK(*rep.R_mt == doctest::Approx(r.R_mt).epsilon(1e-8));
        REQUIRE(rep.R_ml.has_value());
        CHECK(*rep.R_ml == doctest::Approx(r.R_ml).epsilon(1e-8));
        CHECK(rep.tau >= *rep.R_mt);
        CHECK(rep.tau >= *rep.R_ml);
    }
}

TEST_CASE("degenerate-seam report end to end") {
    auto rep = qsl::boson_report(kSeam, 80.0);
    CHECK(rep.omega_abs == doctest::Approx(0.707413353).epsilon(1e-8));
    CHECK(rep.tau >= rep.R_mt.value_or(0.0));
}

TEST_CASE("MT denominator agrees with the RK4 oracle trajectory within 1e-6") {
    const double tau = 50.0, dt = 0.01;
    auto traj = qsl::rk4_amplitudes(kWeak, tau, dt);
    qsl::ObservableSeries var{qsl::TimeGrid{tau, traj.size() - 1}, {}};
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = var.grid.node(i);
        var.values.push_back(qsl::energy_variance(kWeak, t, traj[i]));
    }
    const double oracle = qsl::mt_denominator_from_variance(var);
    auto rep = qsl::boson_report(kWeak, tau);
    CHECK(std::abs(rep.dE_mt - oracle) < 1e-6);
}

TEST_CASE("switched-off drive: state never moves, bound is vacuous") {
    DriveParams off{1.0, 2.0, 0.0};
    auto rep = qsl::boson_report(off, 80.0);
    CHECK(rep.omega_abs == 1.0);
    CHECK(rep.bures_angle == 0.0);
    CHECK(rep.dE_mt == 0.0);
    CHECK(!rep.dE_ml.has_value());
    REQUIRE(rep.R_mt.has_value());
    CHECK(*rep.R_mt == 0.0);
    REQUIRE(rep.R_ml.has_value());
    CHECK(*rep.R_ml == 0.0);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(qsl::classify(DriveParams{0.0, 2.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(qsl::classify(DriveParams{-1.0, 2.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(qsl::amplitudes(DriveParams{1.0, 2.0, -0.1}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(qsl::rk4_amplitudes(kWeak, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(qsl::rk4_amplitudes(kWeak, -1.0, 0.1), std::invalid_argument);
}

TEST_CASE("overlap is clamped into [0, 1] over a parameter scatter") {
    for (double A : {0.5, 1.0, 2.5}) {
        for (double omega : {0.4, 1.0, 3.0}) {
            for (double V0 : {0.0, 0.3, 1.5}) {
                for (double t : {0.7, 12.0, 90.0}) {
                    double om = qsl::overlap(DriveParams{A, omega, V0}, t);
                    CHECK(om >= 0.0);
                    CHECK(om <= 1.0);
                }
            }
        }
    }
}
