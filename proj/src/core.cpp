#include "qsl/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace qsl {

TimeGrid default_grid(double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("default_grid: tau must be > 0");
    const double dt_max = std::min(0.01, tau / 1000.0);
    auto steps = static_cast<std::size_t>(std::ceil(tau / dt_max - 1e-9));
    steps = std::max<std::size_t>(steps, 2);
    return TimeGrid{tau, steps};
}

double bures_angle(double omega_abs) {
    if (omega_abs < -1e-12 || omega_abs > 1.0 + 1e-12)
        throw std::domain_error("bures_angle: overlap outside [0,1]");
    return std::acos(std::clamp(omega_abs, 0.0, 1.0));
}

static void check_series(const ObservableSeries& s, const char* who) {
    if (s.grid.steps < 2) throw std::invalid_argument(std::string(who) + ": grid needs >= 2 steps");
    if (s.values.size() != s.grid.nodes())
        throw std::invalid_argument(std::string(who) + ": values length != steps+1");
    for (double v : s.values)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite value");
}

double integrate_time_average(const ObservableSeries& series) {
    check_series(series, "integrate_time_average");
    const auto& y = series.values;
    double acc = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) acc += y[i];
    // integral = acc*dt; average divides by t_end = steps*dt
    return acc / static_cast<double>(series.grid.steps);
}

double mt_denominator(const ObservableSeries& std_series) {
    check_series(std_series, "mt_denominator");
    for (double v : std_series.values)
        if (v < 0.0) throw std::runtime_error("mt_denominator: negative standard deviation");
    return integrate_time_average(std_series);
}

double mt_denominator_from_variance(const ObservableSeries& var_series) {
    check_series(var_series, "mt_denominator_from_variance");
    ObservableSeries s{var_series.grid, {}};
    s.values.reserve(var_series.values.size());
    for (double v : var_series.values) {
        if (v < -1e-12) throw std::runtime_error("mt_denominator: variance below -1e-12");
        s.values.push_back(std::sqrt(std::max(v, 0.0)));
    }
    return integrate_time_average(s);
}

std::optional<double> ml_denominator(const ObservableSeries& energy_series, double e0) {
    const double dE = integrate_time_average(energy_series) - e0;
    if (dE <= kMlValidityFloor) return std::nullopt;
    return dE;
}

std::optional<double> qsl_ratio(double bures_angle, std::optional<double> dE) {
    if (bures_angle == 0.0) return 0.0;  // vacuous bound at zero distance, even for dE = 0
    if (!dE) return std::nullopt;
    return bures_angle / *dE;
}

BoundReport assemble_report(double tau, double omega_abs,
                            const ObservableSeries& energy_series, double e0,
                            const ObservableSeries& std_series) {
    BoundReport rep;
    rep.tau = tau;
    rep.omega_abs = std::clamp(omega_abs, 0.0, 1.0);
    rep.bures_angle = bures_angle(omega_abs);
    rep.dE_mt = mt_denominator(std_series);
    rep.dE_ml = ml_denominator(energy_series, e0);
    rep.R_ml = qsl_ratio(rep.bures_angle, rep.dE_ml);
    rep.R_mt = qsl_ratio(rep.bures_angle,
                         rep.dE_mt > kMlValidityFloor ? std::optional<double>(rep.dE_mt) : std::nullopt);
    return rep;
}

std::vector<BoundReport> scan_R(const std::vector<double>& taus,
                                const std::function<BoundReport(double)>& evaluator,
                                unsigned threads) {
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] > 0.0)) throw std::invalid_argument("scan_R: tau values must be > 0");
        if (i > 0 && !(taus[i] > taus[i - 1]))
            throw std::invalid_argument("scan_R: tau values must be strictly increasing");
    }
    std::vector<BoundReport> out(taus.size());
    if (taus.empty()) return out;

    // model failures re-thrown annotated with the offending tau
    auto eval_at = [&](std::size_t i) {
        try {
            out[i] = evaluator(taus[i]);
        } catch (const std::exception& e) {
            throw std::runtime_error("scan_R: tau = " + std::to_string(taus[i]) + ": " + e.what());
        }
    };

    unsigned n = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    n = std::min<unsigned>(n, static_cast<unsigned>(taus.size()));
    if (n <= 1) {
        for (std::size_t i = 0; i < taus.size(); ++i) eval_at(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n);
    for (unsigned w = 0; w < n; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < taus.size(); i = next.fetch_add(1))
                    eval_at(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

namespace {

struct UniformCheck {
    double h;
};

UniformCheck require_uniform(const std::vector<double>& taus, const char* who) {
    if (taus.size() < 3) throw std::invalid_argument(std::string(who) + ": need at least 3 points");
    const double h = taus[1] - taus[0];
    if (!(h > 0.0)) throw std::invalid_argument(std::string(who) + ": tau not strictly increasing");
    for (std::size_t i = 1; i < taus.size(); ++i) {
        const double step = taus[i] - taus[i - 1];
        if (std::abs(step - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw std::invalid_argument(std::string(who) + ": non-uniform tau spacing");
    }
    return {h};
}

// interpolated zero crossings of the central-difference first derivative
struct Bracket {
    std::size_t i;       // left interior node of the sign change
    double tau_star;
    bool falling;        // derivative goes + -> <=0 (candidate maximum)
};

std::vector<Bracket> derivative_brackets(const std::vector<double>& taus,
                                         const std::vector<double>& y, double h) {
    std::vector<double> dy(y.size(), 0.0);
    for (std::size_t i = 1; i + 1 < y.size(); ++i) dy[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    std::vector<Bracket> out;
    for (std::size_t i = 1; i + 2 < y.size(); ++i) {
        const double a = dy[i], b = dy[i + 1];
        if (a == 0.0 && b == 0.0) continue;
        if (a > 0.0 && b <= 0.0) {
            out.push_back({i, taus[i] + h * a / (a - b), true});
        } else if (a < 0.0 && b >= 0.0) {
            out.push_back({i, taus[i] + h * a / (a - b), false});
        }
    }
    return out;
}

}  // namespace

std::vector<Extremum> find_extrema(const std::vector<SweepPoint>& series) {
    std::vector<double> taus, R, C;
    taus.reserve(series.size());
    for (const auto& p : series) {
        taus.push_back(p.tau);
        R.push_back(p.R);
        C.push_back(p.C);
    }
    const double h = require_uniform(taus, "find_extrema").h;

    std::vector<Extremum> out;
    for (const auto& br : derivative_brackets(taus, R, h)) {
        const std::size_t i = (br.tau_star - taus[br.i] > 0.5 * h) ? br.i + 1 : br.i;
        Extremum e;
        e.tau_star = br.tau_star;
        e.R_value = R[i];
        e.C_value = C[i];
        // classifier dE*C'' - C*dE'' with dE = C/R; falls back to the sign of R''
        // when R vanishes at a probe node (dE unrecoverable there)
        bool classified = false;
        if (i >= 1 && i + 1 < R.size() && R[i - 1] > 0.0 && R[i] > 0.0 && R[i + 1] > 0.0) {
            const double dEm = C[i - 1] / R[i - 1], dE0 = C[i] / R[i], dEp = C[i + 1] / R[i + 1];
            const double Cpp = (C[i + 1] - 2.0 * C[i] + C[i - 1]) / (h * h);
            const double Dpp = (dEp - 2.0 * dE0 + dEm) / (h * h);
            const double combo = dE0 * Cpp - C[i] * Dpp;
            if (combo < 0.0) e.kind = ExtremumKind::maximum;
            else if (combo > 0.0) e.kind = ExtremumKind::minimum;
            else e.kind = ExtremumKind::inflexion;
            classified = true;
        }
        if (!classified) {
            const double Rpp = (R[i + 1] - 2.0 * R[i] + R[i - 1]) / (h * h);
            e.kind = Rpp < 0.0 ? ExtremumKind::maximum
                   : Rpp > 0.0 ? ExtremumKind::minimum
                               : ExtremumKind::inflexion;
        }
        // bracket direction must agree for a genuine max/min; keep the sharper verdict
        if (br.falling && e.kind == ExtremumKind::minimum) e.kind = ExtremumKind::inflexion;
        if (!br.falling && e.kind == ExtremumKind::maximum) e.kind = ExtremumKind::inflexion;
        out.push_back(e);
    }
    return out;
}

std::vector<StationarityPoint> stationarity_check(const std::vector<StationaritySample>& series) {
    std::vector<double> taus, C, dE;
    for (const auto& p : series) {
        taus.push_back(p.tau);
        C.push_back(p.C);
        dE.push_back(p.dE);
    }
    const double h = require_uniform(taus, "stationarity_check").h;

    std::vector<double> R(series.size(), 0.0);
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (dE[i] == 0.0) return {};  // ratio series undefined; nothing to probe
        R[i] = C[i] / dE[i];
    }

    auto logderiv = [&](const std::vector<double>& y, std::size_t i) {
        return (y[i + 1] - y[i - 1]) / (2.0 * h) / y[i];
    };

    std::vector<StationarityPoint> out;
    for (const auto& br : derivative_brackets(taus, R, h)) {
        const std::size_t i = br.i;
        if (C[i] == 0.0 || C[i + 1] == 0.0) continue;  // flagged probe, skipped
        const double w = (br.tau_star - taus[i]) / h;
        StationarityPoint sp;
        sp.tau_star = br.tau_star;
        sp.lhs = (1.0 - w) * logderiv(C, i) + w * logderiv(C, i + 1);
        sp.rhs = (1.0 - w) * logderiv(dE, i) + w * logderiv(dE, i + 1);
        sp.mismatch = std::abs(sp.lhs - sp.rhs);
        // third-difference estimate of the h^2 truncation of the central first derivative
        double third = 0.0;
        if (i >= 1 && i + 2 < R.size()) {
            const double d3C = (C[i + 2] - 3.0 * C[i + 1] + 3.0 * C[i] - C[i - 1]) / (h * h * h);
            const double d3D = (dE[i + 2] - 3.0 * dE[i + 1] + 3.0 * dE[i] - dE[i - 1]) / (h * h * h);
            third = std::abs(d3C / C[i]) + std::abs(d3D / dE[i]);
        }
        sp.truncation_estimate = h * h / 6.0 * third + h * (std::abs(sp.lhs) + std::abs(sp.rhs));
        out.push_back(sp);
    }
    return out;
}

}  // namespace qsl
