#pragma once
// Core time-energy bound machinery: Bures angle, trapezoid averages,
// MT/ML denominators, ratio R = C/dE, sweep driver and extremum analysis.
// hbar = 1 throughout.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qsl {

constexpr double kMlValidityFloor = 1e-12;  // dE at or below this -> ML ratio undefined

struct TimeGrid {
    double t_end = 0.0;   // tau; interval is [0, tau]
    std::size_t steps = 0;  // number of intervals, >= 2

    double dt() const { return t_end / static_cast<double>(steps); }
    std::size_t nodes() const { return steps + 1; }
    double node(std::size_t i) const { return t_end * static_cast<double>(i) / static_cast<double>(steps); }
};

// uniform grid with dt <= min(0.01, tau/1000); see quadrature decision in README
TimeGrid default_grid(double tau);

struct ObservableSeries {
    TimeGrid grid;
    std::vector<double> values;  // one per node, endpoints included
};

struct BoundReport {
    double tau = 0.0;
    double omega_abs = 1.0;        // |<psi(0)|psi(tau)>|
    double bures_angle = 0.0;      // arccos(omega_abs)
    double dE_mt = 0.0;            // time-averaged instantaneous energy std dev
    std::optional<double> dE_ml;   // time-averaged <H> minus E(0); empty when <= 1e-12
    std::optional<double> R_mt;
    std::optional<double> R_ml;
};

double bures_angle(double omega_abs);

// (1/tau) * trapezoid integral of the series over [0, tau]
double integrate_time_average(const ObservableSeries& series);

// time average of the instantaneous normalized energy std dev
double mt_denominator(const ObservableSeries& std_series);

// variance series variant with the -1e-12 negativity tolerance applied per node
double mt_denominator_from_variance(const ObservableSeries& var_series);

// timeAverage(E) - e0; nullopt when <= 1e-12 (ML bound undefined there)
std::optional<double> ml_denominator(const ObservableSeries& energy_series, double e0);

// R = C/dE; 0 when C == 0 regardless of dE; nullopt when dE invalid and C > 0
std::optional<double> qsl_ratio(double bures_angle, std::optional<double> dE);

// feeds both denominators + overlap into one report
BoundReport assemble_report(double tau, double omega_abs,
                            const ObservableSeries& energy_series, double e0,
                            const ObservableSeries& std_series);

// one report per tau, input order preserved; threads = 0 -> hardware concurrency
std::vector<BoundReport> scan_R(const std::vector<double>& taus,
                                const std::function<BoundReport(double)>& evaluator,
                                unsigned threads = 0);

enum class ExtremumKind { maximum, minimum, inflexion };

struct Extremum {
    double tau_star = 0.0;   // interpolated zero of the central-difference dR/dtau
    ExtremumKind kind = ExtremumKind::maximum;
    double R_value = 0.0;    // series value at the node nearest tau_star
    double C_value = 0.0;
};

struct SweepPoint {
    double tau = 0.0;
    double R = 0.0;
    double C = 0.0;
};

// interior sign changes of central-difference dR/dtau on a uniform sweep;
// classification via the sign of dE*C'' - C*dE'' (dE recovered as C/R)
std::vector<Extremum> find_extrema(const std::vector<SweepPoint>& series);

struct StationarityPoint {
    double tau_star = 0.0;
    double lhs = 0.0;  // (dC/dtau)/C at tau_star
    double rhs = 0.0;  // (d dE/dtau)/dE at tau_star
    double mismatch = 0.0;
    double truncation_estimate = 0.0;  // h^2-scale bound from third differences
};

struct StationaritySample {
    double tau = 0.0;
    double C = 0.0;
    double dE = 0.0;
};

// logarithmic-derivative balance (dC/dtau)/C = (d dE/dtau)/dE at each detected
// extremum of R = C/dE; probe points with C == 0 or dE == 0 are skipped
std::vector<StationarityPoint> stationarity_check(const std::vector<StationaritySample>& series);

}  // namespace qsl
