// secure_distance.hpp
// Predicted QBERs and key rate as a function of the signal gain, and the
// smallest gain that still yields a positive rate.

#pragma once

#include <span>
#include <vector>

#include "oamqkd/decoy_keyrate.hpp"

namespace oamqkd {

struct LinkBudgetParams {
    double mu = 0.623;
    double nu = 0.165;
    double e_ch = 0.02;
    double y0 = 5e-6;
    double f = 1.05;
    double e0 = 0.5;
    double dark_rate_hz = 100.0;
    double gate_s = 50e-9;

    void validate() const;
    ECModel ec_model() const { return ECModel{f, e0}; }
};

double dark_yield(double dark_rate_hz, double gate_s);

struct PredictedQbers {
    double e_mu_star = 0.0;
    double e_nu_star = 0.0;
    // Y0 exceeds a class gain; the dark fraction was capped at one.
    bool dark_dominated = false;
};

// E* = 1/2 Y0/Q + E_ch (1 - Y0/Q) for Q_mu and Q_nu = (nu/mu) Q_mu.
PredictedQbers predicted_qbers(double q_mu, const LinkBudgetParams& p);

// Observables a link with signal gain q_mu is expected to produce.
DecoyObservables predicted_observables(double q_mu, const LinkBudgetParams& p);

struct RatePoint {
    double q_mu = 0.0;
    double e_mu_star = 0.0;
    double e_nu_star = 0.0;
    // Some predicted gain lies below the dark yield; such a point is never
    // reported secure whatever the formula gives.
    bool dark_dominated = false;
    KeyRateBreakdown keyrate;
};

// extra_loss scales every grid gain (e.g. 0.1 for strong-turbulence mode scattering).
std::vector<RatePoint> rate_vs_gain(std::span<const double> q_mu_grid, const LinkBudgetParams& p,
                                    double extra_loss = 1.0);

// Log-spaced grid with the given number of points per decade, endpoints included.
std::vector<double> log_grid(double q_min, double q_max, int points_per_decade);

// Root of rate(q_mu) = 0. Bracket from a geometric (x10) scan over [1e-7, 1],
// refined by bisection. Throws ThresholdUndefinedError without a sign change.
double gain_threshold(const LinkBudgetParams& p);

// 10 log10(measured / g_star).
double loss_margin_db(double measured_gain, double g_star);

}  // namespace oamqkd
