// decoy_keyrate.hpp
// Vacuum + weak decoy-state bounds and the infinite-key secret key rate.
//
//   r = Q1L/Q_mu [1 - h2(e1U)] - leak_EC + Q0/Q_mu,   leak_EC = f h2(E_mu)
//
// Rates are secret bits per sifted bit.

#pragma once

namespace oamqkd {

struct DecoyObservables {
    double mu = 0.0;
    double nu = 0.0;
    double q_mu = 0.0;
    double q_nu = 0.0;
    double e_mu = 0.0;
    double e_nu = 0.0;
    double y0 = 0.0;

    // mu > nu > 0, gains in (0, 1], QBERs in [0, 1], y0 >= 0.
    void validate() const;
};

struct ECModel {
    double f = 1.05;   // leak_EC / h2(E_mu)
    double e0 = 0.5;   // error rate of vacuum (dark) detections

    void validate() const;
};

// A bound together with whether it had to be clamped into its valid range.
struct ClampedValue {
    double value = 0.0;
    double unclamped = 0.0;
    bool clamped = false;
};

struct KeyRateBreakdown {
    double q1_lower = 0.0;
    double e1_upper = 0.0;
    double q0 = 0.0;
    double leak_ec = 0.0;
    double rate = 0.0;
    bool secure = false;

    bool q1_clamped = false;
    bool e1_clamped = false;
    // Set when q1_lower is zero so the single-photon error bound does not exist;
    // the single-photon term then contributes nothing to the rate.
    bool e1_undefined = false;
};

// h2(x) = -x log2 x - (1-x) log2(1-x), with h2(0) = h2(1) = 0.
double binary_entropy(double x);

ClampedValue q1_lower(const DecoyObservables& obs);
// Throws BoundUndefinedError when q1L == 0.
ClampedValue e1_upper(const DecoyObservables& obs, double q1L, const ECModel& ec = {});
double q0_gain(const DecoyObservables& obs);

KeyRateBreakdown secret_key_rate(const DecoyObservables& obs, const ECModel& ec = {});

// Rate with a true single-photon source at the same QBER: 1 - h2(E) - f h2(E).
double single_photon_rate(double e_mu, const ECModel& ec = {});
// Same assumptions, packaged as a breakdown (Q1 = Q_mu, e1 = E_mu, Q0 = 0).
KeyRateBreakdown single_photon_breakdown(const DecoyObservables& obs, const ECModel& ec = {});

// Largest QBER with a positive single-photon rate: root of 1 - (1 + f) h2(E) on (0, 1/2).
double qber_threshold(double ec_f);

}  // namespace oamqkd
