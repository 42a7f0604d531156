#include "oamqkd/optics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "oamqkd/errors.hpp"

namespace oamqkd {
namespace {

const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

void check_norm(double n2, const char* what) {
    if (!std::isfinite(n2) || std::abs(n2 - 1.0) > kNormTolerance) {
        throw ValidationError(std::string(what) + " is not normalized (norm^2 = " +
                              std::to_string(n2) + ")");
    }
}

void check_bit(int bit) {
    if (bit != 0 && bit != 1) throw ValidationError("bit must be 0 or 1");
}

Amplitude phase(double angle) { return std::polar(1.0, angle); }

}  // namespace

double ProductState::norm_squared() const {
    double n = 0.0;
    for (const auto& a : amps) n += std::norm(a);
    return n;
}

PolarizationState polarization_ket(BasisLabel label, int bit) {
    check_bit(bit);
    if (label == BasisLabel::Z) {
        return bit == 0 ? PolarizationState{1.0, 0.0} : PolarizationState{0.0, 1.0};
    }
    const double sign = bit == 0 ? 1.0 : -1.0;
    return PolarizationState{kInvSqrt2, sign * kInvSqrt2};
}

HybridState hybrid_ket(BasisLabel label, int bit) {
    check_bit(bit);
    if (label == BasisLabel::Z) {
        return bit == 0 ? HybridState{1.0, 0.0} : HybridState{0.0, 1.0};
    }
    const double sign = bit == 0 ? 1.0 : -1.0;
    return HybridState{kInvSqrt2, sign * kInvSqrt2};
}

namespace states {
PolarizationState right() { return polarization_ket(BasisLabel::Z, 0); }
PolarizationState left() { return polarization_ket(BasisLabel::Z, 1); }
PolarizationState horizontal() { return polarization_ket(BasisLabel::X, 0); }
PolarizationState vertical() { return polarization_ket(BasisLabel::X, 1); }
}  // namespace states

void require_normalized(const PolarizationState& p) { check_norm(p.norm_squared(), "polarization state"); }
void require_normalized(const HybridState& h) { check_norm(h.norm_squared(), "hybrid state"); }
void require_normalized(const ProductState& s) { check_norm(s.norm_squared(), "product state"); }

HybridState qplate_map(const PolarizationState& p) {
    require_normalized(p);
    // (a R + b L) (x) |0>  ->  a |L>|r> + b |R>|l>
    return HybridState{p.amp_r, p.amp_l};
}

PolarizationState qplate_inverse(const HybridState& h) {
    require_normalized(h);
    return PolarizationState{h.amp_lr, h.amp_rl};
}

ProductState embed(const HybridState& h) {
    require_normalized(h);
    ProductState s;
    s.amps[ProductState::Lr] = h.amp_lr;
    s.amps[ProductState::Rl] = h.amp_rl;
    return s;
}

HybridState restrict_to_hybrid(const ProductState& s) {
    require_normalized(s);
    const double leak = std::norm(s.amps[ProductState::Rr]) + std::norm(s.amps[ProductState::Ll]);
    if (leak > kNormTolerance) {
        throw ValidationError("product state has weight " + std::to_string(leak) +
                              " outside the hybrid subspace");
    }
    return HybridState{s.amps[ProductState::Lr], s.amps[ProductState::Rl]};
}

ProductState rotate_frame(const ProductState& s, double theta) {
    require_normalized(s);
    ProductState out;
    for (std::size_t i = 0; i < 4; ++i) {
        const int m = ProductState::total_momentum[i];
        out.amps[i] = m == 0 ? s.amps[i] : s.amps[i] * phase(-m * theta);
    }
    return out;
}

PolarizationState rotate_frame(const PolarizationState& p, double theta) {
    require_normalized(p);
    // R has s = -1, L has s = +1.
    return PolarizationState{p.amp_r * phase(theta), p.amp_l * phase(-theta)};
}

OutcomeProbabilities measure_probabilities(const PolarizationState& p, const Basis& b) {
    if (b.encoding != Encoding::Polarization) {
        throw ValidationError("hybrid basis applied to a polarization state");
    }
    require_normalized(p);
    OutcomeProbabilities out;
    for (int bit = 0; bit < 2; ++bit) {
        const auto k = polarization_ket(b.label, bit);
        const double prob = std::norm(std::conj(k.amp_r) * p.amp_r + std::conj(k.amp_l) * p.amp_l);
        (bit == 0 ? out.p0 : out.p1) = prob;
    }
    return out;
}

OutcomeProbabilities measure_probabilities(const HybridState& h, const Basis& b) {
    if (b.encoding != Encoding::Hybrid) {
        throw ValidationError("polarization basis applied to a hybrid state");
    }
    require_normalized(h);
    OutcomeProbabilities out;
    for (int bit = 0; bit < 2; ++bit) {
        const auto k = hybrid_ket(b.label, bit);
        const double prob = std::norm(std::conj(k.amp_lr) * h.amp_lr + std::conj(k.amp_rl) * h.amp_rl);
        (bit == 0 ? out.p0 : out.p1) = prob;
    }
    return out;
}

OutcomeProbabilities measure_probabilities(const ProductState& s, const Basis& b) {
    return measure_probabilities(restrict_to_hybrid(s), b);
}

double polarization_qber_theory(double theta) {
    const double s = std::sin(theta);
    return 0.5 * s * s;
}

double flip_probability(Encoding enc, BasisLabel tx, int bit, BasisLabel rx, double theta) {
    const auto sent = polarization_ket(tx, bit);
    OutcomeProbabilities probs;
    if (enc == Encoding::Polarization) {
        probs = measure_probabilities(rotate_frame(sent, theta), Basis{rx, Encoding::Polarization});
    } else {
        // Transmitter q-plate, rotated channel, receiver q-plate, polarization analyzer.
        const auto received = rotate_frame(embed(qplate_map(sent)), theta);
        const auto decoded = qplate_inverse(restrict_to_hybrid(received));
        probs = measure_probabilities(decoded, Basis{rx, Encoding::Polarization});
    }
    return bit == 0 ? probs.p1 : probs.p0;
}

}  // namespace oamqkd
