// optics.hpp
// Polarization qubits, hybrid polarization-OAM qubits, the q-plate interface
// between them, reference-frame rotations and projective measurements.
//
// Circular basis conventions: L and |l> carry +hbar, R and |r> carry -hbar.
// The Gaussian (zero-OAM) spatial factor of a polarization qubit is implicit.

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <utility>

namespace oamqkd {

using Amplitude = std::complex<double>;

inline constexpr double kNormTolerance = 1e-12;

enum class Encoding : std::uint8_t { Polarization, Hybrid };
enum class BasisLabel : std::uint8_t { Z, X };

// alpha |R> + beta |L>
struct PolarizationState {
    Amplitude amp_r{1.0, 0.0};
    Amplitude amp_l{0.0, 0.0};

    double norm_squared() const { return std::norm(amp_r) + std::norm(amp_l); }
};

// a |L>|r> + b |R>|l>, the zero total angular momentum subspace.
struct HybridState {
    Amplitude amp_lr{1.0, 0.0};
    Amplitude amp_rl{0.0, 0.0};

    double norm_squared() const { return std::norm(amp_lr) + std::norm(amp_rl); }
};

// Full polarization (x) OAM product space with |l| = 1.
struct ProductState {
    // Ordered basis {|R>|l>, |R>|r>, |L>|l>, |L>|r>}.
    enum Index : std::size_t { Rl = 0, Rr = 1, Ll = 2, Lr = 3 };

    std::array<Amplitude, 4> amps{};

    double norm_squared() const;

    // Total angular momentum index m = s + l of a basis element.
    static constexpr std::array<int, 4> total_momentum{0, -2, +2, 0};
};

struct Basis {
    BasisLabel label = BasisLabel::Z;
    Encoding encoding = Encoding::Polarization;
};

// Basis kets. Bit 0 / bit 1 of each basis:
//   polarization Z: R, L       polarization X: H = (R+L)/sqrt2, V = (R-L)/sqrt2
//   hybrid Z:       Lr, Rl     hybrid X:       (Lr +- Rl)/sqrt2
// The q-plate sends each polarization basis ket to the hybrid ket with the same bit.
PolarizationState polarization_ket(BasisLabel label, int bit);
HybridState hybrid_ket(BasisLabel label, int bit);

namespace states {
PolarizationState right();
PolarizationState left();
PolarizationState horizontal();
PolarizationState vertical();
}  // namespace states

// Throws ValidationError when |norm^2 - 1| > kNormTolerance.
void require_normalized(const PolarizationState& p);
void require_normalized(const HybridState& h);
void require_normalized(const ProductState& s);

HybridState qplate_map(const PolarizationState& p);
PolarizationState qplate_inverse(const HybridState& h);

ProductState embed(const HybridState& h);
// Projects back onto the hybrid subspace. Throws ValidationError if the state
// has weight outside it.
HybridState restrict_to_hybrid(const ProductState& s);

// Each basis amplitude picks up exp(-i m theta).
ProductState rotate_frame(const ProductState& s, double theta);
// Polarization-only restriction: m = s (the spatial factor is left untouched).
PolarizationState rotate_frame(const PolarizationState& p, double theta);

struct OutcomeProbabilities {
    double p0 = 0.0;
    double p1 = 0.0;
};

OutcomeProbabilities measure_probabilities(const PolarizationState& p, const Basis& b);
OutcomeProbabilities measure_probabilities(const HybridState& h, const Basis& b);
OutcomeProbabilities measure_probabilities(const ProductState& s, const Basis& b);

// 1/2 sin^2(theta): mean misalignment error of the H, V, R, L polarization set.
double polarization_qber_theory(double theta);

// Probability that a receiver in basis rx reads the bit opposite to the one sent
// with (tx, bit) after a frame rotation of theta, in the given encoding.
double flip_probability(Encoding enc, BasisLabel tx, int bit, BasisLabel rx, double theta);

}  // namespace oamqkd
