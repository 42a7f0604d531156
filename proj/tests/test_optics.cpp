#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oamqkd/errors.hpp"
#include "oamqkd/optics.hpp"
#include "random_states.hpp"

using namespace oamqkd;
using testing_support::random_hybrid;
using testing_support::random_polarization;
using testing_support::random_product;

namespace {
constexpr double kTol = 1e-12;
constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

const Basis kZPol{BasisLabel::Z, Encoding::Polarization};
const Basis kXPol{BasisLabel::X, Encoding::Polarization};
const Basis kZHyb{BasisLabel::Z, Encoding::Hybrid};
const Basis kXHyb{BasisLabel::X, Encoding::Hybrid};
}  // namespace

TEST_CASE("qplate_map sends circular polarization to the hybrid Z states") {
    const auto h = qplate_map(PolarizationState{1.0, 0.0});
    CHECK(std::abs(h.amp_lr - Amplitude{1.0, 0.0}) < kTol);
    CHECK(std::abs(h.amp_rl) < kTol);

    const auto back = qplate_inverse(HybridState{1.0, 0.0});
    CHECK(std::abs(back.amp_r - Amplitude{1.0, 0.0}) < kTol);
    CHECK(std::abs(back.amp_l) < kTol);
}

TEST_CASE("horizontal polarization maps to the balanced hybrid superposition") {
    const auto h = qplate_map(states::horizontal());
    CHECK(std::abs(h.amp_lr - kInvSqrt2) < kTol);
    CHECK(std::abs(h.amp_rl - kInvSqrt2) < kTol);
}

TEST_CASE("qplate_inverse of (1, -1)/sqrt2 is (R - L)/sqrt2") {
    const auto p = qplate_inverse(HybridState{kInvSqrt2, -kInvSqrt2});
    CHECK(std::abs(p.amp_r - kInvSqrt2) < kTol);
    CHECK(std::abs(p.amp_l + kInvSqrt2) < kTol);
}

TEST_CASE("non-normalized states are rejected") {
    CHECK_THROWS_AS(qplate_map(PolarizationState{1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(qplate_inverse(HybridState{0.5, 0.0}), ValidationError);
    CHECK_THROWS_AS(measure_probabilities(PolarizationState{2.0, 0.0}, kZPol), ValidationError);
    CHECK_THROWS_AS(rotate_frame(ProductState{}, 0.3), ValidationError);
}

TEST_CASE("encoding mismatch is a validation error") {
    CHECK_THROWS_AS(measure_probabilities(states::right(), kZHyb), ValidationError);
    CHECK_THROWS_AS(measure_probabilities(HybridState{}, kXPol), ValidationError);
}

TEST_CASE("product state outside the hybrid subspace cannot be measured in a hybrid basis") {
    ProductState s;
    s.amps[ProductState::Rr] = 1.0;
    CHECK_THROWS_AS(measure_probabilities(s, kZHyb), ValidationError);
}

TEST_CASE("property: q-plate round trip and unitarity over random states") {
    std::mt19937_64 rng(20240101);
    for (int i = 0; i < 1000; ++i) {
        const auto p = random_polarization(rng);
        const auto h = qplate_map(p);
        CHECK(std::abs(h.norm_squared() - 1.0) < kTol);
        const auto back = qplate_inverse(h);
        CHECK(std::abs(back.amp_r - p.amp_r) < kTol);
        CHECK(std::abs(back.amp_l - p.amp_l) < kTol);
    }
}

TEST_CASE("embedded hybrid states are unchanged by any frame rotation") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    for (int i = 0; i < 200; ++i) {
        const auto e = embed(random_hybrid(rng));
        const auto r = rotate_frame(e, angle(rng));
        for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(r.amps[k] - e.amps[k]) < kTol);
    }
}

TEST_CASE("rotating H by pi/2 gives V up to a global phase") {
    const auto r = rotate_frame(states::horizontal(), kPi / 2);
    const auto v = states::vertical();
    const double overlap = std::abs(std::conj(v.amp_r) * r.amp_r + std::conj(v.amp_l) * r.amp_l);
    CHECK(overlap == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("circular polarization only picks up a phase under rotation") {
    for (double theta : {0.1, 0.7, 2.0, 5.5}) {
        const auto r = rotate_frame(states::right(), theta);
        CHECK(std::abs(r.amp_l) < kTol);
        const auto pz = measure_probabilities(r, kZPol);
        CHECK(pz.p0 == doctest::Approx(1.0).epsilon(1e-12));
        const auto px = measure_probabilities(r, kXPol);
        CHECK(px.p0 == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("measurement examples") {
    const auto z = measure_probabilities(hybrid_ket(BasisLabel::Z, 0), kZHyb);
    CHECK(z.p0 == doctest::Approx(1.0));
    CHECK(std::abs(z.p1) < kTol);

    const auto x = measure_probabilities(hybrid_ket(BasisLabel::Z, 1), kXHyb);
    CHECK(x.p0 == doctest::Approx(0.5));
    CHECK(x.p1 == doctest::Approx(0.5));

    // Direct expansion: <H| R(theta) |H> = cos(theta).
    for (double theta = 0.0; theta < 2 * kPi; theta += 0.37) {
        const auto pr = measure_probabilities(rotate_frame(states::horizontal(), theta), kXPol);
        CHECK(std::abs(pr.p0 - std::cos(theta) * std::cos(theta)) < kTol);
        CHECK(std::abs(pr.p1 - std::sin(theta) * std::sin(theta)) < kTol);
    }
}

TEST_CASE("polarization_qber_theory values") {
    CHECK(polarization_qber_theory(0.0) == 0.0);
    CHECK(polarization_qber_theory(kPi / 4) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(polarization_qber_theory(kPi / 3) == doctest::Approx(0.375).epsilon(1e-14));
}

TEST_CASE("misalignment law: four-state mean error equals 1/2 sin^2 theta") {
    for (double theta = -3.0; theta <= 3.0; theta += 0.05) {
        double mean = 0.0;
        for (auto label : {BasisLabel::Z, BasisLabel::X}) {
            for (int bit = 0; bit < 2; ++bit) {
                mean += flip_probability(Encoding::Polarization, label, bit, label, theta) / 4.0;
            }
        }
        CHECK(std::abs(mean - polarization_qber_theory(theta)) < kTol);
    }
}

TEST_CASE("hybrid transmission has no misalignment error") {
    for (double theta = 0.0; theta < 2 * kPi; theta += 0.3) {
        for (auto label : {BasisLabel::Z, BasisLabel::X}) {
            for (int bit = 0; bit < 2; ++bit) {
                CHECK(std::abs(flip_probability(Encoding::Hybrid, label, bit, label, theta)) < kTol);
                const auto other = label == BasisLabel::Z ? BasisLabel::X : BasisLabel::Z;
                CHECK(flip_probability(Encoding::Hybrid, label, bit, other, theta) == doctest::Approx(0.5));
            }
        }
    }
}

TEST_CASE("rotation preserves the norm of arbitrary product states") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 500; ++i) {
        const auto s = random_product(rng);
        CHECK(std::abs(rotate_frame(s, 0.01 * i).norm_squared() - 1.0) < kTol);
    }
}

TEST_CASE("basis kets are orthonormal and Z, X are mutually unbiased") {
    for (int i = 0; i < 2; ++i) {
        for (auto label : {BasisLabel::Z, BasisLabel::X}) {
            const auto other = label == BasisLabel::Z ? BasisLabel::X : BasisLabel::Z;

            const auto pp = measure_probabilities(polarization_ket(label, i), Basis{label, Encoding::Polarization});
            CHECK(std::abs((i == 0 ? pp.p0 : pp.p1) - 1.0) < kTol);
            const auto pc = measure_probabilities(polarization_ket(label, i), Basis{other, Encoding::Polarization});
            CHECK(std::abs(pc.p0 - 0.5) < kTol);
            CHECK(std::abs(pc.p1 - 0.5) < kTol);

            const auto hp = measure_probabilities(hybrid_ket(label, i), Basis{label, Encoding::Hybrid});
            CHECK(std::abs((i == 0 ? hp.p0 : hp.p1) - 1.0) < kTol);
            const auto hc = measure_probabilities(hybrid_ket(label, i), Basis{other, Encoding::Hybrid});
            CHECK(std::abs(hc.p0 - 0.5) < kTol);
            CHECK(std::abs(hc.p1 - 0.5) < kTol);
        }
    }
}

TEST_CASE("q-plate maps each polarization basis ket to the hybrid ket with the same bit") {
    for (auto label : {BasisLabel::Z, BasisLabel::X}) {
        for (int bit = 0; bit < 2; ++bit) {
            const auto h = qplate_map(polarization_ket(label, bit));
            const auto k = hybrid_ket(label, bit);
            CHECK(std::abs(h.amp_lr - k.amp_lr) < kTol);
            CHECK(std::abs(h.amp_rl - k.amp_rl) < kTol);
        }
    }
}
