// link_simulator.hpp
// Pulse-level Monte Carlo of BB84 with vacuum + weak decoy states over a lossy,
// rotated, scintillating free-space channel.
//
// Work is partitioned into fixed-size blocks. Every block draws from its own
// stream derived from (seed, stage, block index), so results do not depend on
// the number of worker threads.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "oamqkd/decoy_keyrate.hpp"
#include "oamqkd/optics.hpp"
#include "oamqkd/rng.hpp"

namespace oamqkd {

inline constexpr std::size_t kDefaultBlockSize = 2880;

enum class IntensityClass : std::uint8_t { Signal = 0, Decoy = 1, Vacuum = 2 };
inline constexpr std::size_t kIntensityClasses = 3;

std::string_view to_string(IntensityClass c);

struct SourceParams {
    double mu = 0.623;
    double nu = 0.165;
    double p_mu = 0.5;
    double p_nu = 0.3;
    double p_vac = 0.2;
    double pulse_rate_hz = 2.5e6;
    double effective_bitrate = 3.0e4;

    void validate() const;
    double intensity(IntensityClass c) const;
};

struct ChannelParams {
    double eta_ch = 0.10;
    double eta_c = 0.30;
    double eta_d = 0.60;
    double e_ch = 0.0;
    double y0 = 0.0;
    double theta = 0.0;  // rad
    Encoding encoding = Encoding::Hybrid;
    double block_scintillation_sigma = 0.0;

    void validate() const;
    double efficiency() const { return eta_ch * eta_c * eta_d; }
};

struct PulseRecord {
    IntensityClass intensity_class = IntensityClass::Signal;
    BasisLabel basis = BasisLabel::Z;
    std::uint8_t bit = 0;
    std::uint32_t photon_count = 0;
    bool detected = false;
    std::optional<std::uint8_t> detected_bit;
    BasisLabel detector_basis = BasisLabel::Z;
};

std::vector<PulseRecord> generate_pulses(std::size_t n, const SourceParams& src, std::uint64_t seed,
                                         std::size_t block_size = kDefaultBlockSize);

// Per-pulse channel model with the measurement statistics of the configured
// encoding and rotation precomputed.
class Transmitter {
public:
    explicit Transmitter(const ChannelParams& ch);

    PulseRecord operator()(PulseRecord p, double block_transmission_multiplier, Engine& rng) const;

    const ChannelParams& params() const { return ch_; }

private:
    ChannelParams ch_;
    // [sent basis][sent bit][receiver basis]
    std::array<std::array<std::array<double, 2>, 2>, 2> flip_{};
};

PulseRecord transmit(const PulseRecord& p, const ChannelParams& ch, double block_transmission_multiplier,
                     Engine& rng);

// Unit-mean log-normal multipliers exp(sigma Z - sigma^2/2), one per block.
std::vector<double> block_multipliers(std::size_t blocks, double sigma, std::uint64_t seed);

// Transmits every pulse in place, block by block.
void transmit_pulses(std::span<PulseRecord> pulses, const ChannelParams& ch, std::uint64_t seed,
                     std::size_t block_size = kDefaultBlockSize, unsigned workers = 1);

struct SiftedBit {
    std::size_t pulse_index = 0;
    std::uint8_t alice = 0;
    std::uint8_t bob = 0;
};

struct SiftedKeys {
    std::array<std::vector<SiftedBit>, kIntensityClasses> by_class;

    std::size_t size() const;
};

SiftedKeys sift(std::span<const PulseRecord> pulses);

struct ClassTally {
    std::uint64_t sent = 0;
    std::uint64_t detected = 0;
    std::uint64_t sifted = 0;
    std::uint64_t errors = 0;

    double gain() const;  // detected / sent
    double qber() const;  // errors / sifted
    ClassTally& operator+=(const ClassTally& o);
};

struct BlockTally {
    std::size_t index = 0;
    std::size_t block_size = 0;
    std::array<ClassTally, kIntensityClasses> classes{};
    // Signal pulses that carried exactly one photon. True single-photon gain is
    // single_photon.detected / classes[Signal].sent.
    ClassTally single_photon{};

    const ClassTally& operator[](IntensityClass c) const { return classes[static_cast<std::size_t>(c)]; }
};

// Consecutive non-overlapping blocks; a trailing partial block is dropped.
std::vector<BlockTally> tally_blocks(std::span<const PulseRecord> pulses, std::size_t block_size = kDefaultBlockSize);

struct SessionTally {
    double mu = 0.0;
    double nu = 0.0;
    std::vector<BlockTally> blocks;

    std::array<ClassTally, kIntensityClasses> pooled() const;
    ClassTally pooled_single_photon() const;
    double true_single_photon_gain() const;
    double true_single_photon_error() const;
};

DecoyObservables estimate_observables(const SessionTally& session);

struct SimulationConfig {
    SourceParams source;
    ChannelParams channel;
    std::size_t pulses = 1'000'000;
    std::size_t block_size = kDefaultBlockSize;
    unsigned workers = 1;
};

// generate -> transmit -> tally.
SessionTally simulate_session(const SimulationConfig& cfg, std::uint64_t seed);

}  // namespace oamqkd
