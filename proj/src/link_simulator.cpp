#include "oamqkd/link_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "oamqkd/errors.hpp"

namespace oamqkd {
namespace {

bool is_fraction(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

std::size_t block_count(std::size_t n, std::size_t block_size) { return (n + block_size - 1) / block_size; }

// Runs fn(b) for every block index; block b goes to worker b % workers.
template <class Fn>
void for_each_block(std::size_t blocks, unsigned workers, Fn&& fn) {
    workers = std::max(1u, workers);
    if (workers == 1 || blocks < 2) {
        for (std::size_t b = 0; b < blocks; ++b) fn(b);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&fn, blocks, workers, w] {
            for (std::size_t b = w; b < blocks; b += workers) fn(b);
        });
    }
}

// Inverse-CDF Poisson draw: the count is non-decreasing in mean for a fixed u.
std::uint32_t poisson_from_uniform(double u, double mean) {
    if (mean <= 0.0) return 0;
    double p = std::exp(-mean);
    double cdf = p;
    std::uint32_t k = 0;
    while (u > cdf && k < 10000) {
        ++k;
        p *= mean / k;
        cdf += p;
        if (p == 0.0 && k > mean) break;
    }
    return k;
}

// Every pulse consumes the same number of draws, so runs sharing a seed stay
// aligned pulse by pulse when parameters change.
void generate_block(std::span<PulseRecord> out, const SourceParams& src, Engine rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (auto& p : out) {
        p = PulseRecord{};
        const double u_class = uniform(rng);
        const auto bits = rng();
        const double u_photons = uniform(rng);
        p.intensity_class = u_class < src.p_mu                ? IntensityClass::Signal
                            : u_class < src.p_mu + src.p_nu ? IntensityClass::Decoy
                                                            : IntensityClass::Vacuum;
        p.basis = (bits & 1U) ? BasisLabel::X : BasisLabel::Z;
        p.bit = static_cast<std::uint8_t>((bits >> 1) & 1U);
        p.photon_count = poisson_from_uniform(u_photons, src.intensity(p.intensity_class));
    }
}

}  // namespace

std::string_view to_string(IntensityClass c) {
    switch (c) {
        case IntensityClass::Signal: return "signal";
        case IntensityClass::Decoy: return "decoy";
        case IntensityClass::Vacuum: return "vacuum";
    }
    return "unknown";
}

void SourceParams::validate() const {
    if (!(std::isfinite(mu) && std::isfinite(nu) && nu > 0.0 && mu > nu)) {
        throw ValidationError("source requires mu > nu > 0");
    }
    if (mu > 100.0) throw ValidationError("mean photon numbers above 100 are not supported");
    if (!is_fraction(p_mu) || !is_fraction(p_nu) || !is_fraction(p_vac) ||
        std::abs(p_mu + p_nu + p_vac - 1.0) > 1e-9) {
        throw ValidationError("intensity-class probabilities must be fractions summing to 1");
    }
    if (!(pulse_rate_hz > 0.0) || !(effective_bitrate > 0.0)) {
        throw ValidationError("pulse rate and effective bit rate must be positive");
    }
}

double SourceParams::intensity(IntensityClass c) const {
    switch (c) {
        case IntensityClass::Signal: return mu;
        case IntensityClass::Decoy: return nu;
        case IntensityClass::Vacuum: return 0.0;
    }
    return 0.0;
}

void ChannelParams::validate() const {
    if (!is_fraction(eta_ch) || !is_fraction(eta_c) || !is_fraction(eta_d)) {
        throw ValidationError("channel efficiencies must lie in [0, 1]");
    }
    if (!is_fraction(e_ch)) throw ValidationError("e_ch must lie in [0, 1]");
    if (!is_fraction(y0)) throw ValidationError("y0 must lie in [0, 1]");
    if (!std::isfinite(theta)) throw ValidationError("theta must be finite");
    if (!(block_scintillation_sigma >= 0.0) || !std::isfinite(block_scintillation_sigma)) {
        throw ValidationError("scintillation log-std must be non-negative");
    }
}

std::vector<PulseRecord> generate_pulses(std::size_t n, const SourceParams& src, std::uint64_t seed,
                                         std::size_t block_size) {
    if (n == 0) throw ValidationError("pulse count must be positive");
    if (block_size == 0) throw ValidationError("block size must be positive");
    src.validate();
    std::vector<PulseRecord> pulses(n);
    for (std::size_t b = 0; b < block_count(n, block_size); ++b) {
        const std::size_t begin = b * block_size;
        const std::size_t len = std::min(block_size, n - begin);
        generate_block(std::span(pulses).subspan(begin, len), src, make_stream(seed, "generate", b));
    }
    return pulses;
}

Transmitter::Transmitter(const ChannelParams& ch) : ch_(ch) {
    ch_.validate();
    for (int tx = 0; tx < 2; ++tx) {
        for (int bit = 0; bit < 2; ++bit) {
            for (int rx = 0; rx < 2; ++rx) {
                flip_[tx][bit][rx] = flip_probability(ch_.encoding, static_cast<BasisLabel>(tx), bit,
                                                      static_cast<BasisLabel>(rx), ch_.theta);
            }
        }
    }
}

PulseRecord Transmitter::operator()(PulseRecord p, double multiplier, Engine& rng) const {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    // Fixed draw count per pulse; see generate_block.
    const double u_photon = uniform(rng);
    const double u_dark = uniform(rng);
    const double u_flip = uniform(rng);
    const double u_noise = uniform(rng);
    const auto bits = rng();

    const double survive = std::min(1.0, ch_.efficiency() * multiplier);
    // At least one of the photons survives the loss chain.
    bool photon_click = false;
    if (p.photon_count > 0 && survive > 0.0) {
        const double p_any = survive >= 1.0 ? 1.0 : -std::expm1(p.photon_count * std::log1p(-survive));
        photon_click = u_photon < p_any;
    }
    const bool dark_click = u_dark < ch_.y0;
    p.detector_basis = (bits & 1U) ? BasisLabel::X : BasisLabel::Z;

    p.detected = photon_click || dark_click;
    p.detected_bit.reset();
    if (!p.detected) return p;

    const auto dark_bit = static_cast<std::uint8_t>((bits >> 1) & 1U);
    if (!photon_click) {
        p.detected_bit = dark_bit;
        return p;
    }

    const double flip = flip_[static_cast<int>(p.basis)][p.bit][static_cast<int>(p.detector_basis)];
    std::uint8_t photon_bit = p.bit;
    if (u_flip < flip) photon_bit ^= 1U;
    if (u_noise < ch_.e_ch) photon_bit ^= 1U;

    if (dark_click && dark_bit != photon_bit) {
        p.detected_bit = static_cast<std::uint8_t>((bits >> 2) & 1U);
    } else {
        p.detected_bit = photon_bit;
    }
    return p;
}

PulseRecord transmit(const PulseRecord& p, const ChannelParams& ch, double multiplier, Engine& rng) {
    if (!(multiplier > 0.0)) throw ValidationError("transmission multiplier must be positive");
    return Transmitter(ch)(p, multiplier, rng);
}

std::vector<double> block_multipliers(std::size_t blocks, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ValidationError("scintillation log-std must be non-negative");
    std::vector<double> out(blocks, 1.0);
    if (sigma == 0.0) return out;
    for (std::size_t b = 0; b < blocks; ++b) {
        auto rng = make_stream(seed, "scintillation", b);
        std::normal_distribution<double> z(0.0, 1.0);
        out[b] = std::exp(sigma * z(rng) - 0.5 * sigma * sigma);
    }
    return out;
}

void transmit_pulses(std::span<PulseRecord> pulses, const ChannelParams& ch, std::uint64_t seed,
                     std::size_t block_size, unsigned workers) {
    if (block_size == 0) throw ValidationError("block size must be positive");
    const Transmitter tx(ch);
    const std::size_t blocks = block_count(pulses.size(), block_size);
    const auto mult = block_multipliers(blocks, ch.block_scintillation_sigma, seed);
    for_each_block(blocks, workers, [&](std::size_t b) {
        auto rng = make_stream(seed, "transmit", b);
        const std::size_t begin = b * block_size;
        const std::size_t end = std::min(pulses.size(), begin + block_size);
        for (std::size_t i = begin; i < end; ++i) pulses[i] = tx(pulses[i], mult[b], rng);
    });
}

std::size_t SiftedKeys::size() const {
    std::size_t n = 0;
    for (const auto& v : by_class) n += v.size();
    return n;
}

SiftedKeys sift(std::span<const PulseRecord> pulses) {
    SiftedKeys out;
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        const auto& p = pulses[i];
        if (!p.detected || p.basis != p.detector_basis) continue;
        out.by_class[static_cast<std::size_t>(p.intensity_class)].push_back(
            SiftedBit{i, p.bit, p.detected_bit.value()});
    }
    return out;
}

double ClassTally::gain() const {
    return sent == 0 ? std::nan("") : static_cast<double>(detected) / static_cast<double>(sent);
}

double ClassTally::qber() const {
    return sifted == 0 ? std::nan("") : static_cast<double>(errors) / static_cast<double>(sifted);
}

ClassTally& ClassTally::operator+=(const ClassTally& o) {
    sent += o.sent;
    detected += o.detected;
    sifted += o.sifted;
    errors += o.errors;
    return *this;
}

std::vector<BlockTally> tally_blocks(std::span<const PulseRecord> pulses, std::size_t block_size) {
    if (block_size == 0) throw ValidationError("block size must be positive");
    const std::size_t full = pulses.size() / block_size;
    std::vector<BlockTally> blocks(full);
    for (std::size_t b = 0; b < full; ++b) {
        auto& bt = blocks[b];
        bt.index = b;
        bt.block_size = block_size;
        for (const auto& p : pulses.subspan(b * block_size, block_size)) {
            ClassTally one;
            one.sent = 1;
            if (p.detected) {
                one.detected = 1;
                if (p.basis == p.detector_basis) {
                    one.sifted = 1;
                    one.errors = p.detected_bit.value() != p.bit ? 1 : 0;
                }
            }
            bt.classes[static_cast<std::size_t>(p.intensity_class)] += one;
            if (p.intensity_class == IntensityClass::Signal && p.photon_count == 1) bt.single_photon += one;
        }
    }
    return blocks;
}

std::array<ClassTally, kIntensityClasses> SessionTally::pooled() const {
    std::array<ClassTally, kIntensityClasses> total{};
    for (const auto& b : blocks) {
        for (std::size_t c = 0; c < kIntensityClasses; ++c) total[c] += b.classes[c];
    }
    return total;
}

ClassTally SessionTally::pooled_single_photon() const {
    ClassTally total;
    for (const auto& b : blocks) total += b.single_photon;
    return total;
}

double SessionTally::true_single_photon_gain() const {
    const auto signal = pooled()[static_cast<std::size_t>(IntensityClass::Signal)];
    if (signal.sent == 0) throw EstimationError("no signal pulses in session");
    return static_cast<double>(pooled_single_photon().detected) / static_cast<double>(signal.sent);
}

double SessionTally::true_single_photon_error() const {
    const auto one = pooled_single_photon();
    if (one.sifted == 0) throw EstimationError("no sifted single-photon signal pulses in session");
    return one.qber();
}

DecoyObservables estimate_observables(const SessionTally& session) {
    const auto total = session.pooled();
    for (std::size_t c = 0; c < kIntensityClasses; ++c) {
        if (total[c].sent == 0) {
            throw EstimationError("no " + std::string(to_string(static_cast<IntensityClass>(c))) +
                                  " pulses were sent");
        }
    }
    const auto& sig = total[static_cast<std::size_t>(IntensityClass::Signal)];
    const auto& dec = total[static_cast<std::size_t>(IntensityClass::Decoy)];
    const auto& vac = total[static_cast<std::size_t>(IntensityClass::Vacuum)];
    // A class without sifted bits reports zero QBER rather than NaN.
    const auto qber_or_zero = [](const ClassTally& t) { return t.sifted == 0 ? 0.0 : t.qber(); };
    return DecoyObservables{session.mu,     session.nu,          sig.gain(), dec.gain(),
                            qber_or_zero(sig), qber_or_zero(dec), vac.gain()};
}

SessionTally simulate_session(const SimulationConfig& cfg, std::uint64_t seed) {
    if (cfg.pulses == 0) throw ValidationError("pulse count must be positive");
    if (cfg.block_size == 0) throw ValidationError("block size must be positive");
    cfg.source.validate();
    const Transmitter tx(cfg.channel);

    const std::size_t n = cfg.pulses;
    const std::size_t bs = cfg.block_size;
    const std::size_t blocks = block_count(n, bs);
    const auto mult = block_multipliers(blocks, cfg.channel.block_scintillation_sigma, seed);

    std::vector<PulseRecord> pulses(n);
    for_each_block(blocks, cfg.workers, [&](std::size_t b) {
        const std::size_t begin = b * bs;
        const std::size_t len = std::min(bs, n - begin);
        auto block = std::span(pulses).subspan(begin, len);
        generate_block(block, cfg.source, make_stream(seed, "generate", b));
        auto rng = make_stream(seed, "transmit", b);
        for (auto& p : block) p = tx(p, mult[b], rng);
    });

    SessionTally session;
    session.mu = cfg.source.mu;
    session.nu = cfg.source.nu;
    session.blocks = tally_blocks(pulses, bs);
    return session;
}

}  // namespace oamqkd
