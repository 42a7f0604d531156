#include "oamqkd/turbulence.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "oamqkd/errors.hpp"
#include "oamqkd/rng.hpp"

namespace oamqkd {

IntensityFrame::IntensityFrame(std::size_t rows_, std::size_t cols_, double pitch)
    : rows(rows_), cols(cols_), pitch_mm(pitch), values(rows_ * cols_, 0.0) {}

void LinkGeometry::validate() const {
    if (!(length_m > 0.0) || !(wavelength_m > 0.0) || !std::isfinite(length_m) ||
        !std::isfinite(wavelength_m)) {
        throw ValidationError("link length and wavelength must be positive");
    }
}

double LinkGeometry::wavevector() const { return 2.0 * std::numbers::pi / wavelength_m; }

CentroidSample centroid(const IntensityFrame& frame) {
    if (frame.values.size() != frame.rows * frame.cols) throw ValidationError("frame size mismatch");
    double total = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t r = 0; r < frame.rows; ++r) {
        const double y = static_cast<double>(r) + 0.5;
        double row_total = 0.0;
        double row_sx = 0.0;
        for (std::size_t c = 0; c < frame.cols; ++c) {
            const double v = frame.at(r, c);
            row_total += v;
            row_sx += v * (static_cast<double>(c) + 0.5);
        }
        total += row_total;
        sx += row_sx;
        sy += row_total * y;
    }
    if (!(total > 0.0)) throw DegenerateInputError("frame has no positive intensity");
    return CentroidSample{sx / total * frame.pitch_mm, sy / total * frame.pitch_mm};
}

std::vector<CentroidSample> centroids(std::span<const IntensityFrame> frames) {
    std::vector<CentroidSample> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(centroid(f));
    return out;
}

double wander_sigma(std::span<const CentroidSample> samples) {
    if (samples.size() < 2) throw DegenerateInputError("wander statistics need at least two centroids");
    const double n = static_cast<double>(samples.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& s : samples) {
        mx += s.x_mm;
        my += s.y_mm;
    }
    mx /= n;
    my /= n;
    double vx = 0.0;
    double vy = 0.0;
    for (const auto& s : samples) {
        vx += (s.x_mm - mx) * (s.x_mm - mx);
        vy += (s.y_mm - my) * (s.y_mm - my);
    }
    vx /= n;
    vy /= n;
    return std::sqrt(0.5 * (vx + vy)) * 1e-3;
}

double fried_parameter(double sigma_m, const LinkGeometry& geom) {
    geom.validate();
    if (!(sigma_m > 0.0)) {
        throw DegenerateInputError("zero wander deviation gives an unbounded Fried parameter");
    }
    return 2.0 * geom.length_m / (geom.wavevector() * sigma_m);
}

double cn2_from_fried(double r0, const LinkGeometry& geom) {
    geom.validate();
    if (!(r0 > 0.0)) throw DomainError("Fried parameter must be positive");
    const double k = geom.wavevector();
    return std::pow(r0, -5.0 / 3.0) / (kFriedConstant * k * k * geom.length_m);
}

double fried_from_cn2(double cn2, const LinkGeometry& geom) {
    geom.validate();
    if (!(cn2 > 0.0)) throw DomainError("Cn^2 must be positive");
    const double k = geom.wavevector();
    return std::pow(kFriedConstant * k * k * cn2 * geom.length_m, -3.0 / 5.0);
}

TurbulenceEstimate estimate_turbulence(double sigma_m, const LinkGeometry& geom, double beam_radius_m) {
    TurbulenceEstimate est;
    est.sigma_m = sigma_m;
    est.r0 = fried_parameter(sigma_m, geom);
    est.cn2 = cn2_from_fried(est.r0, geom);
    est.weak = beam_radius_m < est.r0;
    return est;
}

std::vector<IntensityFrame> synthesize_frames(std::size_t n, const SpotModel& spot, double wander_std_m,
                                              std::uint64_t seed) {
    if (n == 0) throw ValidationError("frame count must be positive");
    if (!(spot.waist_mm > 0.0) || !(spot.pitch_mm > 0.0) || spot.rows == 0 || spot.cols == 0) {
        throw ValidationError("spot model needs positive waist, pitch and frame size");
    }
    if (!(wander_std_m >= 0.0)) throw ValidationError("wander deviation must be non-negative");

    const double wander_mm = wander_std_m * 1e3;
    // The spot (3 waists) plus 5 sigma of wander must stay inside the frame.
    const double extent = 3.0 * spot.waist_mm + 5.0 * wander_mm;
    const double half_w = 0.5 * static_cast<double>(spot.cols) * spot.pitch_mm;
    const double half_h = 0.5 * static_cast<double>(spot.rows) * spot.pitch_mm;
    if (extent > half_w || extent > half_h) {
        throw ValidationError("spot and wander range do not fit inside the frame");
    }

    std::vector<IntensityFrame> frames;
    frames.reserve(n);
    const double w2 = spot.waist_mm * spot.waist_mm;
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = make_stream(seed, "synthesize_frames", i);
        std::normal_distribution<double> wander(0.0, 1.0);
        const double cx = half_w + wander_mm * wander(rng);
        const double cy = half_h + wander_mm * wander(rng);

        IntensityFrame f(spot.rows, spot.cols, spot.pitch_mm);
        for (std::size_t r = 0; r < f.rows; ++r) {
            const double dy = (static_cast<double>(r) + 0.5) * f.pitch_mm - cy;
            for (std::size_t c = 0; c < f.cols; ++c) {
                const double dx = (static_cast<double>(c) + 0.5) * f.pitch_mm - cx;
                const double rho2 = (dx * dx + dy * dy) / w2;
                const double gauss = std::exp(-2.0 * rho2);
                // LG01 doughnut, normalised to the same peak as the Gaussian.
                f.at(r, c) = spot.peak * (spot.profile == SpotProfile::Gaussian ? gauss : 2.0 * std::numbers::e * rho2 * gauss);
            }
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

IntensityFrame read_frame(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("missing frame header");
    std::istringstream hs(header);
    long long rows = 0;
    long long cols = 0;
    double pitch = 0.0;
    if (!(hs >> rows >> cols >> pitch) || rows <= 0 || cols <= 0 || !(pitch > 0.0)) {
        throw ValidationError("frame header must be 'rows cols pitch_mm' with positive values");
    }
    IntensityFrame f(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), pitch);
    std::string line;
    for (std::size_t r = 0; r < f.rows; ++r) {
        if (!std::getline(in, line)) {
            throw ValidationError("frame ends after " + std::to_string(r) + " of " + std::to_string(rows) + " rows");
        }
        std::istringstream ls(line);
        for (std::size_t c = 0; c < f.cols; ++c) {
            double v = 0.0;
            if (!(ls >> v)) throw ValidationError("row " + std::to_string(r + 1) + " has too few values");
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw ValidationError("row " + std::to_string(r + 1) + " has a negative or non-finite intensity");
            }
            f.at(r, c) = v;
        }
        std::string extra;
        if (ls >> extra) throw ValidationError("row " + std::to_string(r + 1) + " has too many values");
    }
    return f;
}

IntensityFrame read_frame_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open frame file " + path.string());
    try {
        return read_frame(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_frame(std::ostream& out, const IntensityFrame& frame) {
    out << frame.rows << ' ' << frame.cols << ' ' << std::setprecision(10) << frame.pitch_mm << '\n';
    for (std::size_t r = 0; r < frame.rows; ++r) {
        for (std::size_t c = 0; c < frame.cols; ++c) {
            if (c) out << ' ';
            out << frame.at(r, c);
        }
        out << '\n';
    }
}

}  // namespace oamqkd
