// turbulence.hpp
// Beam-wander analysis of receiver intensity frames: centroids, wander
// standard deviation, Fried parameter and a path-constant Cn^2.
//
// Weak-turbulence wander relation: sigma_m^2 = 4 L^2 / (k^2 r0^2).
// Fried parameter: r0 = [0.423 k^2 Cn^2 L]^(-3/5).

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace oamqkd {

struct IntensityFrame {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double pitch_mm = 1.0;
    std::vector<double> values;  // row-major, rows * cols

    IntensityFrame() = default;
    IntensityFrame(std::size_t rows, std::size_t cols, double pitch_mm);

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    double width_mm() const { return static_cast<double>(cols) * pitch_mm; }
    double height_mm() const { return static_cast<double>(rows) * pitch_mm; }
};

// Pixel (r, c) has its center at x = (c + 1/2) pitch, y = (r + 1/2) pitch.
struct CentroidSample {
    double x_mm = 0.0;
    double y_mm = 0.0;
};

struct LinkGeometry {
    double length_m = 210.0;
    double wavelength_m = 850e-9;

    void validate() const;
    double wavevector() const;
};

struct TurbulenceEstimate {
    double sigma_m = 0.0;
    double r0 = 0.0;
    double cn2 = 0.0;
    bool weak = false;
};

inline constexpr double kFriedConstant = 0.423;

CentroidSample centroid(const IntensityFrame& frame);
std::vector<CentroidSample> centroids(std::span<const IntensityFrame> frames);

// sqrt((sigma_x^2 + sigma_y^2) / 2) with population deviations, in metres.
double wander_sigma(std::span<const CentroidSample> samples);

double fried_parameter(double sigma_m, const LinkGeometry& geom);
double cn2_from_fried(double r0, const LinkGeometry& geom);
double fried_from_cn2(double cn2, const LinkGeometry& geom);

// Full chain from a wander deviation; weak when beam_radius_m < r0.
TurbulenceEstimate estimate_turbulence(double sigma_m, const LinkGeometry& geom, double beam_radius_m);

enum class SpotProfile : std::uint8_t { Gaussian, Annular };

struct SpotModel {
    SpotProfile profile = SpotProfile::Gaussian;
    double waist_mm = 1.0;  // 1/e^2 intensity radius of the Gaussian / LG01 parameter
    double peak = 1000.0;
    std::size_t rows = 256;
    std::size_t cols = 256;
    double pitch_mm = 0.05;
};

// Frames whose spot center wanders as an isotropic Gaussian of per-axis std
// wander_std_m around the frame center.
std::vector<IntensityFrame> synthesize_frames(std::size_t n, const SpotModel& spot, double wander_std_m,
                                              std::uint64_t seed);

// Text format: "rows cols pitch_mm" then rows lines of cols intensities.
IntensityFrame read_frame(std::istream& in);
IntensityFrame read_frame_file(const std::filesystem::path& path);
void write_frame(std::ostream& out, const IntensityFrame& frame);

}  // namespace oamqkd
