#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lwcmap/errors.hpp"

namespace lwcmap {

inline constexpr double kMinWavelengthNm = 300.0;
inline constexpr double kMaxWavelengthNm = 1100.0;
inline constexpr double kMaxReflectance = 1.5; // calibrated reflectance can exceed 1 at specular pixels

// Strictly increasing grid of band centers, nm.
struct WavelengthAxis {
    std::vector<double> wavelengths_nm;

    std::size_t size() const { return wavelengths_nm.size(); }
    double operator[](std::size_t i) const { return wavelengths_nm[i]; }
};

inline WavelengthAxis make_axis(std::vector<double> wavelengths_nm) {
    if (wavelengths_nm.size() < 2) fail("NonMonotonicAxis", "axis needs at least 2 wavelengths");
    for (std::size_t i = 0; i < wavelengths_nm.size(); ++i) {
        double w = wavelengths_nm[i];
        if (!std::isfinite(w) || w < kMinWavelengthNm || w > kMaxWavelengthNm)
            fail("MalformedValue",
                 "wavelength " + std::to_string(w) + " outside [300, 1100] nm");
        if (i > 0 && !(wavelengths_nm[i - 1] < w))
            fail("NonMonotonicAxis", "wavelengths not strictly increasing at position " +
                                         std::to_string(i));
    }
    return WavelengthAxis{std::move(wavelengths_nm)};
}

// Index of the band nearest to target_nm. Ties break toward the lower
// wavelength; the nearest band must lie within tolerance_nm.
inline std::size_t band_index_for(const WavelengthAxis& axis, double target_nm,
                                  double tolerance_nm) {
    if (!(tolerance_nm > 0)) fail("InvalidConfig", "tolerance must be > 0");
    const auto& w = axis.wavelengths_nm;
    std::size_t best = 0;
    double best_dist = std::fabs(w[0] - target_nm);
    for (std::size_t i = 1; i < w.size(); ++i) {
        double d = std::fabs(w[i] - target_nm);
        if (d < best_dist) { // '<' keeps the lower wavelength on ties
            best = i;
            best_dist = d;
        }
    }
    if (best_dist > tolerance_nm)
        fail("NoBandInTolerance", "no band within " + std::to_string(tolerance_nm) +
                                      " nm of " + std::to_string(target_nm) +
                                      " nm (nearest: " + std::to_string(w[best]) + " nm)");
    return best;
}

// One spectroradiometer record. nitrogen/carbon/cn_ratio are carried as
// metadata only and never enter a regression.
struct SpectralSample {
    std::string sample_id;
    int das = 0;
    std::optional<double> nitrogen;
    std::optional<double> carbon;
    std::optional<double> cn_ratio;
    std::optional<double> lwc; // fraction in [0,1]; absent at inference time
    std::vector<double> reflectance;
};

// width x height x bands reflectance raster, float32, band varying fastest
// (BIP in memory: the mapper reads whole per-pixel spectra).
struct HyperspectralCube {
    std::size_t width = 0;
    std::size_t height = 0;
    WavelengthAxis axis;
    std::vector<float> data;
    std::optional<float> nodata_value;

    std::size_t bands() const { return axis.size(); }
    std::size_t pixels() const { return width * height; }

    float at(std::size_t row, std::size_t col, std::size_t band) const {
        return data[(row * width + col) * bands() + band];
    }
    float& at(std::size_t row, std::size_t col, std::size_t band) {
        return data[(row * width + col) * bands() + band];
    }
    const float* pixel_ptr(std::size_t row, std::size_t col) const {
        return data.data() + (row * width + col) * bands();
    }
};

} // namespace lwcmap
