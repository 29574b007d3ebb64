#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "lwcmap/linalg.hpp"
#include "lwcmap/spectral.hpp"

namespace lwcmap {

// The eleven water-sensitive indices, in canonical column order.
enum class IndexId : std::size_t {
    Ndvi = 0,
    GreenNdvi,
    Rdvi,
    Mtvi2,
    WaterIndex,
    Npci,
    Osavi,
    RedEdge,
    Nir1,
    RedBlue,
    WaterBand,
};

inline constexpr std::size_t kIndexCount = 11;

inline constexpr std::array<const char*, kIndexCount> kIndexNames = {
    "ndvi", "green_ndvi", "rdvi",     "mtvi2", "water_index", "npci",
    "osavi", "red_edge",  "nir1",     "red_blue", "water_band"};

enum class FeatureSet { Three, Eight, Eleven };

inline const char* feature_set_name(FeatureSet fs) {
    switch (fs) {
        case FeatureSet::Three: return "three";
        case FeatureSet::Eight: return "eight";
        default: return "eleven";
    }
}

// Column order per set. EIGHT follows Table 1 row order; THREE is the
// {NIR1, RedBlue, WaterBand} group; ELEVEN is the full Table 1 order.
inline std::vector<IndexId> feature_set_ids(FeatureSet fs) {
    using I = IndexId;
    switch (fs) {
        case FeatureSet::Three:
            return {I::Nir1, I::RedBlue, I::WaterBand};
        case FeatureSet::Eight:
            return {I::Ndvi, I::GreenNdvi, I::Rdvi, I::Mtvi2,
                    I::WaterIndex, I::Npci, I::Osavi, I::RedEdge};
        default:
            return {I::Ndvi, I::GreenNdvi, I::Rdvi, I::Mtvi2, I::WaterIndex, I::Npci,
                    I::Osavi, I::RedEdge, I::Nir1, I::RedBlue, I::WaterBand};
    }
}

inline std::vector<std::string> feature_set_names(FeatureSet fs) {
    std::vector<std::string> names;
    for (IndexId id : feature_set_ids(fs)) names.emplace_back(kIndexNames[static_cast<std::size_t>(id)]);
    return names;
}

// Broad-band proxy centers. The formulas' rho_nir/rho_red/rho_green default
// to 800/670/550 nm, matching the explicit bands used elsewhere in Table 1.
struct BandConfig {
    double nir_nm = 800.0;
    double red_nm = 670.0;
    double green_nm = 550.0;
    double tolerance_nm = 5.0;
};

inline void validate_band_config(const BandConfig& c) {
    for (double v : {c.nir_nm, c.red_nm, c.green_nm})
        if (!(v >= kMinWavelengthNm && v <= kMaxWavelengthNm))
            fail("InvalidConfig", "band center " + std::to_string(v) + " outside [300, 1100] nm");
    if (!(c.tolerance_nm > 0)) fail("InvalidConfig", "tolerance must be > 0");
}

// Eleven index values plus a per-index validity flag. A degenerate
// denominator marks the index invalid instead of producing +-Inf.
struct IndexVector {
    std::array<double, kIndexCount> values{};
    std::array<bool, kIndexCount> valid{};

    double value(IndexId id) const { return values[static_cast<std::size_t>(id)]; }
    bool is_valid(IndexId id) const { return valid[static_cast<std::size_t>(id)]; }

    double ndvi() const { return value(IndexId::Ndvi); }
    double green_ndvi() const { return value(IndexId::GreenNdvi); }
    double rdvi() const { return value(IndexId::Rdvi); }
    double mtvi2() const { return value(IndexId::Mtvi2); }
    double water_index() const { return value(IndexId::WaterIndex); }
    double npci() const { return value(IndexId::Npci); }
    double osavi() const { return value(IndexId::Osavi); }
    double red_edge() const { return value(IndexId::RedEdge); }
    double nir1() const { return value(IndexId::Nir1); }
    double red_blue() const { return value(IndexId::RedBlue); }
    double water_band() const { return value(IndexId::WaterBand); }
};

// Resolves every required band once per axis, then evaluates spectra with
// plain array lookups. Pixel loops construct this once, not per pixel.
class IndexCalculator {
public:
    IndexCalculator(const WavelengthAxis& axis, const BandConfig& config) {
        validate_band_config(config);
        double tol = config.tolerance_nm;
        nir_ = band_index_for(axis, config.nir_nm, tol);
        red_ = band_index_for(axis, config.red_nm, tol);
        green_ = band_index_for(axis, config.green_nm, tol);
        b900_ = band_index_for(axis, 900.0, tol);
        b970_ = band_index_for(axis, 970.0, tol);
        b680_ = band_index_for(axis, 680.0, tol);
        b430_ = band_index_for(axis, 430.0, tol);
        b800_ = band_index_for(axis, 800.0, tol);
        b670_ = band_index_for(axis, 670.0, tol);
        b750_ = band_index_for(axis, 750.0, tol);
        b710_ = band_index_for(axis, 710.0, tol);
        b847_ = band_index_for(axis, 847.0, tol);
        b660_ = band_index_for(axis, 660.0, tol);
        b420_ = band_index_for(axis, 420.0, tol);
        b791_ = band_index_for(axis, 791.0, tol);
    }

    template <typename T>
    IndexVector compute(std::span<const T> spectrum) const {
        IndexVector out;
        auto at = [&](std::size_t i) { return static_cast<double>(spectrum[i]); };
        const double nir = at(nir_), red = at(red_), green = at(green_);
        const double r900 = at(b900_), r970 = at(b970_), r680 = at(b680_), r430 = at(b430_);
        const double r800 = at(b800_), r670 = at(b670_), r750 = at(b750_), r710 = at(b710_);
        const double r847 = at(b847_), r660 = at(b660_), r420 = at(b420_), r791 = at(b791_);

        set_nd(out, IndexId::Ndvi, nir, red);
        set_nd(out, IndexId::GreenNdvi, nir, green);
        // RDVI = (nir - red) / sqrt(nir + red)
        {
            double sum = nir + red;
            if (sum > kDenomEps)
                set(out, IndexId::Rdvi, (nir - red) / std::sqrt(sum));
        }
        set_mtvi2(out, nir, red, green);
        set_ratio(out, IndexId::WaterIndex, r900, r970);
        set_nd(out, IndexId::Npci, r680, r430);
        // OSAVI = 1.16 (r800 - r670) / (r800 + r670 + 0.16)
        {
            double denom = r800 + r670 + 0.16;
            if (std::fabs(denom) > kDenomEps)
                set(out, IndexId::Osavi, 1.16 * (r800 - r670) / denom);
        }
        set_ratio(out, IndexId::RedEdge, r750, r710);
        set_nd(out, IndexId::Nir1, r800, r847);
        set_nd(out, IndexId::RedBlue, r660, r420);
        set_nd(out, IndexId::WaterBand, r791, r970);
        return out;
    }

    std::size_t ndvi_nir_band() const { return nir_; }
    std::size_t ndvi_red_band() const { return red_; }

    // every band the calculator reads; the mapper checks these for nodata
    std::vector<std::size_t> required_bands() const {
        return {nir_, red_, green_, b900_, b970_, b680_, b430_, b800_,
                b670_, b750_, b710_, b847_, b660_, b420_, b791_};
    }

private:
    static constexpr double kDenomEps = 1e-12;

    static void set(IndexVector& v, IndexId id, double value) {
        if (!std::isfinite(value)) return;
        v.values[static_cast<std::size_t>(id)] = value;
        v.valid[static_cast<std::size_t>(id)] = true;
    }
    static void set_nd(IndexVector& v, IndexId id, double a, double b) {
        double denom = a + b;
        if (std::fabs(denom) > kDenomEps) set(v, id, (a - b) / denom);
    }
    static void set_ratio(IndexVector& v, IndexId id, double a, double b) {
        if (std::fabs(b) > kDenomEps) set(v, id, a / b);
    }
    // MTVI2 = 1.5 [1.2 (nir - green) - 2.5 (red - green)]
    //         / sqrt((2 nir + 1)^2 - (6 nir - 5 sqrt(red)) - 0.5)
    void set_mtvi2(IndexVector& v, double nir, double red, double green) const {
        if (red < 0) return;
        double radicand = (2.0 * nir + 1.0) * (2.0 * nir + 1.0) -
                          (6.0 * nir - 5.0 * std::sqrt(red)) - 0.5;
        if (radicand <= 0) return;
        double denom = std::sqrt(radicand);
        if (denom <= kDenomEps) return;
        set(v, IndexId::Mtvi2, 1.5 * (1.2 * (nir - green) - 2.5 * (red - green)) / denom);
    }

    std::size_t nir_, red_, green_;
    std::size_t b900_, b970_, b680_, b430_, b800_, b670_, b750_, b710_, b847_, b660_, b420_, b791_;
};

inline IndexVector compute_index_vector(std::span<const double> spectrum,
                                        const WavelengthAxis& axis, const BandConfig& config) {
    if (spectrum.size() != axis.size())
        fail("SizeMismatch", "spectrum length != axis length");
    return IndexCalculator(axis, config).compute(spectrum);
}

struct FeatureMatrix {
    Matrix x;
    std::vector<std::string> names;
};

// One row per sample, columns per feature_set_ids order. A sample with any
// invalid required index is rejected with its id.
inline FeatureMatrix feature_matrix(const std::vector<SpectralSample>& samples,
                                    const WavelengthAxis& axis, const BandConfig& config,
                                    FeatureSet fs) {
    IndexCalculator calc(axis, config);
    auto ids = feature_set_ids(fs);
    FeatureMatrix out;
    out.names = feature_set_names(fs);
    out.x = Matrix(samples.size(), ids.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.reflectance.size() != axis.size())
            fail("SizeMismatch", "sample '" + s.sample_id + "' reflectance length != axis length");
        IndexVector iv = calc.compute(std::span<const double>(s.reflectance));
        for (std::size_t j = 0; j < ids.size(); ++j) {
            if (!iv.is_valid(ids[j]))
                fail("DegenerateDenominator",
                     "sample '" + s.sample_id + "' has invalid index " +
                         kIndexNames[static_cast<std::size_t>(ids[j])]);
            out.x(i, j) = iv.value(ids[j]);
        }
    }
    return out;
}

} // namespace lwcmap
