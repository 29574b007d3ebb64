#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lwcmap/spectral.hpp"

namespace lwcmap {

struct SampleTable {
    std::vector<SpectralSample> samples;
    WavelengthAxis axis;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

inline double parse_double_cell(const std::string& cell, std::size_t row, const std::string& col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        fail("MalformedValue",
             "non-numeric cell '" + cell + "' at row " + std::to_string(row) + ", column " + col);
    return v;
}

inline std::string format_g9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace detail

// --- sample tables ----------------------------------------------------------
//
// CSV layout: id,das,nitrogen,carbon,cn_ratio,lwc,w<nm>,w<nm>,...
// Empty cell = absent optional value. Data rows keep file order.

inline SampleTable read_sample_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_io("IoFailure", "cannot open sample table '" + path + "'");

    std::string header_line;
    if (!std::getline(in, header_line)) fail("MissingColumn", "empty file, no header row");
    auto header = detail::split_csv_line(header_line);

    static const char* kMeta[6] = {"id", "das", "nitrogen", "carbon", "cn_ratio", "lwc"};
    for (std::size_t i = 0; i < 6; ++i) {
        if (header.size() <= i || header[i] != kMeta[i])
            fail("MissingColumn", std::string("required metadata column '") + kMeta[i] +
                                      "' absent or out of order");
    }
    if (header.size() < 8) fail("MissingColumn", "need at least 2 wavelength columns");

    std::vector<double> wavelengths;
    for (std::size_t i = 6; i < header.size(); ++i) {
        const std::string& name = header[i];
        if (name.size() < 2 || name[0] != 'w')
            fail("MalformedValue", "wavelength column '" + name + "' must be named w<number>");
        wavelengths.push_back(detail::parse_double_cell(name.substr(1), 0, name));
    }
    for (std::size_t i = 1; i < wavelengths.size(); ++i)
        if (!(wavelengths[i - 1] < wavelengths[i]))
            fail("NonMonotonicAxis", "wavelength headers not strictly increasing near w" +
                                         detail::format_g9(wavelengths[i]));
    WavelengthAxis axis = make_axis(std::move(wavelengths));

    SampleTable table;
    table.axis = axis;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            fail("MalformedValue", "row " + std::to_string(row) + " has " +
                                       std::to_string(cells.size()) + " cells, expected " +
                                       std::to_string(header.size()));
        SpectralSample s;
        if (cells[0].empty()) fail("MalformedValue", "empty id at row " + std::to_string(row));
        s.sample_id = cells[0];
        double das = detail::parse_double_cell(cells[1], row, "das");
        if (das < 0 || das != std::floor(das))
            fail("MalformedValue", "das must be a non-negative integer at row " + std::to_string(row));
        s.das = static_cast<int>(das);
        auto opt = [&](const std::string& cell, const char* col) -> std::optional<double> {
            if (cell.empty()) return std::nullopt;
            return detail::parse_double_cell(cell, row, col);
        };
        s.nitrogen = opt(cells[2], "nitrogen");
        s.carbon = opt(cells[3], "carbon");
        s.cn_ratio = opt(cells[4], "cn_ratio");
        s.lwc = opt(cells[5], "lwc");
        if (s.lwc && (*s.lwc < 0.0 || *s.lwc > 1.0))
            fail("MalformedValue", "lwc outside [0,1] at row " + std::to_string(row));
        s.reflectance.reserve(axis.size());
        for (std::size_t i = 6; i < cells.size(); ++i) {
            double v = detail::parse_double_cell(cells[i], row, header[i]);
            if (!std::isfinite(v) || v < 0.0 || v > kMaxReflectance)
                fail("MalformedValue", "reflectance outside [0, 1.5] at row " +
                                           std::to_string(row) + ", column " + header[i]);
            s.reflectance.push_back(v);
        }
        table.samples.push_back(std::move(s));
        ++row;
    }
    return table;
}

inline void write_sample_table(const std::string& path, const std::vector<SpectralSample>& samples,
                               const WavelengthAxis& axis) {
    std::ofstream out(path);
    if (!out) fail_io("IoFailure", "cannot write sample table '" + path + "'");
    out << "id,das,nitrogen,carbon,cn_ratio,lwc";
    for (std::size_t i = 0; i < axis.size(); ++i) out << ",w" << detail::format_g9(axis[i]);
    out << "\n";
    auto cell = [](const std::optional<double>& v) {
        return v ? detail::format_g9(*v) : std::string();
    };
    for (const auto& s : samples) {
        if (s.reflectance.size() != axis.size())
            fail("SizeMismatch", "sample '" + s.sample_id + "' reflectance length != axis length");
        out << s.sample_id << ',' << s.das << ',' << cell(s.nitrogen) << ',' << cell(s.carbon)
            << ',' << cell(s.cn_ratio) << ',' << cell(s.lwc);
        for (double v : s.reflectance) out << ',' << detail::format_g9(v);
        out << "\n";
    }
    if (!out) fail_io("IoFailure", "write failed for '" + path + "'");
}

// --- ENVI-style cubes ---------------------------------------------------
//
// Text header of `key = value` lines plus a flat little-endian float32
// binary. BSQ/BIL/BIP accepted on read, BSQ written.

namespace detail {

struct EnviHeader {
    std::size_t samples = 0, lines = 0, bands = 0;
    int data_type = 0, byte_order = 0;
    std::string interleave;
    std::vector<double> wavelengths;
    bool has_wavelengths = false;
    std::optional<float> nodata;
};

inline EnviHeader parse_envi_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_io("IoFailure", "cannot open cube header '" + path + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    EnviHeader h;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string line = content.substr(pos, eol - pos);
        pos = eol + 1;

        std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = trim(line.substr(0, eq));
        for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        std::string value = trim(line.substr(eq + 1));

        // brace lists may span lines
        if (!value.empty() && value.front() == '{' && value.find('}') == std::string::npos) {
            while (pos < content.size()) {
                std::size_t e2 = content.find('\n', pos);
                if (e2 == std::string::npos) e2 = content.size();
                value += " " + trim(content.substr(pos, e2 - pos));
                pos = e2 + 1;
                if (value.find('}') != std::string::npos) break;
            }
        }

        if (key == "samples") h.samples = static_cast<std::size_t>(parse_double_cell(value, 0, key));
        else if (key == "lines") h.lines = static_cast<std::size_t>(parse_double_cell(value, 0, key));
        else if (key == "bands") h.bands = static_cast<std::size_t>(parse_double_cell(value, 0, key));
        else if (key == "data type") h.data_type = static_cast<int>(parse_double_cell(value, 0, key));
        else if (key == "byte order") h.byte_order = static_cast<int>(parse_double_cell(value, 0, key));
        else if (key == "interleave") {
            for (auto& c : value) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            h.interleave = value;
        } else if (key == "data ignore value") {
            h.nodata = static_cast<float>(parse_double_cell(value, 0, key));
        } else if (key == "wavelength") {
            h.has_wavelengths = true;
            std::size_t open = value.find('{'), close = value.find('}');
            if (open == std::string::npos || close == std::string::npos || close < open)
                fail("MalformedValue", "wavelength list missing braces in '" + path + "'");
            std::string list = value.substr(open + 1, close - open - 1);
            std::stringstream ss(list);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (!item.empty()) h.wavelengths.push_back(parse_double_cell(item, 0, key));
            }
        }
    }
    return h;
}

inline std::string find_cube_binary(const std::string& header_path) {
    namespace fs = std::filesystem;
    fs::path hdr(header_path);
    fs::path stem = hdr;
    stem.replace_extension();
    for (const char* ext : {"", ".img", ".dat", ".bin"}) {
        fs::path candidate = stem;
        candidate += ext;
        if (fs::exists(candidate) && !fs::is_directory(candidate)) return candidate.string();
    }
    fail_io("IoFailure", "no companion binary for header '" + header_path + "'");
}

inline std::vector<float> read_float32_binary(const std::string& path, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("IoFailure", "cannot open cube binary '" + path + "'");
    in.seekg(0, std::ios::end);
    std::size_t bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != count * sizeof(float))
        fail("SizeMismatch", "binary '" + path + "' holds " + std::to_string(bytes) +
                                 " bytes, expected " + std::to_string(count * sizeof(float)));
    in.seekg(0);
    std::vector<float> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
    if (!in) fail_io("IoFailure", "short read from '" + path + "'");
    return raw;
}

} // namespace detail

inline HyperspectralCube read_cube(const std::string& header_path) {
    auto h = detail::parse_envi_header(header_path);
    if (h.samples == 0 || h.lines == 0 || h.bands == 0)
        fail("SizeMismatch", "header '" + header_path + "' missing samples/lines/bands");
    if (h.data_type != 4)
        fail("UnsupportedDataType",
             "data type " + std::to_string(h.data_type) + " (only 4 = float32 supported)");
    if (h.byte_order != 0)
        fail("UnsupportedDataType", "byte order must be 0 (little-endian)");
    if (h.interleave != "bsq" && h.interleave != "bil" && h.interleave != "bip")
        fail("UnsupportedDataType", "interleave '" + h.interleave + "' not one of bsq/bil/bip");
    if (!h.has_wavelengths) fail("MissingWavelengths", "header has no wavelength list");
    if (h.wavelengths.size() != h.bands)
        fail("SizeMismatch", "wavelength list length " + std::to_string(h.wavelengths.size()) +
                                 " != bands " + std::to_string(h.bands));

    HyperspectralCube cube;
    cube.width = h.samples;
    cube.height = h.lines;
    cube.axis = make_axis(std::move(h.wavelengths));
    cube.nodata_value = h.nodata;

    const std::size_t w = cube.width, ht = cube.height, b = cube.bands();
    auto raw = detail::read_float32_binary(detail::find_cube_binary(header_path), w * ht * b);

    cube.data.resize(raw.size());
    if (h.interleave == "bip") {
        cube.data = std::move(raw);
    } else if (h.interleave == "bsq") {
        for (std::size_t band = 0; band < b; ++band)
            for (std::size_t row = 0; row < ht; ++row)
                for (std::size_t col = 0; col < w; ++col)
                    cube.at(row, col, band) = raw[band * ht * w + row * w + col];
    } else { // bil
        for (std::size_t row = 0; row < ht; ++row)
            for (std::size_t band = 0; band < b; ++band)
                for (std::size_t col = 0; col < w; ++col)
                    cube.at(row, col, band) = raw[row * b * w + band * w + col];
    }

    for (float v : cube.data) {
        if (cube.nodata_value && v == *cube.nodata_value) continue;
        if (!std::isfinite(v)) fail("MalformedValue", "non-finite reflectance in cube binary");
    }
    return cube;
}

// Writes <stem>.hdr + <stem>.img (float32 LE, BSQ). read_cube(<stem>.hdr)
// returns a bit-identical cube.
inline void write_cube(const HyperspectralCube& cube, const std::string& stem) {
    if (cube.width == 0 || cube.height == 0 || cube.bands() == 0)
        fail("InvalidConfig", "refusing to write zero-extent cube");
    if (cube.data.size() != cube.width * cube.height * cube.bands())
        fail("SizeMismatch", "cube data extent != width*height*bands");

    std::ofstream hdr(stem + ".hdr");
    if (!hdr) fail_io("IoFailure", "cannot write header '" + stem + ".hdr'");
    hdr << "ENVI\n";
    hdr << "samples = " << cube.width << "\n";
    hdr << "lines = " << cube.height << "\n";
    hdr << "bands = " << cube.bands() << "\n";
    hdr << "data type = 4\n";
    hdr << "interleave = bsq\n";
    hdr << "byte order = 0\n";
    if (cube.nodata_value)
        hdr << "data ignore value = " << detail::format_g9(*cube.nodata_value) << "\n";
    hdr << "wavelength = { ";
    for (std::size_t i = 0; i < cube.bands(); ++i) {
        if (i) hdr << ", ";
        hdr << detail::format_g9(cube.axis[i]);
    }
    hdr << " }\n";
    if (!hdr) fail_io("IoFailure", "write failed for '" + stem + ".hdr'");
    hdr.close();

    std::vector<float> raw(cube.data.size());
    const std::size_t w = cube.width, ht = cube.height, b = cube.bands();
    for (std::size_t band = 0; band < b; ++band)
        for (std::size_t row = 0; row < ht; ++row)
            for (std::size_t col = 0; col < w; ++col)
                raw[band * ht * w + row * w + col] = cube.at(row, col, band);

    std::ofstream img(stem + ".img", std::ios::binary);
    if (!img) fail_io("IoFailure", "cannot write binary '" + stem + ".img'");
    img.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!img) fail_io("IoFailure", "write failed for '" + stem + ".img'");
}

// --- single-band rasters --------------------------------------------------
//
// Same ENVI layout with bands = 1 and no wavelength list (a wavelength axis
// would be meaningless for an LWC or mask plane). read_cube deliberately
// rejects these with MissingWavelengths; use read_raster.

struct Raster {
    std::size_t width = 0, height = 0;
    std::vector<float> data; // row-major
    std::optional<float> nodata_value;

    float at(std::size_t row, std::size_t col) const { return data[row * width + col]; }
};

inline void write_raster(const Raster& r, const std::string& stem) {
    if (r.width == 0 || r.height == 0) fail("InvalidConfig", "refusing to write zero-extent raster");
    if (r.data.size() != r.width * r.height) fail("SizeMismatch", "raster data extent mismatch");
    std::ofstream hdr(stem + ".hdr");
    if (!hdr) fail_io("IoFailure", "cannot write header '" + stem + ".hdr'");
    hdr << "ENVI\n";
    hdr << "samples = " << r.width << "\n";
    hdr << "lines = " << r.height << "\n";
    hdr << "bands = 1\n";
    hdr << "data type = 4\n";
    hdr << "interleave = bsq\n";
    hdr << "byte order = 0\n";
    if (r.nodata_value) hdr << "data ignore value = " << detail::format_g9(*r.nodata_value) << "\n";
    hdr.close();
    std::ofstream img(stem + ".img", std::ios::binary);
    if (!img) fail_io("IoFailure", "cannot write binary '" + stem + ".img'");
    img.write(reinterpret_cast<const char*>(r.data.data()),
              static_cast<std::streamsize>(r.data.size() * sizeof(float)));
    if (!img) fail_io("IoFailure", "write failed for '" + stem + ".img'");
}

inline Raster read_raster(const std::string& header_path) {
    auto h = detail::parse_envi_header(header_path);
    if (h.samples == 0 || h.lines == 0) fail("SizeMismatch", "raster header missing samples/lines");
    if (h.bands != 1) fail("SizeMismatch", "raster must have exactly 1 band");
    if (h.data_type != 4) fail("UnsupportedDataType", "raster data type must be 4 (float32)");
    if (h.byte_order != 0) fail("UnsupportedDataType", "byte order must be 0 (little-endian)");
    Raster r;
    r.width = h.samples;
    r.height = h.lines;
    r.nodata_value = h.nodata;
    r.data = detail::read_float32_binary(detail::find_cube_binary(header_path), r.width * r.height);
    return r;
}

} // namespace lwcmap
