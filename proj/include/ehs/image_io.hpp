#pragma once

// Lossless raster I/O: binary PGM/PPM and 8-bit PNG.
//
// Loading maps each 8-bit sample to the same real value in [0,255]. Saving
// rounds half away from zero, so load(save(x)) == round(x) for any in-range x
// and the round trip is the identity on integer-valued images.

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ehs/image.hpp"

namespace ehs {

enum class IoErrorKind { unreadable, unsupported_bit_depth, unsupported_format, unwritable, out_of_range };

inline const char* to_string(IoErrorKind kind) {
    switch (kind) {
        case IoErrorKind::unreadable: return "unreadable";
        case IoErrorKind::unsupported_bit_depth: return "unsupported bit depth";
        case IoErrorKind::unsupported_format: return "unsupported format";
        case IoErrorKind::unwritable: return "unwritable";
        case IoErrorKind::out_of_range: return "value out of range";
    }
    return "unknown";
}

class ImageIoError : public std::runtime_error {
public:
    ImageIoError(IoErrorKind kind, const std::string& path, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + path + (detail.empty() ? "" : " (" + detail + ")")),
          kind_(kind) {}

    IoErrorKind kind() const noexcept { return kind_; }

private:
    IoErrorKind kind_;
};

using AnyImage = std::variant<Image, ColorImage>;

namespace detail {

inline std::uint8_t quantize(double v) {
    // std::round rounds half away from zero.
    return static_cast<std::uint8_t>(std::round(v));
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError(IoErrorKind::unreadable, path.string(), "cannot open");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ImageIoError(IoErrorKind::unwritable, path.string(), "cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageIoError(IoErrorKind::unwritable, path.string(), "write failed");
}

class PnmHeaderReader {
public:
    PnmHeaderReader(const std::vector<unsigned char>& bytes, const std::string& path)
        : bytes_(bytes), path_(path) {}

    unsigned long next_number() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
            throw ImageIoError(IoErrorKind::unreadable, path_, "malformed PNM header");
        unsigned long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
            if (v > (1ul << 30)) throw ImageIoError(IoErrorKind::unreadable, path_, "PNM header value too large");
            ++pos_;
        }
        return v;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw ImageIoError(IoErrorKind::unreadable, path_, "malformed PNM header");
        return pos_ + 1;
    }

    void skip(std::size_t n) { pos_ += n; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

inline AnyImage load_pnm(const std::vector<unsigned char>& bytes, const std::string& path) {
    const bool color = bytes[1] == '6';
    PnmHeaderReader hdr(bytes, path);
    hdr.skip(2);
    const auto cols = hdr.next_number();
    const auto rows = hdr.next_number();
    const auto maxval = hdr.next_number();
    if (cols == 0 || rows == 0) throw ImageIoError(IoErrorKind::unreadable, path, "zero dimension");
    if (maxval != 255)
        throw ImageIoError(IoErrorKind::unsupported_bit_depth, path, "maxval " + std::to_string(maxval));
    const std::size_t offset = hdr.raster_offset();
    const std::size_t nchan = color ? 3 : 1;
    const std::size_t need = rows * cols * nchan;
    if (bytes.size() < offset + need) throw ImageIoError(IoErrorKind::unreadable, path, "truncated raster");

    const unsigned char* raster = bytes.data() + offset;
    if (!color) {
        std::vector<double> data(raster, raster + need);
        return Image(rows, cols, std::move(data));
    }
    std::array<Image, 3> ch{Image(rows, cols), Image(rows, cols), Image(rows, cols)};
    for (std::size_t i = 0; i < rows * cols; ++i)
        for (std::size_t k = 0; k < 3; ++k) ch[k][i] = raster[3 * i + k];
    return merge(std::move(ch));
}

inline AnyImage load_png(const std::filesystem::path& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    const std::string p = path.string();
    if (!png_image_begin_read_from_file(&png, p.c_str()))
        throw ImageIoError(IoErrorKind::unreadable, p, png.message);
    if (png.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&png);
        throw ImageIoError(IoErrorKind::unsupported_bit_depth, p, "16-bit samples");
    }
    if (png.format & PNG_FORMAT_FLAG_ALPHA) {
        png_image_free(&png);
        throw ImageIoError(IoErrorKind::unsupported_format, p, "alpha channel");
    }
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const std::size_t rows = png.height, cols = png.width;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw ImageIoError(IoErrorKind::unreadable, p, msg);
    }
    if (!color) return Image(rows, cols, std::vector<double>(buf.begin(), buf.end()));
    std::array<Image, 3> ch{Image(rows, cols), Image(rows, cols), Image(rows, cols)};
    for (std::size_t i = 0; i < rows * cols; ++i)
        for (std::size_t k = 0; k < 3; ++k) ch[k][i] = buf[3 * i + k];
    return merge(std::move(ch));
}

enum class FileFormat { pnm, png };

inline FileFormat format_for_output(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return FileFormat::pnm;
    if (ext == ".png") return FileFormat::png;
    throw ImageIoError(IoErrorKind::unsupported_format, path.string(), "extension '" + ext + "' (use .pgm/.ppm/.png)");
}

inline void check_range(std::span<const double> values, const std::string& path) {
    for (double v : values)
        if (!(v >= kIntensityMin && v <= kIntensityMax))
            throw ImageIoError(IoErrorKind::out_of_range, path, "value " + std::to_string(v));
}

// Interleaves channels into 8-bit samples.
inline std::vector<unsigned char> interleave(std::span<const Image* const> channels) {
    const std::size_t n = channels[0]->size(), nchan = channels.size();
    std::vector<unsigned char> out(n * nchan);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < nchan; ++k) out[nchan * i + k] = quantize((*channels[k])[i]);
    return out;
}

inline void save_raster(std::span<const Image* const> channels, const std::filesystem::path& path) {
    const std::string p = path.string();
    for (const Image* ch : channels) check_range(ch->data(), p);
    const std::size_t rows = channels[0]->rows(), cols = channels[0]->cols();
    const bool color = channels.size() == 3;
    auto samples = interleave(channels);

    if (format_for_output(path) == FileFormat::pnm) {
        const std::string header =
            std::string(color ? "P6" : "P5") + "\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
        std::vector<unsigned char> bytes(header.begin(), header.end());
        bytes.insert(bytes.end(), samples.begin(), samples.end());
        write_file(path, bytes);
        return;
    }

    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(cols);
    png.height = static_cast<png_uint_32>(rows);
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, p.c_str(), 0, samples.data(), 0, nullptr))
        throw ImageIoError(IoErrorKind::unwritable, p, png.message);
}

}  // namespace detail

/// Loads an 8-bit grayscale (Image) or RGB (ColorImage) file. The format is
/// detected from the file's signature, not its extension.
inline AnyImage load_image(const std::filesystem::path& path) {
    const std::string p = path.string();
    if (!std::filesystem::is_regular_file(path)) throw ImageIoError(IoErrorKind::unreadable, p, "no such file");
    const auto bytes = detail::read_file(path);
    static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(png_sig, png_sig + 8, bytes.begin())) return detail::load_png(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return detail::load_pnm(bytes, p);
    if (bytes.size() < 2) throw ImageIoError(IoErrorKind::unreadable, p, "file too short");
    throw ImageIoError(IoErrorKind::unsupported_format, p, "not a binary PNM or PNG file");
}

inline void save_image(const Image& img, const std::filesystem::path& path) {
    const Image* ch[] = {&img};
    detail::save_raster(ch, path);
}

inline void save_image(const ColorImage& img, const std::filesystem::path& path) {
    const Image* ch[] = {&img.channels()[0], &img.channels()[1], &img.channels()[2]};
    detail::save_raster(ch, path);
}

inline void save_image(const AnyImage& img, const std::filesystem::path& path) {
    std::visit([&](const auto& im) { save_image(im, path); }, img);
}

}  // namespace ehs
