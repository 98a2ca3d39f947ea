#ifndef STMMC_IMAGE_HPP
#define STMMC_IMAGE_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

namespace stmmc {

/// 8-bit interleaved RGB raster, row-major from the top-left pixel.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    RgbImage() = default;
    RgbImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {}

    std::uint8_t at(int x, int y, int channel) const {
        return pixels[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(channel)];
    }
    std::uint8_t& at(int x, int y, int channel) {
        return pixels[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(channel)];
    }
};

/// Loads a PNG or PPM (P3/P6) file, detected by magic bytes. Anything other than 8-bit RGB is rejected.
RgbImage read_image(const std::filesystem::path& path);

void write_ppm(const std::filesystem::path& path, const RgbImage& image);

} // namespace stmmc

#endif
