#include "stmmc/image.hpp"

#include "stmmc/common.hpp"
#include "stmmc/io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <sstream>

namespace stmmc {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

RgbImage read_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
    if (!file) {
        throw DataError("cannot open image: " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("libpng initialisation failed");
    }
    RgbImage image;
    volatile bool non_rgb = false;
    // libpng reports errors through longjmp; no C++ objects with destructors are created past this point
    // until the jump target is disarmed.
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("corrupt PNG file: " + path.string());
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    const auto color_type = png_get_color_type(png, info);
    const auto bit_depth = png_get_bit_depth(png, info);
    if (color_type != PNG_COLOR_TYPE_RGB || bit_depth != 8) {
        non_rgb = true;
    } else {
        image.width = static_cast<int>(png_get_image_width(png, info));
        image.height = static_cast<int>(png_get_image_height(png, info));
        image.pixels.resize(static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height) * 3);
        std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
        for (int y = 0; y < image.height; ++y) {
            rows[static_cast<std::size_t>(y)] = image.pixels.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width) * 3;
        }
        png_read_image(png, rows.data());
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (non_rgb) {
        throw DataError("non-RGB raster (expected 8-bit RGB): " + path.string());
    }
    return image;
}

RgbImage read_ppm(const std::string& bytes, const std::filesystem::path& path) {
    std::istringstream in(bytes);
    std::string magic;
    in >> magic;
    auto next_int = [&]() {
        in >> std::ws;
        while (in.peek() == '#') {
            std::string comment;
            std::getline(in, comment);
            in >> std::ws;
        }
        int v = -1;
        if (!(in >> v)) {
            throw DataError("malformed PPM header: " + path.string());
        }
        return v;
    };
    if (magic != "P3" && magic != "P6") {
        throw DataError("non-RGB raster (expected P3/P6 PPM): " + path.string());
    }
    RgbImage image;
    image.width = next_int();
    image.height = next_int();
    const int maxval = next_int();
    if (image.width <= 0 || image.height <= 0) {
        throw DataError("malformed PPM dimensions: " + path.string());
    }
    if (maxval != 255) {
        throw DataError("non-RGB raster (expected 8-bit PPM, maxval 255): " + path.string());
    }
    const std::size_t count = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height) * 3;
    image.pixels.resize(count);
    if (magic == "P6") {
        in.get();
        in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in.gcount()) != count) {
            throw DataError("truncated PPM data: " + path.string());
        }
    } else {
        for (auto& p : image.pixels) {
            const int v = next_int();
            if (v < 0 || v > 255) {
                throw DataError("PPM sample out of range: " + path.string());
            }
            p = static_cast<std::uint8_t>(v);
        }
    }
    return image;
}

} // namespace

RgbImage read_image(const std::filesystem::path& path) {
    const std::string bytes = read_text_file(path);
    static constexpr unsigned char png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(png_magic, png_magic + 8, reinterpret_cast<const unsigned char*>(bytes.data()))) {
        return read_png(path);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P') {
        return read_ppm(bytes, path);
    }
    throw DataError("unrecognised image format (expected PNG or PPM): " + path.string());
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    write_file_atomic(path, out);
}

} // namespace stmmc
