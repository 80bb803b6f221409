#include "moire/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>
#include <png.h>

#include "moire/config.hpp"

namespace moire {

namespace {

std::uint16_t quantize(double v) {
    return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

void write_sidecar(const std::filesystem::path& path, const RasterImage& image) {
    nlohmann::json j;
    j["id"] = image.id;
    j["width"] = image.width;
    j["height"] = image.height;
    j["pixel_pitch_mm"] = image.pixel_pitch;
    if (image.alpha_deg) {
        j["alpha_deg"] = *image.alpha_deg;
    }
    if (image.scene) {
        j["scene"] = scene_to_json(*image.scene);
    }
    std::ofstream out(path);
    if (!out) {
        throw Error(fmt::format("cannot write sidecar '{}'", path.string()));
    }
    out << j.dump(2) << '\n';
}

void read_sidecar(const std::filesystem::path& path, RasterImage& image) {
    std::ifstream in(path);
    if (!in) {
        return;
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(fmt::format("malformed sidecar '{}': {}", path.string(), e.what()));
    }
    image.id = j.value("id", image.id);
    image.pixel_pitch = j.value("pixel_pitch_mm", image.pixel_pitch);
    if (j.contains("alpha_deg")) {
        image.alpha_deg = j["alpha_deg"].get<double>();
    }
    if (j.contains("scene")) {
        image.scene = scene_from_json(j["scene"]);
    }
}

RasterImage read_png(const std::filesystem::path& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
        throw Error(fmt::format("cannot read PNG '{}': {}", path.string(), png.message));
    }
    png.format = PNG_FORMAT_LINEAR_Y;
    std::vector<std::uint16_t> buffer(PNG_IMAGE_SIZE(png) / sizeof(std::uint16_t));
    if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw Error(fmt::format("cannot decode PNG '{}': {}", path.string(), msg));
    }
    RasterImage image(static_cast<int>(png.width), static_cast<int>(png.height), 1.0);
    std::transform(buffer.begin(), buffer.end(), image.samples.begin(),
                   [](std::uint16_t v) { return v / 65535.0; });
    return image;
}

// Skips whitespace and '#' comments in a PNM header.
int read_pnm_int(std::istream& in) {
    while (true) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) {
        throw Error("truncated PGM header");
    }
    return value;
}

RasterImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(fmt::format("cannot open '{}'", path.string()));
    }
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P2" && magic != "P5") {
        throw Error(fmt::format("'{}' is not a PGM file", path.string()));
    }
    const int width = read_pnm_int(in);
    const int height = read_pnm_int(in);
    const int maxval = read_pnm_int(in);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
        throw Error(fmt::format("invalid PGM header in '{}'", path.string()));
    }
    RasterImage image(width, height, 1.0);
    if (magic == "P2") {
        for (auto& s : image.samples) {
            int v = 0;
            if (!(in >> v)) {
                throw Error(fmt::format("truncated PGM data in '{}'", path.string()));
            }
            s = static_cast<double>(v) / maxval;
        }
    } else {
        in.get();  // single whitespace after maxval
        const bool wide = maxval > 255;
        for (auto& s : image.samples) {
            unsigned v = static_cast<unsigned char>(in.get());
            if (wide) {
                v = (v << 8) | static_cast<unsigned char>(in.get());
            }
            s = static_cast<double>(v) / maxval;
        }
        if (!in) {
            throw Error(fmt::format("truncated PGM data in '{}'", path.string()));
        }
    }
    return image;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& image_path) {
    std::filesystem::path p = image_path;
    p.replace_extension(".json");
    return p;
}

void write_png16(const std::filesystem::path& path, const RasterImage& image) {
    std::vector<std::uint16_t> buffer(image.samples.size());
    std::transform(image.samples.begin(), image.samples.end(), buffer.begin(), quantize);
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_LINEAR_Y;
    if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr)) {
        throw Error(fmt::format("cannot write PNG '{}': {}", path.string(), png.message));
    }
}

void write_pgm(const std::filesystem::path& path, const RasterImage& image) {
    std::ofstream out(path);
    if (!out) {
        throw Error(fmt::format("cannot write '{}'", path.string()));
    }
    out << "P2\n# " << image.id << "\n" << image.width << ' ' << image.height << "\n65535\n";
    for (int row = 0; row < image.height; ++row) {
        for (int col = 0; col < image.width; ++col) {
            out << quantize(image.at(col, row)) << (col + 1 == image.width ? '\n' : ' ');
        }
    }
    if (!out) {
        throw Error(fmt::format("I/O error writing '{}'", path.string()));
    }
}

void save_image(const std::filesystem::path& path, const RasterImage& image) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        write_png16(path, image);
    } else if (ext == ".pgm") {
        write_pgm(path, image);
    } else {
        throw Error(fmt::format("unsupported image extension '{}' (use .png or .pgm)", ext));
    }
    write_sidecar(sidecar_path(path), image);
}

RasterImage load_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw Error(fmt::format("image '{}' does not exist", path.string()));
    }
    const std::string ext = lower_extension(path);
    RasterImage image = ext == ".png" ? read_png(path) : read_pgm(path);
    image.id = path.stem().string();
    read_sidecar(sidecar_path(path), image);
    return image;
}

}  // namespace moire
