#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "stemdet/raster.hpp"

namespace stemdet {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    std::string tail = s.substr(s.size() - suffix.size());
    for (auto& ch : tail) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return tail == suffix;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

// ---- PNM (binary P5/P6) ----------------------------------------------

int pnm_read_token(std::FILE* f, const std::string& path) {
    int c = std::fgetc(f);
    while (c != EOF) {
        if (c == '#') { // comment to end of line
            while (c != EOF && c != '\n') c = std::fgetc(f);
        } else if (!std::isspace(c)) {
            break;
        }
        c = std::fgetc(f);
    }
    if (c == EOF) fail(path, "truncated header");
    long value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        if (value > 1 << 20) fail(path, "implausible header value");
        c = std::fgetc(f);
    }
    if (!any) fail(path, "malformed header");
    return static_cast<int>(value);
}

Image load_pnm(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail(path, "cannot open file");
    int m0 = std::fgetc(f.get());
    int m1 = std::fgetc(f.get());
    if (m0 != 'P' || (m1 != '5' && m1 != '6')) fail(path, "not a binary PGM/PPM file");
    const bool rgb = m1 == '6';

    const int width = pnm_read_token(f.get(), path);
    const int height = pnm_read_token(f.get(), path);
    const int maxval = pnm_read_token(f.get(), path);
    if (width <= 0 || height <= 0) fail(path, "zero dimension");
    if (maxval > 255) fail(path, "unsupported bit depth");
    if (maxval <= 0) fail(path, "invalid maxval");

    Image image(width, height, rgb ? Channels::RGB : Channels::Gray);
    const std::size_t bytes = image.data().size();
    if (std::fread(image.data().data(), 1, bytes, f.get()) != bytes)
        fail(path, "truncated pixel data");
    return image;
}

void save_pnm(const Image& image, const std::string& path) {
    if (image.channels() == Channels::RGBN)
        throw std::runtime_error(path + ": PNM cannot carry a NIR channel");
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail(path, "cannot open file for writing");
    const bool rgb = image.channels() == Channels::RGB;
    std::fprintf(f.get(), "P%c\n%d %d\n255\n", rgb ? '6' : '5', image.width(), image.height());
    const std::size_t bytes = image.data().size();
    if (std::fwrite(image.data().data(), 1, bytes, f.get()) != bytes)
        fail(path, "write failed");
    if (std::fflush(f.get()) != 0) fail(path, "write failed");
}

// ---- PNG ---------------------------------------------------------------

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

Image load_png(const std::string& path, const LoadOptions& opts) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail(path, "cannot open file");

    PngReader ctx;
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) fail(path, "libpng init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) fail(path, "libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) fail(path, "corrupt or truncated PNG");

    png_init_io(ctx.png, f.get());
    png_read_info(ctx.png, ctx.info);

    const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
    const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
    const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    const int color_type = png_get_color_type(ctx.png, ctx.info);

    if (bit_depth > 8) fail(path, "unsupported bit depth");
    if (width == 0 || height == 0) fail(path, "zero dimension");

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
    png_set_interlace_handling(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    const int nch = png_get_channels(ctx.png, ctx.info);
    const std::size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
    if (rowbytes != static_cast<std::size_t>(width) * nch) fail(path, "unexpected row size");

    Channels channels;
    if (nch == 1) channels = Channels::Gray;
    else if (nch == 2) channels = Channels::Gray;                       // drop alpha
    else if (nch == 3) channels = Channels::RGB;
    else if (nch == 4) channels = opts.nir_in_alpha ? Channels::RGBN : Channels::RGB;
    else fail(path, "unsupported channel layout");

    std::vector<std::uint8_t> raw(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = raw.data() + r * rowbytes;
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);

    Image image(static_cast<int>(width), static_cast<int>(height), channels);
    const int out_ch = image.channel_count();
    for (png_uint_32 r = 0; r < height; ++r)
        for (png_uint_32 c = 0; c < width; ++c)
            for (int k = 0; k < out_ch; ++k)
                image.at(static_cast<int>(r), static_cast<int>(c), k) = raw[r * rowbytes + c * nch + k];
    return image;
}

void save_png(const Image& image, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail(path, "cannot open file for writing");

    PngWriter ctx;
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) fail(path, "libpng init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) fail(path, "libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) fail(path, "PNG write failed");

    int color_type;
    switch (image.channels()) {
        case Channels::Gray: color_type = PNG_COLOR_TYPE_GRAY; break;
        case Channels::RGB: color_type = PNG_COLOR_TYPE_RGB; break;
        case Channels::RGBN: color_type = PNG_COLOR_TYPE_RGBA; break;
        default: fail(path, "unsupported channel layout");
    }

    png_init_io(ctx.png, f.get());
    png_set_IHDR(ctx.png, ctx.info, image.width(), image.height(), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);

    const std::size_t stride = static_cast<std::size_t>(image.width()) * image.channel_count();
    for (int r = 0; r < image.height(); ++r)
        png_write_row(ctx.png, const_cast<png_bytep>(image.data().data() + r * stride));
    png_write_end(ctx.png, ctx.info);
    if (std::fflush(f.get()) != 0) fail(path, "write failed");
}

bool looks_like_png(const std::string& path) {
    if (has_suffix(path, ".png")) return true;
    if (has_suffix(path, ".pgm") || has_suffix(path, ".ppm") || has_suffix(path, ".pnm"))
        return false;
    // No telling extension: sniff the signature.
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail(path, "cannot open file");
    unsigned char sig[8] = {};
    const std::size_t n = std::fread(sig, 1, 8, f.get());
    return n == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

} // namespace

Image load_image(const std::string& path, const LoadOptions& opts) {
    return looks_like_png(path) ? load_png(path, opts) : load_pnm(path);
}

void save_image(const Image& image, const std::string& path) {
    if (has_suffix(path, ".png"))
        save_png(image, path);
    else
        save_pnm(image, path);
}

void save_mask(const BinaryMask& mask, const std::string& path) {
    Image image(mask.width(), mask.height(), Channels::Gray);
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            image.at(r, c) = mask.at(r, c) ? 255 : 0;
    save_image(image, path);
}

} // namespace stemdet
