#include "lowlight/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "lowlight/errors.hpp"

namespace lowlight {

namespace {

using Bytes = std::vector<unsigned char>;

struct Decoded {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bits = 8;
    std::vector<unsigned short> samples;
};

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read image '" + path.string() + "'");
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// --- PNG --------------------------------------------------------------------

struct PngSource {
    const Bytes* bytes;
    std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
    auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
    if (src->offset + length > src->bytes->size()) png_error(png, "truncated PNG stream");
    std::memcpy(out, src->bytes->data() + src->offset, length);
    src->offset += length;
}

void png_error_to_jmp(png_structp png, png_const_charp msg) {
    auto* buffer = static_cast<char*>(png_get_error_ptr(png));
    std::snprintf(buffer, 256, "%s", msg);
    png_longjmp(png, 1);
}

void png_ignore_warning(png_structp, png_const_charp) {}

// C-style on purpose: libpng reports errors with longjmp, so no object with a
// non-trivial destructor may live in this frame.
bool decode_png(const Bytes& bytes, Decoded& out, char* error) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, error, png_error_to_jmp,
                                             png_ignore_warning);
    if (!png) {
        std::snprintf(error, 256, "out of memory");
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        std::snprintf(error, 256, "out of memory");
        return false;
    }
    PngSource src{&bytes, 0};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, &src, png_read_from_memory);
    png_read_png(png, info, PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_STRIP_ALPHA, nullptr);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);
    const int bits = png_get_bit_depth(png, info);
    png_bytepp rows = png_get_rows(png, info);

    out.width = width;
    out.height = height;
    out.channels = channels;
    out.bits = bits;
    out.samples.resize(static_cast<std::size_t>(width) * height * channels);
    const std::size_t per_row = static_cast<std::size_t>(width) * channels;
    for (int y = 0; y < height; ++y) {
        const png_bytep row = rows[y];
        for (std::size_t i = 0; i < per_row; ++i) {
            out.samples[y * per_row + i] =
                bits == 16 ? static_cast<unsigned short>((row[2 * i] << 8) | row[2 * i + 1])
                           : row[i];
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

// --- JPEG -------------------------------------------------------------------

struct JpegError {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_to_jmp(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

bool decode_jpeg(const Bytes& bytes, Decoded& out, char* error) {
    jpeg_decompress_struct cinfo;
    JpegError jerr;
    cinfo.err = jpeg_std_error(&jerr.mgr);
    jerr.mgr.error_exit = jpeg_error_to_jmp;
    jpeg_create_decompress(&cinfo);
    if (setjmp(jerr.jump)) {
        std::snprintf(error, 256, "%s", jerr.message);
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    if (cinfo.jpeg_color_space != JCS_GRAYSCALE) cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    out.width = static_cast<int>(cinfo.output_width);
    out.height = static_cast<int>(cinfo.output_height);
    out.channels = cinfo.output_components;
    out.bits = 8;
    const std::size_t per_row = static_cast<std::size_t>(out.width) * out.channels;
    out.samples.resize(per_row * out.height);
    JSAMPARRAY buffer = (*cinfo.mem->alloc_sarray)(reinterpret_cast<j_common_ptr>(&cinfo),
                                                   JPOOL_IMAGE, static_cast<JDIMENSION>(per_row), 1);
    while (cinfo.output_scanline < cinfo.output_height) {
        const std::size_t y = cinfo.output_scanline;
        jpeg_read_scanlines(&cinfo, buffer, 1);
        for (std::size_t i = 0; i < per_row; ++i) out.samples[y * per_row + i] = buffer[0][i];
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

// --- PNG encode ---------------------------------------------------------------

struct PngSink {
    Bytes* bytes;
};

void png_write_to_memory(png_structp png, png_bytep data, png_size_t length) {
    auto* sink = static_cast<PngSink*>(png_get_io_ptr(png));
    sink->bytes->insert(sink->bytes->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

bool encode_png(const std::vector<unsigned char>& pixels, int width, int height, int channels,
                int bits, Bytes& out, char* error) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, error, png_error_to_jmp,
                                              png_ignore_warning);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    PngSink sink{&out};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &sink, png_write_to_memory, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bits,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t per_row = static_cast<std::size_t>(width) * channels * (bits / 8);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(pixels.data() + y * per_row));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

bool encode_jpeg(const std::vector<unsigned char>& pixels, int width, int height, int channels,
                 int quality, unsigned char** buffer, unsigned long* length, char* error) {
    jpeg_compress_struct cinfo;
    JpegError jerr;
    cinfo.err = jpeg_std_error(&jerr.mgr);
    jerr.mgr.error_exit = jpeg_error_to_jmp;
    jpeg_create_compress(&cinfo);
    if (setjmp(jerr.jump)) {
        std::snprintf(error, JMSG_LENGTH_MAX, "%s", jerr.message);
        jpeg_destroy_compress(&cinfo);
        return false;
    }
    jpeg_mem_dest(&cinfo, buffer, length);
    cinfo.image_width = static_cast<JDIMENSION>(width);
    cinfo.image_height = static_cast<JDIMENSION>(height);
    cinfo.input_components = channels;
    cinfo.in_color_space = channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    const std::size_t per_row = static_cast<std::size_t>(width) * channels;
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(pixels.data() + cinfo.next_scanline * per_row);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    return true;
}

}  // namespace

int to_8bit(double v) noexcept {
    return static_cast<int>(std::round(std::clamp(v, 0.0, 1.0) * 255.0));
}

ImageTensor read_image(const std::filesystem::path& path) {
    const Bytes bytes = read_file(path);
    Decoded d;
    char error[256] = {0};
    bool ok = false;
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
        ok = decode_png(bytes, d, error);
    } else if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
        ok = decode_jpeg(bytes, d, error);
    } else {
        throw InvalidInput("unsupported image format: '" + path.string() + "'");
    }
    if (!ok) throw InvalidInput("cannot decode '" + path.string() + "': " + error);
    if (d.channels != 1 && d.channels != 3) {
        throw InvalidInput("unsupported channel layout in '" + path.string() + "'");
    }
    const double max_code = static_cast<double>((1 << d.bits) - 1);
    std::vector<double> data(d.samples.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = d.samples[i] / max_code;
    return ImageTensor(d.height, d.width, d.channels, std::move(data));
}

namespace {

void write_bytes(const std::filesystem::path& path, const Bytes& encoded) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(encoded.data()),
              static_cast<std::streamsize>(encoded.size()));
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
}

void require_writable_layout(const ImageTensor& img) {
    if (img.channels() != 1 && img.channels() != 3) {
        throw InvalidInput("only 1- and 3-channel images can be written");
    }
}

}  // namespace

void write_png(const std::filesystem::path& path, const ImageTensor& img, int bit_depth) {
    require_writable_layout(img);
    if (bit_depth != 8 && bit_depth != 16) throw InvalidInput("PNG bit depth must be 8 or 16");
    std::vector<unsigned char> pixels;
    pixels.reserve(img.size() * (bit_depth / 8));
    for (double v : img.data()) {
        if (bit_depth == 8) {
            pixels.push_back(static_cast<unsigned char>(to_8bit(v)));
        } else {
            const auto code = static_cast<unsigned>(std::round(std::clamp(v, 0.0, 1.0) * 65535.0));
            pixels.push_back(static_cast<unsigned char>(code >> 8));
            pixels.push_back(static_cast<unsigned char>(code & 0xFF));
        }
    }
    Bytes encoded;
    char error[256] = {0};
    if (!encode_png(pixels, img.width(), img.height(), img.channels(), bit_depth, encoded, error)) {
        throw InvalidInput("cannot encode '" + path.string() + "': " + error);
    }
    write_bytes(path, encoded);
}

void write_jpeg(const std::filesystem::path& path, const ImageTensor& img, int quality) {
    require_writable_layout(img);
    std::vector<unsigned char> pixels(img.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = static_cast<unsigned char>(to_8bit(img[i]));
    }
    unsigned char* buffer = nullptr;
    unsigned long length = 0;
    char error[JMSG_LENGTH_MAX] = {0};
    if (!encode_jpeg(pixels, img.width(), img.height(), img.channels(), quality, &buffer, &length,
                     error)) {
        std::free(buffer);
        throw InvalidInput("cannot encode '" + path.string() + "': " + error);
    }
    const Bytes encoded(buffer, buffer + length);
    std::free(buffer);
    write_bytes(path, encoded);
}

}  // namespace lowlight
