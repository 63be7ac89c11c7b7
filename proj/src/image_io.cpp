#include "pavetex/image_io.hpp"

#include <png.h>
#include <stdio.h>

#include <jpeglib.h>

#include <array>
#include <cctype>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include "pavetex/error.hpp"

namespace pavetex {
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ColorRaster decode_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw data_error("corrupt PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  ColorRaster out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw data_error("corrupt PNG " + path.string() + ": " + msg);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

ColorRaster decode_jpeg(const fs::path& path) {
  FilePtr file(fopen(path.c_str(), "rb"));
  if (!file) throw data_error("cannot open " + path.string());

  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  // Assigned after setjmp, hence volatile.
  ColorRaster* volatile result = nullptr;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    delete result;
    throw data_error("corrupt JPEG " + path.string() + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  result = new ColorRaster(static_cast<int>(cinfo.output_width),
                           static_cast<int>(cinfo.output_height));
  const std::size_t stride = 3 * static_cast<std::size_t>(cinfo.output_width);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = result->rgb.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  ColorRaster out = std::move(*result);
  delete result;
  return out;
}

// Netpbm header tokens: skips whitespace and '#' comments.
class PnmReader {
 public:
  explicit PnmReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw data_error("corrupt PNM header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000'000) throw data_error("corrupt PNM header");
    }
    return v;
  }
  void skip_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw data_error("corrupt PNM header");
    ++pos_;
  }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

ColorRaster decode_pnm(const std::vector<std::uint8_t>& bytes) {
  const char kind = static_cast<char>(bytes[1]);
  PnmReader reader(bytes);
  reader.seek(2);
  const long w = reader.next_int();
  const long h = reader.next_int();
  const long maxval = reader.next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw data_error("unsupported PNM geometry or maxval");
  }
  ColorRaster out(static_cast<int>(w), static_cast<int>(h));
  const std::size_t n = out.pixel_count();
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;
  auto scale = [maxval](long v) {
    if (v > maxval) throw data_error("PNM sample exceeds maxval");
    return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
  };
  if (kind == '5' || kind == '6') {
    reader.skip_single_space();
    const std::size_t start = reader.pos();
    if (bytes.size() < start + n * channels) throw data_error("truncated PNM stream");
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        out.rgb[3 * i + c] = scale(bytes[start + i * channels + (channels == 3 ? c : 0)]);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (channels == 3) {
        for (int c = 0; c < 3; ++c) out.rgb[3 * i + c] = scale(reader.next_int());
      } else {
        const std::uint8_t v = scale(reader.next_int());
        out.rgb[3 * i] = out.rgb[3 * i + 1] = out.rgb[3 * i + 2] = v;
      }
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& header, const std::uint8_t* data,
                std::size_t size) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path.string());
  out << header;
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw data_error("write failed for " + path.string());
}

void png_write(const fs::path& path, int w, int h, png_uint_32 format, const void* data) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) {
    throw data_error("cannot write PNG " + path.string() + ": " + image.message);
  }
}

std::string lower_ext(const fs::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

}  // namespace

ColorRaster load_image(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw data_error("file not found: " + path.string());

  const auto bytes = read_bytes(path);
  static constexpr std::array<std::uint8_t, 8> kPngMagic = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
    return decode_png(path);
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return decode_jpeg(path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' &&
      (bytes[1] == '2' || bytes[1] == '3' || bytes[1] == '5' || bytes[1] == '6')) {
    return decode_pnm(bytes);
  }
  throw data_error("unsupported format: " + path.string());
}

void write_png(const GrayRaster& img, const fs::path& path) {
  png_write(path, img.width, img.height, PNG_FORMAT_GRAY, img.values.data());
}

void write_png(const ColorRaster& img, const fs::path& path) {
  png_write(path, img.width, img.height, PNG_FORMAT_RGB, img.rgb.data());
}

void write_jpeg(const ColorRaster& img, const fs::path& path, int quality) {
  FilePtr file(fopen(path.c_str(), "wb"));
  if (!file) throw data_error("cannot write " + path.string());
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file.get());
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = 3 * static_cast<std::size_t>(img.width);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto row = const_cast<JSAMPROW>(img.rgb.data() + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
}

void write_pgm(const GrayRaster& img, const fs::path& path) {
  const std::string header =
      "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  write_file(path, header, img.values.data(), img.values.size());
}

void write_ppm(const ColorRaster& img, const fs::path& path) {
  const std::string header =
      "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  write_file(path, header, img.rgb.data(), img.rgb.size());
}

void write_gray(const GrayRaster& img, const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return write_png(img, path);
  if (ext == ".pgm") return write_pgm(img, path);
  throw usage_error("unsupported output image extension '" + ext + "' (use .png or .pgm)");
}

void write_mask_pbm(const BinaryMask& mask, const fs::path& path) {
  const std::size_t row_bytes = (static_cast<std::size_t>(mask.width) + 7) / 8;
  std::vector<std::uint8_t> packed(row_bytes * mask.height, 0);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      // PBM: 1 = black = foreground.
      if (mask.at(x, y)) packed[y * row_bytes + x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
    }
  }
  const std::string header =
      "P4\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n";
  write_file(path, header, packed.data(), packed.size());
}

void write_mask_png(const BinaryMask& mask, const fs::path& path) {
  GrayRaster display(mask.width, mask.height, 255);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    if (mask.bits[i]) display.values[i] = 0;
  }
  write_png(display, path);
}

void write_mask(const BinaryMask& mask, const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return write_mask_png(mask, path);
  if (ext == ".pbm") return write_mask_pbm(mask, path);
  throw usage_error("unsupported mask extension '" + ext + "' (use .png or .pbm)");
}

ColorRaster gray_to_color(const GrayRaster& img) {
  ColorRaster out(img.width, img.height);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    out.rgb[3 * i] = out.rgb[3 * i + 1] = out.rgb[3 * i + 2] = img.values[i];
  }
  return out;
}

}  // namespace pavetex
