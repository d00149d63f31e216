#include "sstex/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "sstex/error.hpp"

namespace sstex {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& why) {
  throw IngestionError("cannot load '" + path.string() + "': " + why);
}

double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

// Reads whitespace-separated header tokens of a netpbm file, skipping comments.
class NetpbmReader {
 public:
  NetpbmReader(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
      : b_(bytes), path_(path) {}

  std::optional<unsigned long> number() {
    skip_space();
    if (pos_ >= b_.size() || !std::isdigit(b_[pos_])) return std::nullopt;
    unsigned long v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_++] - '0');
      if (v > 1u << 24) fail(path_, "header value too large");
    }
    return v;
  }
  unsigned long require_number(const char* what) {
    auto v = number();
    if (!v) fail(path_, std::string("malformed header (") + what + ")");
    return *v;
  }
  // Exactly one whitespace byte separates the header from binary data.
  void end_header() {
    if (pos_ >= b_.size() || !std::isspace(b_[pos_])) fail(path_, "malformed header");
    ++pos_;
  }
  std::size_t pos() const noexcept { return pos_; }
  void seek(std::size_t p) noexcept { pos_ = p; }

 private:
  void skip_space() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }
  const std::vector<unsigned char>& b_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 2;
};

Image decode_netpbm(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  const char kind = static_cast<char>(bytes[1]);
  const bool ascii = kind == '2' || kind == '3';
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;
  NetpbmReader rd(bytes, path);
  const auto w = rd.require_number("width");
  const auto h = rd.require_number("height");
  const auto maxval = rd.require_number("maxval");
  if (w == 0 || h == 0) fail(path, "zero image dimension");
  if (maxval == 0 || maxval > 65535) fail(path, "maxval out of range");
  const double scale = 255.0 / static_cast<double>(maxval);
  const std::size_t count = static_cast<std::size_t>(w) * h * channels;

  std::vector<double> samples(count);
  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      auto v = rd.number();
      if (!v) fail(path, "truncated pixel data");
      if (*v > maxval) fail(path, "pixel exceeds maxval");
      samples[i] = static_cast<double>(*v);
    }
  } else {
    rd.end_header();
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (bytes.size() - rd.pos() < count * bps) fail(path, "truncated pixel data");
    const unsigned char* p = bytes.data() + rd.pos();
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = bps == 1 ? p[i] : (static_cast<unsigned>(p[2 * i]) << 8 | p[2 * i + 1]);
      if (v > maxval) fail(path, "pixel exceeds maxval");
      samples[i] = v;
    }
  }

  Image img(static_cast<int>(h), static_cast<int>(w));
  auto out = img.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = channels == 1 ? samples[i]
                                   : luminance(samples[3 * i], samples[3 * i + 1], samples[3 * i + 2]);
    out[i] = maxval == 255 ? v : v * scale;
  }
  return img;
}

Image decode_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) fail(path, png.message);
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
    const std::string why = png.message;
    png_image_free(&png);
    fail(path, why);
  }
  Image img(static_cast<int>(png.height), static_cast<int>(png.width));
  auto out = img.values();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = color ? luminance(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]) : buf[i];
  png_image_free(&png);
  return img;
}

}  // namespace

Image load_grayscale(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "file cannot be opened");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && std::strchr("2356", bytes[1]) && bytes[1] != 0)
    return decode_netpbm(bytes, path);
  fail(path, "unsupported image format");
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExportError("cannot write '" + path.string() + "'");
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  std::vector<unsigned char> px(image.size());
  const auto v = image.values();
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = static_cast<unsigned char>(std::clamp(std::lround(v[i]), 0L, 255L));
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw ExportError("write failed for '" + path.string() + "'");
}

Image rescale_to_byte_range(const Image& image) {
  Image out(image.rows(), image.cols());
  if (image.empty()) return out;
  const auto v = image.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) return out;
  auto o = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) o[i] = 255.0 * (v[i] - *lo) / span;
  return out;
}

}  // namespace sstex
