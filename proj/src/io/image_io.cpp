#include <png.h>

#include <algorithm>
#include <cctype>
#include <sstream>

#include "grasp/errors.hpp"
#include "grasp/io.hpp"
#include "io_util.hpp"

namespace grasp {
namespace {

bool is_png(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

MaskImage load_png(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, data.data(), data.size())) {
    fail(ErrorCode::kIoError, path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::kIoError, path.string() + ": " + msg);
  }
  return MaskImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(pixels));
}

// Skips whitespace and '#' comments between header tokens.
int pgm_token(const std::string& data, size_t& pos, const std::filesystem::path& path) {
  while (pos < data.size()) {
    if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  size_t start = pos;
  while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
  if (start == pos) fail(ErrorCode::kIoError, path.string() + ": bad PGM header");
  return std::stoi(data.substr(start, pos - start));
}

MaskImage load_pgm(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '2')) {
    fail(ErrorCode::kIoError, path.string() + ": not a P5 or P2 PGM file");
  }
  size_t pos = 2;
  const int width = pgm_token(data, pos, path);
  const int height = pgm_token(data, pos, path);
  const int maxval = pgm_token(data, pos, path);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    fail(ErrorCode::kIoError, path.string() + ": only 8-bit PGM masks are supported");
  }
  const size_t n = static_cast<size_t>(width) * height;
  std::vector<uint8_t> pixels(n);
  if (data[1] == '5') {
    ++pos;  // single whitespace after maxval
    if (data.size() < pos + n) fail(ErrorCode::kIoError, path.string() + ": truncated PGM body");
    std::memcpy(pixels.data(), data.data() + pos, n);
  } else {
    for (size_t i = 0; i < n; ++i) pixels[i] = static_cast<uint8_t>(pgm_token(data, pos, path));
  }
  return MaskImage(width, height, std::move(pixels));
}

}  // namespace

MaskImage load_mask(const std::filesystem::path& path) { return is_png(path) ? load_png(path) : load_pgm(path); }

void save_mask(const MaskImage& mask, const std::filesystem::path& path) {
  std::vector<uint8_t> pixels(mask.bits().size());
  std::transform(mask.bits().begin(), mask.bits().end(), pixels.begin(), [](uint8_t b) { return b ? 255 : 0; });
  if (!is_png(path)) {
    std::string out = "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
    out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    write_file(path, out);
    return;
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(mask.width());
  image.height = static_cast<png_uint_32>(mask.height());
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, pixels.data(), 0, nullptr)) {
    fail(ErrorCode::kIoError, path.string() + ": " + image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    fail(ErrorCode::kIoError, path.string() + ": " + image.message);
  }
  out.resize(size);
  write_file(path, out);
}

}  // namespace grasp
