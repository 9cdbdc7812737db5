#include "cadepth/image_io.hpp"

#include "cadepth/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace cadepth {
namespace {

std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// Skips whitespace and '#' comments in a PNM header.
void skip_pnm_space(std::istream& in) {
  while (in) {
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
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  skip_pnm_space(in);
  in >> w;
  skip_pnm_space(in);
  in >> h;
  skip_pnm_space(in);
  in >> maxval;
  if (!in || w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw IoError(path.string() + ": malformed PGM header");
  in.get();
  const int bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw IoError(path.string() + ": truncated PGM data");
  GrayImage img(h, w);
  for (int i = 0; i < w * h; ++i) {
    const int v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
    img.data()[i] = static_cast<double>(v) / maxval;
  }
  return img;
}

void save_pgm_bytes(const std::filesystem::path& path, int h, int w, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + path.string());
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

GrayImage load_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open image: " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": corrupt PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  // Normalize everything to 8-bit gray.
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  const int color = png_get_color_type(png, info);
  if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
  std::vector<png_bytep> rows(h);
  for (int r = 0; r < h; ++r) rows[r] = buf.data() + static_cast<size_t>(r) * w;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  GrayImage img(h, w);
  for (size_t i = 0; i < buf.size(); ++i) img.data()[i] = buf[i] / 255.0;
  return img;
}

void save_png_bytes(const std::filesystem::path& path, int h, int w, std::vector<unsigned char> bytes) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write image: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string() + ": PNG write failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < h; ++r) png_write_row(png, bytes.data() + static_cast<size_t>(r) * w);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_bytes(const std::filesystem::path& path, int h, int w, std::vector<unsigned char> bytes) {
  const std::string ext = lower_extension(path);
  if (ext == ".png")
    save_png_bytes(path, h, w, std::move(bytes));
  else if (ext == ".pgm")
    save_pgm_bytes(path, h, w, bytes);
  else
    throw IoError("unsupported image extension: " + path.string());
}

template <typename G>
G load_text_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open grid file: " + path.string());
  int h = 0, w = 0;
  if (!(in >> h >> w) || h <= 0 || w <= 0) throw IoError(path.string() + ": invalid grid header");
  G g(h, w);
  for (int i = 0; i < h * w; ++i)
    if (!(in >> g.data()[i])) throw IoError(path.string() + ": truncated grid data");
  return g;
}

template <typename G>
void save_text_grid(const std::filesystem::path& path, const G& g) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write grid file: " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << g.rows() << ' ' << g.cols() << '\n';
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) out << (c ? " " : "") << g(r, c);
    out << '\n';
  }
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".txt") return load_text_grid<Grid>(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".pgm") return load_pgm(path);
  throw IoError("unsupported image extension: " + path.string());
}

void save_image(const std::filesystem::path& path, const GrayImage& image) {
  if (lower_extension(path) == ".txt") return save_text_grid(path, image);
  std::vector<unsigned char> bytes(static_cast<size_t>(image.size()));
  for (Eigen::Index i = 0; i < image.size(); ++i) bytes[i] = to_byte(image.data()[i]);
  save_bytes(path, static_cast<int>(image.rows()), static_cast<int>(image.cols()), std::move(bytes));
}

BlurSizeMap load_size_map(const std::filesystem::path& path) { return load_text_grid<BlurSizeMap>(path); }

void save_size_map(const std::filesystem::path& path, const BlurSizeMap& sizes) { save_text_grid(path, sizes); }

Grid load_depth_map(const std::filesystem::path& path) { return load_text_grid<Grid>(path); }

void save_depth_map(const std::filesystem::path& path, const Grid& depth) { save_text_grid(path, depth); }

void save_size_map_pgm(const std::filesystem::path& path, const BlurSizeMap& sizes, int max_size) {
  std::vector<unsigned char> bytes(static_cast<size_t>(sizes.size()));
  for (Eigen::Index i = 0; i < sizes.size(); ++i)
    bytes[i] = to_byte(static_cast<double>(sizes.data()[i]) / max_size);
  save_bytes(path, static_cast<int>(sizes.rows()), static_cast<int>(sizes.cols()), std::move(bytes));
}

void validate_size_map(const BlurSizeMap& sizes, int max_size) {
  for (int r = 0; r < sizes.rows(); ++r)
    for (int c = 0; c < sizes.cols(); ++c) {
      const int s = sizes(r, c);
      if (s < 1 || s > max_size || s % 2 == 0) {
        std::ostringstream msg;
        msg << "blur size " << s << " at (" << r << ", " << c << ") is not an odd size in [1, "
            << max_size << "]";
        throw InvalidArgument(msg.str());
      }
    }
}

}  // namespace cadepth
