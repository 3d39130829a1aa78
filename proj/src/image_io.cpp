#include "matkit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <vector>

namespace matkit {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

bool ends_with(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                    [](char a, char b) { return std::tolower(a) == std::tolower(b); });
}

}  // namespace

Image load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open for reading: " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw IoError("not a PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::vector<png_bytep> rows;
  std::vector<png_byte> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng failure while reading " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int width = png_get_image_width(png, info);
  const int height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unsupported PNG color type (need 8/16-bit gray or RGB): " + path);
  }
  if (bit_depth != 8 && bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unsupported PNG bit depth: " + path);
  }
  if (bit_depth == 16) png_set_swap(png);  // libpng delivers big-endian 16-bit

  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const size_t row_bytes = static_cast<size_t>(width) * channels * (bit_depth / 8);
  pixels.resize(row_bytes * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = pixels.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img = Image::create(width, height, channels);
  const double scale = bit_depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        size_t i = (static_cast<size_t>(y) * width + x) * channels + c;
        double v = bit_depth == 8
                       ? pixels[i]
                       : reinterpret_cast<const uint16_t*>(pixels.data())[i];
        img.at(x, y, c) = v * scale;
      }
    }
  }
  return img;
}

void save_png(const std::string& path, const Image& img, int bit_depth) {
  img.validate();
  if (bit_depth != 8 && bit_depth != 16)
    throw ValidationError("PNG bit depth must be 8 or 16");

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failure while writing " + path);
  }
  png_init_io(png, fp.get());
  const int color_type = img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, img.width, img.height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);

  const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
  const size_t row_bytes = static_cast<size_t>(img.width) * img.channels * (bit_depth / 8);
  std::vector<png_byte> row(row_bytes);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        double q = std::lround(clamp01(img.at(x, y, c)) * maxval);
        size_t i = static_cast<size_t>(x) * img.channels + c;
        if (bit_depth == 8)
          row[i] = static_cast<png_byte>(q);
        else
          reinterpret_cast<uint16_t*>(row.data())[i] = static_cast<uint16_t>(q);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);

  std::string magic;
  int width = 0, height = 0;
  double scale = 0;
  in >> magic >> width >> height >> scale;
  if (!in || (magic != "Pf" && magic != "PF"))
    throw IoError("not a PFM file: " + path);
  if (width < 1 || height < 1) throw IoError("bad PFM dims: " + path);
  if (scale >= 0) throw IoError("big-endian PFM unsupported: " + path);
  in.get();  // single whitespace byte after the header

  const int channels = magic == "PF" ? 3 : 1;
  std::vector<float> raw(static_cast<size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(raw.data()), raw.size() * sizeof(float));
  if (!in) throw IoError("truncated PFM: " + path);

  Image img = Image::create(width, height, channels);
  for (int y = 0; y < height; ++y) {
    const int src_y = height - 1 - y;  // PFM rows run bottom-to-top
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(x, y, c) =
            raw[(static_cast<size_t>(src_y) * width + x) * channels + c];
  }
  return img;
}

void save_pfm(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw ValidationError("PFM needs 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << (img.channels == 3 ? "PF" : "Pf") << "\n"
      << img.width << " " << img.height << "\n-1.0\n";
  std::vector<float> row(static_cast<size_t>(img.width) * img.channels);
  for (int y = img.height - 1; y >= 0; --y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        row[static_cast<size_t>(x) * img.channels + c] =
            static_cast<float>(img.at(x, y, c));
    out.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
  }
  if (!out) throw IoError("write failed: " + path);
}

DepthMap load_depth(const std::string& path) {
  Image img = ends_with(path, ".pfm") ? load_pfm(path) : load_png(path);
  if (img.channels != 1)
    throw ValidationError("depth input must be single-channel: " + path);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : img.data) {
    if (!std::isfinite(v)) throw ValidationError("non-finite depth sample: " + path);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  DepthMap depth = DepthMap::create(img.width, img.height);
  const double range = hi - lo;
  if (range > 1e-12)
    for (size_t i = 0; i < img.data.size(); ++i)
      depth.data[i] = (img.data[i] - lo) / range;
  return depth;
}

void save_depth_pfm(const std::string& path, const DepthMap& depth) {
  Image img = Image::create(depth.width, depth.height, 1);
  img.data = depth.data;
  save_pfm(path, img);
}

Mask load_mask(const std::string& path) {
  Image img = ends_with(path, ".pfm") ? load_pfm(path) : load_png(path);
  if (img.channels != 1)
    throw ValidationError("mask input must be single-channel: " + path);
  Mask mask = Mask::create(img.width, img.height);
  for (size_t i = 0; i < img.data.size(); ++i) mask.data[i] = img.data[i] > 0.5;
  return mask;
}

void save_mask_png(const std::string& path, const Mask& mask) {
  Image img = Image::create(mask.width, mask.height, 1);
  for (size_t i = 0; i < mask.data.size(); ++i)
    img.data[i] = mask.data[i] ? 1.0 : 0.0;
  save_png(path, img, 8);
}

void save_raw_f32(const std::string& path, const std::vector<double>& data,
                  int channels, int height, int width) {
  if (data.size() != static_cast<size_t>(channels) * height * width)
    throw ValidationError("raw dump size does not match its shape");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  std::vector<float> raw(data.begin(), data.end());
  out.write(reinterpret_cast<const char*>(raw.data()), raw.size() * sizeof(float));
  if (!out) throw IoError("write failed: " + path);

  std::ofstream shape(path + ".shape");
  if (!shape) throw IoError("cannot open for writing: " + path + ".shape");
  shape << channels << " " << height << " " << width << "\n";
}

RawTensor load_raw_f32(const std::string& path) {
  std::ifstream shape(path + ".shape");
  if (!shape) throw IoError("missing shape sidecar: " + path + ".shape");
  RawTensor t;
  shape >> t.channels >> t.height >> t.width;
  if (!shape || t.channels < 1 || t.height < 1 || t.width < 1)
    throw IoError("bad shape sidecar: " + path + ".shape");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::vector<float> raw(static_cast<size_t>(t.channels) * t.height * t.width);
  in.read(reinterpret_cast<char*>(raw.data()), raw.size() * sizeof(float));
  if (!in) throw IoError("truncated raw dump: " + path);
  t.data.assign(raw.begin(), raw.end());
  return t;
}

}  // namespace matkit
