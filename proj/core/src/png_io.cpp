#include "xpci/png_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace xpci {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

std::uint32_t get_u32(const unsigned char* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void append_chunk(std::vector<unsigned char>& out, const char type[4],
                  const std::vector<unsigned char>& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc =
      crc32(0L, out.data() + type_at, static_cast<uInt>(4 + data.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

constexpr unsigned char kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

}  // namespace

void write_png16(const std::string& path, const Png16& image) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height)
    throw std::invalid_argument("write_png16: inconsistent image dimensions");

  // Scanlines: filter byte 0 + big-endian 16-bit samples.
  const std::size_t stride = 1 + static_cast<std::size_t>(image.width) * 2;
  std::vector<unsigned char> raw(stride * image.height);
  for (int y = 0; y < image.height; ++y) {
    unsigned char* row = raw.data() + static_cast<std::size_t>(y) * stride;
    row[0] = 0;
    for (int x = 0; x < image.width; ++x) {
      const std::uint16_t v = image.at(x, y);
      row[1 + 2 * x] = static_cast<unsigned char>(v >> 8);
      row[2 + 2 * x] = static_cast<unsigned char>(v & 0xff);
    }
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw std::runtime_error("write_png16: deflate failed");
  compressed.resize(bound);

  std::vector<unsigned char> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(image.width));
  put_u32(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr.push_back(16);  // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // adaptive filtering
  ihdr.push_back(0);   // no interlace

  std::vector<unsigned char> file(kSignature, kSignature + 8);
  append_chunk(file, "IHDR", ihdr);
  append_chunk(file, "IDAT", compressed);
  append_chunk(file, "IEND", {});

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(file.data()), static_cast<std::streamsize>(file.size()));
  if (!out) throw std::runtime_error("short write: " + path);
}

Png16 read_png16(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<unsigned char> file(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(file.data()), static_cast<std::streamsize>(file.size()));
  if (!in) throw std::runtime_error("short read: " + path);

  if (file.size() < 8 || std::memcmp(file.data(), kSignature, 8) != 0)
    throw std::invalid_argument(path + ": not a PNG file");

  Png16 image;
  std::vector<unsigned char> idat;
  std::size_t pos = 8;
  while (pos + 8 <= file.size()) {
    const std::uint32_t len = get_u32(file.data() + pos);
    if (pos + 12 + len > file.size())
      throw std::invalid_argument(path + ": truncated chunk");
    const char* type = reinterpret_cast<const char*>(file.data() + pos + 4);
    const unsigned char* data = file.data() + pos + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      image.width = static_cast<int>(get_u32(data));
      image.height = static_cast<int>(get_u32(data + 4));
      if (data[8] != 16 || data[9] != 0)
        throw std::invalid_argument(path + ": only 16-bit grayscale PNG is supported");
      if (data[12] != 0) throw std::invalid_argument(path + ": interlaced PNG is unsupported");
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (image.width < 1 || image.height < 1)
    throw std::invalid_argument(path + ": missing IHDR");

  const std::size_t stride = 1 + static_cast<std::size_t>(image.width) * 2;
  std::vector<unsigned char> raw(stride * image.height);
  uLongf raw_size = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_size != raw.size())
    throw std::invalid_argument(path + ": corrupt IDAT stream");

  image.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
  for (int y = 0; y < image.height; ++y) {
    const unsigned char* row = raw.data() + static_cast<std::size_t>(y) * stride;
    if (row[0] != 0)
      throw std::invalid_argument(path + ": only filter 0 scanlines are supported");
    for (int x = 0; x < image.width; ++x)
      image.pixels[static_cast<std::size_t>(y) * image.width + x] =
          static_cast<std::uint16_t>((row[1 + 2 * x] << 8) | row[2 + 2 * x]);
  }
  return image;
}

ExportInfo export_png(const std::string& path, const RealField& field, PngNorm norm, double lo,
                      double hi, WarningLog* log) {
  require_finite(field, "export_png");
  const Grid2D& g = field.grid;
  Png16 image;
  image.width = g.nx;
  image.height = g.ny;
  image.pixels.resize(g.size());

  ExportInfo info;
  info.norm = norm;

  std::vector<double> values(field.v);
  if (norm == PngNorm::Log) {
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, v);
    if (!(peak > 0.0))
      throw std::invalid_argument("export_png: log normalization needs positive values");
    const double eps = 1e-12 * peak;
    for (double& v : values) v = std::log10(std::max(v, eps));
  }

  if (norm == PngNorm::Fixed) {
    if (!(hi > lo))
      throw std::invalid_argument("export_png: fixed normalization needs hi > lo");
    info.lo = lo;
    info.hi = hi;
  } else {
    double mn = values[0], mx = values[0];
    for (double v : values) {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    info.lo = mn;
    info.hi = mx;
  }

  if (info.hi == info.lo) {
    warn(log, "export.flat", "image is constant; writing mid-gray",
         {{"value", info.lo}});
    for (auto& p : image.pixels) p = 32768;
  } else {
    const double scale = 65535.0 / (info.hi - info.lo);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double t = std::clamp((values[i] - info.lo) * scale, 0.0, 65535.0);
      image.pixels[i] = static_cast<std::uint16_t>(std::lround(t));
    }
  }
  write_png16(path, image);
  return info;
}

}  // namespace xpci
