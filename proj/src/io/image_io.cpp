#include "drt/io/image_io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "drt/errors.hpp"

namespace drt::io {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadFailure("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadFailure("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct Header {
  char kind = 0;
  std::size_t width = 0, height = 0;
  std::size_t offset = 0;
};

Header parse_header(const std::string& bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    std::size_t v = 0, digits = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
      ++digits;
    }
    if (!digits) throw LoadFailure("malformed netpbm header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw LoadFailure("not a binary PPM/PGM image");
  }
  Header h;
  h.kind = bytes[1];
  pos = 2;
  h.width = number();
  h.height = number();
  if (number() != 255) throw LoadFailure("only 8-bit netpbm images are supported");
  ++pos;  // single whitespace before the raster
  h.offset = pos;
  const std::size_t channels = h.kind == '6' ? 3 : 1;
  if (bytes.size() < h.offset + h.width * h.height * channels) throw LoadFailure("truncated netpbm raster");
  return h;
}

std::uint8_t to_byte(double v) {
  if (!(v >= 0.0 && v <= 255.0) || v != std::nearbyint(v)) {
    throw ShapeMismatch("pixel value " + std::to_string(v) + " is not an 8-bit integer");
  }
  return static_cast<std::uint8_t>(v);
}

}  // namespace

std::string encode_image(const Tensor& image) {
  if (image.rank() != 3 || (image.dim(0) != 3 && image.dim(0) != 1)) {
    throw ShapeMismatch("can only encode (1|3, H, W) images, got " + shape_string(image.shape));
  }
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  std::string bytes = (c == 3 ? "P6\n" : "P5\n") + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  const std::size_t header = bytes.size();
  bytes.resize(header + c * h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        bytes[header + (y * w + x) * c + ch] = static_cast<char>(to_byte(image[(ch * h + y) * w + x]));
      }
    }
  }
  return bytes;
}

Tensor decode_image(const std::string& bytes) {
  const Header hd = parse_header(bytes);
  const std::size_t c = hd.kind == '6' ? 3 : 1;
  Tensor image(Shape{c, hd.height, hd.width});
  for (std::size_t y = 0; y < hd.height; ++y) {
    for (std::size_t x = 0; x < hd.width; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        image[(ch * hd.height + y) * hd.width + x] =
            static_cast<unsigned char>(bytes[hd.offset + (y * hd.width + x) * c + ch]);
      }
    }
  }
  return image;
}

Tensor read_image(const std::filesystem::path& path) {
  try {
    return decode_image(read_file(path));
  } catch (const LoadFailure& e) {
    throw LoadFailure(path.string() + ": " + e.what());
  }
}

void write_image(const std::filesystem::path& path, const Tensor& image) { write_file(path, encode_image(image)); }

GrayImage read_gray(const std::filesystem::path& path) {
  const Tensor t = read_image(path);
  if (t.dim(0) != 1) throw LoadFailure("'" + path.string() + "' is not a grayscale image");
  GrayImage g{t.dim(1), t.dim(2), {}};
  g.pixels.reserve(t.size());
  for (double v : t.data) g.pixels.push_back(static_cast<std::uint8_t>(v));
  return g;
}

void write_gray(const std::filesystem::path& path, const GrayImage& image) {
  Tensor t(Shape{1, image.height, image.width});
  for (std::size_t i = 0; i < image.pixels.size(); ++i) t[i] = image.pixels[i];
  write_image(path, t);
}

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error("sha256 computation failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string content_hash(const Tensor& image) { return sha256_hex(encode_image(image)); }

}  // namespace drt::io
