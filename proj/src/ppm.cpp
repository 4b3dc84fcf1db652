#include "collage/ppm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "collage/errors.hpp"

namespace collage {

namespace {

class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

  std::size_t pos() const { return pos_; }

  void skip_separators() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t read_uint(const char* what) {
    const std::size_t start = pos_;
    std::size_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (v > (1u << 24)) throw ParseError(std::string("PPM ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= bytes_.size())
        throw ParseError(std::string("PPM header truncated before ") + what, pos_);
      throw ParseError(std::string("PPM expected ") + what, pos_);
    }
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

RasterImage read_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw ParseError("not a binary PPM (expected magic \"P6\")", 0);
  if (bytes.size() < 3 || !(std::isspace(bytes[2]) || bytes[2] == '#'))
    throw ParseError("PPM magic must be followed by whitespace", 2);

  HeaderReader r(bytes, 2);
  r.skip_separators();
  const std::size_t width = r.read_uint("width");
  r.skip_separators();
  const std::size_t height = r.read_uint("height");
  r.skip_separators();
  const std::size_t maxval_at = r.pos();
  const std::size_t maxval = r.read_uint("maxval");
  if (maxval != 255) throw ParseError("PPM maxval must be 255", maxval_at);
  std::size_t pos = r.pos();
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw ParseError("PPM header must end with a single whitespace byte", pos);
  ++pos;

  if (width == 0 || height == 0) throw ParseError("PPM dimensions must be positive", maxval_at);
  const std::size_t need = width * height * 3;
  if (bytes.size() - pos < need)
    throw ParseError("PPM payload truncated: expected " + std::to_string(need) + " bytes, have " +
                         std::to_string(bytes.size() - pos),
                     bytes.size());

  std::vector<Rgb> px(width * height);
  for (std::size_t i = 0; i < px.size(); ++i, pos += 3)
    px[i] = {bytes[pos], bytes[pos + 1], bytes[pos + 2]};
  return RasterImage(width, height, std::move(px));
}

std::vector<std::uint8_t> write_ppm(const RasterImage& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.pixels().size() * 3);
  for (const Rgb& p : img.pixels()) out.insert(out.end(), p.begin(), p.end());
  return out;
}

RasterImage load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return read_ppm(bytes);
}

void save_ppm(const RasterImage& img, const std::filesystem::path& path) {
  const auto bytes = write_ppm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace collage
