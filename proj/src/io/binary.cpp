#include "svwa/io/binary.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "svwa/error.hpp"

namespace svwa::io {

void ByteWriter::f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
void ByteWriter::f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

float ByteReader::f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get(4, "f32"))); }
double ByteReader::f64() { return std::bit_cast<double>(get(8, "f64")); }

std::string ByteReader::raw(std::size_t n) {
  if (remaining() < n) {
    throw FormatError("truncated: need " + std::to_string(n) + " bytes, " + std::to_string(remaining()) + " left",
                      offset_);
  }
  std::string out(bytes_.begin() + static_cast<std::ptrdiff_t>(offset_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(offset_ + n));
  offset_ += n;
  return out;
}

std::uint64_t ByteReader::get(std::size_t width, const char* what) {
  if (remaining() < width) {
    throw FormatError(std::string("truncated while reading ") + what, offset_);
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[offset_ + i]) << (8 * i);
  offset_ += width;
  return v;
}

void ByteReader::expect_end(std::string_view what) const {
  if (remaining() != 0) {
    throw FormatError(std::string(what) + ": " + std::to_string(remaining()) + " trailing bytes", offset_);
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace svwa::io
