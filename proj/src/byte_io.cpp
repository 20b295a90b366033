#include "byte_io.hpp"

#include <fstream>
#include <iterator>

#include "harp/error.hpp"

namespace harp::detail {

void ByteReader::error(const std::string& msg) const {
  fail(Errc::format_error, context_ + " at offset " + std::to_string(pos_) + ": " + msg);
}

void ByteReader::need(std::size_t n, const char* what) const {
  if (remaining() < n) {
    error(std::string("truncated ") + what + ": expected " + std::to_string(n) + " bytes, " +
          std::to_string(remaining()) + " available (file length " + std::to_string(data_.size()) + ")");
  }
}

std::uint8_t ByteReader::u8(const char* what) {
  need(1, what);
  return data_[pos_++];
}

std::uint32_t ByteReader::u32(const char* what) {
  need(4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64(const char* what) {
  need(8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

float ByteReader::f32(const char* what) {
  const std::uint32_t bits = u32(what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

double ByteReader::f64(const char* what) {
  const std::uint64_t bits = u64(what);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::span<const std::uint8_t> ByteReader::bytes(std::size_t n, const char* what) {
  need(n, what);
  auto s = data_.subspan(pos_, n);
  pos_ += n;
  return s;
}

void ByteReader::expect_end() const {
  if (remaining() != 0) error(std::to_string(remaining()) + " trailing bytes");
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_error, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io_error, "write failed for " + path.string());
}

}  // namespace harp::detail
