#include "hflw/container.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "hflw/errors.hpp"

namespace hflw {
namespace {

// Little-endian scalar packing. Target platforms are little-endian; memcpy
// keeps the layout explicit and alias-safe.
template <class T>
void put(std::vector<char>& buf, T v) {
  const size_t off = buf.size();
  buf.resize(off + sizeof(T));
  std::memcpy(buf.data() + off, &v, sizeof(T));
}

template <class T>
T get(const char* buf, size_t& off) {
  T v;
  std::memcpy(&v, buf + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

void write_stack(const std::string& path, const InterferogramStack& stack) {
  stack.validate();
  std::vector<char> header;
  header.reserve(kContainerHeaderBytes);
  header.insert(header.end(), {'H', 'F', 'L', 'W'});
  put<uint16_t>(header, kContainerVersion);
  put<uint32_t>(header, static_cast<uint32_t>(stack.width));
  put<uint32_t>(header, static_cast<uint32_t>(stack.height));
  put<uint32_t>(header, static_cast<uint32_t>(stack.frame_count));
  put<uint16_t>(header, static_cast<uint16_t>(stack.bit_depth));
  put<double>(header, stack.params.frame_rate_hz);
  put<double>(header, stack.params.pixel_pitch_m);
  put<double>(header, stack.params.wavelength_m);
  header.resize(kContainerHeaderBytes, 0);  // reserved

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.write(header.data(), header.size());
  out.write(reinterpret_cast<const char*>(stack.frames.data()),
            stack.frames.size() * sizeof(uint16_t));
  if (!out) throw DataError("write failed: " + path);
}

InterferogramStack read_stack(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open: " + path);
  const size_t file_size = static_cast<size_t>(in.tellg());
  in.seekg(0);
  if (file_size < kContainerHeaderBytes)
    throw DataError(path + ": file shorter than the 64-byte header");
  char header[kContainerHeaderBytes];
  in.read(header, kContainerHeaderBytes);
  if (std::memcmp(header, "HFLW", 4) != 0)
    throw DataError(path + ": bad magic, not an HFLW container");
  size_t off = 4;
  const uint16_t version = get<uint16_t>(header, off);
  if (version != kContainerVersion)
    throw DataError(path + ": unsupported container version " +
                    std::to_string(version));
  InterferogramStack stack;
  stack.width = static_cast<int>(get<uint32_t>(header, off));
  stack.height = static_cast<int>(get<uint32_t>(header, off));
  stack.frame_count = static_cast<int>(get<uint32_t>(header, off));
  stack.bit_depth = get<uint16_t>(header, off);
  stack.params.frame_rate_hz = get<double>(header, off);
  stack.params.pixel_pitch_m = get<double>(header, off);
  stack.params.wavelength_m = get<double>(header, off);

  if (stack.width <= 0 || stack.height <= 0 || stack.frame_count <= 0 ||
      stack.bit_depth != 16)
    throw DataError(path + ": invalid header fields");
  const size_t expected =
      kContainerHeaderBytes +
      stack.frame_pixels() * static_cast<size_t>(stack.frame_count) * 2;
  if (file_size != expected)
    throw DataError(path + ": size mismatch, expected " +
                    std::to_string(expected) + " bytes, got " +
                    std::to_string(file_size));
  stack.frames.resize(stack.frame_pixels() *
                      static_cast<size_t>(stack.frame_count));
  in.read(reinterpret_cast<char*>(stack.frames.data()),
          stack.frames.size() * sizeof(uint16_t));
  if (!in) throw DataError(path + ": truncated read");
  return stack;
}

void write_f32(const std::string& path, const float* data, size_t count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(data), count * sizeof(float));
  if (!out) throw DataError("write failed: " + path);
}

std::vector<float> read_f32(const std::string& path, size_t expected_count) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open: " + path);
  const size_t bytes = static_cast<size_t>(in.tellg());
  if (bytes != expected_count * sizeof(float))
    throw DataError(path + ": size mismatch, expected " +
                    std::to_string(expected_count * sizeof(float)) +
                    " bytes, got " + std::to_string(bytes));
  in.seekg(0);
  std::vector<float> data(expected_count);
  in.read(reinterpret_cast<char*>(data.data()), bytes);
  if (!in) throw DataError(path + ": truncated read");
  return data;
}

void write_u8(const std::string& path, const uint8_t* data, size_t count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(data), count);
  if (!out) throw DataError("write failed: " + path);
}

std::vector<uint8_t> read_u8(const std::string& path, size_t expected_count) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open: " + path);
  const size_t bytes = static_cast<size_t>(in.tellg());
  if (bytes != expected_count)
    throw DataError(path + ": size mismatch, expected " +
                    std::to_string(expected_count) + " bytes, got " +
                    std::to_string(bytes));
  in.seekg(0);
  std::vector<uint8_t> data(expected_count);
  in.read(reinterpret_cast<char*>(data.data()), bytes);
  return data;
}

void write_pgm(const std::string& path, const Mask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  std::vector<uint8_t> bytes(mask.size());
  for (size_t p = 0; p < mask.size(); ++p) bytes[p] = mask.data[p] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

Mask read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  std::string magic;
  int w, h, maxval;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0)
    throw DataError(path + ": not a binary PGM");
  in.get();  // single whitespace after maxval
  Mask mask(w, h);
  std::vector<uint8_t> bytes(mask.size());
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw DataError(path + ": truncated PGM");
  for (size_t p = 0; p < mask.size(); ++p) mask.data[p] = bytes[p] >= 128 ? 1 : 0;
  return mask;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hflw
