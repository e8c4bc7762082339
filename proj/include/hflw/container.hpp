#pragma once

#include <string>
#include <vector>

#include "hflw/image.hpp"
#include "hflw/params.hpp"

namespace hflw {

// "HFLW" stack container: 64-byte little-endian header followed by raw
// 16-bit frames, frame-major, row-major within a frame.
//   magic "HFLW" (4), version u16, width u32, height u32, frame_count u32,
//   bits_per_pixel u16, frame_rate_hz f64, pixel_pitch_m f64,
//   wavelength_m f64, reserved (pad to 64 bytes).
constexpr uint16_t kContainerVersion = 1;
constexpr size_t kContainerHeaderBytes = 64;

void write_stack(const std::string& path, const InterferogramStack& stack);
InterferogramStack read_stack(const std::string& path);

// Raw little-endian float32 arrays with JSON sidecars for intermediate
// artifacts (hologram stacks, moment maps).
void write_f32(const std::string& path, const float* data, size_t count);
std::vector<float> read_f32(const std::string& path, size_t expected_count);

void write_u8(const std::string& path, const uint8_t* data, size_t count);
std::vector<uint8_t> read_u8(const std::string& path, size_t expected_count);

void write_pgm(const std::string& path, const Mask& mask);
Mask read_pgm(const std::string& path);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace hflw
