#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "falldet/tensor.hpp"

namespace falldet::ingest {

enum class Label { kAdl, kFall };

std::string_view to_string(Label label);
/// Accepts "fall" and "adl". Throws kFormat otherwise.
Label parse_label(std::string_view text);

/// 8-bit RGB image, interleaved (row, col, channel).
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t at(int x, int y, int c) const { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

/// Float RGB image, same layout as Frame. Produced by resizing.
struct FloatFrame {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;

  float at(int x, int y, int c) const { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

struct FrameSequence {
  std::vector<Frame> frames;
  int width = 0;
  int height = 0;
  double fps = 0.0;
};

enum class SourceFormat { kPpmDir, kRawRgb24 };

std::string_view to_string(SourceFormat format);
SourceFormat parse_source_format(std::string_view text);

/// Binary PPM (P6, maxval 255).
Frame read_ppm(const std::filesystem::path& path);
void write_ppm(const Frame& frame, const std::filesystem::path& path);

/// Every *.ppm in the directory, in lexicographic file-name order.
FrameSequence read_ppm_dir(const std::filesystem::path& dir, double fps);

struct RawDescriptor {
  int width = 0;
  int height = 0;
  double fps = 0.0;
  std::int64_t frames = 0;
};

/// Sidecar for a raw file lives next to it as "<file>.json".
std::filesystem::path sidecar_path(const std::filesystem::path& raw);
RawDescriptor read_sidecar(const std::filesystem::path& path);
void write_sidecar(const RawDescriptor& desc, const std::filesystem::path& path);

/// Planar RGB24: per frame an R plane, a G plane, then a B plane, each
/// height x width bytes.
FrameSequence read_raw_rgb24(const std::filesystem::path& raw);
void write_raw_rgb24(const FrameSequence& seq, const std::filesystem::path& raw);

/// Dispatches on format. `fps` is used for PPM directories, which carry
/// no timing of their own.
FrameSequence read_frames(const std::filesystem::path& source, SourceFormat format, double fps = 30.0);

/// Bilinear resampling with half-pixel centres (align_corners off); source
/// coordinates are clamped to the edge. Channels are independent.
FloatFrame resize_bilinear(const Frame& frame, int target_width, int target_height);

/// Offsets of non-overlapping groups; a trailing partial group is dropped.
std::vector<std::span<const Frame>> chunk_frames(const FrameSequence& seq, std::int64_t chunk_len = 16,
                                                 std::int64_t stride = 16);

struct PreprocessConfig {
  std::array<float, 3> mean{101.4f, 97.7f, 90.0f};  // RGB, pixel units
  int size = 112;
};

/// (3, 16, size, size) tensor laid out (channel, frame, row, col) with the
/// per-channel mean subtracted.
Tensor preprocess(std::span<const Frame> group, const PreprocessConfig& cfg = {});

struct ManifestEntry {
  std::string video_id;
  std::filesystem::path path;  // resolved against the manifest directory
  SourceFormat format = SourceFormat::kRawRgb24;
  Label label = Label::kAdl;
  double fps = 30.0;
  std::string subject;
};

/// CSV with header `video_id,path,format,label,fps,subject`.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);

/// Frame count without decoding pixels.
std::int64_t count_frames(const ManifestEntry& entry);

}  // namespace falldet::ingest
