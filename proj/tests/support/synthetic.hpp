#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "falldet/ingest.hpp"

namespace falldet::test {

// Near-black frames that never change. The level varies a little per
// video.
ingest::FrameSequence dark_static_video(int width, int height, int frames, std::uint64_t seed);

// A white disc drifting over a light background, starting position and
// velocity drawn from the seed.
ingest::FrameSequence bright_blob_video(int width, int height, int frames, std::uint64_t seed);

// Frame whose every pixel has the given colour.
ingest::Frame solid_frame(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

struct Blobs {
  std::vector<std::vector<float>> points;
  std::vector<ingest::Label> labels;
};

// Unit Gaussians centred at -3 (adl) and +3 (fall) on the first axis;
// points with |x0| < 1 are redrawn, so the classes are at least 2 apart.
// Labels alternate adl, fall.
Blobs gaussian_blobs(int per_class, int width, std::uint64_t seed);

struct SyntheticDatasetOptions {
  int videos_per_class = 20;
  int frames = 16;
  int width = 64;
  int height = 48;
  std::uint64_t seed = 0;
};

// Writes raw RGB24 videos with sidecars and a manifest; dark videos are
// "adl", blob videos "fall". Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticDatasetOptions& opts);

}  // namespace falldet::test
