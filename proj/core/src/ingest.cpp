#include "falldet/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "falldet/error.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace falldet::ingest {

namespace fs = std::filesystem;

std::string_view to_string(Label label) { return label == Label::kFall ? "fall" : "adl"; }

Label parse_label(std::string_view text) {
  if (text == "fall") return Label::kFall;
  if (text == "adl") return Label::kAdl;
  throw Error(ErrorCode::kFormat, "unknown label '" + std::string(text) + "' (expected fall or adl)");
}

std::string_view to_string(SourceFormat format) {
  return format == SourceFormat::kPpmDir ? "ppm_dir" : "raw_rgb24";
}

SourceFormat parse_source_format(std::string_view text) {
  if (text == "ppm_dir") return SourceFormat::kPpmDir;
  if (text == "raw_rgb24") return SourceFormat::kRawRgb24;
  throw Error(ErrorCode::kFormat, "unknown format '" + std::string(text) + "' (expected ppm_dir or raw_rgb24)");
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(std::istream& in, const fs::path& path) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw Error(ErrorCode::kFormat, path.string() + ": truncated PPM header");
  return tok;
}

int ppm_int(std::istream& in, const fs::path& path, const char* what) {
  const auto tok = ppm_token(in, path);
  try {
    return detail::parse_number<int>(tok, what);
  } catch (const Error&) {
    throw Error(ErrorCode::kFormat, path.string() + ": bad PPM " + what + " '" + tok + "'");
  }
}

}  // namespace

Frame read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  if (ppm_token(in, path) != "P6") throw Error(ErrorCode::kFormat, path.string() + ": not a binary PPM (P6)");
  Frame f;
  f.width = ppm_int(in, path, "width");
  f.height = ppm_int(in, path, "height");
  const int maxval = ppm_int(in, path, "maxval");
  if (f.width < 1 || f.height < 1) throw Error(ErrorCode::kFormat, path.string() + ": empty PPM image");
  if (maxval != 255) throw Error(ErrorCode::kFormat, path.string() + ": maxval must be 255");
  // ppm_token consumed exactly one whitespace byte after maxval.
  f.rgb.resize(static_cast<std::size_t>(f.width) * f.height * 3);
  in.read(reinterpret_cast<char*>(f.rgb.data()), static_cast<std::streamsize>(f.rgb.size()));
  if (static_cast<std::size_t>(in.gcount()) != f.rgb.size()) {
    throw Error(ErrorCode::kFormat, path.string() + ": PPM pixel data is truncated");
  }
  return f;
}

void write_ppm(const Frame& frame, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "P6\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.rgb.data()), static_cast<std::streamsize>(frame.rgb.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

FrameSequence read_ppm_dir(const fs::path& dir, double fps) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, dir.string() + " is not a directory");
  if (!(fps > 0.0)) throw Error(ErrorCode::kFormat, "fps must be positive");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorCode::kEmptyInput, dir.string() + " contains no .ppm frames");
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  FrameSequence seq;
  seq.fps = fps;
  seq.frames.reserve(files.size());
  for (const auto& file : files) {
    Frame f = read_ppm(file);
    if (seq.frames.empty()) {
      seq.width = f.width;
      seq.height = f.height;
    } else if (f.width != seq.width || f.height != seq.height) {
      throw Error(ErrorCode::kInconsistent, file.string() + " is " + std::to_string(f.width) + "x" +
                                                std::to_string(f.height) + ", earlier frames are " +
                                                std::to_string(seq.width) + "x" + std::to_string(seq.height));
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

fs::path sidecar_path(const fs::path& raw) {
  fs::path p = raw;
  p += ".json";
  return p;
}

RawDescriptor read_sidecar(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open sidecar " + path.string());
  RawDescriptor d;
  try {
    const auto j = nlohmann::json::parse(in);
    d.width = j.at("width").get<int>();
    d.height = j.at("height").get<int>();
    d.fps = j.at("fps").get<double>();
    d.frames = j.at("frames").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  if (d.width < 1 || d.height < 1 || !(d.fps > 0.0) || d.frames < 0) {
    throw Error(ErrorCode::kFormat, path.string() + ": invalid descriptor values");
  }
  return d;
}

void write_sidecar(const RawDescriptor& desc, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << nlohmann::json{{"width", desc.width}, {"height", desc.height}, {"fps", desc.fps}, {"frames", desc.frames}}
             .dump()
      << '\n';
}

FrameSequence read_raw_rgb24(const fs::path& raw) {
  const auto desc = read_sidecar(sidecar_path(raw));
  std::error_code ec;
  const auto bytes = fs::file_size(raw, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot stat " + raw.string());
  const std::size_t plane = static_cast<std::size_t>(desc.width) * desc.height;
  const std::size_t frame_bytes = plane * 3;
  if (bytes != frame_bytes * static_cast<std::size_t>(desc.frames)) {
    throw Error(ErrorCode::kFormat, raw.string() + " holds " + std::to_string(bytes) + " bytes, sidecar implies " +
                                        std::to_string(frame_bytes * desc.frames));
  }
  if (desc.frames == 0) throw Error(ErrorCode::kEmptyInput, raw.string() + " has no frames");

  std::ifstream in(raw, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + raw.string());
  FrameSequence seq;
  seq.width = desc.width;
  seq.height = desc.height;
  seq.fps = desc.fps;
  seq.frames.reserve(static_cast<std::size_t>(desc.frames));
  std::vector<std::uint8_t> planar(frame_bytes);
  for (std::int64_t i = 0; i < desc.frames; ++i) {
    in.read(reinterpret_cast<char*>(planar.data()), static_cast<std::streamsize>(frame_bytes));
    if (static_cast<std::size_t>(in.gcount()) != frame_bytes) {
      throw Error(ErrorCode::kFormat, raw.string() + " ended early");
    }
    Frame f{desc.width, desc.height, std::vector<std::uint8_t>(frame_bytes)};
    for (std::size_t p = 0; p < plane; ++p) {
      f.rgb[p * 3 + 0] = planar[p];
      f.rgb[p * 3 + 1] = planar[plane + p];
      f.rgb[p * 3 + 2] = planar[2 * plane + p];
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

void write_raw_rgb24(const FrameSequence& seq, const fs::path& raw) {
  std::ofstream out(raw, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + raw.string());
  const std::size_t plane = static_cast<std::size_t>(seq.width) * seq.height;
  std::vector<std::uint8_t> planar(plane * 3);
  for (const auto& f : seq.frames) {
    if (f.width != seq.width || f.height != seq.height) {
      throw Error(ErrorCode::kInconsistent, "frame size differs from sequence size");
    }
    for (std::size_t p = 0; p < plane; ++p) {
      planar[p] = f.rgb[p * 3 + 0];
      planar[plane + p] = f.rgb[p * 3 + 1];
      planar[2 * plane + p] = f.rgb[p * 3 + 2];
    }
    out.write(reinterpret_cast<const char*>(planar.data()), static_cast<std::streamsize>(planar.size()));
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + raw.string());
  write_sidecar({seq.width, seq.height, seq.fps, static_cast<std::int64_t>(seq.frames.size())}, sidecar_path(raw));
}

FrameSequence read_frames(const fs::path& source, SourceFormat format, double fps) {
  return format == SourceFormat::kPpmDir ? read_ppm_dir(source, fps) : read_raw_rgb24(source);
}

namespace {

struct Tap {
  int lo, hi;
  float frac;
};

std::vector<Tap> bilinear_taps(int in, int out) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(src));
    taps[static_cast<std::size_t>(i)] = {lo, std::min(lo + 1, in - 1), static_cast<float>(src - lo)};
  }
  return taps;
}

}  // namespace

FloatFrame resize_bilinear(const Frame& frame, int target_width, int target_height) {
  FloatFrame out{target_width, target_height,
                 std::vector<float>(static_cast<std::size_t>(target_width) * target_height * 3)};
  const auto xs = bilinear_taps(frame.width, target_width);
  const auto ys = bilinear_taps(frame.height, target_height);
  for (int y = 0; y < target_height; ++y) {
    const auto& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < target_width; ++x) {
      const auto& tx = xs[static_cast<std::size_t>(x)];
      for (int c = 0; c < 3; ++c) {
        const float p00 = frame.at(tx.lo, ty.lo, c), p01 = frame.at(tx.hi, ty.lo, c);
        const float p10 = frame.at(tx.lo, ty.hi, c), p11 = frame.at(tx.hi, ty.hi, c);
        const float top = p00 + tx.frac * (p01 - p00);
        const float bottom = p10 + tx.frac * (p11 - p10);
        out.rgb[(static_cast<std::size_t>(y) * target_width + x) * 3 + c] = top + ty.frac * (bottom - top);
      }
    }
  }
  return out;
}

std::vector<std::span<const Frame>> chunk_frames(const FrameSequence& seq, std::int64_t chunk_len,
                                                 std::int64_t stride) {
  if (chunk_len < 1 || stride < 1) throw Error(ErrorCode::kInvalidShape, "chunk length and stride must be >= 1");
  std::vector<std::span<const Frame>> groups;
  const auto total = static_cast<std::int64_t>(seq.frames.size());
  for (std::int64_t start = 0; start + chunk_len <= total; start += stride) {
    groups.emplace_back(seq.frames.data() + start, static_cast<std::size_t>(chunk_len));
  }
  return groups;
}

Tensor preprocess(std::span<const Frame> group, const PreprocessConfig& cfg) {
  constexpr std::int64_t kFrames = 16;
  if (static_cast<std::int64_t>(group.size()) != kFrames) {
    throw Error(ErrorCode::kShape, "a chunk needs exactly 16 frames, got " + std::to_string(group.size()));
  }
  for (float m : cfg.mean) {
    if (!(m >= 0.0f && m <= 255.0f)) throw Error(ErrorCode::kFormat, "channel means must lie in [0,255]");
  }
  const std::int64_t size = cfg.size;
  Tensor t(Shape{3, kFrames, size, size}, 0.0f);
  auto data = t.data();
  const std::size_t plane = static_cast<std::size_t>(size * size);
  for (std::int64_t f = 0; f < kFrames; ++f) {
    const auto resized = resize_bilinear(group[static_cast<std::size_t>(f)], cfg.size, cfg.size);
    for (std::size_t p = 0; p < plane; ++p) {
      for (std::size_t c = 0; c < 3; ++c) {
        data[(c * kFrames + static_cast<std::size_t>(f)) * plane + p] = resized.rgb[p * 3 + c] - cfg.mean[c];
      }
    }
  }
  return t;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "video_id,path,format,label,fps,subject") {
    throw Error(ErrorCode::kFormat, path.string() + ": expected header video_id,path,format,label,fps,subject");
  }
  const fs::path base = path.parent_path();
  std::vector<ManifestEntry> entries;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split_csv(line);
    if (cols.size() != 6) {
      throw Error(ErrorCode::kFormat, path.string() + ":" + std::to_string(line_no) + ": expected 6 columns");
    }
    ManifestEntry e;
    e.video_id = std::string(cols[0]);
    fs::path p{std::string(cols[1])};
    e.path = p.is_absolute() ? p : base / p;
    e.format = parse_source_format(cols[2]);
    e.label = parse_label(cols[3]);
    e.fps = detail::parse_number<double>(cols[4], "fps");
    if (!(e.fps > 0.0)) throw Error(ErrorCode::kFormat, path.string() + ": fps must be positive");
    e.subject = std::string(cols[5]);
    if (e.video_id.empty()) throw Error(ErrorCode::kFormat, path.string() + ": empty video_id");
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "video_id,path,format,label,fps,subject\n";
  for (const auto& e : entries) {
    out << e.video_id << ',' << e.path.string() << ',' << to_string(e.format) << ',' << to_string(e.label) << ','
        << e.fps << ',' << e.subject << '\n';
  }
}

std::int64_t count_frames(const ManifestEntry& entry) {
  if (entry.format == SourceFormat::kRawRgb24) return read_sidecar(sidecar_path(entry.path)).frames;
  if (!fs::is_directory(entry.path)) throw Error(ErrorCode::kIo, entry.path.string() + " is not a directory");
  std::int64_t n = 0;
  for (const auto& f : fs::directory_iterator(entry.path)) {
    n += f.is_regular_file() && f.path().extension() == ".ppm";
  }
  return n;
}

}  // namespace falldet::ingest
