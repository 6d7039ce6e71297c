#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "falldet/ingest.hpp"

namespace falldet {

/// One line of the features CSV: `video_id,chunk_index,label,f0..f{N-1}`.
struct FeatureRow {
  std::string video_id;
  std::int64_t chunk_index = 0;
  ingest::Label label = ingest::Label::kAdl;
  std::vector<float> values;
};

void write_feature_header(std::ostream& out, std::size_t width);
/// Floats are written in shortest round-trip form.
void write_feature_row(std::ostream& out, const FeatureRow& row);

/// Throws kFormat on a bad header or ragged rows, kEmptyInput when there
/// are no rows.
std::vector<FeatureRow> read_features(const std::filesystem::path& path);

struct FeatureFileScan {
  std::size_t width = 0;  // 0 when the file is missing or has no header
  std::set<std::string> video_ids;
  std::uintmax_t complete_bytes = 0;  // length up to the last newline
};

/// Inspects a possibly partially written features file so an extraction
/// run can resume. A final line without a newline is treated as torn.
FeatureFileScan scan_feature_file(const std::filesystem::path& path);

}  // namespace falldet
