#include "falldet/feature_io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "falldet/error.hpp"
#include "text_util.hpp"

namespace falldet {

namespace {

std::size_t parse_header(std::string_view header, const std::filesystem::path& path) {
  const auto cols = detail::split_csv(header);
  if (cols.size() < 4 || cols[0] != "video_id" || cols[1] != "chunk_index" || cols[2] != "label") {
    throw Error(ErrorCode::kFormat, path.string() + ": expected header video_id,chunk_index,label,f0,...");
  }
  for (std::size_t i = 3; i < cols.size(); ++i) {
    if (cols[i] != "f" + std::to_string(i - 3)) {
      throw Error(ErrorCode::kFormat, path.string() + ": unexpected feature column '" + std::string(cols[i]) + "'");
    }
  }
  return cols.size() - 3;
}

}  // namespace

void write_feature_header(std::ostream& out, std::size_t width) {
  out << "video_id,chunk_index,label";
  for (std::size_t i = 0; i < width; ++i) out << ",f" << i;
  out << '\n';
}

void write_feature_row(std::ostream& out, const FeatureRow& row) {
  out << row.video_id << ',' << row.chunk_index << ',' << ingest::to_string(row.label);
  char buf[32];
  for (float v : row.values) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out << ',';
    out.write(buf, end - buf);
  }
  out << '\n';
}

std::vector<FeatureRow> read_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open features file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyInput, path.string() + " is empty");
  const std::size_t width = parse_header(line, path);

  std::vector<FeatureRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split_csv(line);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (cols.size() != width + 3) {
      throw Error(ErrorCode::kFormat, where + ": expected " + std::to_string(width + 3) + " columns, got " +
                                          std::to_string(cols.size()));
    }
    FeatureRow row;
    row.video_id = std::string(cols[0]);
    row.chunk_index = detail::parse_number<std::int64_t>(cols[1], "chunk_index");
    row.label = ingest::parse_label(cols[2]);
    row.values.resize(width);
    for (std::size_t i = 0; i < width; ++i) row.values[i] = detail::parse_number<float>(cols[i + 3], "feature");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, path.string() + " has no feature rows");
  return rows;
}

FeatureFileScan scan_feature_file(const std::filesystem::path& path) {
  FeatureFileScan scan;
  std::ifstream in(path, std::ios::binary);
  if (!in) return scan;
  std::string line;
  if (!std::getline(in, line) || in.eof()) return scan;
  scan.width = parse_header(line, path);
  scan.complete_bytes = line.size() + 1;
  while (std::getline(in, line)) {
    if (in.eof()) break;
    scan.complete_bytes += line.size() + 1;
    const auto comma = line.find(',');
    if (comma != std::string::npos) scan.video_ids.insert(line.substr(0, comma));
  }
  return scan;
}

}  // namespace falldet
