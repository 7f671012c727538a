#include <cstdio>
#include <fstream>

#include "irl/errors.hpp"
#include "irl/training.hpp"

namespace irl {
namespace {

// Fields never contain separators in practice; quote defensively anyway.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<CsvRow> metrics_rows(int stage, const std::string& config, const Metrics& metrics,
                                 double wall_clock_s) {
  std::vector<CsvRow> rows;
  for (const ImageMetrics& m : metrics.images) {
    rows.push_back({stage, config, m.name, m.psnr_db, m.ssim, wall_clock_s});
  }
  rows.push_back({stage, config, "mean", metrics.mean_psnr, metrics.mean_ssim, wall_clock_s});
  return rows;
}

std::string format_metrics_csv(std::span<const CsvRow> rows, bool with_header) {
  std::string out;
  if (with_header) out += "stage,config,image,psnr_db,ssim,wall_clock_s\n";
  char nums[128];
  for (const CsvRow& r : rows) {
    std::snprintf(nums, sizeof(nums), ",%.6f,%.6f,%.3f\n", r.psnr_db, r.ssim, r.wall_clock_s);
    out += std::to_string(r.stage) + "," + csv_field(r.config) + "," + csv_field(r.image) + nums;
  }
  return out;
}

void append_metrics_csv(const std::filesystem::path& path, std::span<const CsvRow> rows) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot write metrics CSV '" + path.string() + "'");
  out << format_metrics_csv(rows, fresh);
  if (!out) throw DataError("write failed for metrics CSV '" + path.string() + "'");
}

}  // namespace irl
