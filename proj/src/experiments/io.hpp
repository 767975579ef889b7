#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbm/grid/grid.hpp"

namespace qbm::experiments {

/// Shortest text for a double with 17 significant digits, locale-free.
std::string fmt(double v);

struct Provenance {
  std::string config_hash;
  std::string version;
  std::string scenario;
};

/// CSV with '#'-prefixed provenance lines ahead of the header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const Provenance& prov, const std::vector<std::string>& columns);

  void row(const std::vector<double>& values);
  /// Row of preformatted cells.
  void row_text(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

/// Writes `doc` with provenance fields merged in, indented, '\n' endings.
void write_json(const std::filesystem::path& path, nlohmann::json doc, const Provenance& prov);

struct SnapshotMeta {
  double t = 0.0;
  double hbar = 1.0;
  double mass = 1.0;
  double gamma = 0.0;
  double kT = 0.0;
  double eta = 0.0;
};

/// Raw little-endian float64 (re, im) pairs row-major over (u, s) plus a
/// JSON sidecar <stem>.json. Returns both paths.
std::vector<std::filesystem::path> write_snapshot(const std::filesystem::path& bin, const GridOperator& k,
                                                  const SnapshotMeta& meta, const Provenance& prov);

/// gnuplot script plotting columns of a CSV written by CsvWriter.
void write_gnuplot(const std::filesystem::path& path, const std::string& csv_name, const std::string& x,
                   const std::vector<std::string>& ys, const std::vector<std::string>& columns, bool logscale,
                   const Provenance& prov);

}  // namespace qbm::experiments
