#include "io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>

#include "qbm/error.hpp"

namespace qbm::experiments {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  return out;
}

void put_le(std::ofstream& out, double v) {
  unsigned char b[8];
  std::memcpy(b, &v, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
  out.write(reinterpret_cast<const char*>(b), 8);
}

}  // namespace

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const Provenance& prov,
                     const std::vector<std::string>& columns)
    : path_(path), out_(open_out(path)), columns_(columns.size()) {
  out_ << "# config_hash=" << prov.config_hash << '\n';
  out_ << "# code_version=" << prov.version << '\n';
  out_ << "# scenario=" << prov.scenario << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) out_ << (c ? "," : "") << columns[c];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(fmt(v));
  row_text(cells);
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw Error(ErrorKind::misuse, "csv row width mismatch in " + path_.string());
  for (std::size_t c = 0; c < cells.size(); ++c) out_ << (c ? "," : "") << cells[c];
  out_ << '\n';
  if (!out_) throw Error(ErrorKind::io, "write failed: " + path_.string());
}

void write_json(const std::filesystem::path& path, nlohmann::json doc, const Provenance& prov) {
  doc["config_hash"] = prov.config_hash;
  doc["code_version"] = prov.version;
  doc["scenario"] = prov.scenario;
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::vector<std::filesystem::path> write_snapshot(const std::filesystem::path& bin, const GridOperator& k,
                                                  const SnapshotMeta& meta, const Provenance& prov) {
  {
    auto out = open_out(bin);
    for (std::size_t n = 0; n < k.size(); ++n) {
      put_le(out, k.data()[n].real());
      put_le(out, k.data()[n].imag());
    }
    if (!out) throw Error(ErrorKind::io, "write failed: " + bin.string());
  }
  const auto& g = k.spec();
  nlohmann::json side;
  side["n_u"] = g.n_u;
  side["n_s"] = g.n_s;
  side["l_u"] = g.l_u;
  side["l_s"] = g.l_s;
  side["t"] = meta.t;
  side["hbar"] = meta.hbar;
  side["mass"] = meta.mass;
  side["gamma"] = meta.gamma;
  side["kT"] = meta.kT;
  side["eta"] = meta.eta;
  side["layout"] = "float64 little-endian (re, im) pairs, row-major over (u, s)";
  side["data_file"] = bin.filename().string();
  auto json_path = bin;
  json_path.replace_extension(".json");
  write_json(json_path, side, prov);
  return {bin, json_path};
}

void write_gnuplot(const std::filesystem::path& path, const std::string& csv_name, const std::string& x,
                   const std::vector<std::string>& ys, const std::vector<std::string>& columns, bool logscale,
                   const Provenance& prov) {
  auto col = [&](const std::string& name) {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error(ErrorKind::misuse, "gnuplot stub: no column " + name);
    return static_cast<int>(it - columns.begin()) + 1;
  };
  auto out = open_out(path);
  out << "# config_hash=" << prov.config_hash << '\n';
  out << "# code_version=" << prov.version << '\n';
  out << "set datafile separator ','\n";
  out << "set datafile commentschars '#'\n";
  out << "set key autotitle columnhead\n";
  out << "set xlabel '" << x << "'\n";
  if (logscale) out << "set logscale xy\n";
  out << "plot ";
  for (std::size_t i = 0; i < ys.size(); ++i) {
    out << (i ? ", \\\n     " : "") << "'" << csv_name << "' using " << col(x) << ":" << col(ys[i])
        << " with linespoints";
  }
  out << '\n';
  out << "pause mouse close\n";
}

}  // namespace qbm::experiments
