#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace vegspot::io {

using json = nlohmann::json;

// 17 significant digits, enough to round-trip any double.
std::string fmt17(double x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(const std::string& s);
  void end_row();

 private:
  std::ofstream out_;
  bool row_started_ = false;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  // Column by header name; throws if absent.
  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

// FNV-1a 64-bit digest of the file bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

// Writes manifest.json into dir, replacing any earlier manifest there.
void write_manifest(const std::filesystem::path& dir, const std::string& subcommand,
                    const json& parameters, const json& tolerances,
                    const std::vector<std::filesystem::path>& inputs, double wall_seconds);

// Raw little-endian float64 dump, row-major.
void write_f64(const std::filesystem::path& path, const std::vector<double>& data);
std::vector<double> read_f64(const std::filesystem::path& path);

}  // namespace vegspot::io
