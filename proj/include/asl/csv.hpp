#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace asl {

/// Decimal text with 17 significant digits; parses back to the same double.
std::string format_real(double value);

/// Comma-separated writer; the header is written on construction.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& operator<<(const std::string& cell);
  CsvWriter& operator<<(double value);
  CsvWriter& operator<<(long long value);
  CsvWriter& operator<<(int value) { return *this << static_cast<long long>(value); }
  CsvWriter& operator<<(std::size_t value) { return *this << static_cast<long long>(value); }
  void end_row();

 private:
  void separator();

  std::ofstream out_;
  bool row_started_ = false;
};

/// Splits a CSV file into rows of cells (no quoting support).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

}  // namespace asl
