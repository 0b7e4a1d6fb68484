#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace qldrift::runner {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-oriented CSV text; doubles use the shortest round-trip form so output
/// is byte-stable across platforms with a conforming to_chars.
class CsvBuffer {
 public:
  explicit CsvBuffer(std::string_view header = {});

  CsvBuffer& field(double v);
  CsvBuffer& field(std::uint64_t v);
  CsvBuffer& field(std::string_view v);
  CsvBuffer& end_row();
  CsvBuffer& append(const CsvBuffer& rows);  // rows only, no header

  const std::string& str() const { return text_; }
  std::size_t rows() const { return rows_; }

 private:
  void sep();
  std::string text_;
  std::size_t rows_ = 0;
  bool row_open_ = false;
  std::size_t header_end_ = 0;
};

void ensure_directory(const std::filesystem::path& dir);
void write_text(const std::filesystem::path& path, std::string_view text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
std::string read_text(const std::filesystem::path& path);

}  // namespace qldrift::runner
