#include "qldrift/runner/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace qldrift::runner {

CsvBuffer::CsvBuffer(std::string_view header) {
  if (!header.empty()) {
    text_.append(header);
    text_.push_back('\n');
  }
  header_end_ = text_.size();
}

void CsvBuffer::sep() {
  if (row_open_) text_.push_back(',');
  row_open_ = true;
}

CsvBuffer& CsvBuffer::field(double v) {
  sep();
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw IoError("cannot format value");
  text_.append(buf, ptr);
  return *this;
}

CsvBuffer& CsvBuffer::field(std::uint64_t v) {
  sep();
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  text_.append(buf, ptr);
  return *this;
}

CsvBuffer& CsvBuffer::field(std::string_view v) {
  sep();
  text_.append(v);
  return *this;
}

CsvBuffer& CsvBuffer::end_row() {
  text_.push_back('\n');
  row_open_ = false;
  ++rows_;
  return *this;
}

CsvBuffer& CsvBuffer::append(const CsvBuffer& other) {
  text_.append(other.text_, other.header_end_, std::string::npos);
  rows_ += other.rows_;
  return *this;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qldrift::runner
