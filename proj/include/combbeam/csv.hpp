#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <type_traits>
#include <utility>
#include <vector>

namespace combbeam {

/// Filesystem failure while emitting results.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc{}) throw std::logic_error("format_number: buffer too small");
  return {buf, res.ptr};
}

inline std::string format_number(std::int64_t x) { return std::to_string(x); }

/// Comma-separated table built row by row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : columns_(header.size()) { append(header); }

  template <typename... Ts>
  void row(const Ts&... fields) {
    if (sizeof...(Ts) != columns_) throw std::logic_error("CsvTable: wrong number of fields");
    std::vector<std::string> cells;
    cells.reserve(sizeof...(Ts));
    (cells.push_back(cell(fields)), ...);
    append(cells);
  }

  [[nodiscard]] const std::string& text() const { return text_; }

 private:
  template <typename T>
  static std::string cell(const T& v) {
    if constexpr (std::is_integral_v<T>)
      return format_number(static_cast<std::int64_t>(v));
    else
      return format_number(static_cast<double>(v));
  }

  void append(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::size_t columns_;
  std::string text_;
};

/// A set of files committed together: each is written to a temporary name
/// and renamed into place only after every write succeeded.
class OutputSet {
 public:
  void add(std::string name, std::string contents) { files_.emplace_back(std::move(name), std::move(contents)); }

  [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

  void commit(const std::filesystem::path& dir) const {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());

    std::vector<fs::path> temps;
    const auto cleanup = [&] {
      for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [name, contents] : files_) {
      const fs::path tmp = dir / ("." + name + ".tmp");
      temps.push_back(tmp);
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
      os.close();
      if (!os) {
        cleanup();
        throw IoError("failed to write " + tmp.string());
      }
    }
    for (std::size_t i = 0; i < files_.size(); ++i) {
      fs::rename(temps[i], dir / files_[i].first, ec);
      if (ec) {
        cleanup();
        throw IoError("failed to move " + files_[i].first + " into place: " + ec.message());
      }
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace combbeam
