#pragma once

// In-memory CSV tables. Reals use the shortest round-trip form, so equal
// inputs always render to equal bytes.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace aoi::cli {

struct Provenance {
  std::string version;
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
};

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) body_ += ',';
      body_ += header[i];
    }
    body_ += '\n';
  }

  template <class... Ts>
  void row(const Ts&... cells) {
    static_assert(sizeof...(Ts) > 0);
    std::size_t n = 0;
    ((append(cells, n++)), ...);
    body_ += '\n';
    ++rows_;
  }

  std::size_t rows() const { return rows_; }
  std::size_t columns() const { return columns_; }

  std::string render(const Provenance& p) const {
    return "# aoi " + p.version + " command=" + p.command + " config=" + p.config_hash +
           " seed=" + std::to_string(p.seed) + '\n' + body_;
  }

 private:
  template <class T>
  void append(const T& v, std::size_t n) {
    if (n) body_ += ',';
    if constexpr (std::is_same_v<T, bool>) {
      body_ += v ? '1' : '0';
    } else if constexpr (std::is_floating_point_v<T>) {
      char buf[32];
      auto res = std::to_chars(buf, buf + sizeof buf, static_cast<double>(v));
      body_.append(buf, res.ptr);
    } else if constexpr (std::is_integral_v<T>) {
      body_ += std::to_string(v);
    } else {
      body_ += std::string_view(v);
    }
  }

  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string body_;
};

}  // namespace aoi::cli
