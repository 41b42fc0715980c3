// CSV tables and run manifests.  Numbers print with 17 significant digits
// so a reader recovers the exact double; output never consults the locale,
// which keeps repeated runs byte-identical.
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ptrac/core.hpp"

namespace ptrac {

inline constexpr const char* kToolVersion = "0.1.0";

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header)
      : cols_(header.size()) {
    if (header.empty()) throw ValidationError("csv needs at least one column");
    append(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_)
      throw ValidationError("csv row has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(cols_));
    append(cells);
  }

  void row(const std::vector<double>& vals) {
    std::vector<std::string> cells;
    cells.reserve(vals.size());
    for (double v : vals) cells.push_back(fmt17(v));
    row(cells);
  }

  const std::string& text() const { return out_; }

  void save(const std::string& path) const { write_file(path, out_); }

  static void write_file(const std::string& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open output file: " + path);
    f << data;
    if (!f) throw ValidationError("failed writing output file: " + path);
  }

 private:
  // Cells containing the delimiter or quotes are quoted per the usual CSV
  // convention; line breaks never occur in our data and stay rejected.
  void append(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      if (c.find_first_of("\r\n") != std::string::npos)
        throw ValidationError("csv cell may not contain line breaks");
      if (i) out_ += ',';
      if (c.find_first_of(",\"") != std::string::npos) {
        out_ += '"';
        for (char ch : c) {
          if (ch == '"') out_ += '"';
          out_ += ch;
        }
        out_ += '"';
      } else {
        out_ += c;
      }
    }
    out_ += '\n';
  }

  std::size_t cols_;
  std::string out_;
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Everything that determined a run: the command, a hash of the config text
// and arguments, the tolerances, and where the outputs went.  Two runs with
// identical manifests produce byte-identical output files.
struct RunManifest {
  std::string command;
  std::string tool_version = kToolVersion;
  std::uint64_t config_hash = 0;
  double step = 1e-3;
  double band = 1e-9;
  double tol = 1e-6;
  std::uint64_t seed = 42;
  std::vector<std::string> outputs;

  std::string to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    j["config_hash"] = config_hash;
    j["tolerances"] = {{"step", step}, {"band", band}, {"tol", tol}};
    j["seed"] = seed;
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
  }

  void save(const std::string& path) const {
    CsvWriter::write_file(path, to_json());
  }
};

}  // namespace ptrac
