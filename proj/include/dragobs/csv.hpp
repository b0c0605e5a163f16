#pragma once

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace dragobs {

// Shortest round-trip formatting via std::to_chars keeps CSV output
// byte-deterministic.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    out_ << header << '\n';
  }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_double(v);
      first = false;
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace dragobs
