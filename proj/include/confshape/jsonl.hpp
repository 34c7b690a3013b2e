#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace confshape::jsonl {

inline std::vector<nlohmann::json> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::vector<nlohmann::json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": bad JSON line");
    }
    out.push_back(std::move(j));
  }
  return out;
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) {
      throw std::runtime_error("cannot write " + path.string());
    }
  }

  void write(const nlohmann::json& j) { out_ << j.dump() << '\n'; }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

template <typename Range>
void write_file(const std::filesystem::path& path, const Range& records) {
  Writer w(path);
  for (const auto& r : records) w.write(r);
}

}  // namespace confshape::jsonl
