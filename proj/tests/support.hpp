#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "ucode/error.hpp"

namespace testing {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ucode::Error(ucode::ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture(const std::string& name) { return read_text(std::string(UCODE_FIXTURE_DIR) + "/" + name); }

}  // namespace testing
