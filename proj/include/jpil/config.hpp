#pragma once

#include "jpil/pipeline.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace jpil {

struct ServiceConfig {
  std::filesystem::path reference_path;
  std::filesystem::path cache_dir;  // empty: no reference cache
  JpilConfig jpil;
  std::string host = "127.0.0.1";
  int port = 8080;
  int threads = 8;  // HTTP worker threads

  // Throws Error(Validation).
  void validate() const;
};

// TOML-style key = value file. Sections are allowed and only group keys; every
// key name is unique across sections. Values are numbers, booleans or double
// quoted strings. Relative paths resolve against base_dir. Unknown keys and
// malformed lines throw Error(Parse) naming the line.
ServiceConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ServiceConfig load_config(const std::filesystem::path& path);

// Every key with its current value, in the same syntax parse_config reads.
std::string format_config(const ServiceConfig& cfg);

}  // namespace jpil
