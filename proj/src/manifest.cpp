#include "mrshe/manifest.hpp"

#include <filesystem>

#include "mrshe/csv.hpp"

namespace mrshe {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

RunManifest::RunManifest(nlohmann::json config_echo, std::string version)
    : config_echo_(std::move(config_echo)), version_(std::move(version)) {}

void RunManifest::write_output(const std::string& output_dir,
                               const std::string& name,
                               const std::string& content) {
  std::filesystem::create_directories(output_dir);
  const std::string path =
      (std::filesystem::path(output_dir) / name).string();
  write_text_file(path, content);
  outputs_.push_back({name, content.size(), fnv1a64_hex(content)});
}

void RunManifest::add_timing(const std::string& stage, double seconds) {
  timings_[stage] = seconds;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json files = nlohmann::json::array();
  for (const Output& out : outputs_) {
    files.push_back({{"path", out.path},
                     {"bytes", out.bytes},
                     {"fnv1a64", out.checksum}});
  }
  return {{"config", config_echo_},
          {"version", version_},
          {"outputs", files},
          {"timings", timings_}};
}

void RunManifest::write(const std::string& output_dir) const {
  std::filesystem::create_directories(output_dir);
  const std::string path =
      (std::filesystem::path(output_dir) / "run_manifest.json").string();
  write_text_file(path, to_json().dump(2) + "\n");
}

}  // namespace mrshe
