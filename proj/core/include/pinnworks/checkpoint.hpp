#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pinnworks/net.hpp"

namespace pinnworks {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trained ensemble plus where it came from.
struct Checkpoint {
  static constexpr int current_version = 1;

  int format_version = current_version;
  NetworkMode mode = NetworkMode::symbolic;
  std::vector<std::string> variables;
  std::vector<std::vector<std::size_t>> dims;  // per sub-network
  std::vector<double> theta;
  std::string config_digest;
  double final_loss = 0.0;
  int iterations = 0;

  NetworkLayout layout() const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Sections [meta], [dims], [theta]; theta is one value per line.
std::string to_text(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pinnworks
