#include "pinnworks/checkpoint.hpp"

#include <sstream>

#include "pinnworks/textio.hpp"

namespace pinnworks {

NetworkLayout Checkpoint::layout() const {
  auto result = NetworkLayout::from_dims(mode, dims);
  if (result.state_count() != variables.size()) {
    throw CheckpointError("checkpoint dims cover " + std::to_string(result.state_count()) +
                          " variables but " + std::to_string(variables.size()) + " are named");
  }
  return result;
}

std::string to_text(const Checkpoint& c) {
  std::ostringstream os;
  os << "[meta]\n";
  os << "format_version = " << c.format_version << '\n';
  os << "mode = " << to_string(c.mode) << '\n';
  os << "variables = ";
  for (std::size_t i = 0; i < c.variables.size(); ++i) os << (i ? "," : "") << c.variables[i];
  os << '\n';
  os << "config_digest = " << c.config_digest << '\n';
  os << "final_loss = " << format_double(c.final_loss) << '\n';
  os << "iterations = " << c.iterations << '\n';
  os << "\n[dims]\n";
  for (std::size_t k = 0; k < c.dims.size(); ++k) {
    os << "net" << k << " = ";
    for (std::size_t i = 0; i < c.dims[k].size(); ++i) os << (i ? "," : "") << c.dims[k][i];
    os << '\n';
  }
  os << "\n[theta]\n";
  for (double v : c.theta) os << format_double(v) << '\n';
  return os.str();
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw CheckpointError("checkpoint line " + std::to_string(line) + ": " + message);
}

}  // namespace

Checkpoint parse_checkpoint(std::string_view text) {
  Checkpoint c;
  c.format_version = 0;
  std::string section;
  bool seen_mode = false, seen_vars = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = std::string(line.substr(1, line.size() - 2));
      if (section != "meta" && section != "dims" && section != "theta") {
        fail(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    try {
      if (section == "theta") {
        c.theta.push_back(parse_double(line));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail(line_no, "expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      const std::string_view value = trim(line.substr(eq + 1));
      if (section == "meta") {
        if (key == "format_version") {
          c.format_version = static_cast<int>(parse_integer(value));
        } else if (key == "mode") {
          c.mode = parse_network_mode(value);
          seen_mode = true;
        } else if (key == "variables") {
          c.variables = split(value, ',');
          seen_vars = true;
        } else if (key == "config_digest") {
          c.config_digest = std::string(value);
        } else if (key == "final_loss") {
          c.final_loss = parse_double(value);
        } else if (key == "iterations") {
          c.iterations = static_cast<int>(parse_integer(value));
        } else {
          fail(line_no, "unknown key '" + key + "'");
        }
      } else if (section == "dims") {
        if (key != "net" + std::to_string(c.dims.size())) {
          fail(line_no, "expected net" + std::to_string(c.dims.size()));
        }
        std::vector<std::size_t> dims;
        for (const auto& d : split(value, ',')) {
          const long long v = parse_integer(d);
          if (v <= 0) fail(line_no, "layer widths must be positive");
          dims.push_back(static_cast<std::size_t>(v));
        }
        c.dims.push_back(std::move(dims));
      } else {
        fail(line_no, "entry outside a section");
      }
    } catch (const std::invalid_argument& e) {
      fail(line_no, e.what());
    }
  }
  if (c.format_version != Checkpoint::current_version) {
    throw CheckpointError("unsupported checkpoint format version " + std::to_string(c.format_version));
  }
  if (!seen_mode || !seen_vars) throw CheckpointError("checkpoint [meta] lacks mode or variables");
  if (c.dims.empty()) throw CheckpointError("checkpoint has no [dims]");
  NetworkLayout layout = [&] {
    try {
      return c.layout();
    } catch (const std::invalid_argument& e) {
      throw CheckpointError(std::string("checkpoint dims: ") + e.what());
    }
  }();
  if (c.theta.size() != layout.param_count()) {
    throw CheckpointError("checkpoint theta has " + std::to_string(c.theta.size()) +
                          " values, dims need " + std::to_string(layout.param_count()));
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file(path, to_text(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw CheckpointError(e.what());
  }
  return parse_checkpoint(text);
}

}  // namespace pinnworks
