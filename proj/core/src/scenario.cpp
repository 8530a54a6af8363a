#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ippo/errors.hpp"
#include "ippo/world.hpp"

namespace ippo {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<double> parse_numbers(std::string_view rest, std::size_t line,
                                  std::string_view key, std::size_t expected) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < rest.size()) {
    while (pos < rest.size() && (rest[pos] == ' ' || rest[pos] == '\t')) ++pos;
    if (pos >= rest.size()) break;
    std::size_t end = pos;
    while (end < rest.size() && rest[end] != ' ' && rest[end] != '\t') ++end;
    const std::string_view token = rest.substr(pos, end - pos);
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() ||
        !std::isfinite(value)) {
      throw ParseError(line, "invalid number '" + std::string(token) +
                                 "' in '" + std::string(key) + "'");
    }
    out.push_back(value);
    pos = end;
  }
  if (out.size() != expected) {
    throw ParseError(line, "'" + std::string(key) + "' expects " +
                               std::to_string(expected) + " values, got " +
                               std::to_string(out.size()));
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ScenarioSpec load_scenario(std::string_view text) {
  ScenarioSpec spec;
  bool have_start = false;
  bool have_target = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(line_no, "expected 'key: values'");
    }
    const std::string_view key = trim(line.substr(0, colon));
    const std::string_view rest = line.substr(colon + 1);

    if (key == "start") {
      const auto v = parse_numbers(rest, line_no, key, 3);
      spec.start = {v[0], v[1]};
      spec.start_yaw = v[2];
      have_start = true;
    } else if (key == "target") {
      const auto v = parse_numbers(rest, line_no, key, 2);
      spec.target = {v[0], v[1]};
      have_target = true;
    } else if (key == "capture_radius") {
      spec.capture_radius = parse_numbers(rest, line_no, key, 1)[0];
    } else if (key == "d_max") {
      spec.d_max = parse_numbers(rest, line_no, key, 1)[0];
    } else if (key == "max_steps") {
      const double v = parse_numbers(rest, line_no, key, 1)[0];
      if (v != std::floor(v) || v < 1 || v > 1e6) {
        throw ParseError(line_no, "max_steps must be a positive integer");
      }
      spec.max_steps = static_cast<int>(v);
    } else if (key == "bounds") {
      const auto v = parse_numbers(rest, line_no, key, 4);
      spec.field.bounds = {{v[0], v[1]}, {v[2], v[3]}};
    } else if (key == "circle") {
      const auto v = parse_numbers(rest, line_no, key, 3);
      spec.field.circles.push_back({{v[0], v[1]}, v[2]});
    } else if (key == "box") {
      const auto v = parse_numbers(rest, line_no, key, 4);
      spec.field.boxes.push_back({{v[0], v[1]}, {v[2], v[3]}});
    } else {
      throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
    }
  }

  if (!have_start) throw ParseError(line_no, "missing 'start'");
  if (!have_target) throw ParseError(line_no, "missing 'target'");
  validate_scenario(spec);
  return spec;
}

ScenarioSpec load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

std::string serialize_scenario(const ScenarioSpec& spec) {
  std::string out;
  const auto& b = spec.field.bounds;
  out += "start: " + fmt(spec.start.x) + " " + fmt(spec.start.y) + " " +
         fmt(spec.start_yaw) + "\n";
  out += "target: " + fmt(spec.target.x) + " " + fmt(spec.target.y) + "\n";
  out += "capture_radius: " + fmt(spec.capture_radius) + "\n";
  out += "d_max: " + fmt(spec.d_max) + "\n";
  out += "max_steps: " + std::to_string(spec.max_steps) + "\n";
  out += "bounds: " + fmt(b.min.x) + " " + fmt(b.min.y) + " " + fmt(b.max.x) +
         " " + fmt(b.max.y) + "\n";
  for (const auto& c : spec.field.circles) {
    out += "circle: " + fmt(c.center.x) + " " + fmt(c.center.y) + " " +
           fmt(c.radius) + "\n";
  }
  for (const auto& box : spec.field.boxes) {
    out += "box: " + fmt(box.min.x) + " " + fmt(box.min.y) + " " +
           fmt(box.max.x) + " " + fmt(box.max.y) + "\n";
  }
  return out;
}

void validate_scenario(const ScenarioSpec& spec) {
  const auto& field = spec.field;
  if (field.bounds.area() <= 0.0 || field.bounds.max.x <= field.bounds.min.x) {
    throw ValidationError("bounds must have positive area");
  }
  for (std::size_t i = 0; i < field.circles.size(); ++i) {
    const auto& c = field.circles[i];
    const std::string id = "circle " + std::to_string(i);
    if (!(c.radius > 0.0)) throw ValidationError(id + ": radius must be > 0");
    const Box extent{{c.center.x - c.radius, c.center.y - c.radius},
                     {c.center.x + c.radius, c.center.y + c.radius}};
    if (!field.bounds.contains(extent)) {
      throw ValidationError(id + ": outside world bounds");
    }
  }
  for (std::size_t i = 0; i < field.boxes.size(); ++i) {
    const auto& b = field.boxes[i];
    const std::string id = "box " + std::to_string(i);
    if (!(b.max.x > b.min.x && b.max.y > b.min.y)) {
      throw ValidationError(id + ": must have positive area");
    }
    if (!field.bounds.contains(b)) {
      throw ValidationError(id + ": outside world bounds");
    }
  }
  if (!(spec.capture_radius > 0.0)) {
    throw ValidationError("capture_radius must be > 0");
  }
  if (!(spec.d_max > 0.0)) throw ValidationError("d_max must be > 0");
  if (spec.max_steps < 1) throw ValidationError("max_steps must be >= 1");
  if (!std::isfinite(spec.start_yaw)) {
    throw ValidationError("start yaw must be finite");
  }
  if (field.collides(spec.start)) throw ValidationError("start in collision");
  if (field.collides(spec.target)) {
    throw ValidationError("target in collision");
  }
  if (!field.bounds.contains(spec.start)) {
    throw ValidationError("start outside world bounds");
  }
  if (!field.bounds.contains(spec.target)) {
    throw ValidationError("target outside world bounds");
  }
  if (distance(spec.start, spec.target) > spec.d_max) {
    throw ValidationError("start-target distance exceeds d_max");
  }
}

}  // namespace ippo
