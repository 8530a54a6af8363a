#include "ippo/report.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ippo/errors.hpp"

namespace ippo {

std::string format_number(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string training_csv(const std::vector<EpisodeRow>& rows) {
  std::ostringstream os;
  os << kTrainingCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.episode << ',' << r.steps << ',' << format_number(r.ret) << ','
       << (r.success ? 1 : 0) << ',' << format_number(r.smoothness) << ','
       << format_number(r.loss.clip) << ',' << format_number(r.loss.value)
       << ',' << format_number(r.loss.entropy) << ','
       << format_number(r.loss.objective) << ','
       << format_number(r.loss.entropy_coeff) << ','
       << format_number(r.loss.success_ratio) << ','
       << format_number(r.loss.grad_norm) << '\n';
  }
  return os.str();
}

std::string eval_csv(const std::vector<EvalEpisode>& episodes) {
  std::ostringstream os;
  os << kEvalCsvHeader << '\n';
  for (const auto& e : episodes) {
    os << e.episode << ',' << e.steps << ',' << format_number(e.ret) << ','
       << (e.success ? 1 : 0) << ',' << format_number(e.smoothness) << '\n';
  }
  return os.str();
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows) {
  std::ostringstream os;
  os << kTrajectoryCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.step << ',' << r.substep << ',' << format_number(r.x) << ','
       << format_number(r.y) << ',' << format_number(r.yaw) << ',' << r.action
       << ',' << format_number(r.reward.target) << ','
       << format_number(r.reward.collision) << ','
       << format_number(r.reward.distance) << ','
       << format_number(r.reward.track) << ','
       << format_number(r.reward.total) << '\n';
  }
  return os.str();
}

namespace {

struct Viewport {
  double xmin, ymin, xmax, ymax;
  double scale;
  double margin = 20.0;

  double px(double x) const { return margin + (x - xmin) * scale; }
  // SVG y grows downward.
  double py(double y) const { return margin + (ymax - y) * scale; }
};

Viewport fit(const ScenarioSpec& s,
             const std::vector<std::vector<TrajectoryRow>>& paths) {
  double xmin = std::min(s.start.x, s.target.x);
  double xmax = std::max(s.start.x, s.target.x);
  double ymin = std::min(s.start.y, s.target.y);
  double ymax = std::max(s.start.y, s.target.y);
  auto grow = [&](double x0, double y0, double x1, double y1) {
    xmin = std::min(xmin, x0);
    ymin = std::min(ymin, y0);
    xmax = std::max(xmax, x1);
    ymax = std::max(ymax, y1);
  };
  for (const auto& c : s.field.circles) {
    grow(c.center.x - c.radius, c.center.y - c.radius, c.center.x + c.radius,
         c.center.y + c.radius);
  }
  for (const auto& b : s.field.boxes) grow(b.min.x, b.min.y, b.max.x, b.max.y);
  for (const auto& p : paths) {
    for (const auto& r : p) grow(r.x, r.y, r.x, r.y);
  }
  const double pad = 0.05 * std::max({xmax - xmin, ymax - ymin, 1.0});
  Viewport v{xmin - pad, ymin - pad, xmax + pad, ymax + pad, 1.0};
  v.scale = 760.0 / std::max(v.xmax - v.xmin, v.ymax - v.ymin);
  return v;
}

}  // namespace

std::string trajectory_svg(
    const ScenarioSpec& scenario,
    const std::vector<std::vector<TrajectoryRow>>& paths) {
  const Viewport v = fit(scenario, paths);
  const double width = 2 * v.margin + (v.xmax - v.xmin) * v.scale;
  const double height = 2 * v.margin + (v.ymax - v.ymin) * v.scale;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
     << format_number(width) << "\" height=\"" << format_number(height)
     << "\">\n";
  for (const auto& c : scenario.field.circles) {
    os << "<circle cx=\"" << format_number(v.px(c.center.x)) << "\" cy=\""
       << format_number(v.py(c.center.y)) << "\" r=\""
       << format_number(c.radius * v.scale)
       << "\" fill=\"#888\" stroke=\"#444\"/>\n";
  }
  for (const auto& b : scenario.field.boxes) {
    os << "<rect x=\"" << format_number(v.px(b.min.x)) << "\" y=\""
       << format_number(v.py(b.max.y)) << "\" width=\""
       << format_number((b.max.x - b.min.x) * v.scale) << "\" height=\""
       << format_number((b.max.y - b.min.y) * v.scale)
       << "\" fill=\"#888\" stroke=\"#444\"/>\n";
  }
  os << "<line x1=\"" << format_number(v.px(scenario.start.x)) << "\" y1=\""
     << format_number(v.py(scenario.start.y)) << "\" x2=\""
     << format_number(v.px(scenario.target.x)) << "\" y2=\""
     << format_number(v.py(scenario.target.y))
     << "\" stroke=\"#2a7\" stroke-dasharray=\"8,6\"/>\n";
  os << "<circle cx=\"" << format_number(v.px(scenario.target.x))
     << "\" cy=\"" << format_number(v.py(scenario.target.y)) << "\" r=\""
     << format_number(scenario.capture_radius * v.scale)
     << "\" fill=\"none\" stroke=\"#2a7\"/>\n";
  for (const auto& path : paths) {
    os << "<polyline fill=\"none\" stroke=\"#c33\" points=\"";
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i > 0) os << ' ';
      os << format_number(v.px(path[i].x)) << ','
         << format_number(v.py(path[i].y));
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace ippo
