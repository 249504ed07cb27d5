#include "senticast/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"
#include "senticast/csv.hpp"
#include "senticast/errors.hpp"

namespace senticast::report {

using nlohmann::json;

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::vector<std::string>& args, uint64_t seed,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json j;
  j["command"] = command;
  j["args"] = args;
  j["seed"] = seed;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["version"] = "0.1.0";
  auto now = std::chrono::system_clock::now();
  j["created_utc"] = to_string(Timestamp{std::chrono::duration_cast<std::chrono::seconds>(
                                             now.time_since_epoch())
                                             .count()});
  csv::write_text_file(dir / "manifest.json", j.dump(2) + "\n");
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fmt2(double v) { return csv::format_fixed(v, 2); }

}  // namespace

std::string svg_line_chart(const std::string& title, std::span<const Date> dates,
                           std::span<const double> actual, std::span<const double> predicted) {
  if (dates.empty() || dates.size() != actual.size() || dates.size() != predicted.size())
    throw ValidationError("svg_line_chart: series must be non-empty and equal length");

  constexpr double W = 900, H = 420;
  constexpr double left = 70, right = 20, top = 40, bottom = 40;
  const double plot_w = W - left - right, plot_h = H - top - bottom;

  double lo = actual[0], hi = actual[0];
  for (double v : actual) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : predicted) lo = std::min(lo, v), hi = std::max(hi, v);
  if (hi == lo) hi = lo + 1;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const size_t n = dates.size();
  auto x_of = [&](size_t i) {
    return n == 1 ? left + plot_w / 2 : left + plot_w * double(i) / double(n - 1);
  };
  auto y_of = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };

  auto polyline = [&](std::span<const double> ys, const char* color) {
    std::string pts;
    for (size_t i = 0; i < n; ++i) {
      if (i) pts.push_back(' ');
      pts += fmt2(x_of(i)) + "," + fmt2(y_of(ys[i]));
    }
    return "  <polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"420\" "
         "viewBox=\"0 0 900 420\">\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"900\" height=\"420\" fill=\"white\"/>\n";
  svg += "  <text x=\"450\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + xml_escape(title) + "</text>\n";

  // Axes and horizontal gridlines with value labels.
  svg += "  <line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top) + "\" x2=\"" + fmt2(left) +
         "\" y2=\"" + fmt2(top + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "  <line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top + plot_h) + "\" x2=\"" +
         fmt2(left + plot_w) + "\" y2=\"" + fmt2(top + plot_h) + "\" stroke=\"black\"/>\n";
  for (int g = 0; g <= 4; ++g) {
    double v = lo + (hi - lo) * g / 4.0;
    double y = y_of(v);
    svg += "  <line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(y) + "\" x2=\"" + fmt2(left + plot_w) +
           "\" y2=\"" + fmt2(y) + "\" stroke=\"#dddddd\"/>\n";
    svg += "  <text x=\"" + fmt2(left - 6) + "\" y=\"" + fmt2(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt2(v) +
           "</text>\n";
  }
  svg += "  <text x=\"" + fmt2(left) + "\" y=\"" + fmt2(H - 12) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + to_string(dates.front()) + "</text>\n";
  svg += "  <text x=\"" + fmt2(left + plot_w) + "\" y=\"" + fmt2(H - 12) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         to_string(dates.back()) + "</text>\n";

  svg += polyline(actual, "#1f77b4");
  svg += polyline(predicted, "#d62728");

  svg += "  <text x=\"" + fmt2(left + 10) + "\" y=\"" + fmt2(top + 14) +
         "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#1f77b4\">actual</text>\n";
  svg += "  <text x=\"" + fmt2(left + 70) + "\" y=\"" + fmt2(top + 14) +
         "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">predicted</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace senticast::report
