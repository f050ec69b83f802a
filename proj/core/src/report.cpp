// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "chatir/error.hpp"
#include "chatir/eval.hpp"

namespace chatir {

using ordered_json = nlohmann::ordered_json;

std::string format_report_json(const EvalReport& report) {
  ordered_json j;
  j["k"] = report.k;
  j["rounds"] = report.rounds;
  j["n"] = report.n_examples;
  j["corpus_size"] = report.corpus_size;
  j["source"] = report.source;
  j["atr_mode"] = std::string(to_string(report.atr_mode));
  j["hits_curve"] = report.hits_curve;
  j["atr_curve"] = report.atr_curve;
  auto per = ordered_json::array();
  for (const auto& e : report.per_example) {
    ordered_json item = {{"id", e.image_id}};
    item["first_hit_round"] =
        e.first_hit_round ? ordered_json(*e.first_hit_round) : ordered_json(nullptr);
    per.push_back(std::move(item));
  }
  j["per_example"] = std::move(per);
  if (report.repetition) {
    j["repetition"] = {
        {"avg_exact_repeats", report.repetition->avg_exact_repeats},
        {"avg_unique_tokens_per_dialog",
         report.repetition->avg_unique_tokens_per_dialog},
        {"avg_unique_tokens_per_answer",
         report.repetition->avg_unique_tokens_per_answer}};
  } else {
    j["repetition"] = nullptr;
  }
  auto failures = ordered_json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"id", f.image_id}, {"error", f.error}});
  }
  j["failures"] = std::move(failures);
  return j.dump(2) + "\n";
}

std::string format_curves_csv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(12);
  out << "round,hits_at_k,avg_target_rank\n";
  for (std::size_t i = 0; i < report.hits_curve.size(); ++i) {
    out << i << ',' << report.hits_curve[i] << ',' << report.atr_curve[i]
        << '\n';
  }
  return out.str();
}

std::vector<CurvePoint> parse_curves_csv(std::string_view text) {
  std::vector<CurvePoint> points;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("round", 0) == 0) continue;
    CurvePoint p;
    char c1 = 0;
    char c2 = 0;
    std::istringstream fields(line);
    if (!(fields >> p.round >> c1 >> p.hits >> c2 >> p.avg_rank) || c1 != ',' ||
        c2 != ',') {
      throw ParseError("curves csv line " + std::to_string(line_no) +
                       ": expected round,hits_at_k,avg_target_rank");
    }
    points.push_back(p);
  }
  return points;
}

namespace {

struct Panel {
  double x0, y0, width, height;
};

void polyline(std::ostringstream& svg, const Panel& p,
              std::span<const CurvePoint> points, double y_min, double y_max,
              double (*value)(const CurvePoint&), const char* color) {
  const double max_round =
      std::max<double>(1.0, static_cast<double>(points.back().round));
  svg << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
  for (const auto& pt : points) {
    const double x = p.x0 + p.width * static_cast<double>(pt.round) / max_round;
    const double t = y_max > y_min ? (value(pt) - y_min) / (y_max - y_min) : 0.5;
    const double y = p.y0 + p.height * (1.0 - t);
    svg << x << ',' << y << ' ';
  }
  svg << "\"/>\n";
  for (const auto& pt : points) {
    const double x = p.x0 + p.width * static_cast<double>(pt.round) / max_round;
    const double t = y_max > y_min ? (value(pt) - y_min) / (y_max - y_min) : 0.5;
    svg << "<circle cx=\"" << x << "\" cy=\"" << p.y0 + p.height * (1.0 - t)
        << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  }
}

void axes(std::ostringstream& svg, const Panel& p, const char* label,
          double y_min, double y_max, std::size_t max_round) {
  svg << "<rect x=\"" << p.x0 << "\" y=\"" << p.y0 << "\" width=\"" << p.width
      << "\" height=\"" << p.height
      << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << p.x0 + p.width / 2 << "\" y=\"" << p.y0 - 10
      << "\" text-anchor=\"middle\" font-size=\"14\">" << label << "</text>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", y_max);
  svg << "<text x=\"" << p.x0 - 6 << "\" y=\"" << p.y0 + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", y_min);
  svg << "<text x=\"" << p.x0 - 6 << "\" y=\"" << p.y0 + p.height
      << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n";
  for (std::size_t r = 0; r <= max_round; ++r) {
    const double x = p.x0 + p.width * static_cast<double>(r) /
                                std::max<double>(1.0, static_cast<double>(max_round));
    svg << "<text x=\"" << x << "\" y=\"" << p.y0 + p.height + 16
        << "\" text-anchor=\"middle\" font-size=\"11\">" << r << "</text>\n";
  }
  svg << "<text x=\"" << p.x0 + p.width / 2 << "\" y=\"" << p.y0 + p.height + 34
      << "\" text-anchor=\"middle\" font-size=\"12\">dialog round</text>\n";
}

}  // namespace

std::string render_curves_svg(std::span<const CurvePoint> points,
                              std::string_view title) {
  if (points.empty()) throw std::invalid_argument("no curve points to plot");
  std::ostringstream svg;
  svg.precision(6);
  const double width = 900;
  const double height = 420;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-size=\"16\">" << title << "</text>\n";
  }
  const Panel hits{70, 60, 340, 290};
  const Panel ranks{520, 60, 340, 290};
  const std::size_t max_round = points.back().round;

  axes(svg, hits, "Hits@K (higher is better)", 0.0, 1.0, max_round);
  polyline(svg, hits, points, 0.0, 1.0,
           [](const CurvePoint& p) { return p.hits; }, "#1f77b4");

  double lo = points.front().avg_rank;
  double hi = lo;
  for (const auto& p : points) {
    lo = std::min(lo, p.avg_rank);
    hi = std::max(hi, p.avg_rank);
  }
  lo = std::max(1.0, std::floor(lo));
  hi = std::ceil(hi);
  axes(svg, ranks, "Average target rank (lower is better)", lo, hi, max_round);
  polyline(svg, ranks, points, lo, hi,
           [](const CurvePoint& p) { return p.avg_rank; }, "#d62728");
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace chatir
