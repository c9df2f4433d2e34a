#include "speclearn/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "speclearn/errors.hpp"

namespace speclearn {

using nlohmann::json;

namespace {

json occupancy_to_json(const OccupancyReport& r) {
  json blocks = json::array();
  for (size_t b = 0; b < r.blocks.size(); ++b) {
    json per_step = json::array();
    for (int s = 0; s < r.steps; ++s) {
      const auto& cell = r.per_step[b][static_cast<size_t>(s)];
      per_step.push_back(json{{"step", s + 1},
                              {"hits", cell.hits},
                              {"occupied", cell.occupied},
                              {"recall", cell.recall()}});
    }
    blocks.push_back(json{{"time_ms", r.blocks[b].time_ms},
                          {"freq_mhz", r.blocks[b].freq_mhz},
                          {"label", r.blocks[b].label()},
                          {"pooled",
                           json{{"hits", r.pooled[b].hits},
                                {"occupied", r.pooled[b].occupied},
                                {"recall", r.pooled[b].recall()}}},
                          {"per_step", per_step}});
  }
  return json{{"kind", "occupancy_recall"}, {"steps", r.steps}, {"blocks", blocks}};
}

json confusion_to_json(const ConfusionMatrix& cm) {
  json counts = json::array();
  json rates = json::array();
  const Tensor<double> rn = cm.row_normalized();
  for (int64_t i = 0; i < cm.classes(); ++i) {
    json crow = json::array(), rrow = json::array();
    for (int64_t j = 0; j < cm.classes(); ++j) {
      crow.push_back(cm.at(i, j));
      rrow.push_back(rn.at(i, j));
    }
    counts.push_back(crow);
    rates.push_back(rrow);
  }
  json recalls = json::array();
  for (int64_t i = 0; i < cm.classes(); ++i) recalls.push_back(cm.recall(i));
  return json{{"classes", cm.names()}, {"counts", counts}, {"row_rates", rates}, {"recall", recalls}};
}

constexpr const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string occupancy_report_text(const OccupancyReport& report) {
  return occupancy_to_json(report).dump(2) + "\n";
}

void write_occupancy_report(const std::filesystem::path& path, const OccupancyReport& report) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write report: " + path.string());
  f << occupancy_report_text(report);
}

OccupancyReport read_occupancy_report(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open report: " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw FormatError("bad report: " + std::string(e.what()));
  }
  if (j.value("kind", "") != "occupancy_recall") throw FormatError("not an occupancy report");

  OccupancyReport r;
  r.steps = j.at("steps").get<int>();
  for (const auto& bj : j.at("blocks")) {
    BlockRes b;
    b.time_ms = bj.at("time_ms").get<double>();
    b.freq_mhz = bj.at("freq_mhz").get<double>();
    r.blocks.push_back(b);
    RecallCell pooled;
    pooled.hits = bj.at("pooled").at("hits").get<int64_t>();
    pooled.occupied = bj.at("pooled").at("occupied").get<int64_t>();
    r.pooled.push_back(pooled);
    std::vector<RecallCell> per_step;
    for (const auto& sj : bj.at("per_step")) {
      RecallCell c;
      c.hits = sj.at("hits").get<int64_t>();
      c.occupied = sj.at("occupied").get<int64_t>();
      per_step.push_back(c);
    }
    r.per_step.push_back(std::move(per_step));
  }
  return r;
}

std::string confusion_report_text(const ConfusionMatrix& full, const ConfusionMatrix& binary) {
  return json{{"kind", "segmentation_confusion"},
              {"full", confusion_to_json(full)},
              {"binary", confusion_to_json(binary)}}
             .dump(2) +
         "\n";
}

void write_confusion_report(const std::filesystem::path& path, const ConfusionMatrix& full,
                            const ConfusionMatrix& binary) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write report: " + path.string());
  f << confusion_report_text(full, binary);
}

void svg_occupancy_curves(const std::filesystem::path& path, const OccupancyReport& report,
                          const std::string& title) {
  const int w = 640, h = 420;
  const int ml = 60, mr = 180, mt = 50, mb = 50;
  const double pw = w - ml - mr, ph = h - mt - mb;

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='15' "
         "font-family='sans-serif'>"
      << title << "</text>\n";

  // axes
  svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << mt + ph
      << "' stroke='black'/>\n";
  svg << "<line x1='" << ml << "' y1='" << mt + ph << "' x2='" << ml + pw << "' y2='" << mt + ph
      << "' stroke='black'/>\n";
  for (int g = 0; g <= 5; ++g) {
    const double y = mt + ph - ph * g / 5.0;
    svg << "<text x='" << ml - 8 << "' y='" << y + 4
        << "' text-anchor='end' font-size='11' font-family='sans-serif'>" << g * 0.2
        << "</text>\n";
    svg << "<line x1='" << ml << "' y1='" << y << "' x2='" << ml + pw << "' y2='" << y
        << "' stroke='#dddddd'/>\n";
  }
  for (int s = 0; s < report.steps; ++s) {
    const double x = ml + (report.steps == 1 ? pw / 2 : pw * s / (report.steps - 1.0));
    svg << "<text x='" << x << "' y='" << mt + ph + 18
        << "' text-anchor='middle' font-size='11' font-family='sans-serif'>" << s + 1
        << "</text>\n";
  }
  svg << "<text x='" << ml + pw / 2 << "' y='" << h - 12
      << "' text-anchor='middle' font-size='12' font-family='sans-serif'>rollout step</text>\n";
  svg << "<text x='16' y='" << mt + ph / 2
      << "' text-anchor='middle' font-size='12' font-family='sans-serif' transform='rotate(-90 16 "
      << mt + ph / 2 << ")'>occupied recall</text>\n";

  for (size_t b = 0; b < report.blocks.size(); ++b) {
    const char* color = kSeriesColors[b % (sizeof kSeriesColors / sizeof kSeriesColors[0])];
    std::ostringstream pts;
    for (int s = 0; s < report.steps; ++s) {
      const double x = ml + (report.steps == 1 ? pw / 2 : pw * s / (report.steps - 1.0));
      const double y = mt + ph - ph * report.per_step[b][static_cast<size_t>(s)].recall();
      pts << x << "," << y << " ";
    }
    svg << "<polyline points='" << pts.str() << "' fill='none' stroke='" << color
        << "' stroke-width='2'/>\n";
    const double ly = mt + 16.0 * static_cast<double>(b);
    svg << "<line x1='" << ml + pw + 12 << "' y1='" << ly << "' x2='" << ml + pw + 32 << "' y2='"
        << ly << "' stroke='" << color << "' stroke-width='2'/>\n";
    svg << "<text x='" << ml + pw + 38 << "' y='" << ly + 4
        << "' font-size='11' font-family='sans-serif'>" << report.blocks[b].label() << " (pooled "
        << static_cast<int>(std::round(report.pooled[b].recall() * 100)) << "%)</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream f(path);
  if (!f) throw FormatError("cannot write figure: " + path.string());
  f << svg.str();
}

void svg_confusion_heatmap(const std::filesystem::path& path, const ConfusionMatrix& cm,
                           const std::string& title) {
  const int k = cm.classes();
  const int cell = 90, ml = 110, mt = 70;
  const int w = ml + k * cell + 40, h = mt + k * cell + 40;
  const Tensor<double> rates = cm.row_normalized();

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='15' "
         "font-family='sans-serif'>"
      << title << "</text>\n";

  for (int64_t i = 0; i < k; ++i) {
    for (int64_t j = 0; j < k; ++j) {
      const double r = rates.at(i, j);
      // white -> blue ramp
      const int red = static_cast<int>(255 - 175 * r);
      const int green = static_cast<int>(255 - 135 * r);
      const int blue = 255;
      const int x = ml + static_cast<int>(j) * cell;
      const int y = mt + static_cast<int>(i) * cell;
      svg << "<rect x='" << x << "' y='" << y << "' width='" << cell << "' height='" << cell
          << "' fill='rgb(" << red << "," << green << "," << blue
          << ")' stroke='#777777'/>\n";
      svg << "<text x='" << x + cell / 2 << "' y='" << y + cell / 2 - 4
          << "' text-anchor='middle' font-size='13' font-family='sans-serif'>"
          << static_cast<int>(std::round(r * 1000)) / 10.0 << "%</text>\n";
      svg << "<text x='" << x + cell / 2 << "' y='" << y + cell / 2 + 14
          << "' text-anchor='middle' font-size='10' font-family='sans-serif' fill='#333333'>"
          << cm.at(i, j) << "</text>\n";
    }
  }
  for (int64_t i = 0; i < k; ++i) {
    svg << "<text x='" << ml - 10 << "' y='" << mt + static_cast<int>(i) * cell + cell / 2 + 4
        << "' text-anchor='end' font-size='12' font-family='sans-serif'>" << cm.names()[static_cast<size_t>(i)]
        << "</text>\n";
    svg << "<text x='" << ml + static_cast<int>(i) * cell + cell / 2 << "' y='" << mt - 10
        << "' text-anchor='middle' font-size='12' font-family='sans-serif'>"
        << cm.names()[static_cast<size_t>(i)] << "</text>\n";
  }
  svg << "<text x='" << ml - 70 << "' y='" << mt + k * cell / 2
      << "' text-anchor='middle' font-size='12' font-family='sans-serif' transform='rotate(-90 "
      << ml - 70 << " " << mt + k * cell / 2 << ")'>true class</text>\n";
  svg << "<text x='" << ml + k * cell / 2 << "' y='" << mt - 40
      << "' text-anchor='middle' font-size='12' font-family='sans-serif'>predicted class</text>\n";
  svg << "</svg>\n";

  std::ofstream f(path);
  if (!f) throw FormatError("cannot write figure: " + path.string());
  f << svg.str();
}

void plot_occupancy_report_file(const std::filesystem::path& report_path,
                                const std::filesystem::path& out_dir) {
  const OccupancyReport report = read_occupancy_report(report_path);
  std::filesystem::create_directories(out_dir);
  svg_occupancy_curves(out_dir / "fig_occupancy_recall.svg", report, "Occupied-block recall");
}

}  // namespace speclearn
