#pragma once

#include <filesystem>
#include <string>

#include "speclearn/confusion.hpp"
#include "speclearn/rollout.hpp"

namespace speclearn {

// Structured-text metric reports (JSON) and portable vector figures (SVG).

std::string occupancy_report_text(const OccupancyReport& report);
void write_occupancy_report(const std::filesystem::path& path, const OccupancyReport& report);
OccupancyReport read_occupancy_report(const std::filesystem::path& path);

std::string confusion_report_text(const ConfusionMatrix& full, const ConfusionMatrix& binary);
void write_confusion_report(const std::filesystem::path& path, const ConfusionMatrix& full,
                            const ConfusionMatrix& binary);

// Recall-vs-step curves, one polyline per block resolution.
void svg_occupancy_curves(const std::filesystem::path& path, const OccupancyReport& report,
                          const std::string& title);

// Row-normalized heatmap annotated with counts.
void svg_confusion_heatmap(const std::filesystem::path& path, const ConfusionMatrix& cm,
                           const std::string& title);

// Re-render figures from a stored occupancy report.
void plot_occupancy_report_file(const std::filesystem::path& report_path,
                                const std::filesystem::path& out_dir);

}  // namespace speclearn
