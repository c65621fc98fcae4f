#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace porogen::pipeline {

struct Series {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
    std::string color = "#d62728";
};

/// Static SVG line chart (loss curves, porosity tracking).
void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series);

/// Static SVG scatter chart; draws the y=x identity line when requested
/// (target-vs-measured plots).
void write_scatter_plot(const std::filesystem::path& path, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel,
                        const std::vector<Series>& series, bool identity_line = false);

}  // namespace porogen::pipeline
