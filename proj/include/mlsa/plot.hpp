#pragma once

#include "mlsa/io.hpp"

#include <string>
#include <vector>

namespace mlsa {

/// One curve of a figure: column `y` against column `x` of a CSV table.
struct Curve {
    std::string label;
    CsvTable table;
    std::string x = "k";
    std::string y;
};

struct FigureSpec {
    std::string title;
    std::string x_label = "k";
    std::string y_label;
    bool log_x = true;
    bool log_y = true;
    int width = 720;
    int height = 480;
    std::vector<std::string> comments;  // emitted as an XML comment block
};

/// Renders a line chart. Output depends only on the curve data and spec, so
/// re-rendering from the same CSVs reproduces the file byte-for-byte.
/// Non-finite points and nonpositive values on log axes are skipped.
std::string render_svg(const FigureSpec& spec, const std::vector<Curve>& curves);

/// Reads the CSVs named in `curves` (label, path, x, y) and writes the SVG.
struct CurveFile {
    std::string label;
    std::string path;
    std::string x = "k";
    std::string y;
};
void plot_files(const FigureSpec& spec, const std::vector<CurveFile>& curves,
                const std::string& out_path);

/// Figure description file: key=value lines (title, x_label, y_label, log_x,
/// log_y) and one `curve=label|csv|x|y` line per curve. CSV paths are
/// relative to the description file.
struct FigureFile {
    FigureSpec spec;
    std::vector<CurveFile> curves;
};
void write_figure_file(const std::string& path, const FigureFile& figure);
FigureFile read_figure_file(const std::string& path);

/// Renders `figure` with CSV paths resolved against `base_dir`. The SVG
/// comment block carries the header comments of the first CSV.
void render_figure(const FigureFile& figure, const std::string& base_dir, const std::string& out_path);

}  // namespace mlsa
