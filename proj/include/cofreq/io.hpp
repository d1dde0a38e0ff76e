#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cofreq/flattening.hpp"
#include "cofreq/frequency.hpp"
#include "cofreq/singular.hpp"

namespace cofreq {

/// Bumped whenever a CSV column set changes; written in the header comment line.
constexpr int kCsvSchemaVersion = 1;

/// Shortest round-trip decimal form, so output bytes depend only on the values.
std::string format_number(double v);

/// "# cofreq <schema> v<version>" line, then the column header, then one row per entry.
std::string csv_text(const std::string &schema, const std::vector<std::string> &columns,
                     const std::vector<std::vector<double>> &rows);
void write_csv(const std::string &path, const std::string &schema, const std::vector<std::string> &columns,
               const std::vector<std::vector<double>> &rows);

void write_profile_csv(const std::string &path, const FrequencyProfile &p);
void write_sample_csv(const std::string &path, const SingularSample &s);
void write_minkowski_csv(const std::string &path, const MinkowskiEstimate &e);
void write_shells_csv(const std::string &path, const C01Report &r);

/// Pretty-printed with a trailing newline. Throws std::runtime_error if the file cannot be written.
void write_json(const std::string &path, const nlohmann::json &j);
void write_text(const std::string &path, const std::string &text);

nlohmann::json vec_json(const Vec &v);
nlohmann::json mat_json(const Mat &M);

nlohmann::json to_json(const FrequencyProfile &p);
nlohmann::json to_json(const PinchReport &p);
nlohmann::json to_json(const SingularSample &s);
nlohmann::json to_json(const MinkowskiEstimate &e);
nlohmann::json to_json(const AvoidingPlane &a);
nlohmann::json to_json(const ConeFit &c);
nlohmann::json to_json(const C01Report &r);
nlohmann::json to_json(const BiLipschitzReport &b);

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool scatter = false;
  bool dashed = false;
};

struct PlotOptions {
  std::string title;
  std::string xlabel = "x", ylabel = "y";
  bool logx = false, logy = false;
  int width = 640, height = 420;
};

/// Standalone SVG line/scatter plot. Throws std::invalid_argument when there is nothing to draw.
std::string render_svg(const std::vector<PlotSeries> &series, const PlotOptions &opts = {});
void emit_plot(const std::vector<PlotSeries> &series, const std::string &path, const PlotOptions &opts = {});

}  // namespace cofreq
