#include "metacoop/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "metacoop/check.hpp"

namespace fs = std::filesystem;

namespace metacoop::io {

bool file_exists(const std::string& path) { return fs::exists(fs::path(path)); }

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(fs::path(path), ec);
  check(!ec, "ensure_dir failed for " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) ensure_dir(target.parent_path().string());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    check(out.good(), "cannot open temp file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    check(out.good(), "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  check(!ec, "atomic rename failed for " + path + ": " + ec.message());
}

std::string fmt(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  return buf;
}

std::string training_curve_csv(const std::vector<CurveRow>& rows) {
  std::string out = "env_timesteps,mean_return,policy_loss,value_loss,entropy\n";
  for (const CurveRow& r : rows) {
    out += std::to_string(r.env_timesteps) + "," + fmt(r.mean_return, 6) + "," +
           fmt(r.policy_loss, 6) + "," + fmt(r.value_loss, 6) + "," + fmt(r.entropy, 6) + "\n";
  }
  return out;
}

std::string chance_curve_csv(const std::vector<double>& curve) {
  std::string out = "t,chance\n";
  for (std::size_t t = 0; t < curve.size(); ++t) {
    out += std::to_string(t) + "," + fmt(curve[t], 6) + "\n";
  }
  return out;
}

std::string matrix_csv(const CrossPlayMatrix& m) {
  std::string out;
  for (const std::string& c : m.col_labels) out += "," + c;
  out += "\n";
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    out += m.row_labels[i];
    for (double v : m.cells[i]) out += "," + fmt(v, 2);
    out += "\n";
  }
  return out;
}

nlohmann::json report_json(const EvalReport& report) {
  nlohmann::json per_partner = nlohmann::json::array();
  for (const auto& [id, mean] : report.per_partner) {
    per_partner.push_back({{"partner_id", id}, {"mean", mean}});
  }
  return {{"mean_score", report.mean_score},
          {"episodes", report.episodes},
          {"seeds", report.seeds},
          {"per_partner", per_partner}};
}

nlohmann::json matrix_summary_json(const std::string& experiment, const CrossPlayMatrix& m) {
  const MatrixStats stats = matrix_stats(m);
  nlohmann::json cells = nlohmann::json::array();
  auto push = [&cells](const std::string& label, double mean, double std_) {
    cells.push_back({{"label", label}, {"mean", mean}, {"std", std_}});
  };
  if (m.square()) {
    push("seen", stats.diag_mean, stats.diag_std);
    push("crossplay", stats.offdiag_mean, stats.offdiag_std);
  }
  push("grid", stats.grid_mean, stats.grid_std);
  return {{"experiment", experiment},
          {"rows", m.row_labels},
          {"cols", m.col_labels},
          {"matrix", m.cells},
          {"cells", cells}};
}

nlohmann::json sweep_summary_json(const std::string& experiment,
                                  const std::vector<SweepCell>& cells) {
  nlohmann::json out_cells = nlohmann::json::array();
  for (const SweepCell& c : cells) {
    out_cells.push_back({{"label", c.label},
                         {"mean", c.mean},
                         {"std", c.stddev},
                         {"seeds", c.seeds},
                         {"per_seed", c.per_seed}});
  }
  return {{"experiment", experiment}, {"cells", out_cells}};
}

namespace {

// Dark-to-warm two-stop ramp; t in [0,1].
std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(24 + t * (233 - 24));
  const int g = static_cast<int>(35 + t * (196 - 35));
  const int b = static_cast<int>(73 + t * (106 - 73));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

const char* kSeriesColors[] = {"#2a6f97", "#e07a1f", "#2f9e44", "#c2255c",
                               "#6741d9", "#866146", "#0b7285", "#5c636a"};

}  // namespace

std::string svg_heatmap(const CrossPlayMatrix& m, double vmax) {
  check(vmax > 0.0, "svg_heatmap: vmax must be positive");
  const int rows = static_cast<int>(m.cells.size());
  const int cols = rows > 0 ? static_cast<int>(m.cells.front().size()) : 0;
  check(rows > 0 && cols > 0, "svg_heatmap: empty matrix");
  const int cell = 56, left = 96, top = 40;
  const int width = left + cols * cell + 16;
  const int height = top + rows * cell + 16;

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                  "\" height=\"" + std::to_string(height) + "\" font-family=\"monospace\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (int j = 0; j < cols; ++j) {
    s += "<text x=\"" + std::to_string(left + j * cell + cell / 2) + "\" y=\"" +
         std::to_string(top - 10) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + m.col_labels[j] + "</text>\n";
  }
  for (int i = 0; i < rows; ++i) {
    s += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" +
         std::to_string(top + i * cell + cell / 2 + 4) +
         "\" font-size=\"11\" text-anchor=\"end\">" + m.row_labels[i] + "</text>\n";
    for (int j = 0; j < cols; ++j) {
      const double v = m.cells[i][j];
      const double t = v / vmax;
      s += "<rect x=\"" + std::to_string(left + j * cell) + "\" y=\"" +
           std::to_string(top + i * cell) + "\" width=\"" + std::to_string(cell) +
           "\" height=\"" + std::to_string(cell) + "\" fill=\"" + heat_color(t) +
           "\" stroke=\"#ffffff\"/>\n";
      s += "<text x=\"" + std::to_string(left + j * cell + cell / 2) + "\" y=\"" +
           std::to_string(top + i * cell + cell / 2 + 4) +
           "\" font-size=\"12\" text-anchor=\"middle\" fill=\"" +
           (t > 0.55 ? "#1a1a1a" : "#f5f5f5") + "\">" + fmt(v, 1) + "</text>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

std::string svg_curves(const std::vector<std::pair<std::string, std::vector<double>>>& series,
                       const std::string& x_label, const std::string& y_label, double y_max) {
  check(!series.empty(), "svg_curves: no series");
  check(y_max > 0.0, "svg_curves: y_max must be positive");
  std::size_t n = 0;
  for (const auto& [label, ys] : series) n = std::max(n, ys.size());
  check(n >= 2, "svg_curves: need at least two points");

  const int width = 720, height = 400, left = 56, right = 16, top = 20, bottom = 44;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](std::size_t i) { return left + plot_w * static_cast<double>(i) / (n - 1); };
  auto py = [&](double v) { return top + plot_h * (1.0 - std::clamp(v / y_max, 0.0, 1.0)); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                  "\" height=\"" + std::to_string(height) + "\" font-family=\"monospace\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y_max * k / 4.0;
    const double y = py(v);
    s += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + fmt(y, 1) + "\" x2=\"" +
         std::to_string(width - right) + "\" y2=\"" + fmt(y, 1) +
         "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + fmt(y + 4, 1) +
         "\" font-size=\"11\" text-anchor=\"end\">" + fmt(v, 2) + "</text>\n";
    const std::size_t xi = std::min(n - 1, n * k / 4);
    s += "<text x=\"" + fmt(px(xi), 1) + "\" y=\"" + std::to_string(height - bottom + 16) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + std::to_string(xi) + "</text>\n";
  }
  s += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(top) + "\" x2=\"" +
       std::to_string(left) + "\" y2=\"" + std::to_string(height - bottom) +
       "\" stroke=\"#333333\"/>\n";
  s += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(height - bottom) +
       "\" x2=\"" + std::to_string(width - right) + "\" y2=\"" +
       std::to_string(height - bottom) + "\" stroke=\"#333333\"/>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& [label, ys] = series[k];
    if (ys.size() < 2) continue;
    const std::string color = kSeriesColors[k % (sizeof(kSeriesColors) / sizeof(char*))];
    std::string pts;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      pts += fmt(px(i), 1) + "," + fmt(py(ys[i]), 1) + " ";
    }
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"1.5\"/>\n";
    s += "<text x=\"" + std::to_string(left + 10) + "\" y=\"" +
         std::to_string(top + 14 + 16 * static_cast<int>(k)) + "\" font-size=\"12\" fill=\"" +
         color + "\">" + label + "</text>\n";
  }
  s += "<text x=\"" + std::to_string(left + static_cast<int>(plot_w) / 2) + "\" y=\"" +
       std::to_string(height - 8) + "\" font-size=\"12\" text-anchor=\"middle\">" + x_label +
       "</text>\n";
  s += "<text x=\"14\" y=\"" + std::to_string(top + static_cast<int>(plot_h) / 2) +
       "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       std::to_string(top + static_cast<int>(plot_h) / 2) + ")\">" + y_label + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace metacoop::io
