#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "metacoop/eval.hpp"
#include "metacoop/trainer.hpp"

namespace metacoop::io {

bool file_exists(const std::string& path);
void ensure_dir(const std::string& path);
std::string read_file(const std::string& path);

// Writes to a sibling temp file, then renames over the target, so a crash
// mid-write never leaves a truncated artifact in place.
void write_file_atomic(const std::string& path, const std::string& content);

// Fixed-decimal formatting; all emitted numbers go through here so reruns
// are byte-identical.
std::string fmt(double x, int decimals);

// Columns: env_timesteps, mean_return, policy_loss, value_loss, entropy.
std::string training_curve_csv(const std::vector<CurveRow>& rows);

// Columns: t, chance.
std::string chance_curve_csv(const std::vector<double>& curve);

// Header row/col = agent labels; cells to 2 decimals.
std::string matrix_csv(const CrossPlayMatrix& m);

nlohmann::json report_json(const EvalReport& report);
nlohmann::json matrix_summary_json(const std::string& experiment, const CrossPlayMatrix& m);
nlohmann::json sweep_summary_json(const std::string& experiment,
                                  const std::vector<SweepCell>& cells);

// Static figure rendering (self-contained SVG text).
std::string svg_heatmap(const CrossPlayMatrix& m, double vmax);
std::string svg_curves(const std::vector<std::pair<std::string, std::vector<double>>>& series,
                       const std::string& x_label, const std::string& y_label, double y_max);

}  // namespace metacoop::io
