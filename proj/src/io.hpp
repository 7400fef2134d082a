#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core_model.hpp"
#include "cost_model.hpp"
#include "em.hpp"
#include "kmeans.hpp"

namespace clab {

using json = nlohmann::json;

// CSV layout: header x1,...,xd plus an optional trailing label column with
// 1-based labels. Values round-trip exactly (17 significant digits).
Dataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const Dataset& data, const std::string& path);

json params_to_json(const GmmParams& params);
GmmParams params_from_json(const json& j);

json fit_result_to_json(const FitResult& result);
json kmeans_result_to_json(const KmeansResult& result);
json cost_report_to_json(const CostReport& report);

// Writes a two-column (x,y) CSV; when svg_path is nonempty, also renders a
// line chart. Byte output is deterministic for fixed input.
void emit_plot_data(const std::vector<std::pair<double, double>>& table,
                    const std::string& csv_path, const std::string& svg_path = "");

std::vector<std::pair<double, double>> trace_to_table(const std::vector<double>& trace);

// Points of mu + sqrt(l1) e1 cos(t) + sqrt(l2) e2 sin(t) over a closed loop
// (segments + 1 points), eigenvalues ascending. 2-D only.
std::vector<Eigen::VectorXd> ellipse_polyline(const Eigen::VectorXd& mu,
                                              const Eigen::MatrixXd& sigma,
                                              int segments = 64);

// Scatter plot of a 2-D dataset, colored by assignment when given, with
// 1-sigma ellipses when params are given.
void write_scatter_svg(const Dataset& data, const GmmParams* params,
                       const HardAssignment* assignment, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace clab
