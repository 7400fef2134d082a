#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace clab {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line_no) + ": bad numeric field '" + s + "'");
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_line(line);
  bool has_label = !header.empty() && header.back() == "label";
  int d = static_cast<int>(header.size()) - (has_label ? 1 : 0);
  if (d < 1) throw ConfigError("header has no coordinate columns");
  for (int j = 0; j < d; ++j)
    if (header[j] != "x" + std::to_string(j + 1))
      throw ConfigError("unexpected header column '" + header[j] + "'");

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (static_cast<int>(fields.size()) != d + (has_label ? 1 : 0))
      throw ConfigError("line " + std::to_string(line_no) + ": wrong field count");
    std::vector<double> row(d);
    for (int j = 0; j < d; ++j) row[j] = parse_double(fields[j], line_no);
    rows.push_back(std::move(row));
    if (has_label) {
      double raw = parse_double(fields[d], line_no);
      int l = static_cast<int>(std::lround(raw));
      if (l < 1 || raw != static_cast<double>(l))
        throw ConfigError("line " + std::to_string(line_no) + ": labels are 1-based integers");
      labels.push_back(l - 1);
    }
  }
  if (rows.empty()) throw ConfigError("no data rows in " + path);

  Dataset data;
  data.points.resize(static_cast<int>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < d; ++j) data.points(static_cast<int>(i), j) = rows[i][j];
  if (has_label) data.true_labels = std::move(labels);
  data.validate();
  return data;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::ostringstream os;
  int d = data.dim();
  for (int j = 0; j < d; ++j) os << (j ? "," : "") << "x" << (j + 1);
  if (data.true_labels) os << ",label";
  os << "\n";
  for (int i = 0; i < data.size(); ++i) {
    for (int j = 0; j < d; ++j) {
      if (j) os << ",";
      os << format_double(data.points(i, j));
    }
    if (data.true_labels) os << "," << ((*data.true_labels)[i] + 1);
    os << "\n";
  }
  write_text_file(path, os.str());
}

json params_to_json(const GmmParams& params) {
  json j;
  j["weights"] = std::vector<double>(params.weights.data(),
                                     params.weights.data() + params.weights.size());
  j["means"] = json::array();
  for (const auto& mu : params.means)
    j["means"].push_back(std::vector<double>(mu.data(), mu.data() + mu.size()));
  j["covariances"] = json::array();
  for (const auto& sigma : params.covariances) {
    json rows = json::array();
    for (int r = 0; r < sigma.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < sigma.cols(); ++c) row.push_back(sigma(r, c));
      rows.push_back(row);
    }
    j["covariances"].push_back(rows);
  }
  return j;
}

GmmParams params_from_json(const json& j) {
  try {
    GmmParams params;
    const auto& w = j.at("weights");
    params.weights.resize(static_cast<int>(w.size()));
    for (std::size_t k = 0; k < w.size(); ++k)
      params.weights[static_cast<int>(k)] = w[k].get<double>();
    for (const auto& mu : j.at("means")) {
      Eigen::VectorXd v(static_cast<int>(mu.size()));
      for (std::size_t i = 0; i < mu.size(); ++i)
        v[static_cast<int>(i)] = mu[i].get<double>();
      params.means.push_back(std::move(v));
    }
    for (const auto& sigma : j.at("covariances")) {
      int rows = static_cast<int>(sigma.size());
      if (rows == 0) throw ConfigError("empty covariance");
      int cols = static_cast<int>(sigma[0].size());
      Eigen::MatrixXd m(rows, cols);
      for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(sigma[r].size()) != cols)
          throw ConfigError("ragged covariance rows");
        for (int c = 0; c < cols; ++c) m(r, c) = sigma[r][c].get<double>();
      }
      params.covariances.push_back(std::move(m));
    }
    if (params.means.size() != static_cast<std::size_t>(params.components()) ||
        params.covariances.size() != static_cast<std::size_t>(params.components()))
      throw ConfigError("component count mismatch in parameter JSON");
    return params;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed parameter JSON: ") + e.what());
  }
}

json fit_result_to_json(const FitResult& result) {
  json j;
  j["params"] = params_to_json(result.params);
  j["loglik_trace"] = result.loglik_trace;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["reseeds"] = result.reseeds;
  j["final_assignment"] = result.final_assignment.labels;
  j["discard_counts"] = result.discard_counts;
  j["small_cluster_events"] = result.small_cluster_events;
  return j;
}

json kmeans_result_to_json(const KmeansResult& result) {
  json j;
  j["centroids"] = json::array();
  for (const auto& c : result.centroids.c)
    j["centroids"].push_back(std::vector<double>(c.data(), c.data() + c.size()));
  j["wcss_trace"] = result.wcss_trace;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["reseeds"] = result.reseeds;
  j["assignment"] = result.assignment.labels;
  return j;
}

json cost_report_to_json(const CostReport& report) {
  json j;
  j["kappa_v1"] = report.ingredients.kappa_v1;
  j["kappa_v2"] = report.ingredients.kappa_v2;
  j["mu_v1"] = report.ingredients.mu_v1;
  j["mu_v2"] = report.ingredients.mu_v2;
  j["eta_mu"] = report.ingredients.eta_mu;
  j["eta_sigma"] = report.ingredients.eta_sigma;
  j["k"] = report.ingredients.k;
  j["d"] = report.ingredients.d;
  j["budget"] = {{"eps1", report.budget.eps1},
                 {"eps3_mu", report.budget.eps3_mu},
                 {"eps4_mu", report.budget.eps4_mu},
                 {"eps3_sigma", report.budget.eps3_sigma},
                 {"eps4_sigma", report.budget.eps4_sigma},
                 {"eps4_pi", report.budget.eps4_pi}};
  j["term_pi"] = report.term_pi_itemized;
  j["term_pi_main"] = report.term_pi_main;
  j["term_pi_itemized"] = report.term_pi_itemized;
  j["term_mu_tomo"] = report.term_mu_tomo;
  j["term_mu_norm"] = report.term_mu_norm;
  j["term_sigma_tomo"] = report.term_sigma_tomo;
  j["term_sigma_norm"] = report.term_sigma_norm;
  j["total"] = report.total;
  j["n_pi_samples"] = report.n_pi_samples;
  return j;
}

std::vector<std::pair<double, double>> trace_to_table(const std::vector<double>& trace) {
  std::vector<std::pair<double, double>> out;
  out.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i)
    out.emplace_back(static_cast<double>(i + 1), trace[i]);
  return out;
}

void emit_plot_data(const std::vector<std::pair<double, double>>& table,
                    const std::string& csv_path, const std::string& svg_path) {
  std::ostringstream os;
  os << "x,y\n";
  for (const auto& [x, y] : table)
    os << format_double(x) << "," << format_double(y) << "\n";
  write_text_file(csv_path, os.str());

  if (svg_path.empty()) return;

  const int w = 640, h = 480, pad = 40;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!table.empty()) {
    xmin = xmax = table.front().first;
    ymin = ymax = table.front().second;
    for (const auto& [x, y] : table) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto sx = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad); };
  auto sy = [&](double y) { return h - pad - (y - ymin) / (ymax - ymin) * (h - 2 * pad); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
      << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d,%d %d,%d %d,%d", pad, pad, pad, h - pad, w - pad,
                h - pad);
  svg << "<polyline points=\"" << buf
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  if (!table.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < table.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s%.3f,%.3f", i ? " " : "",
                    sx(table[i].first), sy(table[i].second));
      svg << buf;
    }
    svg << "\"/>\n";
    for (const auto& [x, y] : table) {
      std::snprintf(buf, sizeof(buf), "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"3\" fill=\"#1f77b4\"/>\n",
                    sx(x), sy(y));
      svg << buf;
    }
  }
  svg << "</svg>\n";
  write_text_file(svg_path, svg.str());
}

std::vector<Eigen::VectorXd> ellipse_polyline(const Eigen::VectorXd& mu,
                                              const Eigen::MatrixXd& sigma,
                                              int segments) {
  if (mu.size() != 2 || sigma.rows() != 2 || sigma.cols() != 2)
    throw ConfigError("ellipse rendering is 2-D only");
  if (segments < 3) throw ConfigError("need at least 3 segments");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sigma + sigma.transpose()));
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < 0.0)
    throw NumericError("covariance is not positive semidefinite");
  Eigen::VectorXd e1 = es.eigenvectors().col(0);
  Eigen::VectorXd e2 = es.eigenvectors().col(1);
  double r1 = std::sqrt(es.eigenvalues()(0));
  double r2 = std::sqrt(es.eigenvalues()(1));

  std::vector<Eigen::VectorXd> out;
  out.reserve(segments + 1);
  for (int s = 0; s <= segments; ++s) {
    double theta = 2.0 * M_PI * s / segments;
    out.push_back(mu + r1 * std::cos(theta) * e1 + r2 * std::sin(theta) * e2);
  }
  return out;
}

void write_scatter_svg(const Dataset& data, const GmmParams* params,
                       const HardAssignment* assignment, const std::string& path) {
  if (data.dim() != 2) throw ConfigError("scatter rendering is 2-D only");
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                           "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  const int w = 640, h = 640, pad = 40;
  double xmin = data.points.col(0).minCoeff(), xmax = data.points.col(0).maxCoeff();
  double ymin = data.points.col(1).minCoeff(), ymax = data.points.col(1).maxCoeff();
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto sx = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad); };
  auto sy = [&](double y) { return h - pad - (y - ymin) / (ymax - ymin) * (h - 2 * pad); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
      << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  char buf[128];
  for (int i = 0; i < data.size(); ++i) {
    int label = kDiscarded;
    if (assignment) label = assignment->labels[i];
    else if (data.true_labels) label = (*data.true_labels)[i];
    const char* color = label < 0 ? "#999999" : palette[label % 8];
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"2\" fill=\"%s\" fill-opacity=\"0.6\"/>\n",
                  sx(data.points(i, 0)), sy(data.points(i, 1)), color);
    svg << buf;
  }
  if (params) {
    for (int k = 0; k < params->components(); ++k) {
      auto pts = ellipse_polyline(params->means[k], params->covariances[k]);
      svg << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
      for (std::size_t s = 0; s < pts.size(); ++s) {
        std::snprintf(buf, sizeof(buf), "%s%.3f,%.3f", s ? " " : "", sx(pts[s][0]),
                      sy(pts[s][1]));
        svg << buf;
      }
      svg << "\"/>\n";
    }
  }
  svg << "</svg>\n";
  write_text_file(path, svg.str());
}

}  // namespace clab
