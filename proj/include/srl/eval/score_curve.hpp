#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace srl::eval {

/// Mean return as a function of action-sequence length.
struct ScoreCurve {
  std::vector<int> asl_grid;
  std::vector<double> mean_returns;
  std::vector<double> std_errors;
  int episodes_per_point = 0;

  void validate() const {
    if (asl_grid.size() != mean_returns.size() || asl_grid.size() != std_errors.size()) {
      throw std::invalid_argument("ScoreCurve: grid, means and errors differ in length");
    }
    for (std::size_t i = 0; i < asl_grid.size(); ++i) {
      if (asl_grid[i] < 1) throw std::invalid_argument("ScoreCurve: ASL values must be positive");
      if (i > 0 && asl_grid[i] <= asl_grid[i - 1]) {
        throw std::invalid_argument("ScoreCurve: grid must be strictly increasing");
      }
    }
  }

  double best() const { return *std::max_element(mean_returns.begin(), mean_returns.end()); }
};

inline const std::vector<int>& default_asl_grid() {
  static const std::vector<int> grid{1, 2, 4, 8, 12, 16, 20, 24, 30};
  return grid;
}

/// Integration axis: ASL itself, or decision frequency 1/ASL.
enum class FasAxis { asl, frequency };

NLOHMANN_JSON_SERIALIZE_ENUM(FasAxis, {{FasAxis::asl, "asl"}, {FasAxis::frequency, "frequency"}})

struct FASReport {
  double fas = 0;
  double min_score = 0;
  double max_score = 0;
  FasAxis axis = FasAxis::asl;
  ScoreCurve curve;
};

/// Normalized area under the score curve: each mean is mapped to
/// clamp((y - min) / (max - min), 0, 1), integrated with the trapezoid rule
/// on the grid and divided by the axis span. Result lies in [0, 1].
inline FASReport fas(const ScoreCurve& curve, double min_score, double max_score, FasAxis axis = FasAxis::asl) {
  curve.validate();
  if (!std::isfinite(min_score) || !std::isfinite(max_score) || !(min_score < max_score)) {
    throw std::invalid_argument("fas: anchors must be finite with min_score < max_score");
  }
  if (curve.asl_grid.size() < 2) throw std::invalid_argument("fas: the grid needs at least 2 points");
  const std::size_t n = curve.asl_grid.size();
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = axis == FasAxis::asl ? curve.asl_grid[i] : 1.0 / curve.asl_grid[i];
    const double y = std::clamp((curve.mean_returns[i] - min_score) / (max_score - min_score), 0.0, 1.0);
    pts.emplace_back(x, y);
  }
  std::sort(pts.begin(), pts.end());
  double area = 0;
  for (std::size_t i = 1; i < n; ++i) area += 0.5 * (pts[i].second + pts[i - 1].second) * (pts[i].first - pts[i - 1].first);
  return {area / (pts.back().first - pts.front().first), min_score, max_score, axis, curve};
}

inline void to_json(nlohmann::json& j, const ScoreCurve& c) {
  j = {{"asl_grid", c.asl_grid},
       {"mean_returns", c.mean_returns},
       {"std_errors", c.std_errors},
       {"episodes_per_point", c.episodes_per_point}};
}

inline void from_json(const nlohmann::json& j, ScoreCurve& c) {
  j.at("asl_grid").get_to(c.asl_grid);
  j.at("mean_returns").get_to(c.mean_returns);
  j.at("std_errors").get_to(c.std_errors);
  j.at("episodes_per_point").get_to(c.episodes_per_point);
  c.validate();
}

inline void to_json(nlohmann::json& j, const FASReport& r) {
  j = {{"fas", r.fas}, {"min_score", r.min_score}, {"max_score", r.max_score}, {"axis", r.axis}, {"curve", r.curve}};
}

inline void from_json(const nlohmann::json& j, FASReport& r) {
  j.at("fas").get_to(r.fas);
  j.at("min_score").get_to(r.min_score);
  j.at("max_score").get_to(r.max_score);
  r.axis = j.value("axis", FasAxis::asl);
  j.at("curve").get_to(r.curve);
}

/// Tidy CSV, one row per grid point.
inline void write_curve_csv(const std::filesystem::path& path, const ScoreCurve& c) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.precision(10);
  os << "asl,mean_return,std_error,episodes\n";
  for (std::size_t i = 0; i < c.asl_grid.size(); ++i) {
    os << c.asl_grid[i] << ',' << c.mean_returns[i] << ',' << c.std_errors[i] << ',' << c.episodes_per_point << "\n";
  }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return nlohmann::json::parse(is);
}

}  // namespace srl::eval
