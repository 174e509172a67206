#pragma once

#include "srl/eval/score_curve.hpp"
#include "srl/eval/stats.hpp"

#include <optional>
#include <sstream>
#include <string>

namespace srl::eval {

/// One evaluated policy in a comparison.
struct PolicySummary {
  std::string name;
  std::string env;
  double fas = 0;
  double stochastic_return = 0;
};

struct Comparison {
  std::vector<PolicySummary> rows;
  std::optional<double> pearson_r;  // FAS vs stochastic-timestep return
  std::string notice;
};

/// Pairs FAS with stochastic-timestep returns. With fewer than 3 policies the
/// correlation is skipped with a notice; zero variance propagates as an error.
inline Comparison compare(std::vector<PolicySummary> rows) {
  Comparison c;
  c.rows = std::move(rows);
  if (c.rows.size() < 3) {
    c.notice = "fewer than 3 policies: correlation skipped";
    return c;
  }
  std::vector<double> x, y;
  for (const auto& r : c.rows) {
    x.push_back(r.fas);
    y.push_back(r.stochastic_return);
  }
  c.pearson_r = pearson(x, y);
  return c;
}

inline std::string format_fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

inline std::string comparison_markdown(const Comparison& c) {
  std::ostringstream os;
  os << "| policy | env | FAS | stochastic return |\n|---|---|---|---|\n";
  for (const auto& r : c.rows) {
    os << "| " << r.name << " | " << r.env << " | " << format_fixed(r.fas, 3) << " | "
       << format_fixed(r.stochastic_return, 2) << " |\n";
  }
  if (c.pearson_r) os << "\nPearson r = " << format_fixed(*c.pearson_r, 4) << "\n";
  if (!c.notice.empty()) os << "\n" << c.notice << "\n";
  return os.str();
}

inline std::string comparison_csv(const Comparison& c) {
  std::ostringstream os;
  os.precision(10);
  os << "policy,env,fas,stochastic_return\n";
  for (const auto& r : c.rows) os << r.name << ',' << r.env << ',' << r.fas << ',' << r.stochastic_return << "\n";
  return os.str();
}

/// Per-environment FAS table: one row per agent with mean +- standard error
/// over seeds, in the layout of the usual results table.
struct FasEntry {
  std::string env;
  std::string agent;
  double fas = 0;
};

inline std::string fas_table_markdown(const std::vector<FasEntry>& entries) {
  std::vector<std::string> envs, agents;
  auto add_unique = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  for (const auto& e : entries) {
    add_unique(envs, e.env);
    add_unique(agents, e.agent);
  }
  std::ostringstream os;
  os << "| env |";
  for (const auto& a : agents) os << ' ' << a << " |";
  os << "\n|---|";
  for (std::size_t i = 0; i < agents.size(); ++i) os << "---|";
  os << "\n";
  for (const auto& env : envs) {
    os << "| " << env << " |";
    for (const auto& a : agents) {
      std::vector<double> v;
      for (const auto& e : entries) {
        if (e.env == env && e.agent == a) v.push_back(e.fas);
      }
      if (v.empty()) {
        os << " - |";
        continue;
      }
      double m = 0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double ss = 0;
      for (double x : v) ss += (x - m) * (x - m);
      const double se = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
      os << ' ' << format_fixed(m, 3) << " ± " << format_fixed(se, 3) << " |";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace srl::eval
