#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fadenet/attractor.hpp"
#include "fadenet/config.hpp"

namespace fadenet::io {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> state_columns(std::size_t n) {
  std::vector<std::string> cols;
  for (std::size_t i = 0; i < n; ++i) cols.push_back("x_" + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j != i)
        cols.push_back("z_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  return cols;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "io: cannot open " + path.string());
  return out;
}

inline void write_history_csv(const History& u, std::size_t n,
                              const std::filesystem::path& path,
                              const std::string& fingerprint, std::uint64_t seed) {
  auto out = open_out(path);
  out << "# config=" << fingerprint << " seed=" << seed << " gamma=" << fmt(u.gamma())
      << " window=" << fmt(u.window()) << " step=" << fmt(u.step()) << " n=" << n
      << "\n";
  out << "t";
  for (const auto& c : state_columns(n)) out << "," << c;
  out << "\n";
  for (std::size_t k = 0; k < u.nodes(); ++k) {
    out << fmt(u.node_time(k));
    for (std::size_t c = 0; c < u.dim(); ++c) out << "," << fmt(u.node(k, c));
    out << "\n";
  }
}

inline History read_history_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "io: cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line.rfind("# ", 0) == 0,
          "io: missing history header");
  double gamma = 0, window = 0, step = 0;
  std::size_t n = 0;
  {
    std::istringstream hdr(line.substr(2));
    std::string tok;
    while (hdr >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "gamma") gamma = std::stod(val);
      else if (key == "window") window = std::stod(val);
      else if (key == "step") step = std::stod(val);
      else if (key == "n") n = std::stoul(val);
    }
  }
  require(n > 0, "io: history header lacks n");
  std::getline(in, line);  // column names
  std::vector<double> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    bool first = true;
    while (std::getline(row, cell, ',')) {
      if (first) {
        first = false;  // t column
        continue;
      }
      samples.push_back(std::stod(cell));
    }
  }
  return History(gamma, window, step, n * n, std::move(samples));
}

inline void write_trajectory_csv(const TrajectoryRecord& rec, std::size_t n,
                                 const std::filesystem::path& path,
                                 const std::string& fingerprint, std::uint64_t seed,
                                 const MembershipReport* residuals = nullptr) {
  auto out = open_out(path);
  out << "# config=" << fingerprint << " seed=" << seed << " eps=" << fmt(rec.eps)
      << " method=" << (rec.method == StepMethod::kEuler ? "euler" : "rk4_interp");
  if (!rec.policy.empty()) out << " policy=" << rec.policy;
  out << "\n";
  const auto cols = state_columns(n);
  out << "t";
  for (const auto& c : cols) out << "," << c;
  for (const auto& c : cols) out << ",slope_" << c;
  out << ",gamma_norm";
  if (residuals) out << ",residual";
  out << "\n";
  for (std::size_t m = 0; m < rec.times.size(); ++m) {
    out << fmt(rec.times[m]);
    for (double v : rec.states[m]) out << "," << fmt(v);
    if (m < rec.slopes.size())
      for (double v : rec.slopes[m]) out << "," << fmt(v);
    else
      for (std::size_t c = 0; c < rec.states[m].size(); ++c) out << ",";
    out << "," << fmt(rec.gamma_norms[m]);
    if (residuals)
      out << ","
          << (m < residuals->residuals.size() ? fmt(residuals->residuals[m]) : "");
    out << "\n";
  }
}

inline void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

inline void write_attractor_estimate(const AttractorEstimate& est, std::size_t n,
                                     const std::filesystem::path& dir,
                                     const std::string& fingerprint) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["config"] = fingerprint;
  manifest["seed"] = est.seed;
  manifest["time"] = est.time;
  manifest["eps"] = est.eps;
  manifest["mode"] = mode_name(est.mode);
  manifest["tau_list"] = est.tau_list;
  manifest["drift"] = est.drift;
  manifest["start_radius"] = est.start_radius;
  manifest["samples_per_tau"] = est.samples_per_tau;
  manifest["policies"] = est.policies;
  manifest["members"] = est.cloud.size();
  manifest["nonfinite_dropped"] = est.nonfinite_dropped;
  manifest["max_member_norm"] = est.max_member_norm;
  write_json(manifest, dir / "manifest.json");
  for (std::size_t i = 0; i < est.cloud.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "member_%04zu.csv", i);
    write_history_csv(est.cloud[i], n, dir / name, fingerprint, est.seed);
  }
}

inline void write_converge_csv(const ConvergenceSweep& sweep,
                               const std::filesystem::path& path,
                               const std::string& fingerprint, std::uint64_t seed) {
  auto out = open_out(path);
  out << "# config=" << fingerprint << " seed=" << seed << "\n";
  out << "eps,distance_to_next,residual_vs_hard\n";
  for (const auto& row : sweep.rows)
    out << fmt(row.eps) << "," << fmt(row.distance_to_next) << ","
        << fmt(row.residual_vs_hard) << "\n";
}

inline void write_attractor_sweep_csv(const AttractorSweep& sweep,
                                      const std::filesystem::path& path,
                                      const std::string& fingerprint,
                                      std::uint64_t seed) {
  auto out = open_out(path);
  out << "# config=" << fingerprint << " seed=" << seed << "\n";
  out << "eps,dist_eps_to_hard,dist_hard_to_eps,dist_sig_to_hard,drift\n";
  for (const auto& row : sweep.rows)
    out << fmt(row.eps) << "," << fmt(row.dist_eps_to_hard) << ","
        << fmt(row.dist_hard_to_eps) << "," << fmt(row.dist_sig_to_hard) << ","
        << fmt(row.drift) << "\n";
}

}  // namespace fadenet::io
