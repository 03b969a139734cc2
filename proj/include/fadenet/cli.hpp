#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fadenet/io.hpp"

namespace fadenet {

// exit codes shared by all commands:
//   0 ok, 1 hypothesis failure, 2 config error, 3 numeric failure
namespace cli_detail {

inline History make_initial(const ExperimentConfig& cfg, double step,
                            std::optional<double> window_opt) {
  const NetworkParams& p = cfg.network;
  const InitialSpec& spec = cfg.run.initial;
  double norm_guess = 1.0;
  std::vector<double> values(p.dim(), 0.0);
  switch (spec.kind) {
    case InitialSpec::Kind::kZero:
      break;
    case InitialSpec::Kind::kConstant: {
      if (spec.values.size() != p.dim())
        throw config_error("run.initial: expected " + std::to_string(p.dim()) +
                           " values");
      values = spec.values;
      for (double v : values) norm_guess = std::max(norm_guess, std::abs(v));
      break;
    }
    case InitialSpec::Kind::kBall:
      norm_guess = std::max(1.0, spec.radius);
      break;
  }
  const double window = window_opt ? *window_opt : cfg.default_window(norm_guess, step);
  if (spec.kind == InitialSpec::Kind::kBall) {
    Rng rng(Rng::mix(cfg.seed, 0x1717));
    return detail::sample_initial(rng, p.gamma, window, step, p.dim(), spec.radius,
                                  false);
  }
  return History::constant(p.gamma, window, step, values);
}

inline void print_report(const HypothesisReport& rep, const NetworkParams& p,
                         std::ostream& out) {
  auto line = [&](const char* name, bool ok) {
    out << "  " << name << (ok ? "PASS" : "FAIL") << "\n";
  };
  line("(D) decay bounded below by alpha ..... ", rep.decay_ok);
  line("(M) finite gamma moments ............. ", rep.measures_ok);
  line("(I) continuous stimuli ............... ", rep.stimuli_ok);
  out << "  (A) coupling margin .................. "
      << (rep.coupling_ok ? "PASS" : "FAIL") << " (margin " << rep.margin << ")\n";
  if (rep.constants) {
    const auto& ac = *rep.constants;
    out << "  witness: eta=" << ac.eta << " omega=" << ac.omega << " xi=" << ac.xi
        << " beta=" << ac.beta << "\n";
    out << "  K=" << ac.K << " (max form), " << ac.K_sum << " (sum form)\n";
    out << "  gamma=" << p.gamma << " vs beta/2=" << 0.5 * ac.beta << " ... "
        << (rep.gamma_ok ? "OK" : "NOT OK") << "\n";
  }
  out << "  stimuli square-integrable: "
      << (rep.stimuli_square_integrable ? "yes" : "no") << "\n";
  for (const auto& f : rep.failures) out << "  ! " << f << "\n";
}

inline std::vector<SelectorPolicy> run_policies(const ExperimentConfig& cfg) {
  if (!cfg.run.policies.empty()) return cfg.run.policies;
  return detail::default_policies(cfg.seed);
}

}  // namespace cli_detail

inline int cmd_check(const std::string& config_path, std::ostream& out = std::cout) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    const HypothesisReport rep = check_hypotheses(cfg.network);
    out << "hypothesis report for " << config_path << " (config " << cfg.fingerprint
        << ")\n";
    cli_detail::print_report(rep, cfg.network, out);
    out << (rep.pass() ? "all hypotheses hold" : "hypothesis check failed") << "\n";
    return rep.pass() ? 0 : 1;
  } catch (const config_error& e) {
    out << "config error: " << e.what() << "\n";
    return 2;
  } catch (const invalid_input& e) {
    out << "config error: " << e.what() << "\n";
    return 2;
  }
}

inline int cmd_simulate(const std::string& config_path,
                        const std::optional<std::string>& out_dir_override,
                        std::optional<unsigned> threads_override,
                        std::ostream& out = std::cout) {
  (void)threads_override;  // single trajectories run sequentially
  try {
    const ExperimentConfig cfg = load_config(config_path);
    const HypothesisReport rep = check_hypotheses(cfg.network);
    if (!rep.pass()) {
      cli_detail::print_report(rep, cfg.network, out);
      return 1;
    }
    const NetworkParams& p = cfg.network;
    IntegratorConfig icfg;
    icfg.method = cfg.run.method;
    icfg.step = cfg.run.step;
    icfg.horizon = cfg.run.horizon;
    icfg.start = cfg.run.start;
    const History u0 = cli_detail::make_initial(cfg, icfg.step, cfg.run.window);
    const std::filesystem::path dir = out_dir_override.value_or(cfg.output_dir);
    const double tol = cfg.run.residual_tol.value_or(20.0 * icfg.step);

    auto summarize = [&](const TrajectoryRecord& rec, const MembershipReport& memb,
                         const std::string& suffix) {
      const auto [k1, k2] = solution_bound_constants(
          p, std::max(1.0, u0.gamma_norm()), icfg.start, icfg.start, icfg.horizon);
      double envelope_ratio = 0.0;
      for (std::size_t m = 0; m < rec.times.size(); ++m)
        envelope_ratio =
            std::max(envelope_ratio, rec.gamma_norms[m] /
                                         (k1 * std::exp(k2 * (rec.times[m] - icfg.start))));
      io::write_trajectory_csv(rec, p.n, dir / ("trajectory" + suffix + ".csv"),
                               cfg.fingerprint, cfg.seed, &memb);
      nlohmann::json summary;
      summary["config"] = cfg.fingerprint;
      summary["seed"] = cfg.seed;
      summary["eps"] = rec.eps;
      summary["policy"] = rec.policy;
      summary["steps"] = rec.slopes.size();
      summary["residual_max"] = memb.max_violation;
      summary["residual_worst_step"] = memb.worst_step;
      summary["residual_tol"] = tol;
      summary["residual_pass"] = memb.pass(tol);
      summary["envelope_k1"] = k1;
      summary["envelope_k2"] = k2;
      summary["envelope_max_ratio"] = envelope_ratio;
      summary["final_state"] = rec.states.back();
      io::write_json(summary, dir / ("summary" + suffix + ".json"));
      out << "trajectory" << suffix << ": " << rec.slopes.size() << " steps, residual "
          << memb.max_violation << (memb.pass(tol) ? " <= " : " > ") << tol
          << (memb.pass(tol) ? " (PASS)" : " (FAIL)") << ", envelope ratio "
          << envelope_ratio << "\n";
    };

    if (!cfg.run.inclusion) {
      double eps = 0.0;
      if (cfg.run.eps) eps = *cfg.run.eps;
      else if (cfg.run.eps_list.size() == 1) eps = cfg.run.eps_list.front();
      else throw config_error("run: sigmoidal mode needs a single 'eps'");
      const TrajectoryRecord rec = integrate_sigmoidal(p, eps, u0, icfg);
      summarize(rec, residual_membership(rec, p, eps), "");
    } else {
      if (!cfg.run.eps) throw config_error("run: inclusion mode needs 'eps'");
      for (const SelectorPolicy& pol : cli_detail::run_policies(cfg)) {
        const TrajectoryRecord rec = integrate_inclusion(p, *cfg.run.eps, u0, icfg, pol);
        summarize(rec, residual_membership(rec, p, *cfg.run.eps), "_" + pol.name());
      }
    }
    return 0;
  } catch (const config_error& e) {
    out << "config error: " << e.what() << "\n";
    return 2;
  } catch (const invalid_input& e) {
    out << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    out << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}

inline int cmd_converge(const std::string& config_path,
                        const std::optional<std::string>& out_dir_override,
                        std::optional<unsigned> threads_override,
                        std::ostream& out = std::cout) {
  (void)threads_override;
  try {
    const ExperimentConfig cfg = load_config(config_path);
    const HypothesisReport rep = check_hypotheses(cfg.network);
    if (!rep.pass()) {
      cli_detail::print_report(rep, cfg.network, out);
      return 1;
    }
    if (cfg.run.eps_list.empty())
      throw config_error("run: converge needs a non-empty 'eps_list'");
    IntegratorConfig icfg;
    icfg.method = cfg.run.method;
    icfg.step = cfg.run.step;
    icfg.horizon = cfg.run.horizon;
    icfg.start = cfg.run.start;
    const History u0 = cli_detail::make_initial(cfg, icfg.step, cfg.run.window);
    const ConvergenceSweep sweep =
        sigmoidal_convergence_sweep(cfg.network, u0, icfg, cfg.run.eps_list);
    const std::filesystem::path dir = out_dir_override.value_or(cfg.output_dir);
    io::write_converge_csv(sweep, dir / "converge.csv", cfg.fingerprint, cfg.seed);
    nlohmann::json manifest;
    manifest["config"] = cfg.fingerprint;
    manifest["seed"] = cfg.seed;
    manifest["eps_list"] = cfg.run.eps_list;
    io::write_json(manifest, dir / "converge_manifest.json");
    out << "eps    sup-distance-to-next    residual-vs-hard\n";
    for (const auto& row : sweep.rows)
      out << row.eps << "    " << row.distance_to_next << "    "
          << row.residual_vs_hard << "\n";
    return 0;
  } catch (const config_error& e) {
    out << "config error: " << e.what() << "\n";
    return 2;
  } catch (const invalid_input& e) {
    out << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    out << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}

inline int cmd_attractor(const std::string& config_path,
                         const std::optional<std::string>& out_dir_override,
                         std::optional<unsigned> threads_override,
                         std::ostream& out = std::cout) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    if (!cfg.attractor) throw config_error("attractor: section missing");
    const HypothesisReport rep = check_hypotheses(cfg.network);
    if (!rep.pass() || !rep.gamma_ok) {
      cli_detail::print_report(rep, cfg.network, out);
      out << "attractor runs need all hypotheses plus gamma < beta/2\n";
      return 1;
    }
    const AttractorSection& sec = *cfg.attractor;
    PullbackConfig pcfg;
    pcfg.time = sec.time;
    pcfg.tau_list = sec.tau_list;
    pcfg.samples_per_tau = sec.samples_per_tau;
    pcfg.policies = sec.policies;
    pcfg.seed = cfg.seed;
    pcfg.method = sec.method;
    pcfg.step = sec.step;
    pcfg.threads = threads_override.value_or(cfg.threads);
    const double radius_guess =
        std::sqrt(rep.constants->K / rep.constants->beta) + 1.0;
    pcfg.window = sec.window ? *sec.window : cfg.default_window(radius_guess, sec.step);

    const AttractorSweep sweep =
        attractor_convergence_sweep(cfg.network, sec.eps_list, pcfg);
    const std::filesystem::path dir = out_dir_override.value_or(cfg.output_dir);
    io::write_attractor_sweep_csv(sweep, dir / "attractor_sweep.csv", cfg.fingerprint,
                                  cfg.seed);
    nlohmann::json manifest;
    manifest["config"] = cfg.fingerprint;
    manifest["seed"] = cfg.seed;
    manifest["time"] = sec.time;
    manifest["tau_list"] = sec.tau_list;
    manifest["eps_list"] = sec.eps_list;
    manifest["sampling_tolerance"] = sweep.sampling_tolerance;
    manifest["containment_ok"] = sweep.containment_ok;
    io::write_json(manifest, dir / "attractor_manifest.json");
    for (const auto& est : sweep.inflated) {
      char name[64];
      std::snprintf(name, sizeof name, "estimate_inclusion_eps_%g", est.eps);
      io::write_attractor_estimate(est, cfg.network.n, dir / name, cfg.fingerprint);
    }
    for (const auto& est : sweep.sigmoidal) {
      char name[64];
      std::snprintf(name, sizeof name, "estimate_sigmoidal_eps_%g", est.eps);
      io::write_attractor_estimate(est, cfg.network.n, dir / name, cfg.fingerprint);
    }
    out << "eps    dist(eps->hard)    dist(hard->eps)    dist(sig->hard)    drift\n";
    for (const auto& row : sweep.rows)
      out << row.eps << "    " << row.dist_eps_to_hard << "    "
          << row.dist_hard_to_eps << "    " << row.dist_sig_to_hard << "    "
          << row.drift << "\n";
    out << "sampling tolerance " << sweep.sampling_tolerance << ", containment "
        << (sweep.containment_ok ? "OK" : "VIOLATED") << "\n";
    return 0;
  } catch (const config_error& e) {
    out << "config error: " << e.what() << "\n";
    return 2;
  } catch (const invalid_input& e) {
    out << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hypothesis_error& e) {
    out << "hypothesis failure: " << e.what() << "\n";
    return 1;
  } catch (const numeric_error& e) {
    out << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}

inline int run_cli(int argc, char** argv) {
  CLI::App app{"simulator for delayed on/off neural networks with set-valued limits"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "override the output directory");
    sub->add_option("--threads", threads, "override the worker count");
  };
  CLI::App* check = app.add_subcommand("check", "verify the model hypotheses");
  check->add_option("config", config_path, "experiment config (JSON)")->required();
  CLI::App* simulate = app.add_subcommand("simulate", "integrate one configured run");
  add_common(simulate);
  CLI::App* converge = app.add_subcommand("converge", "sigmoidal-to-hard-limit sweep");
  add_common(converge);
  CLI::App* attractor = app.add_subcommand("attractor", "pullback attractor sweep");
  add_common(attractor);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_name() == "CallForHelp" ? 0 : 2;
  }

  const std::optional<std::string> out_opt =
      out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir);
  const std::optional<unsigned> threads_opt =
      threads == 0 ? std::nullopt : std::optional<unsigned>(threads);
  if (check->parsed()) return cmd_check(config_path);
  if (simulate->parsed()) return cmd_simulate(config_path, out_opt, threads_opt);
  if (converge->parsed()) return cmd_converge(config_path, out_opt, threads_opt);
  if (attractor->parsed()) return cmd_attractor(config_path, out_opt, threads_opt);
  return 2;
}

}  // namespace fadenet
