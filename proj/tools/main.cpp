// Experiment runner: loads a flat key=value config and executes one of the
// simulate / certify / sync / halanay pipelines, or a parameter sweep that
// repeats the configured pipeline across a list of values.  Artifacts land
// in the output directory together with a checksummed manifest.
//
// Exit codes: 0 success, 2 configuration/validation failure, 3 numeric
// failure (blow-up, non-contraction, divergent kernel, accuracy loss),
// 4 certification gate failure when --require-certified is set.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbam/config.hpp"
#include "fbam/kernels.hpp"
#include "fbam/halanay.hpp"
#include "fbam/mittag_leffler.hpp"
#include "fbam/model.hpp"
#include "fbam/solver.hpp"
#include "fbam/stability.hpp"
#include "fbam/sync.hpp"

namespace fs = std::filesystem;
using namespace fbam;

namespace {

constexpr const char* kVersion = "1.0.0";

struct RunOutcome {
  int code = 0;
  double c_fit = std::nan("");
  double max_ratio = std::nan("");
  std::string verdict;
  std::string error;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> omega_grid(double t_end) {
  std::vector<double> g(40);
  for (int i = 0; i < 40; ++i) g[i] = (i + 1) * t_end / 40.0;
  return g;
}

bool bounded_activations(const BamNetwork& net) {
  return net.g.bound.has_value() && net.g_bar.bound.has_value();
}

// Certificate for the configured network: bounded-activation arithmetic when
// both activations carry a global bound, Lipschitz-only arithmetic otherwise.
StabilityCertificate make_certificate(const BamNetwork& net,
                                      const Equilibrium& eq, double t_end) {
  ActivationMode mode = bounded_activations(net) ? ActivationMode::Bounded
                                                 : ActivationMode::Unbounded;
  AggregateKernel agg = aggregate_kernel(net, mode);
  double xi = net.a[0];
  for (double v : net.a) xi = std::min(xi, v);
  for (double v : net.a_bar) xi = std::min(xi, v);
  KernelConditionReport kc =
      check_condition_k1(agg.K, xi, net.delta, omega_grid(t_end));
  if (mode == ActivationMode::Bounded)
    return certify_bounded(net, kc.omega_star);
  return certify_unbounded(net, eq, kc.omega_star);
}

void write_envelope_report(const EnvelopeReport& env, const Equilibrium& eq,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  for (size_t i = 0; i < eq.x_star.size(); ++i)
    out << "x_star." << i + 1 << " = " << fmt17(eq.x_star[i]) << "\n";
  for (size_t i = 0; i < eq.y_star.size(); ++i)
    out << "y_star." << i + 1 << " = " << fmt17(eq.y_star[i]) << "\n";
  out << "equilibrium_residual = " << fmt17(eq.residual) << "\n";
  out << "c_fit = " << fmt17(env.c_fit) << "\n";
  out << "max_ratio = " << fmt17(env.max_ratio) << "\n";
  out << "final_quartile_slope = " << fmt17(env.final_quartile_slope) << "\n";
  out << "pass = " << (env.pass ? "true" : "false") << "\n";
}

void write_halanay_report(const HalanayReport& rep, const std::string& path) {
  const HalanayConstants& c = rep.constants;
  std::ofstream out(path, std::ios::binary);
  out << "V = " << fmt17(c.V) << "\n";
  out << "B = " << fmt17(c.B) << "\n";
  out << "gg = " << fmt17(c.gg) << "\n";
  out << "M = " << fmt17(c.M) << "\n";
  out << "M_budget = " << fmt17(c.M_budget) << "\n";
  out << "W = " << fmt17(c.W) << "\n";
  out << "series_ratio = " << fmt17(c.series_ratio) << "\n";
  out << "y0 = " << fmt17(c.y0) << "\n";
  out << "gate = " << (c.gate ? "true" : "false") << "\n";
  out << "claim_holds = " << (rep.claim_holds ? "true" : "false") << "\n";
  out << "first_interval_holds = "
      << (rep.first_interval_holds ? "true" : "false") << "\n";
}

void write_sync_error_csv(const SyncRun& run, int n1, int n2,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  out << "t";
  for (int p = 0; p < n1; ++p) out << ",e_" << p + 1;
  for (int q = 0; q < n2; ++q) out << ",ebar_" << q + 1;
  out << "\n";
  for (size_t i = 0; i < run.joint.rows(); ++i) {
    out << fmt17(run.joint.times[i]);
    for (int j = 0; j < run.dim; ++j) out << "," << fmt17(run.error(i, j));
    out << "\n";
  }
}

// Writes one block (offset, width columns) of a joint trajectory in the
// standard trajectory CSV layout.
void write_block_csv(const Trajectory& traj, int offset,
                     const std::vector<std::string>& names,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  out << "t";
  for (const auto& n : names) out << "," << n;
  out << "\n";
  for (size_t i = 0; i < traj.rows(); ++i) {
    out << fmt17(traj.times[i]);
    for (size_t j = 0; j < names.size(); ++j)
      out << "," << fmt17(traj.state(i, offset + (int)j));
    out << "\n";
  }
}

std::vector<std::string> state_names(int n1, int n2) {
  std::vector<std::string> names;
  for (int p = 0; p < n1; ++p) names.push_back("x_" + std::to_string(p + 1));
  for (int q = 0; q < n2; ++q) names.push_back("y_" + std::to_string(q + 1));
  return names;
}

// One full pipeline run.  Throws nothing: failures are captured in the
// outcome so sweep workers can record them and continue.
RunOutcome execute(const ExperimentConfig& cfg, const std::string& out_dir,
                   bool require_certified) {
  RunOutcome oc;
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> artifacts;
  try {
    fs::create_directories(out_dir);

    if (cfg.mode == "halanay") {
      HalanayReport rep = halanay_validate(cfg.halanay, cfg.solver);
      std::ofstream csv(out_dir + "/halanay.csv", std::ios::binary);
      csv << "t,y,lhs,bound\n";
      for (size_t i = 0; i < rep.traj.rows(); ++i)
        csv << fmt17(rep.traj.times[i]) << "," << fmt17(rep.traj.state(i, 0))
            << "," << fmt17(rep.lhs[i]) << "," << fmt17(rep.bound[i]) << "\n";
      csv.close();
      write_halanay_report(rep, out_dir + "/halanay_report.txt");
      artifacts = {"halanay.csv", "halanay_report.txt"};
      oc.verdict = rep.claim_holds ? "claim-holds" : "claim-fails";
      if (require_certified && !(rep.constants.gate && rep.claim_holds))
        oc.code = 4;
    } else {
      const BamNetwork& net = cfg.network;
      Equilibrium eq = find_equilibrium(net);
      StabilityCertificate cert = make_certificate(net, eq, cfg.solver.t_end);
      write_certificate_report(cert, out_dir + "/certificate.txt");
      artifacts.push_back("certificate.txt");
      oc.verdict = cert.verdict;

      double xi = cert.xi;
      if (cfg.mode == "simulate") {
        Trajectory traj = simulate(net, cfg.solver);
        write_trajectory_csv(traj, state_names(net.n1, net.n2),
                             out_dir + "/trajectory.csv");
        EnvelopeReport env = check_envelope(traj, eq, xi, net.delta);
        write_envelope_report(env, eq, out_dir + "/envelope.txt");
        artifacts.push_back("trajectory.csv");
        artifacts.push_back("envelope.txt");
        oc.c_fit = env.c_fit;
        oc.max_ratio = env.max_ratio;
      } else if (cfg.mode == "sync") {
        SyncRun run = synchronize(net, cfg.sync, cfg.solver);
        write_sync_error_csv(run, net.n1, net.n2, out_dir + "/sync_error.csv");
        auto names = state_names(net.n1, net.n2);
        write_block_csv(run.joint, 0, names, out_dir + "/drive.csv");
        write_block_csv(run.joint, run.dim, names, out_dir + "/response.csv");
        artifacts.push_back("sync_error.csv");
        artifacts.push_back("drive.csv");
        artifacts.push_back("response.csv");
        if (bounded_activations(net)) {
          AggregateKernel agg = aggregate_kernel(net, ActivationMode::Bounded);
          double xi_aug = xi + std::min(cfg.sync.beta, cfg.sync.beta_bar);
          KernelConditionReport kc = check_condition_k1(
              agg.K, xi_aug, net.delta, omega_grid(cfg.solver.t_end));
          StabilityCertificate sc = sync_certificate(
              net, cfg.sync.beta, cfg.sync.beta_bar, kc.omega_star);
          write_certificate_report(sc, out_dir + "/sync_certificate.txt");
          artifacts.push_back("sync_certificate.txt");
          oc.verdict = sc.verdict;
          cert = sc;
        }
        // Error envelope against the decay profile of the augmented rates.
        double xi_err = xi + std::min(cfg.sync.beta, cfg.sync.beta_bar);
        double max_ratio = 0.0;
        for (size_t i = 0; i < run.joint.rows(); ++i) {
          double t = run.joint.times[i];
          double env = ml_one(net.delta, -xi_err * std::pow(t, net.delta));
          max_ratio = std::max(max_ratio, run.max_abs_error(i) / env);
        }
        oc.max_ratio = max_ratio;
        oc.c_fit = max_ratio;
      }

      if (require_certified && !cert.certified) oc.code = 4;
    }

    double wall = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    write_manifest(cfg, artifacts, wall, out_dir + "/manifest.txt");
  } catch (const config_error& e) {
    oc.code = 2;
    oc.error = e.what();
  } catch (const std::invalid_argument& e) {
    oc.code = 2;
    oc.error = e.what();
  } catch (const std::exception& e) {
    oc.code = 3;
    oc.error = e.what();
  }
  return oc;
}

std::map<std::string, std::string> load_kv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto kv = parse_config_text(buf.str());
  apply_env_overrides(kv);
  return kv;
}

ExperimentConfig finish_config(std::map<std::string, std::string> kv,
                               const std::string& step,
                               const std::string& t_end) {
  if (!step.empty()) kv["solver.step"] = step;
  if (!t_end.empty()) kv["solver.t_end"] = t_end;
  ExperimentConfig cfg = build_config(kv);
  cfg.raw = std::move(kv);
  return cfg;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    size_t b = item.find_first_not_of(" \t");
    size_t e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional bidirectional network toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_override, step_override, tend_override;
  bool require_certified = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "configuration file")->required();
    cmd->add_option("--out", out_override, "output directory");
    cmd->add_option("--step", step_override, "override solver.step");
    cmd->add_option("--t-end", tend_override, "override solver.t_end");
    cmd->add_flag("--require-certified", require_certified,
                  "exit 4 when the certificate gates fail");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "execute one configured run");
  add_common(run_cmd);

  std::string sweep_param, sweep_values;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "repeat the run across parameter values");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--param", sweep_param, "config key to vary")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto kv = load_kv(config_path);

    if (run_cmd->parsed()) {
      ExperimentConfig cfg =
          finish_config(kv, step_override, tend_override);
      std::string out_dir =
          out_override.empty() ? cfg.out_dir : out_override;
      RunOutcome oc = execute(cfg, out_dir, require_certified);
      if (!oc.error.empty()) std::fprintf(stderr, "error: %s\n", oc.error.c_str());
      if (oc.code == 0)
        std::printf("run complete: %s (verdict: %s)\n", out_dir.c_str(),
                    oc.verdict.c_str());
      return oc.code;
    }

    // sweep
    if (!sweepable_key(sweep_param))
      throw config_error("--param '" + sweep_param +
                         "' is not a sweepable scalar key");
    std::vector<std::string> values = split_csv(sweep_values);

    // Validate the base config once so a broken file fails fast.
    finish_config(kv, step_override, tend_override);

    std::string base_out;
    {
      ExperimentConfig base = finish_config(kv, step_override, tend_override);
      base_out = out_override.empty() ? base.out_dir : out_override;
    }
    fs::create_directories(base_out);

    std::string param_dir = sweep_param;
    for (char& ch : param_dir)
      if (ch == '.') ch = '-';

    std::vector<std::future<RunOutcome>> jobs;
    std::vector<std::string> run_dirs;
    for (const auto& value : values) {
      std::string dir = base_out + "/" + param_dir + "_" + value;
      run_dirs.push_back(dir);
      jobs.push_back(std::async(std::launch::async, [=]() {
        RunOutcome oc;
        try {
          auto kv2 = kv;
          kv2[sweep_param] = value;
          ExperimentConfig cfg =
              finish_config(std::move(kv2), step_override, tend_override);
          oc = execute(cfg, dir, require_certified);
        } catch (const config_error& e) {
          oc.code = 2;
          oc.error = e.what();
        } catch (const std::exception& e) {
          oc.code = 3;
          oc.error = e.what();
        }
        return oc;
      }));
    }

    std::ofstream summary(base_out + "/sweep_summary.csv", std::ios::binary);
    summary << "param,value,c_fit,max_ratio,verdict,error\n";
    int worst = 0;
    for (size_t i = 0; i < jobs.size(); ++i) {
      RunOutcome oc = jobs[i].get();
      summary << sweep_param << "," << values[i] << ","
              << (std::isnan(oc.c_fit) ? "" : fmt17(oc.c_fit)) << ","
              << (std::isnan(oc.max_ratio) ? "" : fmt17(oc.max_ratio)) << ","
              << oc.verdict << "," << oc.error << "\n";
      if (!oc.error.empty())
        std::fprintf(stderr, "sweep %s=%s: %s\n", sweep_param.c_str(),
                     values[i].c_str(), oc.error.c_str());
      worst = std::max(worst, oc.code == 0 ? 0 : (oc.code == 4 ? 4 : 0));
    }
    std::printf("sweep complete: %zu runs, summary at %s/sweep_summary.csv\n",
                values.size(), base_out.c_str());
    // Per-run failures are recorded in the summary; only the gate flag
    // escalates the sweep exit status.
    return require_certified ? worst : 0;
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
