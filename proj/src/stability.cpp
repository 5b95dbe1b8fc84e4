#include "fbam/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "fbam/mittag_leffler.hpp"
#include "fbam/special.hpp"

namespace fbam {

namespace {

struct CommonConstants {
  double a, a_bar, xi, a_star, c_star, gg, F, F_exact, B;
};

CommonConstants common_constants(const BamNetwork& net) {
  if (!(net.delta < 1.0))
    throw std::invalid_argument("certify: certificates require delta < 1");
  CommonConstants k;
  k.a = *std::min_element(net.a.begin(), net.a.end());
  k.a_bar = *std::min_element(net.a_bar.begin(), net.a_bar.end());
  k.xi = std::min(k.a, k.a_bar);
  k.a_star = std::max(k.a, k.a_bar);
  k.c_star = std::max(net.c, net.c_bar);
  k.gg = gamma_fn(1.0 + net.delta) * gamma_fn(1.0 - net.delta);
  k.F = 1.0 / (k.xi * std::pow(net.mu, net.delta)) +
        std::pow(2.0, net.delta) * gamma_fn(1.0 - net.delta);
  k.F_exact = gamma_fn(1.0 + net.delta) * k.F;
  k.B = 1.0 + k.xi * gamma_fn(1.0 - net.delta) * std::pow(2.0 * net.mu, net.delta);
  return k;
}

void push_gate(StabilityCertificate& cert, const std::string& name,
               double value, double threshold) {
  cert.gates.push_back({name, value, threshold, value < threshold});
}

// sup over [-mu, 0] of (sum of layer distances to equilibrium) divided by
// the decay envelope E_delta(-rate (w + mu)^delta).
double history_envelope_amplitude(const std::vector<History>& phi,
                                  const std::vector<double>& star, double rate,
                                  double mu, double delta) {
  const int grid = 256;
  double worst = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double w = -mu + mu * (double)i / grid;
    double v = 0.0;
    for (size_t p = 0; p < phi.size(); ++p)
      v += std::abs(phi[p](w) - star[p]);
    const double env = ml_one(delta, -rate * std::pow(w + mu, delta));
    worst = std::max(worst, v / env);
  }
  return worst;
}

}  // namespace

StabilityCertificate certify_bounded(const BamNetwork& net,
                                     double omega_measured) {
  net.validate();
  if (!net.g.bound || !net.g_bar.bound)
    throw std::invalid_argument(
        "certify_bounded: both activations need a finite bound");
  if (!(omega_measured >= 0.0))
    throw std::invalid_argument("certify_bounded: omega must be >= 0");

  const CommonConstants k = common_constants(net);
  StabilityCertificate cert;
  cert.mode = ActivationMode::Bounded;
  cert.delta = net.delta;
  cert.a = k.a;
  cert.a_bar = k.a_bar;
  cert.xi = k.xi;
  cert.a_star = k.a_star;
  cert.c_star = k.c_star;
  cert.gg = k.gg;
  cert.F = k.F;
  cert.F_exact = k.F_exact;
  cert.B = k.B;
  cert.omega_measured = omega_measured;

  cert.g3 = (1.0 + k.gg) * k.F * (k.a_star * k.c_star / k.xi);
  cert.omega_budget = 1.0 - cert.g3;
  cert.W = (1.0 + k.gg) / (1.0 - omega_measured);
  cert.W_star =
      (3.0 + k.c_star * k.a_star * k.gg / k.xi) / (1.0 - omega_measured);
  cert.series_ratio = k.F * cert.W * (k.a_star * k.c_star / k.xi);

  push_gate(cert, "contraction", cert.g3, 1.0);
  push_gate(cert, "omega_budget", omega_measured, cert.omega_budget);
  push_gate(cert, "series_ratio", cert.series_ratio, 1.0);
  push_gate(cert, "neutral_coefficient", k.c_star, 1.0);

  cert.certified = true;
  for (const auto& g : cert.gates) cert.certified = cert.certified && g.pass;
  cert.verdict = cert.certified ? "bounded-certified" : "uncertified";
  return cert;
}

StabilityCertificate certify_unbounded(const BamNetwork& net,
                                       const Equilibrium& eq,
                                       double omega_measured) {
  net.validate();
  if ((int)eq.x_star.size() != net.n1 || (int)eq.y_star.size() != net.n2)
    throw std::invalid_argument("certify_unbounded: equilibrium size mismatch");
  if (!(omega_measured >= 0.0))
    throw std::invalid_argument("certify_unbounded: omega must be >= 0");

  const CommonConstants k = common_constants(net);
  StabilityCertificate cert;
  cert.mode = ActivationMode::Unbounded;
  cert.delta = net.delta;
  cert.a = k.a;
  cert.a_bar = k.a_bar;
  cert.xi = k.xi;
  cert.a_star = k.a_star;
  cert.c_star = k.c_star;
  cert.gg = k.gg;
  cert.F = k.F;
  cert.F_exact = k.F_exact;
  cert.B = k.B;
  cert.omega_measured = omega_measured;

  double sum_a = 0.0, sum_ab = 0.0;
  for (double v : net.a) sum_a += v;
  for (double v : net.a_bar) sum_ab += v;
  cert.A = std::max(sum_a, sum_ab);
  cert.U = cert.A * k.gg / k.xi;
  cert.B_star = std::max(k.B, k.F);

  // coupling strength at the equilibrium and raw Lipschitz mass
  const double L = net.g.lipschitz, M = net.g_bar.lipschitz;
  double theta = 0.0, nu = 0.0;
  for (int q = 0; q < net.n2; ++q)
    for (int p = 0; p < net.n1; ++p)
      for (int s = 0; s < net.n2; ++s) {
        const double dv = std::abs(net.d.at(q, p, s));
        if (dv == 0.0) continue;
        theta += dv * (L * total_mass(net.h.at(q, p, s)) *
                           std::abs(net.g_of_y(s, eq.y_star[s])) +
                       L * total_mass(net.k.at(q, p, s)) *
                           std::abs(net.g_of_y(q, eq.y_star[q])));
        nu += dv * L * L;
      }
  double theta_bar = 0.0, nu_bar = 0.0;
  for (int p = 0; p < net.n1; ++p)
    for (int q = 0; q < net.n2; ++q)
      for (int r = 0; r < net.n1; ++r) {
        const double dv = std::abs(net.d_bar.at(p, q, r));
        if (dv == 0.0) continue;
        theta_bar += dv * (M * total_mass(net.h_bar.at(p, q, r)) *
                               std::abs(net.g_bar_of_x(r, eq.x_star[r])) +
                           M * total_mass(net.k_bar.at(p, q, r)) *
                               std::abs(net.g_bar_of_x(p, eq.x_star[p])));
        nu_bar += dv * M * M;
      }
  cert.theta = theta;
  cert.theta_bar = theta_bar;
  cert.nu = nu;
  cert.nu_bar = nu_bar;
  cert.pi_const = std::max(theta, theta_bar);
  cert.kappa = std::max(nu, nu_bar);

  cert.h_star_mass = aggregate_kernel(net, ActivationMode::Unbounded).h_star.mass();
  cert.omega_budget_unbounded =
      cert.pi_const > 0.0 ? 1.0 / (4.0 * cert.pi_const)
                          : std::numeric_limits<double>::infinity();
  cert.c_star_threshold =
      std::min(1.0, 1.0 / (2.0 * cert.B_star * (1.0 + cert.U)));
  cert.lambda_ratio = 2.0 * cert.B_star * k.c_star * (1.0 + cert.U);
  cert.lambda_sum = cert.lambda_ratio < 1.0
                        ? 1.0 / (1.0 - cert.lambda_ratio)
                        : std::numeric_limits<double>::infinity();

  // largest eta = 2^-m keeping both eta-dependent products small
  cert.eta = 0.0;
  for (int m = 0; m <= 60; ++m) {
    const double eta = std::ldexp(1.0, -m);
    if (omega_measured * eta * cert.kappa * cert.h_star_mass < 0.25 &&
        omega_measured * (cert.pi_const + eta * cert.kappa * cert.h_star_mass) <
            0.5) {
      cert.eta = eta;
      break;
    }
  }

  push_gate(cert, "omega_pi", omega_measured * cert.pi_const, 0.25);
  push_gate(cert, "neutral_threshold", k.c_star, cert.c_star_threshold);
  push_gate(cert, "geometric_ratio", cert.lambda_ratio, 1.0);
  const double eta_prod =
      cert.eta > 0.0
          ? omega_measured * cert.eta * cert.kappa * cert.h_star_mass
          : std::numeric_limits<double>::infinity();
  push_gate(cert, "eta_exists", eta_prod, 0.25);
  push_gate(cert, "omega_pi_eta",
            omega_measured *
                (cert.pi_const + cert.eta * cert.kappa * cert.h_star_mass),
            0.5);

  const double u0 = history_envelope_amplitude(net.phi, eq.x_star, k.a,
                                               net.mu, net.delta);
  const double v0b = history_envelope_amplitude(net.phi_bar, eq.y_star,
                                                k.a_bar, net.mu, net.delta);
  cert.v0 = std::max(u0, v0b);
  cert.v0_small = cert.eta > 0.0 && cert.v0 * cert.lambda_sum < cert.eta / 4.0;
  push_gate(cert, "v0_smallness", cert.v0 * cert.lambda_sum, cert.eta / 4.0);

  cert.certified = true;
  for (const auto& g : cert.gates) cert.certified = cert.certified && g.pass;
  cert.verdict = cert.certified ? "unbounded-certified" : "uncertified";
  return cert;
}

EnvelopeReport check_envelope(const Trajectory& traj, const Equilibrium& eq,
                              double xi, double delta) {
  const int n1 = (int)eq.x_star.size();
  if (traj.cols != (int)(eq.x_star.size() + eq.y_star.size()))
    throw std::invalid_argument("check_envelope: dimension mismatch");
  EnvelopeReport rep;
  rep.times = traj.times;
  rep.ratios.resize(traj.rows());
  for (size_t i = 0; i < traj.rows(); ++i) {
    double u = 0.0, v = 0.0;
    for (int p = 0; p < n1; ++p)
      u += std::abs(traj.state(i, p) - eq.x_star[p]);
    for (int q = 0; q < traj.cols - n1; ++q)
      v += std::abs(traj.state(i, n1 + q) - eq.y_star[q]);
    const double V = std::max(u, v);
    const double env =
        i == 0 ? 1.0 : ml_one(delta, -xi * std::pow(traj.times[i], delta));
    rep.ratios[i] = V / env;
  }
  rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.c_fit = rep.max_ratio;

  // least-squares slope of the ratio over the final quartile
  const size_t n = traj.rows();
  const size_t start = n - n / 4;
  double st = 0.0, sr = 0.0, stt = 0.0, str = 0.0;
  const size_t m = n - start;
  for (size_t i = start; i < n; ++i) {
    st += traj.times[i];
    sr += rep.ratios[i];
    stt += traj.times[i] * traj.times[i];
    str += traj.times[i] * rep.ratios[i];
  }
  const double denom = m * stt - st * st;
  rep.final_quartile_slope = denom > 0.0 ? (m * str - st * sr) / denom : 0.0;

  const double span = traj.times[n - 1] - traj.times[start];
  const double mean = sr / m;
  // Non-increasing in trend: the ratio of a decaying solution saturates
  // toward its envelope constant from below, so a slightly positive slope is
  // expected numerically; up to 1% relative growth across the quartile
  // counts as flat.
  rep.pass = std::isfinite(rep.max_ratio) &&
             rep.final_quartile_slope * span <= 1e-2 * (mean + 1e-300);
  return rep;
}

void write_certificate_report(const StabilityCertificate& cert,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_certificate_report: cannot open " + path);
  char buf[40];
  auto kv = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << key << " = " << buf << "\n";
  };
  out << "mode = "
      << (cert.mode == ActivationMode::Bounded ? "bounded" : "unbounded")
      << "\n";
  kv("delta", cert.delta);
  kv("xi", cert.xi);
  kv("a_star", cert.a_star);
  kv("c_star", cert.c_star);
  kv("gamma_product", cert.gg);
  kv("F", cert.F);
  kv("F_exact", cert.F_exact);
  kv("B", cert.B);
  kv("a", cert.a);
  kv("a_bar", cert.a_bar);
  kv("omega_measured", cert.omega_measured);
  if (cert.mode == ActivationMode::Bounded) {
    kv("g3", cert.g3);
    kv("omega_budget", cert.omega_budget);
    kv("W", cert.W);
    kv("W_star", cert.W_star);
    kv("series_ratio", cert.series_ratio);
  } else {
    kv("A", cert.A);
    kv("U", cert.U);
    kv("B_star", cert.B_star);
    kv("theta", cert.theta);
    kv("theta_bar", cert.theta_bar);
    kv("nu", cert.nu);
    kv("nu_bar", cert.nu_bar);
    kv("pi", cert.pi_const);
    kv("kappa", cert.kappa);
    kv("h_star_mass", cert.h_star_mass);
    kv("omega_budget_unbounded", cert.omega_budget_unbounded);
    kv("c_star_threshold", cert.c_star_threshold);
    kv("eta", cert.eta);
    kv("lambda_ratio", cert.lambda_ratio);
    kv("lambda_sum", cert.lambda_sum);
    kv("v0", cert.v0);
    out << "v0_small = " << (cert.v0_small ? "true" : "false") << "\n";
  }
  for (const auto& g : cert.gates) {
    kv(("gate." + g.name + ".value").c_str(), g.value);
    kv(("gate." + g.name + ".threshold").c_str(), g.threshold);
    out << "gate." << g.name << ".pass = " << (g.pass ? "true" : "false")
        << "\n";
  }
  out << "certified = " << (cert.certified ? "true" : "false") << "\n";
  out << "verdict = " << cert.verdict << "\n";
}

}  // namespace fbam
