#include "fbam/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fbam {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string env_name(const std::string& key) {
  std::string v = "FBAM_";
  for (char ch : key)
    v += ch == '.' ? '_' : (char)std::toupper((unsigned char)ch);
  return v;
}

// Reads typed values out of the key-value map, remembering which keys were
// consumed so leftovers can be reported as unknown.
class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    used_.insert(key);
    return it->second;
  }

  std::string require_str(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end())
      throw config_error("missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  double num(const std::string& key, double fallback) {
    return has(key) ? require_num(key) : fallback;
  }

  double require_num(const std::string& key) {
    std::string v = require_str(key);
    try {
      size_t pos = 0;
      double x = std::stod(v, &pos);
      if (pos != v.size())
        throw config_error("key '" + key + "': trailing characters in '" + v + "'");
      return x;
    } catch (const config_error&) {
      throw;
    } catch (const std::exception&) {
      throw config_error("key '" + key + "': expected a number, got '" + v + "'");
    }
  }

  int require_int(const std::string& key) {
    double x = require_num(key);
    int n = (int)x;
    if ((double)n != x)
      throw config_error("key '" + key + "': expected an integer");
    return n;
  }

  // a.1 .. a.n, every entry required.
  std::vector<double> vec(const std::string& base, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
      out[i] = require_num(base + "." + std::to_string(i + 1));
    return out;
  }

  // Like vec but entries default to fill.
  std::vector<double> vec_or(const std::string& base, int n, double fill) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
      std::string key = base + "." + std::to_string(i + 1);
      out[i] = has(key) ? require_num(key) : fill;
    }
    return out;
  }

  Tensor3 tensor(const std::string& base, int d0, int d1, int d2) {
    Tensor3 t(d0, d1, d2, 0.0);
    for (int i = 0; i < d0; ++i)
      for (int j = 0; j < d1; ++j)
        for (int k = 0; k < d2; ++k) {
          std::string key = base + "." + std::to_string(i + 1) + "." +
                            std::to_string(j + 1) + "." + std::to_string(k + 1);
          if (has(key)) t.at(i, j, k) = require_num(key);
        }
    return t;
  }

  void check_consumed() const {
    for (const auto& [key, value] : kv_)
      if (!used_.count(key))
        throw config_error("unknown key '" + key + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

Activation activation_from(const std::string& key, const std::string& name) {
  if (name == "tanh") return Activation::make_tanh();
  if (name == "asinh") return Activation::make_asinh();
  throw config_error("key '" + key + "': unknown activation '" + name +
                     "' (expected tanh or asinh)");
}

KernelFamily kernel_from(Reader& r, const std::string& base) {
  double weight = r.num(base + ".weight", 1.0);
  double rate = r.num(base + ".rate", 1.0);
  return KernelFamily::uniform(KernelSpec::exponential(weight, rate));
}

std::vector<History> histories_from(Reader& r, const std::string& base, int n) {
  std::vector<History> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i)
    out.push_back(History::constant(r.num(base + "." + std::to_string(i + 1), 0.0)));
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) +
                         ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw config_error("line " + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

void apply_env_overrides(std::map<std::string, std::string>& kv) {
  for (auto& [key, value] : kv)
    if (const char* v = std::getenv(env_name(key).c_str())) value = v;
}

ExperimentConfig build_config(std::map<std::string, std::string> kv) {
  Reader r(std::move(kv));
  ExperimentConfig cfg;

  cfg.mode = r.require_str("mode");
  if (cfg.mode != "simulate" && cfg.mode != "certify" && cfg.mode != "sync" &&
      cfg.mode != "halanay")
    throw config_error("key 'mode': unknown mode '" + cfg.mode + "'");
  cfg.out_dir = r.str("out", "out");

  if (cfg.mode == "halanay") {
    HalanayProblem& hp = cfg.halanay;
    hp.gamma_p = r.require_num("halanay.gamma");
    hp.r = r.require_num("halanay.r");
    hp.c = r.num("halanay.c", 0.0);
    hp.mu = r.num("halanay.mu", 1.0);
    hp.kernel = KernelSpec::exponential(r.num("halanay.kernel.weight", 1.0),
                                        r.require_num("halanay.kernel.rate"));
    hp.history = History::constant(r.num("halanay.phi", 0.0));
  } else {
    BamNetwork& net = cfg.network;
    net.n1 = r.require_int("n1");
    net.n2 = r.require_int("n2");
    if (net.n1 < 1 || net.n2 < 1)
      throw config_error("keys 'n1'/'n2': layer sizes must be >= 1");
    net.delta = r.require_num("delta");
    net.mu = r.num("mu", 1.0);
    net.c = r.num("c", 0.0);
    net.c_bar = r.num("c_bar", 0.0);
    net.a = r.vec("a", net.n1);
    net.a_bar = r.vec("a_bar", net.n2);
    net.I = r.vec_or("I", net.n1, 0.0);
    net.J = r.vec_or("J", net.n2, 0.0);
    net.d = r.tensor("d", net.n2, net.n1, net.n2);
    net.d_bar = r.tensor("d_bar", net.n1, net.n2, net.n1);
    net.g = activation_from("g", r.str("g", "tanh"));
    net.g_bar = activation_from("g_bar", r.str("g_bar", "tanh"));
    net.k = kernel_from(r, "k");
    net.h = kernel_from(r, "h");
    net.k_bar = kernel_from(r, "k_bar");
    net.h_bar = kernel_from(r, "h_bar");
    net.phi = histories_from(r, "phi", net.n1);
    net.phi_bar = histories_from(r, "phi_bar", net.n2);
    std::string conv = r.str("convention", "infinite");
    if (conv == "infinite")
      net.convention = DelayConvention::InfiniteMemory;
    else if (conv == "window")
      net.convention = DelayConvention::FiniteWindow;
    else
      throw config_error("key 'convention': expected infinite or window, got '" +
                         conv + "'");
  }

  cfg.solver.step = r.num("solver.step", 0.02);
  cfg.solver.t_end = r.num("solver.t_end", 10.0);
  cfg.solver.corrector_iterations = (int)r.num("solver.corrector_iterations", 1);
  std::string mem = r.str("solver.memory", "full");
  if (mem == "full")
    cfg.solver.memory = SolverConfig::Memory::Full;
  else if (mem == "windowed")
    cfg.solver.memory = SolverConfig::Memory::Windowed;
  else
    throw config_error("key 'solver.memory': expected full or windowed");
  cfg.solver.window = r.num("solver.window", 0.0);

  if (cfg.mode == "sync") {
    cfg.sync.beta = r.num("sync.beta", 1.0);
    cfg.sync.beta_bar = r.num("sync.beta_bar", 1.0);
    if (cfg.sync.beta < 0 || cfg.sync.beta_bar < 0)
      throw config_error("keys 'sync.beta'/'sync.beta_bar': gains must be >= 0");
    // Response initial data; defaults to the drive histories.
    bool have_resp = false;
    for (int i = 1; i <= cfg.network.n1 && !have_resp; ++i)
      have_resp = r.has("sync.phi." + std::to_string(i));
    for (int j = 1; j <= cfg.network.n2 && !have_resp; ++j)
      have_resp = r.has("sync.phi_bar." + std::to_string(j));
    if (have_resp) {
      cfg.sync.response_phi = histories_from(r, "sync.phi", cfg.network.n1);
      cfg.sync.response_phi_bar =
          histories_from(r, "sync.phi_bar", cfg.network.n2);
    } else {
      cfg.sync.response_phi = cfg.network.phi;
      cfg.sync.response_phi_bar = cfg.network.phi_bar;
    }
  }

  r.check_consumed();

  try {
    if (cfg.mode == "halanay") {
      cfg.halanay.validate();
      cfg.solver.validate(cfg.halanay.mu);
    } else {
      cfg.network.validate();
      cfg.solver.validate(cfg.network.mu);
    }
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }

  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto kv = parse_config_text(buf.str());
  apply_env_overrides(kv);
  ExperimentConfig cfg = build_config(kv);
  cfg.raw = std::move(kv);
  return cfg;
}

bool sweepable_key(const std::string& key) {
  static const std::set<std::string> keys = {
      "delta",     "c",           "c_bar",        "mu",
      "solver.step", "solver.t_end", "sync.beta", "sync.beta_bar",
      "halanay.gamma", "halanay.r", "halanay.c"};
  return keys.count(key) != 0;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open artifact '" + path + "'");
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= (unsigned char)buf[i];
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

namespace {

std::string dir_of(const std::string& path) {
  size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
  return buf;
}

}  // namespace

void write_manifest(const ExperimentConfig& cfg,
                    const std::vector<std::string>& artifacts,
                    double wall_seconds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write manifest '" + path + "'");
  out << "tool_version = 1.0.0\n";
  char wall[64];
  std::snprintf(wall, sizeof wall, "%.3f", wall_seconds);
  out << "wall_clock_seconds = " << wall << "\n";
  for (const auto& [key, value] : cfg.raw)
    out << "config." << key << " = " << value << "\n";
  std::string dir = dir_of(path);
  for (const auto& name : artifacts)
    out << "artifact." << name << " = " << hex64(fnv1a64_file(dir + "/" + name))
        << "\n";
}

bool verify_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw config_error("cannot open manifest '" + manifest_path + "'");
  std::string dir = dir_of(manifest_path);
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    if (line.rfind("artifact.", 0) != 0) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) return false;
    std::string name = trim(line.substr(9, eq - 9));
    std::string want = trim(line.substr(eq + 1));
    if (hex64(fnv1a64_file(dir + "/" + name)) != want) return false;
    any = true;
  }
  return any;
}

}  // namespace fbam
