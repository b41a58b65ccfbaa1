#include "dscaler/config.hpp"

#include "dscaler/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace dscaler {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE) throw ConfigError(key + ": not a number: '" + text + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0' || errno == ERANGE) throw ConfigError(key + ": not an integer: '" + text + "'");
  return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t[0] == '-' || *end != '\0' || errno == ERANGE) {
    throw ConfigError(key + ": not a non-negative integer: '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + text + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Reads keys from the tree and remembers which were seen, so leftovers can be reported.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }
  bool has(const std::string& key) const {
    return static_cast<bool>(tree_.get_child_optional(pt::ptree::path_type(key, '.')));
  }

  void get(const std::string& key, double& out) {
    if (auto v = raw(key)) out = to_double(key, *v);
  }
  void get(const std::string& key, Index& out) {
    if (auto v = raw(key)) out = static_cast<Index>(to_integer(key, *v));
  }
  void get(const std::string& key, int& out) {
    if (auto v = raw(key)) out = static_cast<int>(to_integer(key, *v));
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (auto v = raw(key)) out = to_unsigned(key, *v);
  }
  void get(const std::string& key, bool& out) {
    if (auto v = raw(key)) out = to_bool(key, *v);
  }
  void get(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) throw ConfigError("key outside any section: '" + section + "'");
      for (const auto& [key, value] : body) {
        (void)value;
        const std::string full = section + "." + key;
        if (!used_.count(full)) throw ConfigError("unknown config key '" + full + "'");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

KernelSpec base_kernel(const KernelSection& k) {
  if (k.family == "brownian") return brownian_motion(k.T0);
  if (k.family == "ou") return ornstein_uhlenbeck(k.sigma2, k.eta, k.T0);
  throw ConfigError("kernel family '" + k.family + "' has no built-in form");
}

void read_class_a(Reader& r, ClassAParams& p) {
  r.get("class_a.x", p.x);
  r.get("class_a.d_l", p.d_l);
  r.get("class_a.d_u", p.d_u);
  r.get("class_a.c_l", p.c_l);
  r.get("class_a.c_u", p.c_u);
  r.get("class_a.K0", p.K0);
  r.get("class_a.alpha", p.alpha);
  r.get("class_a.B", p.B);
  r.get("class_a.beta", p.beta);
  r.get("class_a.gamma", p.gamma);
  r.get("class_a.tau", p.tau);
  r.get("class_a.B1", p.B1);
  r.get("class_a.B2", p.B2);
  r.get("class_a.B3", p.B3);
  r.get("class_a.B4", p.B4);
}

const char* const kClassAKeys[] = {"x", "d_l", "d_u", "c_l", "c_u", "K0", "alpha", "B",
                                   "beta", "gamma", "tau", "B1", "B2", "B3", "B4"};

}  // namespace

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like section.key=value: '" + text + "'");
  const std::string key = trim(text.substr(0, eq));
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() || key.find('.', dot + 1) != std::string::npos) {
    throw ConfigError("override key must be section.key: '" + key + "'");
  }
  return {key, trim(text.substr(eq + 1))};
}

RunConfig parse_config(const std::string& text, const std::vector<Override>& overrides,
                       const std::optional<std::string>& env_seed) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  if (env_seed) tree.put(pt::ptree::path_type("sweep.seed", '.'), trim(*env_seed));
  for (const auto& [key, value] : overrides) tree.put(pt::ptree::path_type(key, '.'), value);

  Reader r(tree);
  RunConfig cfg;

  KernelSection& k = cfg.kernel;
  r.get("kernel.family", k.family);
  r.get("kernel.T0", k.T0);
  r.get("kernel.sigma2", k.sigma2);
  r.get("kernel.eta", k.eta);
  r.get("kernel.table", k.table);
  if (k.family != "brownian" && k.family != "ou" && k.family != "custom") {
    throw ConfigError("kernel.family must be brownian, ou or custom, got '" + k.family + "'");
  }
  if (!(k.T0 > 0.0)) throw ConfigError("kernel.T0 must be positive");
  if (k.family == "ou" && !(k.sigma2 > 0.0 && k.eta > 0.0)) {
    throw ConfigError("kernel.sigma2 and kernel.eta must be positive");
  }
  if (k.family == "custom" && k.table.empty()) throw ConfigError("custom kernel needs kernel.table");

  std::string mode = k.family == "custom" ? "none" : "default";
  r.get("kernel.class_a", mode);
  bool any_class_key = false;
  for (const char* key : kClassAKeys) any_class_key = any_class_key || r.has(std::string("class_a.") + key);
  if (mode == "none") {
    if (any_class_key) throw ConfigError("class_a section given but kernel.class_a = none");
    k.class_a.reset();
  } else if (mode == "default" || mode == "explicit") {
    ClassAParams p;
    if (k.family != "custom") {
      p = default_class_a(base_kernel(k));
    } else if (mode == "default") {
      throw ConfigError("custom kernels have no default class parameters; use kernel.class_a = explicit");
    }
    read_class_a(r, p);
    const auto bad = p.violations();
    if (!bad.empty()) throw ConfigError("class_a: " + bad.front());
    k.class_a = p;
  } else {
    throw ConfigError("kernel.class_a must be default, explicit or none, got '" + mode + "'");
  }

  ChannelConfig& ch = cfg.channel;
  r.get("channel.h_lower", ch.h_lower);
  r.get("channel.h_upper", ch.h_upper);
  r.get("channel.K_uses", ch.K_uses);
  std::string gain_mode = "constant";
  r.get("channel.gain_mode", gain_mode);
  double h = 1.0;
  std::uint64_t gain_seed = 0;
  r.get("channel.h", h);
  r.get("channel.gain_seed", gain_seed);
  if (gain_mode == "constant") {
    ch.gain_mode = ConstantGain{h};
  } else if (gain_mode == "seeded_uniform") {
    ch.gain_mode = SeededUniformGain{gain_seed};
  } else {
    throw ConfigError("channel.gain_mode must be constant or seeded_uniform, got '" + gain_mode + "'");
  }
  ch.validate();

  SweepSection& s = cfg.sweep;
  if (auto v = r.raw("sweep.N_list")) {
    s.N_list.clear();
    for (const auto& item : split(*v, ',')) s.N_list.push_back(static_cast<Index>(to_integer("sweep.N_list", item)));
  }
  if (auto v = r.raw("sweep.schedules")) {
    s.schedules.clear();
    for (const auto& item : split(*v, ',')) s.schedules.push_back(parse_schedule(item));
  }
  r.get("sweep.d0", s.d0);
  r.get("sweep.simulate", s.simulate);
  r.get("sweep.seed", s.seed);
  r.get("sweep.trials", s.trials);
  r.get("sweep.sim_max_N", s.sim_max_N);
  r.get("sweep.discretization", s.discretization);

  r.get("spectrum.source", cfg.spectrum.source);
  r.get("spectrum.count", cfg.spectrum.count);
  r.get("spectrum.N", cfg.spectrum.N);
  if (cfg.spectrum.source != "analytic" && cfg.spectrum.source != "nystrom" && cfg.spectrum.source != "sampled") {
    throw ConfigError("spectrum.source must be analytic, nystrom or sampled");
  }
  if (cfg.spectrum.count < 0) throw ConfigError("spectrum.count must be non-negative");

  r.get("bounds.N", cfg.bounds.N);
  if (auto v = r.raw("bounds.schedule")) cfg.bounds.schedule = parse_schedule(*v);
  r.get("bounds.simulate", cfg.bounds.simulate);

  r.get("sim.noise_variance", cfg.sim.noise_variance);
  r.get("sim.recon_grid", cfg.sim.recon_grid);
  r.get("sim.dump_trials", cfg.sim.dump_trials);
  if (!(cfg.sim.noise_variance >= 0.0)) throw ConfigError("sim.noise_variance must be non-negative");

  r.get("check.lipschitz_grid", cfg.check.lipschitz_grid);
  r.get("check.eigenfunction_grid", cfg.check.eigenfunction_grid);
  r.get("check.k_max", cfg.check.k_max);
  r.get("check.envelope_count", cfg.check.envelope_count);

  r.get("output.dir", cfg.output.dir);
  r.get("output.rows_file", cfg.output.rows_file);
  r.get("output.summary_file", cfg.output.summary_file);
  r.get("output.spectrum_file", cfg.output.spectrum_file);

  r.get("tolerances.rate_rel", cfg.tolerances.rate_rel);
  r.get("tolerances.tail_rel", cfg.tolerances.tail_rel);
  r.get("tolerances.fit_span", cfg.tolerances.fit_span);

  r.get("run.jobs", cfg.jobs);

  r.reject_unknown();
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<Override>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  std::optional<std::string> env_seed;
  if (const char* e = std::getenv("DSCALER_SEED")) env_seed = std::string(e);
  return parse_config(text.str(), overrides, env_seed);
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream o;
  const KernelSection& k = cfg.kernel;
  o << "[kernel]\n";
  o << "family = " << k.family << "\n";
  o << "T0 = " << fmt(k.T0) << "\n";
  o << "sigma2 = " << fmt(k.sigma2) << "\n";
  o << "eta = " << fmt(k.eta) << "\n";
  if (!k.table.empty()) o << "table = " << k.table << "\n";
  o << "class_a = " << (k.class_a ? "explicit" : "none") << "\n";
  if (k.class_a) {
    const ClassAParams& p = *k.class_a;
    o << "\n[class_a]\n";
    o << "x = " << fmt(p.x) << "\n";
    o << "d_l = " << fmt(p.d_l) << "\n";
    o << "d_u = " << fmt(p.d_u) << "\n";
    o << "c_l = " << p.c_l << "\n";
    o << "c_u = " << p.c_u << "\n";
    o << "K0 = " << p.K0 << "\n";
    o << "alpha = " << fmt(p.alpha) << "\n";
    o << "B = " << fmt(p.B) << "\n";
    o << "beta = " << fmt(p.beta) << "\n";
    o << "gamma = " << fmt(p.gamma) << "\n";
    o << "tau = " << fmt(p.tau) << "\n";
    o << "B1 = " << fmt(p.B1) << "\n";
    o << "B2 = " << fmt(p.B2) << "\n";
    o << "B3 = " << fmt(p.B3) << "\n";
    o << "B4 = " << fmt(p.B4) << "\n";
  }

  const ChannelConfig& ch = cfg.channel;
  o << "\n[channel]\n";
  o << "h_lower = " << fmt(ch.h_lower) << "\n";
  o << "h_upper = " << fmt(ch.h_upper) << "\n";
  if (const auto* c = std::get_if<ConstantGain>(&ch.gain_mode)) {
    o << "gain_mode = constant\n";
    o << "h = " << fmt(c->h) << "\n";
  } else {
    o << "gain_mode = seeded_uniform\n";
    o << "gain_seed = " << std::get<SeededUniformGain>(ch.gain_mode).seed << "\n";
  }
  o << "K_uses = " << ch.K_uses << "\n";

  const SweepSection& s = cfg.sweep;
  o << "\n[sweep]\n";
  o << "N_list = ";
  for (std::size_t i = 0; i < s.N_list.size(); ++i) o << (i ? ", " : "") << s.N_list[i];
  o << "\nschedules = ";
  for (std::size_t i = 0; i < s.schedules.size(); ++i) o << (i ? ", " : "") << s.schedules[i].name();
  o << "\n";
  o << "d0 = " << fmt(s.d0) << "\n";
  o << "simulate = " << (s.simulate ? "true" : "false") << "\n";
  o << "seed = " << s.seed << "\n";
  o << "trials = " << s.trials << "\n";
  o << "sim_max_N = " << s.sim_max_N << "\n";
  o << "discretization = " << (s.discretization ? "true" : "false") << "\n";

  o << "\n[spectrum]\n";
  o << "source = " << cfg.spectrum.source << "\n";
  o << "count = " << cfg.spectrum.count << "\n";
  o << "N = " << cfg.spectrum.N << "\n";

  o << "\n[bounds]\n";
  o << "N = " << cfg.bounds.N << "\n";
  o << "schedule = " << cfg.bounds.schedule.name() << "\n";
  o << "simulate = " << (cfg.bounds.simulate ? "true" : "false") << "\n";

  o << "\n[sim]\n";
  o << "noise_variance = " << fmt(cfg.sim.noise_variance) << "\n";
  o << "recon_grid = " << cfg.sim.recon_grid << "\n";
  if (!cfg.sim.dump_trials.empty()) o << "dump_trials = " << cfg.sim.dump_trials << "\n";

  o << "\n[check]\n";
  o << "lipschitz_grid = " << cfg.check.lipschitz_grid << "\n";
  o << "eigenfunction_grid = " << cfg.check.eigenfunction_grid << "\n";
  o << "k_max = " << cfg.check.k_max << "\n";
  o << "envelope_count = " << cfg.check.envelope_count << "\n";

  o << "\n[output]\n";
  o << "dir = " << cfg.output.dir << "\n";
  o << "rows_file = " << cfg.output.rows_file << "\n";
  o << "summary_file = " << cfg.output.summary_file << "\n";
  o << "spectrum_file = " << cfg.output.spectrum_file << "\n";

  o << "\n[tolerances]\n";
  o << "rate_rel = " << fmt(cfg.tolerances.rate_rel) << "\n";
  o << "tail_rel = " << fmt(cfg.tolerances.tail_rel) << "\n";
  o << "fit_span = " << fmt(cfg.tolerances.fit_span) << "\n";

  o << "\n[run]\n";
  o << "jobs = " << cfg.jobs << "\n";
  return o.str();
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MatrixXd load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read kernel table '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) row.push_back(to_double("kernel.table", cell));
    rows.push_back(std::move(row));
  }
  const Index n = static_cast<Index>(rows.size());
  MatrixXd table(n, n);
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
      throw ConfigError("kernel table '" + path + "' is not square");
    }
    for (Index j = 0; j < n; ++j) table(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return table;
}

KernelSpec build_kernel(const RunConfig& cfg) {
  KernelSpec spec;
  if (cfg.kernel.family == "custom") {
    try {
      spec = custom_grid(load_table_csv(cfg.kernel.table), cfg.kernel.T0);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("kernel table: ") + e.what());
    }
  } else {
    spec = base_kernel(cfg.kernel);
  }
  spec.classA = cfg.kernel.class_a;
  return spec;
}

SweepConfig build_sweep_config(const RunConfig& cfg, const KernelSpec& kernel) {
  SweepConfig s;
  s.kernel = kernel;
  s.N_list = cfg.sweep.N_list;
  s.schedules = cfg.sweep.schedules;
  s.ch = cfg.channel;
  s.d0 = cfg.sweep.d0;
  s.simulate = cfg.sweep.simulate;
  s.seed = cfg.sweep.seed;
  s.trials = cfg.sweep.trials;
  s.sim_max_N = cfg.sweep.sim_max_N;
  s.discretization = cfg.sweep.discretization;
  s.noise_variance = cfg.sim.noise_variance;
  s.recon_grid = cfg.sim.recon_grid;
  s.jobs = cfg.jobs;
  return s;
}

}  // namespace dscaler
