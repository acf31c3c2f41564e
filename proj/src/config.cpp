#include "crossdiff/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace crossdiff {

namespace {

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) { out.push_back(cur); cur.clear(); }
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          error(lineno, "unterminated section header");
          continue;
        }
        section = trim(line.substr(1, line.size() - 2));
        if (sections_.count(section) == 0) sections_[section] = {};
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos) {
        error(lineno, "expected key = value");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        error(lineno, "empty key");
        continue;
      }
      sections_[section][key] = Entry{value, lineno, false};
    }
  }

  bool has(const std::string& sec, const std::string& key) {
    auto s = sections_.find(sec);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  const Entry* get(const std::string& sec, const std::string& key) {
    auto s = sections_.find(sec);
    if (s == sections_.end()) return nullptr;
    auto e = s->second.find(key);
    if (e == s->second.end()) return nullptr;
    e->second.used = true;
    return &e->second;
  }

  double number(const std::string& sec, const std::string& key, double fallback) {
    const Entry* e = get(sec, key);
    if (!e) return fallback;
    return parse_number(*e);
  }

  long long integer(const std::string& sec, const std::string& key, long long fallback) {
    const Entry* e = get(sec, key);
    if (!e) return fallback;
    const double d = parse_number(*e);
    if (d != std::floor(d)) error(e->line, "'" + key + "' must be an integer");
    return static_cast<long long>(d);
  }

  bool boolean(const std::string& sec, const std::string& key, bool fallback) {
    const Entry* e = get(sec, key);
    if (!e) return fallback;
    const std::string& v = e->value;
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    error(e->line, "'" + key + "' must be on/off");
    return fallback;
  }

  std::vector<double> numbers(const std::string& sec, const std::string& key,
                              std::vector<double> fallback) {
    const Entry* e = get(sec, key);
    if (!e) return fallback;
    std::vector<double> out;
    for (const std::string& tok : split_values(e->value)) {
      char* end = nullptr;
      const double d = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        error(e->line, "'" + key + "' has a non-numeric entry '" + tok + "'");
        return fallback;
      }
      out.push_back(d);
    }
    if (out.empty()) error(e->line, "'" + key + "' has no values");
    return out;
  }

  std::string text(const std::string& sec, const std::string& key,
                   const std::string& fallback) {
    const Entry* e = get(sec, key);
    return e ? e->value : fallback;
  }

  void require(const std::string& sec, const std::string& key) {
    if (!has(sec, key))
      errors_.push_back("missing required key '" + key + "' in [" + sec + "]");
  }

  void error(int line, const std::string& msg) {
    errors_.push_back("line " + std::to_string(line) + ": " + msg);
  }

  void error(const std::string& msg) { errors_.push_back(msg); }

  std::vector<std::string>& errors() { return errors_; }

 private:
  double parse_number(const Entry& e) {
    char* end = nullptr;
    const double d = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0') {
      error(e.line, "expected a number, got '" + e.value + "'");
      return 0.0;
    }
    return d;
  }

  std::map<std::string, Section> sections_;
  std::vector<std::string> errors_;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error("config error:\n  " + join(messages, "\n  ")),
      messages_(std::move(messages)) {}

int RunConfig::resolved_snapshot_stride() const {
  if (snapshot_stride > 0) return snapshot_stride;
  return std::max(1, scheme.n_steps / 10);
}

RunConfig parse_config(const std::string& text) {
  Parser p(text);
  RunConfig cfg;

  cfg.dim = static_cast<int>(p.integer("grid", "dim", 1));
  {
    std::vector<double> ext = p.numbers("grid", "extents", {64});
    cfg.extents.clear();
    for (double e : ext) cfg.extents.push_back(static_cast<int>(e));
    cfg.lengths = p.numbers("grid", "lengths", {1.0});
  }

  p.require("system", "d");
  p.require("system", "gamma");
  p.require("system", "rho");
  p.require("system", "s");
  {
    std::vector<double> d = p.numbers("system", "d", {1.0, 1.0});
    std::vector<double> ga = p.numbers("system", "gamma", {0.5, 1.5});
    std::vector<double> rho = p.numbers("system", "rho", {1.0, 1.0});
    std::vector<double> s = p.numbers("system", "s", {1.0, 1.0, 1.0, 1.0});
    cfg.params.species = 2;
    if (d.size() != 2) p.error("[system] d needs two values");
    if (ga.size() != 2) p.error("[system] gamma needs two values");
    if (rho.size() != 2) p.error("[system] rho needs two values");
    if (s.size() != 4) p.error("[system] s needs four values (s11 s12 s21 s22)");
    for (int i = 0; i < 2; ++i) {
      if (i < static_cast<int>(d.size())) cfg.params.d[i] = d[i];
      if (i < static_cast<int>(ga.size())) cfg.params.gamma[i] = ga[i];
      if (i < static_cast<int>(rho.size())) cfg.params.rho[i] = rho[i];
    }
    if (s.size() == 4) {
      cfg.params.s(0, 0) = s[0];
      cfg.params.s(0, 1) = s[1];
      cfg.params.s(1, 0) = s[2];
      cfg.params.s(1, 1) = s[3];
    }
    cfg.reactions = p.boolean("system", "reactions", true);
  }

  cfg.scheme.tau = p.number("scheme", "tau", 1e-3);
  cfg.scheme.n_steps = static_cast<int>(p.integer("scheme", "n_steps", 100));
  cfg.scheme.fp_tol = p.number("scheme", "fp_tol", 1e-10);
  cfg.scheme.fp_max = static_cast<int>(p.integer("scheme", "fp_max", 500));
  cfg.scheme.newton_fallback = p.boolean("scheme", "newton_fallback", true);
  cfg.scheme.linear_tol = p.number("scheme", "linear_tol", 1e-12);
  cfg.scheme.linear_max = static_cast<int>(p.integer("scheme", "linear_max", 0));
  cfg.scheme.mbar_floor = p.number("scheme", "mbar_floor", 0.0);
  cfg.scheme.inversion.abs_tol = p.number("scheme", "inversion_tol", 1e-12);

  {
    const std::string prof = p.text("initial", "profile", "constant");
    if (prof == "constant") cfg.profile = InitialProfile::Constant;
    else if (prof == "gaussian-bump") cfg.profile = InitialProfile::GaussianBump;
    else if (prof == "checkerboard") cfg.profile = InitialProfile::Checkerboard;
    else if (prof == "file") cfg.profile = InitialProfile::File;
    else p.error("[initial] unknown profile '" + prof + "'");
    cfg.init_value = p.numbers("initial", "value", {1.0, 1.0});
    cfg.init_center = p.numbers("initial", "center", {0.5});
    cfg.init_width = p.number("initial", "width", 0.1);
    cfg.init_amplitude = p.numbers("initial", "amplitude", {1.0, 1.0});
    cfg.init_floor = p.number("initial", "floor", 0.1);
    cfg.init_file = p.text("initial", "path", "");
  }

  cfg.out_dir = p.text("output", "directory", "out");
  cfg.snapshot_stride = static_cast<int>(p.integer("output", "snapshot_stride", 0));
  cfg.audits = p.boolean("output", "audits", true);
  cfg.entropy_slack_c = p.number("output", "entropy_slack_c", 10.0);
  cfg.entropy_K = p.number("output", "entropy_K", 0.0);
  cfg.seed = static_cast<unsigned long long>(p.integer("", "seed", 0));

  // semantic validation (collect every violated rule)
  auto& err = p.errors();
  if (cfg.dim != 1 && cfg.dim != 2) err.push_back("[grid] dim must be 1 or 2");
  if (static_cast<int>(cfg.extents.size()) != cfg.dim)
    err.push_back("[grid] extents needs one value per axis");
  if (static_cast<int>(cfg.lengths.size()) != cfg.dim)
    err.push_back("[grid] lengths needs one value per axis");
  for (int e : cfg.extents)
    if (e < 2) err.push_back("[grid] extents must be >= 2");
  for (double l : cfg.lengths)
    if (!(l > 0.0)) err.push_back("[grid] lengths must be > 0");
  for (const std::string& v : cfg.params.violations())
    err.push_back("[system] " + v);
  if (!(cfg.scheme.tau > 0.0)) err.push_back("[scheme] tau must be > 0");
  if (cfg.scheme.n_steps < 0) err.push_back("[scheme] n_steps must be >= 0");
  if (!(cfg.scheme.fp_tol > 0.0)) err.push_back("[scheme] fp_tol must be > 0");
  if (cfg.scheme.fp_max < 1) err.push_back("[scheme] fp_max must be >= 1");
  if (!(cfg.scheme.linear_tol > 0.0)) err.push_back("[scheme] linear_tol must be > 0");
  const double rho_bar = std::max(cfg.params.rho[0], cfg.params.rho[1]);
  if (!(rho_bar * cfg.scheme.tau < 0.5))
    err.push_back("[scheme] rho*tau < 1/2 is required (rho_bar=" + fmt(rho_bar) +
                  ", tau=" + fmt(cfg.scheme.tau) + ")");
  if (cfg.profile == InitialProfile::Constant) {
    if (cfg.init_value.size() != 2) err.push_back("[initial] value needs two entries");
    for (double v : cfg.init_value)
      if (!(v > 0.0)) err.push_back("[initial] constant values must be > 0 (strict positivity)");
  }
  if (cfg.profile == InitialProfile::GaussianBump ||
      cfg.profile == InitialProfile::Checkerboard) {
    if (!(cfg.init_floor > 0.0))
      err.push_back("[initial] floor must be > 0 (strict positivity)");
  }
  if (cfg.profile == InitialProfile::GaussianBump) {
    if (!(cfg.init_width > 0.0)) err.push_back("[initial] width must be > 0");
    if (cfg.init_amplitude.size() != 2)
      err.push_back("[initial] amplitude needs two entries");
    if (cfg.init_center.size() != static_cast<size_t>(cfg.dim) &&
        cfg.init_center.size() != static_cast<size_t>(2 * cfg.dim))
      err.push_back("[initial] center needs dim (shared) or 2*dim (per species) values");
  }
  if (cfg.profile == InitialProfile::File && cfg.init_file.empty())
    err.push_back("[initial] file profile needs path");
  if (cfg.snapshot_stride < 0) err.push_back("[output] snapshot_stride must be >= 0");

  if (!err.empty()) throw ConfigError(err);
  return cfg;
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "seed = " << cfg.seed << "\n\n";
  os << "[grid]\n";
  os << "dim = " << cfg.dim << "\n";
  os << "extents =";
  for (int e : cfg.extents) os << " " << e;
  os << "\nlengths =";
  for (double l : cfg.lengths) os << " " << fmt(l);
  os << "\n\n[system]\n";
  os << "d = " << fmt(cfg.params.d[0]) << " " << fmt(cfg.params.d[1]) << "\n";
  os << "gamma = " << fmt(cfg.params.gamma[0]) << " " << fmt(cfg.params.gamma[1]) << "\n";
  os << "rho = " << fmt(cfg.params.rho[0]) << " " << fmt(cfg.params.rho[1]) << "\n";
  os << "s = " << fmt(cfg.params.s(0, 0)) << " " << fmt(cfg.params.s(0, 1)) << " "
     << fmt(cfg.params.s(1, 0)) << " " << fmt(cfg.params.s(1, 1)) << "\n";
  os << "reactions = " << (cfg.reactions ? "on" : "off") << "\n";
  os << "\n[scheme]\n";
  os << "tau = " << fmt(cfg.scheme.tau) << "\n";
  os << "n_steps = " << cfg.scheme.n_steps << "\n";
  os << "fp_tol = " << fmt(cfg.scheme.fp_tol) << "\n";
  os << "fp_max = " << cfg.scheme.fp_max << "\n";
  os << "newton_fallback = " << (cfg.scheme.newton_fallback ? "on" : "off") << "\n";
  os << "linear_tol = " << fmt(cfg.scheme.linear_tol) << "\n";
  os << "linear_max = " << cfg.scheme.linear_max << "\n";
  os << "mbar_floor = " << fmt(cfg.scheme.mbar_floor) << "\n";
  os << "inversion_tol = " << fmt(cfg.scheme.inversion.abs_tol) << "\n";
  os << "\n[initial]\n";
  switch (cfg.profile) {
    case InitialProfile::Constant:
      os << "profile = constant\nvalue =";
      for (double v : cfg.init_value) os << " " << fmt(v);
      os << "\n";
      break;
    case InitialProfile::GaussianBump:
      os << "profile = gaussian-bump\ncenter =";
      for (double v : cfg.init_center) os << " " << fmt(v);
      os << "\nwidth = " << fmt(cfg.init_width) << "\namplitude =";
      for (double v : cfg.init_amplitude) os << " " << fmt(v);
      os << "\nfloor = " << fmt(cfg.init_floor) << "\n";
      break;
    case InitialProfile::Checkerboard:
      os << "profile = checkerboard\namplitude =";
      for (double v : cfg.init_amplitude) os << " " << fmt(v);
      os << "\nfloor = " << fmt(cfg.init_floor) << "\n";
      break;
    case InitialProfile::File:
      os << "profile = file\npath = " << cfg.init_file << "\n";
      break;
  }
  os << "\n[output]\n";
  os << "directory = " << cfg.out_dir << "\n";
  os << "snapshot_stride = " << cfg.snapshot_stride << "\n";
  os << "audits = " << (cfg.audits ? "on" : "off") << "\n";
  os << "entropy_slack_c = " << fmt(cfg.entropy_slack_c) << "\n";
  os << "entropy_K = " << fmt(cfg.entropy_K) << "\n";
  return os.str();
}

Grid make_grid(const RunConfig& cfg) {
  if (cfg.dim == 1) return Grid::line(cfg.extents[0], cfg.lengths[0]);
  return Grid::rectangle(cfg.extents[0], cfg.extents[1], cfg.lengths[0],
                         cfg.lengths[1]);
}

CrossDiffusionSystem make_system(const RunConfig& cfg) {
  return CrossDiffusionSystem(cfg.params, cfg.reactions);
}

SpeciesState make_initial_state(const RunConfig& cfg, const Grid& g) {
  const int ns = cfg.params.species;
  SpeciesState st;
  for (int i = 0; i < ns; ++i) st.u.push_back(Field::Zero(g.cells()));
  switch (cfg.profile) {
    case InitialProfile::Constant:
      for (int i = 0; i < ns; ++i)
        st.u[i] = Field::Constant(g.cells(), cfg.init_value[i]);
      break;
    case InitialProfile::GaussianBump: {
      const bool per_species =
          cfg.init_center.size() == static_cast<size_t>(2 * cfg.dim);
      for (int i = 0; i < ns; ++i) {
        for (int c = 0; c < g.cells(); ++c) {
          const double cx = per_species ? cfg.init_center[i * cfg.dim]
                                        : cfg.init_center[0];
          double r2 = std::pow(g.center_x(c) - cx, 2);
          if (cfg.dim == 2) {
            const double cy = per_species ? cfg.init_center[i * cfg.dim + 1]
                                          : cfg.init_center[1];
            r2 += std::pow(g.center_y(c) - cy, 2);
          }
          st.u[i][c] = cfg.init_floor +
                       cfg.init_amplitude[i] *
                           std::exp(-r2 / (2.0 * cfg.init_width * cfg.init_width));
        }
      }
      break;
    }
    case InitialProfile::Checkerboard:
      for (int i = 0; i < ns; ++i)
        for (int c = 0; c < g.cells(); ++c) {
          const int ix = c % g.extent(0);
          const int iy = c / g.extent(0);
          const bool hi = (ix + iy + i) % 2 == 0;
          st.u[i][c] = cfg.init_floor + (hi ? cfg.init_amplitude[i] : 0.0);
        }
      break;
    case InitialProfile::File:
      return read_fields_csv(cfg.init_file, g, ns);
  }
  return st;
}

SpeciesState read_fields_csv(const std::string& path, const Grid& g, int species) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open initial data file: " + path);
  SpeciesState st;
  for (int i = 0; i < species; ++i) st.u.push_back(Field::Zero(g.cells()));
  std::string line;
  int row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) { header_seen = true; continue; }  // column header row
    const std::vector<std::string> toks = split_values(line);
    if (static_cast<int>(toks.size()) != species)
      throw std::runtime_error("initial data file: wrong column count");
    if (row >= g.cells())
      throw std::runtime_error("initial data file: too many rows for grid");
    for (int i = 0; i < species; ++i) st.u[i][row] = std::stod(toks[i]);
    ++row;
  }
  if (row != g.cells())
    throw std::runtime_error("initial data file: row count does not match grid");
  return st;
}

}  // namespace crossdiff
