#include "pstruct/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace pstruct::config {

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::ConfigError, key + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double x = 0.0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) fail(key, "expected a number, got '" + s + "'");
  return x;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& s) {
  Int x = 0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) fail(key, "expected an integer, got '" + s + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& s) {
  const auto t = trim(s);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  fail(key, "expected true or false, got '" + s + "'");
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

std::string u64(std::uint64_t x) { return std::to_string(x); }

struct Entry {
  std::string section;
  std::string key;
  std::function<void(const std::string&, const std::string&)> set;
  std::function<std::string()> get;
};

std::vector<Entry> registry(ExperimentConfig& c) {
  std::vector<Entry> r;
  const auto real = [&r](std::string s, std::string k, double& x) {
    r.push_back({s, k, [&x](const std::string& key, const std::string& v) { x = to_double(key, v); },
                 [&x] { return format_double(x); }});
  };
  const auto integer = [&r](std::string s, std::string k, int& x) {
    r.push_back({s, k, [&x](const std::string& key, const std::string& v) { x = to_int<int>(key, v); },
                 [&x] { return std::to_string(x); }});
  };
  const auto reals = [&r](std::string s, std::string k, std::vector<double>& x) {
    r.push_back({s, k,
                 [&x](const std::string& key, const std::string& v) {
                   x.clear();
                   for (const auto& item : split(v)) x.push_back(to_double(key, item));
                 },
                 [&x] { return join(x, format_double); }});
  };
  const auto seeds = [&r](std::string s, std::string k, std::vector<std::uint64_t>& x) {
    r.push_back({s, k,
                 [&x](const std::string& key, const std::string& v) {
                   x.clear();
                   for (const auto& item : split(v)) x.push_back(to_int<std::uint64_t>(key, item));
                 },
                 [&x] { return join(x, u64); }});
  };

  r.push_back({"run", "command", [&c](const std::string& key, const std::string& v) {
                 try {
                   c.command = command_from_string(trim(v));
                 } catch (const Error&) {
                   fail(key, "unknown command '" + v + "'");
                 }
               },
               [&c] { return to_string(c.command); }});
  integer("run", "threads", c.threads);

  r.push_back({"domain", "kind", [&c](const std::string& key, const std::string& v) {
                 try {
                   c.kind = grid::domain_kind_from_string(trim(v));
                 } catch (const Error&) {
                   fail(key, "unknown domain kind '" + v + "'");
                 }
               },
               [&c] { return std::string(grid::to_string(c.kind)); }});
  integer("domain", "n", c.n);

  real("params", "p", c.p);
  real("params", "mu", c.mu);
  r.push_back({"params", "structure", [&c](const std::string& key, const std::string& v) {
                 const auto t = trim(v);
                 if (t == "full") c.structure = constitutive::Structure::FullGradient;
                 else if (t == "symmetric") c.structure = constitutive::Structure::SymmetricGradient;
                 else fail(key, "expected full or symmetric, got '" + v + "'");
               },
               [&c] {
                 return std::string(c.structure == constitutive::Structure::FullGradient ? "full" : "symmetric");
               }});

  auto& s = c.solver;
  real("solver", "eta", s.eta);
  real("solver", "outer_tol", s.outer_tol);
  integer("solver", "max_outer", s.max_outer);
  real("solver", "inner_tol", s.inner_tol);
  integer("solver", "inner_max", s.inner_max);
  r.push_back({"solver", "continuation",
               [&s](const std::string& key, const std::string& v) { s.continuation.enabled = to_bool(key, v); },
               [&s] { return std::string(s.continuation.enabled ? "true" : "false"); }});
  real("solver", "eta0", s.continuation.eta0);
  real("solver", "mu0", s.continuation.mu0);
  real("solver", "ratio", s.continuation.ratio);
  integer("solver", "steps", s.continuation.steps);
  real("solver", "eta_floor", s.continuation.eta_floor);
  real("solver", "mu_floor", s.continuation.mu_floor);
  integer("solver", "stall_window", s.continuation.stall_window);

  r.push_back({"rhs", "id", [&c](const std::string&, const std::string& v) { c.rhs.id = trim(v); },
               [&c] { return c.rhs.id; }});
  real("rhs", "amplitude", c.rhs.amplitude);
  r.push_back({"rhs", "seed",
               [&c](const std::string& key, const std::string& v) { c.rhs.seed = to_int<std::uint64_t>(key, v); },
               [&c] { return u64(c.rhs.seed); }});

  r.push_back({"output", "directory",
               [&c](const std::string& key, const std::string& v) {
                 if (trim(v).empty()) fail(key, "empty directory");
                 c.output.directory = trim(v);
               },
               [&c] { return c.output.directory.string(); }});
  r.push_back({"output", "formats",
               [&c](const std::string& key, const std::string& v) {
                 c.output.json = c.output.csv = c.output.fields = false;
                 for (const auto& f : split(v)) {
                   if (f == "json") c.output.json = true;
                   else if (f == "csv") c.output.csv = true;
                   else if (f == "fields") c.output.fields = true;
                   else fail(key, "unknown format '" + f + "'");
                 }
               },
               [&c] {
                 std::vector<std::string> f;
                 if (c.output.json) f.emplace_back("json");
                 if (c.output.csv) f.emplace_back("csv");
                 if (c.output.fields) f.emplace_back("fields");
                 return join(f, [](const std::string& x) { return x; });
               }});

  integer("constants", "samples", c.constants.samples);
  r.push_back({"constants", "seed",
               [&c](const std::string& key, const std::string& v) {
                 c.constants.seed = to_int<std::uint64_t>(key, v);
               },
               [&c] { return u64(c.constants.seed); }});
  reals("constants", "qs", c.constants.qs);

  r.push_back({"audit", "estimates",
               [&c](const std::string&, const std::string& v) { c.audit.estimates = split(v); },
               [&c] { return join(c.audit.estimates, [](const std::string& x) { return x; }); }});
  reals("audit", "mus", c.audit.mus);
  reals("audit", "amplitudes", c.audit.amplitudes);
  seeds("audit", "seeds", c.audit.seeds);
  real("audit", "q", c.audit.q);
  real("audit", "holder_q", c.audit.holder_q);
  r.push_back({"audit", "pair_budget",
               [&c](const std::string& key, const std::string& v) {
                 c.audit.pair_budget = to_int<std::size_t>(key, v);
               },
               [&c] { return std::to_string(c.audit.pair_budget); }});

  r.push_back({"sweep", "estimate", [&c](const std::string&, const std::string& v) { c.sweep.estimate = trim(v); },
               [&c] { return c.sweep.estimate; }});
  reals("sweep", "ps", c.sweep.ps);
  reals("sweep", "mus", c.sweep.mus);
  reals("sweep", "amplitudes", c.sweep.amplitudes);
  seeds("sweep", "seeds", c.sweep.seeds);
  real("sweep", "q", c.sweep.q);

  real("reconstruct", "residual_tol", c.residual_tol);
  return r;
}

void assign(std::vector<Entry>& reg, const std::string& section, const std::string& key,
            const std::string& value) {
  const std::string full = section + "." + key;
  for (auto& e : reg) {
    if (e.section == section && e.key == key) {
      e.set(full, value);
      return;
    }
  }
  fail(full, "unknown key");
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string to_string(Command c) {
  switch (c) {
    case Command::Solve: return "solve";
    case Command::Audit: return "audit";
    case Command::Constants: return "constants";
    case Command::Reconstruct: return "reconstruct";
    case Command::Sweep: return "sweep";
  }
  return "solve";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::Solve, Command::Audit, Command::Constants, Command::Reconstruct, Command::Sweep})
    if (to_string(c) == name) return c;
  throw Error(ErrorCode::ConfigError, "run.command: unknown command '" + name + "'");
}

ExperimentConfig parse_config(const std::string& ini_text, const std::vector<std::string>& overrides,
                              ExperimentConfig base) {
  ExperimentConfig c = std::move(base);
  auto reg = registry(c);
  boost::property_tree::ptree tree;
  std::istringstream in(ini_text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) fail(section, "key outside of a section");
    for (const auto& [key, value] : body) assign(reg, section, key, value.data());
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      fail(trim(o.substr(0, eq)), "override must look like section.key=value");
    }
    assign(reg, trim(o.substr(0, dot)), trim(o.substr(dot + 1, eq - dot - 1)), o.substr(eq + 1));
  }
  if (c.n < 8) fail("domain.n", "needs n >= 8");
  if (!(c.p > 1.0)) fail("params.p", "needs p > 1");
  if (!(c.mu >= 0.0)) fail("params.mu", "needs mu >= 0");
  if (c.threads < 1) fail("run.threads", "needs at least one thread");
  if (!(c.rhs.amplitude > 0.0)) fail("rhs.amplitude", "needs a positive amplitude");
  if (!(c.solver.outer_tol > 0.0)) fail("solver.outer_tol", "needs a positive tolerance");
  if (c.solver.max_outer < 1) fail("solver.max_outer", "needs max_outer >= 1");
  if (!(c.solver.continuation.ratio > 0.0 && c.solver.continuation.ratio < 1.0))
    fail("solver.ratio", "needs 0 < ratio < 1");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string to_ini(const ExperimentConfig& c) {
  ExperimentConfig copy = c;
  const auto reg = registry(copy);
  std::string out, section;
  for (const auto& e : reg) {
    if (e.section != section) {
      out += (section.empty() ? "[" : "\n[") + e.section + "]\n";
      section = e.section;
    }
    out += e.key + " = " + e.get() + "\n";
  }
  return out;
}

}  // namespace pstruct::config
