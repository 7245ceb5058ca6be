#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tileplate/harness.hpp"

namespace tileplate {

using nlohmann::json;

HookeField MaterialSpec::field() const {
  if (kind == Kind::Isotropic) return HookeField::isotropic(lambda, mu);
  return HookeField::cell_periodic(tables[0], tables[1]);
}

double parse_number(const std::string& text) {
  auto one = [&](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      throw ConfigError("not a number: '" + text + "'");
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return one(text);
  const double a = one(std::string_view(text).substr(0, slash));
  const double b = one(std::string_view(text).substr(slash + 1));
  if (b == 0) throw ConfigError("zero denominator in '" + text + "'");
  return a / b;
}

namespace {

double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_number(j.get<std::string>());
  throw ConfigError(where + ": expected a number or an \"a/b\" string");
}

int integer(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(where + ": expected an integer");
  return static_cast<int>(v);
}

template <class T, class F>
void opt(const json& block, const char* key, T& target, F conv, const std::string& where) {
  if (block.contains(key)) target = conv(block.at(key), where + "." + key);
}

void check_keys(const json& block, const std::string& where, std::initializer_list<const char*> keys) {
  if (!block.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = block.begin(); it != block.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

CellTable parse_table(const json& j, const std::string& where) {
  check_keys(j, where, {"n_cross", "n_slices", "lambda", "mu"});
  CellTable t;
  t.n_cross = integer(j.at("n_cross"), where + ".n_cross");
  t.n_slices = j.contains("n_slices") ? integer(j.at("n_slices"), where + ".n_slices") : 1;
  const json& lam = j.at("lambda");
  const json& mu = j.at("mu");
  if (!lam.is_array() || !mu.is_array() || lam.size() != mu.size())
    throw ConfigError(where + ": lambda and mu must be arrays of equal length");
  for (std::size_t i = 0; i < lam.size(); ++i)
    t.tensors.push_back(isotropic_hooke(number(lam[i], where + ".lambda"), number(mu[i], where + ".mu")));
  return t;
}

SolverConfig parse_solver(const json& j, SolverConfig s, const std::string& where) {
  check_keys(j, where, {"method", "tol", "maxiter", "preconditioner"});
  if (j.contains("method")) {
    const std::string m = j.at("method").get<std::string>();
    if (m == "cg") s.method = SolverMethod::CG;
    else if (m == "direct") s.method = SolverMethod::Direct;
    else throw ConfigError(where + ".method: expected \"cg\" or \"direct\"");
  }
  opt(j, "tol", s.tol, number, where);
  opt(j, "maxiter", s.maxiter, integer, where);
  if (j.contains("preconditioner")) {
    const std::string p = j.at("preconditioner").get<std::string>();
    if (p == "jacobi") s.preconditioner = Preconditioner::Jacobi;
    else if (p == "none") s.preconditioner = Preconditioner::None;
    else throw ConfigError(where + ".preconditioner: expected \"jacobi\" or \"none\"");
  }
  return s;
}

}  // namespace

void RunConfig::validate() const {
  if (levels.empty()) throw ConfigError("sweep: levels list is empty");
  if (!(L > 0) || !(l > 0) || !(l < L)) throw ConfigError("geometry: need 0 < l < L");
  if (res.nb < 1 || res.nh < 1 || res.nt < 1) throw ConfigError("mesh: nb, nh, nt must be positive");
  if (cell_n < 2 || cell_n % 2) throw ConfigError("mesh: cell_n must be even and at least 2");
  if (cell_slices < 1) throw ConfigError("mesh: cell_slices must be positive");
  double last_ratio = INFINITY;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto [eps, delta] = levels[i];
    const std::string where = "sweep.levels[" + std::to_string(i) + "]";
    try {
      PlateParams::make(L, l, eps, delta);
    } catch (const GeometryError& e) {
      throw ConfigError(where + ": " + e.what());
    }
    const double ratio = delta / eps;
    if (!(ratio < last_ratio)) throw ConfigError(where + ": delta/eps must decrease strictly across levels");
    last_ratio = ratio;
  }
  fine_solver.validate();
  cell_solver.validate();
  macro_solver.validate();
  try {
    if (material.kind == MaterialSpec::Kind::Isotropic) validate_hooke(isotropic_hooke(material.lambda, material.mu));
    else material.field();
  } catch (const MaterialError& e) {
    throw ConfigError(std::string("material: ") + e.what());
  }
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"geometry", "mesh", "material", "load", "sweep", "solver"});
  RunConfig c;
  try {
    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      check_keys(g, "geometry", {"L", "l"});
      opt(g, "L", c.L, number, "geometry");
      opt(g, "l", c.l, number, "geometry");
    }
    if (j.contains("mesh")) {
      const json& m = j.at("mesh");
      check_keys(m, "mesh", {"nb", "nh", "nt", "cell_n", "cell_slices", "macro_membrane", "macro_beam",
                             "micro_axial", "micro_cross", "micro_gauss"});
      opt(m, "nb", c.res.nb, integer, "mesh");
      opt(m, "nh", c.res.nh, integer, "mesh");
      opt(m, "nt", c.res.nt, integer, "mesh");
      opt(m, "cell_n", c.cell_n, integer, "mesh");
      opt(m, "cell_slices", c.cell_slices, integer, "mesh");
      opt(m, "macro_membrane", c.macro_membrane, integer, "mesh");
      opt(m, "macro_beam", c.macro_beam, integer, "mesh");
      opt(m, "micro_axial", c.micro.n_axial, integer, "mesh");
      opt(m, "micro_cross", c.micro.n_cross, integer, "mesh");
      opt(m, "micro_gauss", c.micro.gauss, integer, "mesh");
    }
    if (j.contains("material")) {
      const json& m = j.at("material");
      check_keys(m, "material", {"kind", "lambda", "mu", "family1", "family2"});
      const std::string kind = m.value("kind", std::string("isotropic"));
      if (kind == "isotropic") {
        opt(m, "lambda", c.material.lambda, number, "material");
        opt(m, "mu", c.material.mu, number, "material");
      } else if (kind == "cell_periodic") {
        c.material.kind = MaterialSpec::Kind::CellPeriodic;
        c.material.tables[0] = parse_table(m.at("family1"), "material.family1");
        c.material.tables[1] = parse_table(m.at("family2"), "material.family2");
      } else {
        throw ConfigError("material.kind: expected \"isotropic\" or \"cell_periodic\"");
      }
    }
    if (j.contains("load")) {
      const json& L = j.at("load");
      check_keys(L, "load", {"f", "kappa"});
      if (L.contains("f")) {
        const json& f = L.at("f");
        if (!f.is_array() || f.size() != 3) throw ConfigError("load.f: expected three numbers");
        for (int i = 0; i < 3; ++i) c.load.f(i) = number(f[i], "load.f");
      }
      opt(L, "kappa", c.load.kappa, number, "load");
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      check_keys(s, "sweep", {"levels"});
      const json& lv = s.at("levels");
      if (!lv.is_array()) throw ConfigError("sweep.levels: expected an array");
      c.levels.clear();
      for (const json& e : lv) {
        if (e.is_array() && e.size() == 2) {
          c.levels.emplace_back(number(e[0], "sweep.levels"), number(e[1], "sweep.levels"));
        } else if (e.is_object()) {
          c.levels.emplace_back(number(e.at("epsilon"), "sweep.levels"), number(e.at("delta"), "sweep.levels"));
        } else {
          throw ConfigError("sweep.levels: each level is [epsilon, delta] or {epsilon, delta}");
        }
      }
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      check_keys(s, "solver", {"fine", "cell", "macro"});
      if (s.contains("fine")) c.fine_solver = parse_solver(s.at("fine"), c.fine_solver, "solver.fine");
      if (s.contains("cell")) c.cell_solver = parse_solver(s.at("cell"), c.cell_solver, "solver.cell");
      if (s.contains("macro")) c.macro_solver = parse_solver(s.at("macro"), c.macro_solver, "solver.macro");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const MaterialError& e) {
    throw ConfigError(std::string("material: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace tileplate
