#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "tileplate/harness.hpp"

namespace tileplate {

using nlohmann::json;

const char* const kReportHeader =
    "level,epsilon,delta,E_fine,E_hom,E_rec,gap_energy,gap_U3,gap_Um,gap_strain1,gap_strain2,npc1,npc2,"
    "rho_bend,rho_mem,rho_hess,seconds";

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

// Field table shared by the CSV writer, JSON writer and JSON reader.
template <class R, class F>
void for_each_field(R& r, F&& f) {
  f("epsilon", r.epsilon, true);
  f("delta", r.delta, true);
  f("E_fine", r.E_fine, true);
  f("E_hom", r.E_hom, true);
  f("E_rec", r.E_rec, true);
  f("gap_energy", r.gap_energy, true);
  f("gap_U3", r.gap_U3, true);
  f("gap_Um", r.gap_Um, true);
  f("gap_strain1", r.gap_strain1, true);
  f("gap_strain2", r.gap_strain2, true);
  f("npc1", r.npc1, true);
  f("npc2", r.npc2, true);
  f("rho_bend", r.rho_bend, true);
  f("rho_mem", r.rho_mem, true);
  f("rho_hess", r.rho_hess, true);
  f("seconds", r.seconds, true);
  f("gap_rec", r.gap_rec, false);
  f("strain_norm", r.strain_norm, false);
  f("load_bound", r.load_bound, false);
  f("potential_fine", r.potential_fine, false);
  f("potential_rec", r.potential_rec, false);
  f("work_fine", r.work_fine, false);
  f("residual", r.residual, false);
  f("hard_strain_rel", r.hard_strain_rel, false);
  f("npc_rec1", r.npc_rec1, false);
  f("npc_rec2", r.npc_rec2, false);
  f("gap_rec_strain1", r.gap_rec_strain1, false);
  f("gap_rec_strain2", r.gap_rec_strain2, false);
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json matrix_json(const Eigen::Matrix3d& A) {
  json m = json::array();
  for (int i = 0; i < 3; ++i) {
    json row = json::array();
    for (int k = 0; k < 3; ++k) row.push_back(num(A(i, k)));
    m.push_back(row);
  }
  return m;
}

Eigen::Matrix3d matrix_from(const json& m) {
  Eigen::Matrix3d A;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) A(i, k) = num(m.at(i).at(k));
  return A;
}

}  // namespace

bool LevelReport::operator==(const LevelReport& o) const {
  bool eq = level == o.level && iterations == o.iterations && dofs == o.dofs;
  std::vector<double> a, b;
  for_each_field(*this, [&](const char*, const double& v, bool) { a.push_back(v); });
  for_each_field(o, [&](const char*, const double& v, bool) { b.push_back(v); });
  for (std::size_t i = 0; i < a.size(); ++i) eq = eq && same(a[i], b[i]);
  return eq;
}

bool ConvergenceReport::operator==(const ConvergenceReport& o) const {
  for (int i = 0; i < 9; ++i)
    if (!same(A1.data()[i], o.A1.data()[i]) || !same(A2.data()[i], o.A2.data()[i])) return false;
  return same(E_hom, o.E_hom) && same(tip, o.tip) && levels == o.levels;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string report_csv(const ConvergenceReport& r) {
  std::string out = kReportHeader;
  out += "\r\n";
  for (const LevelReport& L : r.levels) {
    out += std::to_string(L.level);
    for_each_field(L, [&](const char*, const double& v, bool in_csv) {
      if (in_csv) out += "," + csv_field(format_number(v));
    });
    out += "\r\n";
  }
  return out;
}

std::string report_json(const ConvergenceReport& r) {
  json j;
  j["A1"] = matrix_json(r.A1);
  j["A2"] = matrix_json(r.A2);
  j["E_hom"] = num(r.E_hom);
  j["tip"] = num(r.tip);
  j["levels"] = json::array();
  for (const LevelReport& L : r.levels) {
    json e;
    e["level"] = L.level;
    e["iterations"] = L.iterations;
    e["dofs"] = L.dofs;
    for_each_field(L, [&](const char* k, const double& v, bool) { e[k] = num(v); });
    j["levels"].push_back(e);
  }
  return j.dump(2) + "\n";
}

ConvergenceReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  ConvergenceReport r;
  r.A1 = matrix_from(j.at("A1"));
  r.A2 = matrix_from(j.at("A2"));
  r.E_hom = num(j.at("E_hom"));
  r.tip = num(j.at("tip"));
  for (const json& e : j.at("levels")) {
    LevelReport L;
    L.level = e.at("level").get<int>();
    L.iterations = e.at("iterations").get<int>();
    L.dofs = e.at("dofs").get<int>();
    for_each_field(L, [&](const char* k, double& v, bool) { v = num(e.at(k)); });
    r.levels.push_back(L);
  }
  return r;
}

std::string report_svg(const ConvergenceReport& r) {
  const double W = 640, H = 420, ml = 70, mr = 150, mt = 30, mb = 50;
  struct Series {
    const char* name;
    const char* color;
    double LevelReport::*field;
  };
  const Series series[] = {{"energy", "#1f77b4", &LevelReport::gap_energy},
                           {"U3", "#ff7f0e", &LevelReport::gap_U3},
                           {"strain 1", "#2ca02c", &LevelReport::gap_strain1},
                           {"strain 2", "#d62728", &LevelReport::gap_strain2},
                           {"recovery", "#9467bd", &LevelReport::gap_rec}};
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const LevelReport& L : r.levels) {
    const double x = std::log10(L.delta / L.epsilon);
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    for (const Series& s : series) {
      const double v = L.*s.field;
      if (v > 0 && std::isfinite(v)) {
        ymin = std::min(ymin, std::log10(v));
        ymax = std::max(ymax, std::log10(v));
      }
    }
  }
  if (!std::isfinite(xmin)) xmin = -1, xmax = 0;
  if (!std::isfinite(ymin)) ymin = -1, ymax = 0;
  xmin = std::floor(xmin * 10) / 10 - 0.1;
  xmax = std::ceil(xmax * 10) / 10 + 0.1;
  ymin = std::floor(ymin) - (ymax - ymin < 1 ? 0.5 : 0.0);
  ymax = std::ceil(ymax) + (ymax - ymin < 1 ? 0.5 : 0.0);
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
  auto f = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); ++e) {
    o << "<line x1=\"" << ml << "\" x2=\"" << W - mr << "\" y1=\"" << f(py(e)) << "\" y2=\"" << f(py(e))
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << f(py(e) + 4) << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  for (const LevelReport& L : r.levels) {
    const double x = px(std::log10(L.delta / L.epsilon));
    o << "<text x=\"" << f(x) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << f(L.delta / L.epsilon)
      << "</text>\n";
  }
  o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">delta/epsilon</text>\n";
  o << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" transform=\"rotate(-90 16 " << (mt + H - mb) / 2
    << ")\" text-anchor=\"middle\">relative gap</text>\n";
  int row = 0;
  for (const Series& s : series) {
    std::string pts;
    for (const LevelReport& L : r.levels) {
      const double v = L.*s.field;
      if (!(v > 0) || !std::isfinite(v)) continue;
      const double x = px(std::log10(L.delta / L.epsilon)), y = py(std::log10(v));
      pts += f(x) + "," + f(y) + " ";
      o << "<circle cx=\"" << f(x) << "\" cy=\"" << f(y) << "\" r=\"3.5\" fill=\"" << s.color << "\"/>\n";
    }
    if (!pts.empty())
      o << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"/>\n";
    const double ly = mt + 14 + 18 * row++;
    o << "<line x1=\"" << W - mr + 12 << "\" x2=\"" << W - mr + 32 << "\" y1=\"" << ly - 4 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - mr + 38 << "\" y=\"" << ly << "\">" << s.name << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_outputs(const ConvergenceReport& r, const std::map<std::string, double>& timings,
                   const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_text((d / "report.csv").string(), report_csv(r));
  write_text((d / "report.json").string(), report_json(r));
  write_text((d / "convergence.svg").string(), report_svg(r));
  json t = json::object();
  for (const auto& [k, v] : timings) t[k] = v;
  write_text((d / "timings.json").string(), t.dump(2) + "\n");
}

}  // namespace tileplate
