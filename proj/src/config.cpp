#include "supinf/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace supinf {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Parser {
  RunConfig cfg;
  std::vector<std::string> errors;
  std::string origin;

  void error(int line, const std::string& msg) {
    errors.push_back(origin + ":" + std::to_string(line) + ": " + msg);
  }

  bool to_double(const std::string& v, double& out) {
    try {
      std::size_t pos = 0;
      out = std::stod(v, &pos);
      return pos == v.size();
    } catch (...) {
      return false;
    }
  }
  bool to_int(const std::string& v, int& out) {
    try {
      std::size_t pos = 0;
      out = std::stoi(v, &pos);
      return pos == v.size();
    } catch (...) {
      return false;
    }
  }
  bool to_bool(const std::string& v, bool& out) {
    if (v == "on" || v == "true" || v == "1") { out = true; return true; }
    if (v == "off" || v == "false" || v == "0") { out = false; return true; }
    return false;
  }
  bool to_double_list(const std::string& v, std::vector<double>& out) {
    out.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double d;
      if (!to_double(trim(item), d)) return false;
      out.push_back(d);
    }
    return !out.empty();
  }
  bool to_int_list(const std::string& v, std::vector<int>& out) {
    out.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      int d;
      if (!to_int(trim(item), d)) return false;
      out.push_back(d);
    }
    return !out.empty();
  }

  void handle(int line, const std::string& section, const std::string& key,
              const std::string& value) {
    auto num = [&](double& slot) {
      double d;
      if (to_double(value, d)) slot = d;
      else error(line, "key '" + section + "." + key + "' expects a number, got '" + value + "'");
    };
    auto integer = [&](int& slot) {
      int d;
      if (to_int(value, d)) slot = d;
      else error(line, "key '" + section + "." + key + "' expects an integer, got '" + value + "'");
    };
    auto unknown = [&] { error(line, "unknown key '" + section + "." + key + "'"); };

    if (section == "mesh") {
      if (key == "dim") integer(cfg.dim);
      else if (key == "cells") {
        std::vector<int> v;
        if (to_int_list(value, v) && (v.size() == 1 || v.size() == 2)) {
          cfg.cells[0] = v[0];
          cfg.cells[1] = v.size() == 2 ? v[1] : v[0];
        } else error(line, "mesh.cells expects 1 or 2 integers");
      } else if (key == "xmin") num(cfg.extent[0]);
      else if (key == "xmax") num(cfg.extent[1]);
      else if (key == "ymin") num(cfg.extent[2]);
      else if (key == "ymax") num(cfg.extent[3]);
      else unknown();
    } else if (section == "problem") {
      if (key == "f") cfg.f = value;
      else if (key == "coef") cfg.coef = value;
      else if (key == "tensor") {
        if (!to_double_list(value, cfg.tensor)) error(line, "problem.tensor expects numbers");
      } else if (key == "g") cfg.g = value;
      else if (key == "g_value") num(cfg.g_value);
      else if (key == "G") num(cfg.G);
      else if (key == "components") integer(cfg.components);
      else unknown();
    } else if (section == "constraint") {
      if (key == "kind") cfg.kind = value;
      else if (key == "pi") cfg.pi = value;
      else if (key == "c") num(cfg.c);
      else if (key == "radius") num(cfg.radius);
      else if (key == "box_lo") {
        if (!to_double_list(value, cfg.box_lo)) error(line, "constraint.box_lo expects numbers");
      } else if (key == "box_hi") {
        if (!to_double_list(value, cfg.box_hi)) error(line, "constraint.box_hi expects numbers");
      } else if (key == "h") cfg.h = value;
      else if (key == "H") num(cfg.H);
      else unknown();
    } else if (section == "solver") {
      if (key == "inner_tol") num(cfg.solver.inner_tol);
      else if (key == "outer_tol") num(cfg.solver.outer_tol);
      else if (key == "max_outer") integer(cfg.solver.max_outer);
      else if (key == "penalty_init") num(cfg.solver.penalty_init);
      else if (key == "penalty_growth") num(cfg.solver.penalty_growth);
      else if (key == "multiplier_init") num(cfg.solver.multiplier_init);
      else if (key == "inner_max_iter") integer(cfg.solver.inner_max_iter);
      else if (key == "slack_tol") num(cfg.solver.slack_tol);
      else if (key == "seed") {
        int s;
        if (to_int(value, s) && s >= 0) cfg.solver.seed = static_cast<unsigned>(s);
        else error(line, "solver.seed expects a nonnegative integer");
      } else unknown();
    } else if (section == "schedule") {
      if (key == "p0") num(cfg.schedule.p0);
      else if (key == "gamma") num(cfg.schedule.gamma);
      else if (key == "steps") integer(cfg.schedule.steps);
      else unknown();
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = value;
      else if (key == "timing") {
        bool b;
        if (to_bool(value, b)) cfg.timing = b;
        else error(line, "output.timing expects on/off");
      } else unknown();
    } else {
      error(line, "unknown section '[" + section + "]'");
    }
  }

  void validate() {
    auto fail = [this](const std::string& msg) { errors.push_back(origin + ": " + msg); };
    if (cfg.dim != 1 && cfg.dim != 2) fail("mesh.dim must be 1 or 2");
    for (int a = 0; a < cfg.dim; ++a) {
      if (cfg.cells[a] < 2) fail("mesh.cells must be >= 2 per axis");
      if (!(cfg.extent[2 * a + 1] > cfg.extent[2 * a])) fail("mesh extent is degenerate");
    }
    if (cfg.components < 1 || cfg.components > 4) fail("problem.components must be in [1,4]");
    if (cfg.f != "dirichlet" && cfg.f != "weighted_dirichlet" && cfg.f != "abs_grad" &&
        cfg.f != "tensor")
      fail("problem.f must be dirichlet|weighted_dirichlet|abs_grad|tensor");
    if (cfg.f == "weighted_dirichlet" && cfg.coef != "one" && cfg.coef != "two_plus_sin")
      fail("problem.coef must be one|two_plus_sin");
    if (cfg.f == "tensor") {
      const int K = cfg.components * cfg.dim;
      if (static_cast<int>(cfg.tensor.size()) != K * K)
        fail("problem.tensor needs (components*dim)^2 entries");
    }
    if (cfg.g != "abs" && cfg.g != "quad" && cfg.g != "const")
      fail("problem.g must be abs|quad|const");
    if (cfg.g_value < 0.0) fail("problem.g_value must be nonnegative");
    if (cfg.G < 0.0) fail("problem.G must be nonnegative");
    if (cfg.kind != "none" && cfg.kind != "holonomic" && cfg.kind != "unilateral" &&
        cfg.kind != "inclusion_ball" && cfg.kind != "inclusion_box" &&
        cfg.kind != "isoperimetric" && cfg.kind != "isoperimetric_eq")
      fail("constraint.kind is not in the catalogue");
    if (cfg.kind == "holonomic" || cfg.kind == "unilateral") {
      try {
        (void)pi_fn_from_name(cfg.pi);
      } catch (const std::exception& e) {
        fail(e.what());
      }
    }
    if (cfg.kind == "isoperimetric" || cfg.kind == "isoperimetric_eq") {
      try {
        (void)h_fn_from_name(cfg.h);
      } catch (const std::exception& e) {
        fail(e.what());
      }
    }
    if (cfg.kind == "inclusion_ball" && !(cfg.radius > 0.0))
      fail("constraint.radius must be positive");
    if (cfg.kind == "inclusion_box") {
      if (cfg.box_lo.size() != static_cast<std::size_t>(cfg.components) ||
          cfg.box_hi.size() != static_cast<std::size_t>(cfg.components))
        fail("constraint.box_lo/box_hi need one entry per component");
      else
        for (std::size_t i = 0; i < cfg.box_lo.size(); ++i)
          if (!(cfg.box_hi[i] >= cfg.box_lo[i])) fail("constraint box is empty");
    }
    if (!(cfg.solver.inner_tol > 0.0)) fail("solver.inner_tol must be positive");
    if (!(cfg.solver.outer_tol > 0.0)) fail("solver.outer_tol must be positive");
    if (cfg.solver.max_outer < 1) fail("solver.max_outer must be >= 1");
    if (!(cfg.solver.penalty_init > 0.0)) fail("solver.penalty_init must be positive");
    if (!(cfg.solver.penalty_growth > 1.0)) fail("solver.penalty_growth must exceed 1");
    if (cfg.solver.multiplier_init < 0.0) fail("solver.multiplier_init must be nonnegative");
    if (cfg.solver.inner_max_iter < 1) fail("solver.inner_max_iter must be >= 1");
    if (!(cfg.schedule.p0 > cfg.dim))
      fail("schedule.p0 must exceed the spatial dimension (p-bar > n)");
    if (!(cfg.schedule.gamma > 1.0)) fail("schedule.gamma must exceed 1");
    if (cfg.schedule.steps < 1) fail("schedule.steps must be >= 1");
  }
};

}  // namespace

ParseResult parse_config_text(const std::string& text, const std::string& origin) {
  Parser p;
  p.origin = origin;
  std::stringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        p.error(lineno, "malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) p.error(lineno, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      p.error(lineno, "expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      p.error(lineno, "empty key or value");
      continue;
    }
    if (section.empty()) {
      p.error(lineno, "key '" + key + "' outside of any section");
      continue;
    }
    p.handle(lineno, section, key, value);
  }
  p.validate();
  return {std::move(p.cfg), std::move(p.errors)};
}

ParseResult parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {RunConfig{}, {"cannot open config file '" + path + "'"}};
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

Problem make_problem(const RunConfig& cfg) {
  Problem prob;
  std::vector<double> extent(cfg.extent.begin(), cfg.extent.begin() + 2 * cfg.dim);
  std::vector<int> cells(cfg.cells.begin(), cfg.cells.begin() + cfg.dim);
  prob.mesh = build_mesh(cfg.dim, extent, cells);
  prob.components = cfg.components;

  if (cfg.f == "dirichlet") prob.f = DensityF::dirichlet();
  else if (cfg.f == "weighted_dirichlet")
    prob.f = DensityF::weighted_dirichlet(coef_from_name(cfg.coef));
  else if (cfg.f == "abs_grad") prob.f = DensityF::abs_grad();
  else prob.f = DensityF::constant_tensor(cfg.tensor, cfg.components * cfg.dim);

  if (cfg.g == "abs") prob.g = DensityG::abs();
  else if (cfg.g == "quad") prob.g = DensityG::quad();
  else prob.g = DensityG::constant(cfg.g_value);

  prob.G = cfg.G;

  ConstraintSpec& cs = prob.constraint;
  if (cfg.kind == "none") cs.kind = ConstraintKind::none;
  else if (cfg.kind == "holonomic") cs.kind = ConstraintKind::holonomic;
  else if (cfg.kind == "unilateral") cs.kind = ConstraintKind::unilateral;
  else if (cfg.kind == "inclusion_ball") cs.kind = ConstraintKind::inclusion_ball;
  else if (cfg.kind == "inclusion_box") cs.kind = ConstraintKind::inclusion_box;
  else if (cfg.kind == "isoperimetric") cs.kind = ConstraintKind::isoperimetric;
  else cs.kind = ConstraintKind::isoperimetric_eq;
  if (cs.kind == ConstraintKind::holonomic || cs.kind == ConstraintKind::unilateral)
    cs.pi = pi_fn_from_name(cfg.pi);
  cs.c = cfg.c;
  cs.radius = cfg.radius;
  cs.box_lo = cfg.box_lo;
  cs.box_hi = cfg.box_hi;
  if (cs.kind == ConstraintKind::isoperimetric || cs.kind == ConstraintKind::isoperimetric_eq)
    cs.h = h_fn_from_name(cfg.h);
  cs.H = cfg.H;
  return prob;
}

std::string default_out_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("SUPINF_OUT")) return env;
  return "out";
}

void write_resolved_config(const std::string& path, const RunConfig& cfg) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write resolved config to " + path);
  auto list = [fp](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      std::fprintf(fp, "%s%.17g", i ? "," : "", v[i]);
  };
  std::fprintf(fp, "[mesh]\ndim = %d\n", cfg.dim);
  if (cfg.dim == 1) std::fprintf(fp, "cells = %d\n", cfg.cells[0]);
  else std::fprintf(fp, "cells = %d,%d\n", cfg.cells[0], cfg.cells[1]);
  std::fprintf(fp, "xmin = %.17g\nxmax = %.17g\n", cfg.extent[0], cfg.extent[1]);
  if (cfg.dim == 2) std::fprintf(fp, "ymin = %.17g\nymax = %.17g\n", cfg.extent[2], cfg.extent[3]);

  std::fprintf(fp, "\n[problem]\nf = %s\n", cfg.f.c_str());
  if (cfg.f == "weighted_dirichlet") std::fprintf(fp, "coef = %s\n", cfg.coef.c_str());
  if (cfg.f == "tensor" && !cfg.tensor.empty()) {
    std::fprintf(fp, "tensor = ");
    list(cfg.tensor);
    std::fprintf(fp, "\n");
  }
  std::fprintf(fp, "g = %s\n", cfg.g.c_str());
  if (cfg.g == "const") std::fprintf(fp, "g_value = %.17g\n", cfg.g_value);
  std::fprintf(fp, "G = %.17g\ncomponents = %d\n", cfg.G, cfg.components);

  std::fprintf(fp, "\n[constraint]\nkind = %s\n", cfg.kind.c_str());
  if (cfg.kind == "holonomic" || cfg.kind == "unilateral") {
    std::fprintf(fp, "pi = %s\nc = %.17g\n", cfg.pi.c_str(), cfg.c);
  }
  if (cfg.kind == "inclusion_ball") std::fprintf(fp, "radius = %.17g\n", cfg.radius);
  if (cfg.kind == "inclusion_box") {
    std::fprintf(fp, "box_lo = ");
    list(cfg.box_lo);
    std::fprintf(fp, "\nbox_hi = ");
    list(cfg.box_hi);
    std::fprintf(fp, "\n");
  }
  if (cfg.kind == "isoperimetric" || cfg.kind == "isoperimetric_eq")
    std::fprintf(fp, "h = %s\nH = %.17g\n", cfg.h.c_str(), cfg.H);

  std::fprintf(fp,
               "\n[solver]\ninner_tol = %.17g\nouter_tol = %.17g\nmax_outer = %d\n"
               "penalty_init = %.17g\npenalty_growth = %.17g\nmultiplier_init = %.17g\n"
               "inner_max_iter = %d\nslack_tol = %.17g\nseed = %u\n",
               cfg.solver.inner_tol, cfg.solver.outer_tol, cfg.solver.max_outer,
               cfg.solver.penalty_init, cfg.solver.penalty_growth, cfg.solver.multiplier_init,
               cfg.solver.inner_max_iter, cfg.solver.slack_tol, cfg.solver.seed);
  std::fprintf(fp, "\n[schedule]\np0 = %.17g\ngamma = %.17g\nsteps = %d\n", cfg.schedule.p0,
               cfg.schedule.gamma, cfg.schedule.steps);
  std::fprintf(fp, "\n[output]\ndir = %s\ntiming = %s\n",
               (cfg.out_dir.empty() ? "out" : cfg.out_dir.c_str()), cfg.timing ? "on" : "off");
  std::fclose(fp);
}

}  // namespace supinf
