#include "tofsi/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace tofsi {

namespace {

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos])))
      ++pos;
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + v +
                      "' as a number");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d)
    throw ConfigError("config key '" + key + "': expected an integer, got '" +
                      v + "'");
  return i;
}

bool parse_onoff(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected on|off, got '" + v +
                    "'");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Binding {
  const char* key;
  double* (*dptr)(RunConfig&);
  int* (*iptr)(RunConfig&);
  bool* (*bptr)(RunConfig&);
};

#define TOFSI_D(KEY, EXPR) \
  {KEY, [](RunConfig& c) -> double* { return &(EXPR); }, nullptr, nullptr}
#define TOFSI_I(KEY, EXPR) \
  {KEY, nullptr, [](RunConfig& c) -> int* { return &(EXPR); }, nullptr}
#define TOFSI_B(KEY, EXPR) \
  {KEY, nullptr, nullptr, [](RunConfig& c) -> bool* { return &(EXPR); }}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> b = {
      TOFSI_D("geometry.channel_width", c.geometry.channel.w),
      TOFSI_D("geometry.channel_height", c.geometry.channel.h),
      TOFSI_D("geometry.design_x0", c.geometry.design_box.x0),
      TOFSI_D("geometry.design_y0", c.geometry.design_box.y0),
      TOFSI_D("geometry.design_width", c.geometry.design_box.w),
      TOFSI_D("geometry.design_height", c.geometry.design_box.h),
      TOFSI_D("geometry.column_x0", c.geometry.column.x0),
      TOFSI_D("geometry.column_y0", c.geometry.column.y0),
      TOFSI_D("geometry.column_width", c.geometry.column.w),
      TOFSI_D("geometry.column_height", c.geometry.column.h),
      TOFSI_D("geometry.resolution", c.geometry.resolution),
      TOFSI_D("physics.rho_f", c.fluid.rho_f),
      TOFSI_D("physics.mu", c.fluid.mu),
      TOFSI_D("physics.v_max", c.fluid.v_max),
      TOFSI_D("physics.e_max", c.interpolation.e_max),
      TOFSI_D("physics.e_min", c.interpolation.e_min),
      TOFSI_D("physics.nu", c.solid.nu),
      TOFSI_D("physics.nu_mesh", c.solid.nu_mesh),
      TOFSI_D("physics.mesh_modulus", c.solid.mesh_modulus),
      TOFSI_D("physics.alpha_max", c.interpolation.alpha_max),
      TOFSI_D("physics.alpha_min", c.interpolation.alpha_min),
      TOFSI_D("interpolation.p_alpha", c.interpolation.p_alpha),
      TOFSI_D("interpolation.delta_e_upsilon",
              c.interpolation.delta_e_upsilon),
      TOFSI_D("projection.beta0", c.projection.beta),
      TOFSI_D("projection.eta_n", c.projection.eta_n),
      TOFSI_D("projection.eta_d", c.projection.eta_d),
      TOFSI_D("projection.eta_e", c.projection.eta_e),
      TOFSI_D("projection.radius", c.projection.radius),
      TOFSI_D("optimizer.volume_fraction", c.volume_fraction),
      TOFSI_I("optimizer.iterations", c.iterations),
      TOFSI_I("optimizer.snapshot_every", c.snapshot_every),
      TOFSI_D("optimizer.move_limit", c.mma.move_limit),
      TOFSI_D("optimizer.objective_offset", c.mma.objective_offset),
      TOFSI_D("solver.coupler_tol", c.coupler.tol),
      TOFSI_I("solver.coupler_max_outer", c.coupler.max_outer),
      TOFSI_D("solver.newton_tol", c.coupler.newton_tol),
      TOFSI_I("solver.newton_max", c.coupler.newton_max),
      TOFSI_D("solver.relaxation", c.coupler.relax),
      TOFSI_B("mesh_deformation", c.mesh_deformation),
  };
  return b;
}

#undef TOFSI_D
#undef TOFSI_I
#undef TOFSI_B

}  // namespace

void RunConfig::validate() const {
  geometry.validate();
  fluid.validate();
  solid.validate();
  interpolation.validate();
  projection.validate();
  coupler.validate();
  mma.validate();
  if (volume_fraction <= 0 || volume_fraction >= 1)
    throw ConfigError("optimizer.volume_fraction must be in (0,1)");
  if (iterations < 1) throw ConfigError("optimizer.iterations must be >= 1");
  if (snapshot_every < 0)
    throw ConfigError("optimizer.snapshot_every must be >= 0");
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "output.dir") {
      cfg.output_dir = value;
      continue;
    }
    bool found = false;
    for (const Binding& b : bindings()) {
      if (key != b.key) continue;
      found = true;
      if (b.dptr)
        *b.dptr(cfg) = parse_double(key, value);
      else if (b.iptr)
        *b.iptr(cfg) = parse_int(key, value);
      else
        *b.bptr(cfg) = parse_onoff(key, value);
      break;
    }
    if (!found) throw ConfigError("unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream out;
  RunConfig& c = const_cast<RunConfig&>(cfg);
  for (const Binding& b : bindings()) {
    out << b.key << " = ";
    if (b.dptr)
      out << fmt(*b.dptr(c));
    else if (b.iptr)
      out << *b.iptr(c);
    else
      out << (*b.bptr(c) ? "on" : "off");
    out << "\n";
  }
  out << "output.dir = " << cfg.output_dir << "\n";
  return out.str();
}

Model build_model(const RunConfig& cfg) {
  cfg.validate();
  return Model::build(cfg.geometry, cfg.fluid, cfg.solid, cfg.mesh_deformation);
}

}  // namespace tofsi
