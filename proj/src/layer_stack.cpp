#include "brwsim/layer_stack.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "brwsim/errors.hpp"

namespace brw {

void LayerStack::validate() const {
  auto fail = [](const std::string& msg) { throw Error("invalid structure: " + msg); };
  if (!(t_c_nm > 0.0)) fail("core thickness t_c must be > 0");
  if (t_1_nm < 0.0 || t_2_nm < 0.0) fail("reflector thicknesses must be >= 0");
  if (!(t_1_nm > 0.0) && !(t_2_nm > 0.0)) fail("at least one reflector layer must have positive thickness");
  for (double x : {x_c, x_1, x_2})
    if (!(x >= 0.0 && x <= 1.0)) fail("Al fractions must lie in [0, 1]");
  if (n_bilayers < 1) fail("n_bilayers must be >= 1");
  if (!(length_mm > 0.0)) fail("length L must be > 0");
  if (!(n_clad >= 1.0)) fail("outer medium index n_clad must be >= 1");
  if (qpm_period_um && !(*qpm_period_um > 0.0)) fail("QPM period must be > 0");
}

std::vector<Layer> expand_layers(const LayerStack& stack) {
  stack.validate();
  std::vector<Layer> seq;
  seq.reserve(4 * stack.n_bilayers + 1);
  // bottom reflector, outermost first: ... t_2 t_1 | core | t_1 t_2 ...
  for (int i = 0; i < stack.n_bilayers; ++i) {
    if (stack.t_2_nm > 0.0) seq.push_back({stack.t_2_nm * 1e-3, stack.x_2});
    if (stack.t_1_nm > 0.0) seq.push_back({stack.t_1_nm * 1e-3, stack.x_1});
  }
  seq.push_back({stack.t_c_nm * 1e-3, stack.x_c});
  for (int i = 0; i < stack.n_bilayers; ++i) {
    if (stack.t_1_nm > 0.0) seq.push_back({stack.t_1_nm * 1e-3, stack.x_1});
    if (stack.t_2_nm > 0.0) seq.push_back({stack.t_2_nm * 1e-3, stack.x_2});
  }
  return seq;
}

LayerStack load_structure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open structure file '" + path.string() + "'");

  std::map<std::string, double> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::string key, eq;
    double value;
    if (!(is >> key)) continue;
    if (!(is >> eq >> value) || eq != "=")
      throw ParseError("structure file '" + path.string() + "' line " + std::to_string(line_no) +
                       ": expected '<key> = <value>'");
    if (kv.count(key))
      throw ParseError("structure file '" + path.string() + "': duplicate key '" + key + "'");
    kv[key] = value;
  }

  auto require = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end())
      throw ParseError("structure file '" + path.string() + "': missing key '" + key + "'");
    double v = it->second;
    kv.erase(it);
    return v;
  };

  LayerStack s;
  s.t_c_nm = require("t_c");
  s.t_1_nm = require("t_1");
  s.t_2_nm = require("t_2");
  s.x_c = require("x_c");
  s.x_1 = require("x_1");
  s.x_2 = require("x_2");
  if (kv.count("n_bilayers")) s.n_bilayers = static_cast<int>(std::lround(require("n_bilayers")));
  if (kv.count("L")) s.length_mm = require("L");
  if (kv.count("Lambda")) s.qpm_period_um = require("Lambda");
  if (kv.count("n_clad")) s.n_clad = require("n_clad");
  if (!kv.empty())
    throw ParseError("structure file '" + path.string() + "': unknown key '" + kv.begin()->first + "'");

  try {
    s.validate();
  } catch (const Error& e) {
    throw ParseError("structure file '" + path.string() + "': " + e.what());
  }
  return s;
}

void save_structure(const LayerStack& stack, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write structure file '" + path.string() + "'");
  out.precision(12);
  out << "# Bragg reflection waveguide structure\n";
  out << "t_c = " << stack.t_c_nm << "       # core thickness, nm\n";
  out << "t_1 = " << stack.t_1_nm << "       # reflector layer 1 thickness, nm\n";
  out << "t_2 = " << stack.t_2_nm << "       # reflector layer 2 thickness, nm\n";
  out << "x_c = " << stack.x_c << "          # core Al fraction\n";
  out << "x_1 = " << stack.x_1 << "\n";
  out << "x_2 = " << stack.x_2 << "\n";
  out << "n_bilayers = " << stack.n_bilayers << "\n";
  out << "L = " << stack.length_mm << "      # waveguide length, mm\n";
  if (stack.qpm_period_um) out << "Lambda = " << *stack.qpm_period_um << "  # QPM period, um\n";
  out << "n_clad = " << stack.n_clad << "    # outer medium index\n";
}

} // namespace brw
