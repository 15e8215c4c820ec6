#include "brwsim/material.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "brwsim/errors.hpp"

namespace brw {

double SellmeierSet::n_squared(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  double n2 = a0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    n2 += b[k] * l2 / (l2 - c_um[k] * c_um[k]);
  }
  return n2;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    if (tok[0] == '#') break; // rest of line is a comment
    out.push_back(tok);
  }
  return out;
}

double to_double(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("material file line " + std::to_string(line_no) +
                     ": expected a number, got '" + s + "'");
  }
}

} // namespace

MaterialModel load_material(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open material file '" + path.string() + "'");

  MaterialModel model;
  model.lambda_min_nm = 0.0;
  model.lambda_max_nm = 0.0;

  // nodes are collected per polarization, then merged on x
  struct RawNode {
    double x;
    SellmeierSet set;
  };
  std::vector<RawNode> te_nodes, tm_nodes;
  std::vector<RawNode>* current = nullptr;
  bool saw_te = false, saw_tm = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = tokenize(line);
    if (tok.empty()) continue;

    if (tok[0] == "material") {
      if (tok.size() < 2) throw ParseError("material file line " + std::to_string(line_no) + ": missing name");
      model.name = tok[1];
    } else if (tok[0] == "lambda_range_nm") {
      if (tok.size() != 3) throw ParseError("material file line " + std::to_string(line_no) + ": lambda_range_nm wants two values");
      model.lambda_min_nm = to_double(tok[1], line_no);
      model.lambda_max_nm = to_double(tok[2], line_no);
    } else if (tok[0] == "x_range") {
      if (tok.size() != 3) throw ParseError("material file line " + std::to_string(line_no) + ": x_range wants two values");
      model.x_min = to_double(tok[1], line_no);
      model.x_max = to_double(tok[2], line_no);
    } else if (tok[0] == "pol") {
      if (tok.size() != 2 || (tok[1] != "TE" && tok[1] != "TM"))
        throw ParseError("material file line " + std::to_string(line_no) + ": pol must be TE or TM");
      if (tok[1] == "TE") {
        current = &te_nodes;
        saw_te = true;
      } else {
        current = &tm_nodes;
        saw_tm = true;
      }
    } else if (tok[0] == "x") {
      if (!current) throw ParseError("material file line " + std::to_string(line_no) + ": node before any 'pol' section");
      // x <val> a0 <val> terms b1 c1 [b2 c2 ...]
      if (tok.size() < 7 || tok[2] != "a0" || tok[4] != "terms" || (tok.size() - 5) % 2 != 0)
        throw ParseError("material file line " + std::to_string(line_no) +
                         ": expected 'x <x> a0 <a0> terms b1 c1 [b2 c2 ...]'");
      RawNode node;
      node.x = to_double(tok[1], line_no);
      node.set.a0 = to_double(tok[3], line_no);
      for (std::size_t i = 5; i + 1 < tok.size(); i += 2) {
        node.set.b.push_back(to_double(tok[i], line_no));
        node.set.c_um.push_back(to_double(tok[i + 1], line_no));
      }
      current->push_back(node);
    } else {
      throw ParseError("material file line " + std::to_string(line_no) + ": unknown directive '" + tok[0] + "'");
    }
  }

  if (!saw_te && !saw_tm) throw ParseError("material file '" + path.string() + "': no polarization sections");
  if (!saw_te) {
    te_nodes = tm_nodes;
    model.warnings.push_back("material file provides only TM coefficients; using them for TE as well");
  }
  if (!saw_tm) {
    tm_nodes = te_nodes;
    model.warnings.push_back("material file provides only TE coefficients; using them for TM as well");
  }

  auto by_x = [](const RawNode& a, const RawNode& b) { return a.x < b.x; };
  std::sort(te_nodes.begin(), te_nodes.end(), by_x);
  std::sort(tm_nodes.begin(), tm_nodes.end(), by_x);

  if (te_nodes.size() != tm_nodes.size())
    throw ParseError("material file '" + path.string() + "': TE and TM sections list different composition nodes");
  for (std::size_t i = 0; i < te_nodes.size(); ++i) {
    if (std::abs(te_nodes[i].x - tm_nodes[i].x) > 1e-12)
      throw ParseError("material file '" + path.string() + "': TE and TM sections list different composition nodes");
    CompositionNode node;
    node.x = te_nodes[i].x;
    node.te = te_nodes[i].set;
    node.tm = tm_nodes[i].set;
    model.nodes.push_back(node);
  }
  if (model.nodes.size() < 2)
    throw ParseError("material file '" + path.string() + "': need at least two composition nodes");
  for (std::size_t i = 1; i < model.nodes.size(); ++i) {
    if (model.nodes[i].x <= model.nodes[i - 1].x + 1e-12)
      throw ParseError("material file '" + path.string() + "': duplicate composition node x=" +
                       std::to_string(model.nodes[i].x));
    if (model.nodes[i].te.b.size() != model.nodes[0].te.b.size() ||
        model.nodes[i].tm.b.size() != model.nodes[0].tm.b.size())
      throw ParseError("material file '" + path.string() + "': nodes must share the same number of Sellmeier terms");
  }

  model.x_min = std::max(model.x_min, model.nodes.front().x);
  model.x_max = std::min(model.x_max, model.nodes.back().x);

  // This tool operates pumps near 775 nm and photon pairs near 1550 nm
  // over Al fractions 0.3-0.9, so a usable model must cover that window.
  if (model.lambda_min_nm > 700.0 || model.lambda_max_nm < 1600.0)
    throw RangeError("material file '" + path.string() + "': declared wavelength range [" +
                     std::to_string(model.lambda_min_nm) + ", " + std::to_string(model.lambda_max_nm) +
                     "] nm does not cover the required 700-1600 nm");
  if (model.x_min > 0.3 || model.x_max < 0.9)
    throw RangeError("material file '" + path.string() + "': composition range [" +
                     std::to_string(model.x_min) + ", " + std::to_string(model.x_max) +
                     "] does not cover the required x in [0.3, 0.9]");

  return model;
}

double refractive_index(const MaterialModel& model, double x, double lambda_nm,
                        Polarization pol) {
  if (!(x >= model.x_min && x <= model.x_max))
    throw RangeError("composition x=" + std::to_string(x) + " outside validity [" +
                     std::to_string(model.x_min) + ", " + std::to_string(model.x_max) + "]");
  if (!(lambda_nm >= model.lambda_min_nm && lambda_nm <= model.lambda_max_nm))
    throw RangeError("wavelength " + std::to_string(lambda_nm) + " nm outside validity [" +
                     std::to_string(model.lambda_min_nm) + ", " + std::to_string(model.lambda_max_nm) + "] nm");

  const double lambda_um = lambda_nm * 1e-3;

  // locate the segment [x_i, x_{i+1}] containing x
  const auto& nodes = model.nodes;
  std::size_t hi = 1;
  while (hi + 1 < nodes.size() && nodes[hi].x < x) ++hi;
  const auto& a = nodes[hi - 1];
  const auto& b = nodes[hi];
  const double t = (x - a.x) / (b.x - a.x);

  const SellmeierSet& sa = (pol == Polarization::TE) ? a.te : a.tm;
  const SellmeierSet& sb = (pol == Polarization::TE) ? b.te : b.tm;

  double n2;
  if (t == 0.0) {
    n2 = sa.n_squared(lambda_um);
  } else if (t == 1.0) {
    n2 = sb.n_squared(lambda_um);
  } else {
    SellmeierSet mixed;
    mixed.a0 = (1.0 - t) * sa.a0 + t * sb.a0;
    mixed.b.resize(sa.b.size());
    mixed.c_um.resize(sa.c_um.size());
    for (std::size_t k = 0; k < sa.b.size(); ++k) {
      mixed.b[k] = (1.0 - t) * sa.b[k] + t * sb.b[k];
      mixed.c_um[k] = (1.0 - t) * sa.c_um[k] + t * sb.c_um[k];
    }
    n2 = mixed.n_squared(lambda_um);
  }

  if (!(n2 > 1.0))
    throw NumericalError("material model returned non-physical n^2=" + std::to_string(n2) +
                         " at x=" + std::to_string(x) + ", lambda=" + std::to_string(lambda_nm) + " nm");
  return std::sqrt(n2);
}

} // namespace brw
