#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace brw {

enum class Polarization { TE, TM };

inline const char* to_string(Polarization p) {
  return p == Polarization::TE ? "TE" : "TM";
}

/// One generalized Sellmeier coefficient set,
///   n^2(L) = a0 + sum_k  b_k L^2 / (L^2 - c_k^2),   L = wavelength in um.
struct SellmeierSet {
  double a0 = 1.0;
  std::vector<double> b;
  std::vector<double> c_um;

  double n_squared(double lambda_um) const;
};

/// Coefficients at one tabulated Al fraction.
struct CompositionNode {
  double x = 0.0;
  SellmeierSet te;
  SellmeierSet tm;
};

/// Wavelength- and composition-dependent refractive index model for
/// Al(x)Ga(1-x)N, loaded from a coefficient data file.
///
/// Between tabulated compositions the Sellmeier coefficients (not the
/// index itself) are interpolated linearly, so the dispersion keeps its
/// functional form in wavelength everywhere. The model is immutable after
/// loading and safe for concurrent reads.
struct MaterialModel {
  std::string name;
  double lambda_min_nm = 0.0;
  double lambda_max_nm = 0.0;
  double x_min = 0.0;
  double x_max = 1.0;
  std::vector<CompositionNode> nodes; // sorted by x, strictly increasing
  std::vector<std::string> warnings;  // e.g. single-polarization fallback
};

/// Parses a coefficient file (schema documented in data/algan_sellmeier.txt)
/// and checks that the declared validity covers at least 700-1600 nm and
/// x in [0.3, 0.9]. Throws ParseError on malformed input and RangeError
/// when the coverage requirement fails.
MaterialModel load_material(const std::filesystem::path& path);

/// Refractive index at Al fraction x, vacuum wavelength lambda_nm and
/// polarization pol. Throws RangeError outside the declared validity
/// ranges; never extrapolates silently.
double refractive_index(const MaterialModel& model, double x,
                        double lambda_nm, Polarization pol);

} // namespace brw
