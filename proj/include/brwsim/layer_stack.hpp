#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "brwsim/material.hpp"

namespace brw {

/// Planar Bragg reflection waveguide geometry: a core slab surrounded on
/// both sides by n_bilayers identical (layer 1, layer 2) pairs, embedded
/// in a semi-infinite outer medium of index n_clad.
struct LayerStack {
  double t_c_nm = 0.0; ///< core thickness
  double t_1_nm = 0.0; ///< reflector layer 1 thickness (adjacent to core)
  double t_2_nm = 0.0; ///< reflector layer 2 thickness
  double x_c = 0.0;    ///< Al fraction of the core
  double x_1 = 0.0;    ///< Al fraction of reflector layer 1
  double x_2 = 0.0;    ///< Al fraction of reflector layer 2
  int n_bilayers = 12; ///< bilayer pairs per side
  double length_mm = 4.0;
  std::optional<double> qpm_period_um; ///< optional until solved
  double n_clad = 1.0; ///< outer medium beyond the reflector (default air)
  std::shared_ptr<const MaterialModel> material;

  /// Throws Error if any invariant is violated (positive thicknesses,
  /// fractions in [0,1], n_bilayers >= 1, positive length).
  void validate() const;
};

/// One slab of the expanded, bottom-to-top symmetric layer sequence.
struct Layer {
  double thickness_um = 0.0;
  double x = 0.0; ///< Al fraction
};

/// Expands the stack into its explicit layer sequence, symmetric about
/// the core; zero-thickness layers are dropped.
std::vector<Layer> expand_layers(const LayerStack& stack);

/// Reads a structure file (key = value lines; keys t_c, t_1, t_2 in nm,
/// x_c, x_1, x_2 as fractions, n_bilayers, L in mm, Lambda in um,
/// n_clad). Material is not set by this call.
LayerStack load_structure(const std::filesystem::path& path);

/// Writes a structure file in the same format.
void save_structure(const LayerStack& stack, const std::filesystem::path& path);

} // namespace brw
