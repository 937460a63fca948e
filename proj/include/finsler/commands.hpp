#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "finsler/dynamics.hpp"
#include "finsler/maxwell.hpp"
#include "finsler/scene.hpp"

namespace finsler::commands {

using scene::Format;
using scene::Scene;

/// Runs fn(0..n-1) over the available hardware threads. Each index is
/// visited exactly once; results must go to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// validate

struct ValidateOptions {
  int samples = 100;
  /// Overrides the scene's sampling seed.
  std::optional<std::uint64_t> seed;
  double tol = 1e-8;
  /// Points at which the (finite-difference) continuity residual is shown.
  int continuity_samples = 3;
};

struct IdentityResult {
  std::string name;
  double max_residual = 0.0;
  std::size_t evaluated = 0;
  /// Reported magnitude only; not compared against the tolerance.
  bool informational = false;
  bool pass(double tol) const {
    return informational || max_residual <= tol;
  }
};

struct ValidateReport {
  std::string scene;
  std::uint64_t seed = 0;
  int samples_requested = 0;
  std::size_t samples_evaluated = 0;
  double tol = 0.0;
  std::vector<IdentityResult> identities;
  /// Per-sample errors by kind; tallied, not fatal.
  std::map<std::string, std::size_t> errors;
  bool pass = false;
};

ValidateReport validate(const Scene& s, const ValidateOptions& opt);
void write_report(std::ostream& out, const ValidateReport& r, Format f);

// trajectory

/// Integrates the scene's particle; applies unit-speed scaling if asked.
/// Throws dynamics::IntegrationError carrying the failing t.
dynamics::Trajectory run_trajectory(const Scene& s);
void write_trajectory(std::ostream& out, const dynamics::Trajectory& t,
                      Format f);

// currents

struct CurrentRow {
  Vec4 x{};
  Vec4 y{};
  bool interior = false;
  /// Empty when the point evaluated; otherwise the error kind.
  std::string error;
  maxwell::CurrentSample sample;
};

struct CurrentsReport {
  std::vector<CurrentRow> rows;
  std::size_t failed = 0;
  /// Maxima over interior points that evaluated.
  double max_divergence = 0.0;
  double max_zeta = 0.0;
  double max_vertical = 0.0;
};

CurrentsReport run_currents(const Scene& s, const scene::Grid& grid,
                            double step = maxwell::kContinuityStep);
void write_currents(std::ostream& out, const CurrentsReport& r, Format f);

// compare

struct CompareOptions {
  /// Anisotropy strengths; each rescales the scene's anisotropic part of
  /// L1 by kappa / scene.anisotropy.
  std::vector<double> kappas;
  std::optional<Vec4> y_ref;
  /// Seeded points at which the currents are compared.
  int current_samples = 20;
};

struct Deltas {
  /// Label of the compared variant ("scene" or "kappa").
  std::string label;
  double kappa = 0.0;
  /// |x_end - x_end_iso| + |y_end - y_end_iso| (Euclidean norms)
  double endpoint = 0.0;
  double J_h = 0.0;
  double J_v = 0.0;
  double zeta = 0.0;
  std::string error;
};

struct CompareReport {
  Vec4 y_ref{};
  std::vector<Deltas> rows;
  /// Sweep rows ordered by kappa have increasing endpoint and J_h deltas.
  bool monotone = true;
};

CompareReport run_compare(const Scene& s, const CompareOptions& opt);
void write_compare(std::ostream& out, const CompareReport& r, Format f);

}  // namespace finsler::commands
