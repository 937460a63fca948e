#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/dynamics.hpp"
#include "finsler/geometry.hpp"

namespace finsler::scene {

using geometry::SpaceDef;

struct Range {
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

using Box = std::array<Range, kDim>;

struct Particle {
  Vec4 x0{};
  Vec4 y0{1.0, 0.0, 0.0, 0.0};
  /// Rescale y0 so that F(x0, y0) = 1 before integrating.
  bool unit_speed = false;
  /// Reference direction for the isotropic truncation; defaults to y0.
  std::optional<Vec4> y_ref;
};

struct Integrate {
  dynamics::Method method = dynamics::Method::kRk4;
  dynamics::StepParams params;
  double t_end = 1.0;
};

struct Sampling {
  std::uint64_t seed = 1;
  int count = 100;
  Box x_box{Range{-1, 1}, Range{-1, 1}, Range{-1, 1}, Range{-1, 1}};
  Box y_box{Range{1, 2}, Range{-0.5, 0.5}, Range{-0.5, 0.5}, Range{-0.5, 0.5}};
};

enum class Format { kCsv, kJson };

const char* to_string(Format f);
Format parse_format(const std::string& text);

struct Output {
  Format format = Format::kCsv;
  /// Empty means standard output.
  std::string path;
};

struct Scene {
  std::string name;
  SpaceDef space;
  /// Size of the anisotropic part of L1 as written; the compare sweep
  /// scales that part by kappa / anisotropy.
  double anisotropy = 1.0;
  Particle particle;
  Integrate integrate;
  Sampling sampling;
  Output output;

  Vec4 reference_direction() const {
    return particle.y_ref.value_or(particle.y0);
  }
};

/// Parses scene text. Only syntax and value checks; throws SceneParseError
/// with the 1-based line and column of the offending token.
Scene parse_scene(std::string_view text, const std::string& name = "scene");

/// Serializes a scene; parse_scene(write_scene(s)) reproduces s.
std::string write_scene(const Scene& s);

/// Tolerance for the homogeneity check at load, relative to max(1, |f|).
inline constexpr double kHomogeneityTol = 1e-10;

/// Checks the 1-homogeneity of F and L1 and the metric signature on
/// seeded samples. Throws HomogeneityViolation or SignatureMismatch.
void verify_scene(const Scene& s, int samples = 16);

/// Reads, parses and verifies a scene file.
Scene load_scene(const std::string& path);

/// Seeded draws of admissible (x, y) inside the sampling boxes.
class PointSampler {
 public:
  PointSampler(const SpaceDef& space, const Sampling& sampling);
  PointSampler(const SpaceDef& space, const Sampling& sampling,
               std::uint64_t seed);

  struct Draw {
    Vec4 x;
    Vec4 y;
  };

  /// Next admissible point; throws InvalidArgument after too many misses.
  Draw next();
  /// Next point inside the boxes with F^2 > 0, without building the metric.
  Draw next_candidate();

 private:
  const SpaceDef& space_;
  Sampling sampling_;
  std::mt19937_64 rng_;
};

/// Grid over the eight coordinates; an axis with count 1 sits at min.
struct Grid {
  std::array<Range, 2 * kDim> range{};
  std::array<int, 2 * kDim> count{};

  std::size_t size() const;
  /// Point number `index` in row-major order, x0 slowest.
  std::pair<Vec4, Vec4> point(std::size_t index) const;
  /// True if no axis with count > 1 sits at its first or last node.
  bool interior(std::size_t index) const;
};

/// Parses "min:max:count" entries. Either eight comma separated entries in
/// the order x0..x3,y0..y3, or named entries such as "x1=-1:1:5,y1=0.2";
/// unnamed axes are fixed at `x_default` / `y_default`.
Grid parse_grid(const std::string& spec, const Vec4& x_default,
                const Vec4& y_default);

}  // namespace finsler::scene
