// finsler: validate scenes, integrate charged worldlines, sample currents and
// compare a scene against its isotropic truncation.
//
// Exit status: 0 pass, 1 identity or run failure, 2 scene load error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "finsler/commands.hpp"
#include "finsler/error.hpp"
#include "finsler/scene.hpp"

namespace {

using namespace finsler;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitLoad = 2;

// Writes to `path`, or stdout when empty.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kInvalidArgument, "cannot write " + path);
  write(out);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size()) {
      throw Error(ErrorKind::kInvalidArgument, "bad number '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

struct Common {
  std::string scene_path;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("scene", c.scene_path, "Scene file")->required();
  cmd->add_option("--out", c.out, "Output path (default: scene's, else stdout)");
  cmd->add_option("--format", c.format, "csv or json (default: scene's)")
      ->check(CLI::IsMember({"csv", "json"}));
}

scene::Format format_of(const Common& c, const scene::Scene& s) {
  return c.format.empty() ? s.output.format : scene::parse_format(c.format);
}

std::string path_of(const Common& c, const scene::Scene& s) {
  return c.out.empty() ? s.output.path : c.out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler geometry and anisotropic electromagnetism toolkit"};
  app.require_subcommand(1);

  Common common;

  auto* validate = app.add_subcommand("validate", "Check every identity at seeded samples");
  add_common(validate, common);
  int samples = 100;
  std::int64_t seed = -1;
  double tol = 1e-8;
  int continuity_samples = 3;
  validate->add_option("--samples", samples, "Number of sample points")
      ->check(CLI::PositiveNumber);
  validate->add_option("--seed", seed, "Sampling seed (default: scene's)");
  validate->add_option("--tol", tol, "Residual tolerance");
  validate->add_option("--continuity-samples", continuity_samples,
                       "Points at which div J is reported");

  auto* trajectory = app.add_subcommand("trajectory", "Integrate the particle");
  add_common(trajectory, common);

  auto* currents = app.add_subcommand("currents", "Currents on an (x, y) grid");
  add_common(currents, common);
  std::string grid_spec;
  double current_tol = 1e-4;
  double step = maxwell::kContinuityStep;
  currents->add_option("--grid", grid_spec,
                       "min:max:count per variable, x0..x3,y0..y3 or named "
                       "(x1=-1:1:5,y1=0.2)")
      ->required();
  currents->add_option("--tol", current_tol, "Bound on max |div J| at interior points");
  currents->add_option("--step", step, "Finite-difference step for div J");

  auto* compare = app.add_subcommand("compare", "Scene vs. its isotropic truncation");
  add_common(compare, common);
  std::string sweep;
  std::string y_ref;
  int compare_samples = 20;
  compare->add_option("--kappa-sweep", sweep, "Comma list of anisotropy strengths");
  compare->add_option("--y-ref", y_ref, "Reference direction y0,y1,y2,y3");
  compare->add_option("--samples", compare_samples, "Points for current deltas")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  scene::Scene s;
  try {
    s = scene::load_scene(common.scene_path);
  } catch (const Error& e) {
    std::cerr << "error: " << common.scene_path << ": " << to_string(e.kind())
              << ": " << e.what() << "\n";
    return kExitLoad;
  }

  try {
    const scene::Format fmt = format_of(common, s);
    const std::string out = path_of(common, s);

    if (validate->parsed()) {
      commands::ValidateOptions opt;
      opt.samples = samples;
      if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);
      opt.tol = tol;
      opt.continuity_samples = continuity_samples;
      const auto rep = commands::validate(s, opt);
      emit(out, [&](std::ostream& o) { commands::write_report(o, rep, fmt); });
      std::size_t failed = 0;
      for (const auto& row : rep.identities) failed += row.pass(rep.tol) ? 0 : 1;
      std::cerr << s.name << ": " << rep.samples_evaluated << "/"
                << rep.samples_requested << " samples, " << failed
                << " identities failed -> " << (rep.pass ? "PASS" : "FAIL")
                << "\n";
      return rep.pass ? kExitPass : kExitFail;
    }

    if (trajectory->parsed()) {
      try {
        const auto t = commands::run_trajectory(s);
        emit(out, [&](std::ostream& o) { commands::write_trajectory(o, t, fmt); });
        std::cerr << s.name << ": " << t.states.size() << " states to t = "
                  << t.states.back().t << "\n";
      } catch (const dynamics::IntegrationError& e) {
        emit(out, [&](std::ostream& o) {
          commands::write_trajectory(o, e.partial(), fmt);
        });
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
      }
      return kExitPass;
    }

    if (currents->parsed()) {
      const auto grid = scene::parse_grid(grid_spec, s.particle.x0, s.particle.y0);
      const auto rep = commands::run_currents(s, grid, step);
      emit(out, [&](std::ostream& o) { commands::write_currents(o, rep, fmt); });
      const bool ok = rep.max_divergence <= current_tol;
      std::fprintf(stderr,
                   "%s: %zu points (%zu failed), max |divJ| = %.3e, max |zeta| = "
                   "%.3e, max |Jtilde| = %.3e -> %s\n",
                   s.name.c_str(), rep.rows.size(), rep.failed,
                   rep.max_divergence, rep.max_zeta, rep.max_vertical,
                   ok ? "PASS" : "FAIL");
      return ok ? kExitPass : kExitFail;
    }

    if (compare->parsed()) {
      commands::CompareOptions opt;
      if (!sweep.empty()) opt.kappas = parse_list(sweep);
      if (!y_ref.empty()) {
        const auto v = parse_list(y_ref);
        if (v.size() != 4) {
          throw Error(ErrorKind::kInvalidArgument, "--y-ref needs four numbers");
        }
        opt.y_ref = Vec4{v[0], v[1], v[2], v[3]};
      }
      opt.current_samples = compare_samples;
      const auto rep = commands::run_compare(s, opt);
      emit(out, [&](std::ostream& o) { commands::write_compare(o, rep, fmt); });
      bool ok = rep.monotone;
      for (const auto& d : rep.rows) ok = ok && d.error.empty();
      if (!opt.kappas.empty()) {
        std::cerr << s.name << ": kappa sweep "
                  << (rep.monotone ? "monotone" : "NOT monotone") << "\n";
      }
      return ok ? kExitPass : kExitFail;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitFail;
  }
  return kExitFail;
}
