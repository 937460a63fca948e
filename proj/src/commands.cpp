#include "finsler/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "finsler/em.hpp"
#include "finsler/error.hpp"
#include "finsler/expr/eval.hpp"

namespace finsler::commands {

using expr::Jet;
using geometry::SpaceDef;
using json = nlohmann::json;

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double rel(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::fabs(b));
}

json to_json(const Vec4& v) { return json::array({v[0], v[1], v[2], v[3]}); }

// Identity catalogue for validate, in report order.
enum Id {
  kFHomogeneity,
  kL1Homogeneity,
  kMetricSymmetry,
  kMetricInverse,
  kMetricEuler,
  kLoweredY,
  kMetricScaling,
  kSprayEuler,
  kDeltaF2,
  kChernSymmetry,
  kHMetricity,
  kDeflection,
  kCurvatureAntisymmetry,
  kVolumeFactor,
  kPotentialEuler,
  kPotentialDerivativeEuler,
  kFtildeY,
  kFtildeA,
  kFAntisymmetry,
  kRaisedLowered,
  kBianchiHHH,
  kBianchiHHV,
  kBianchiHVV,
  kCurrentSplit,
  kZeta,
  kVerticalCurrent,
  kContinuity,
  kIdCount,
};

struct IdInfo {
  const char* name;
  bool informational;
};

constexpr IdInfo kIds[kIdCount] = {
    {"F is 1-homogeneous", false},
    {"L1 is 1-homogeneous", false},
    {"g symmetric", false},
    {"g * g_inv = I", false},
    {"g_ij y^i y^j = F^2", false},
    {"g_ij y^j = (1/2) dF^2/dy^i", false},
    {"g is 0-homogeneous", false},
    {"N^i_j y^j = 2 G^i", false},
    {"delta_i F^2 = 0", false},
    {"L^i_jk = L^i_kj", false},
    {"g_ij|k = 0", false},
    {"y_i|j = 0", false},
    {"R^a_jk = -R^a_kj", false},
    {"sqrtG = |det g|", false},
    {"A_i y^i = L1", false},
    {"A_i.k y^k = 0", false},
    {"Ftilde_ia y^i = 0", false},
    {"Ftilde_ia y^a = 0", false},
    {"F_ij = -F_ji", false},
    {"g F^.. g = F_..", false},
    {"dF = 0 (hhh)", false},
    {"dF = 0 (hhv)", false},
    {"dF = 0 (hvv)", false},
    {"J^i = classical + zeta", false},
    {"|zeta|", true},
    {"|Jtilde|", true},
    {"|div J|", true},
};

using Residuals = std::array<double, kIdCount>;

Residuals sample_identities(const geometry::SpaceDef& space, const Vec4& x,
                            const Vec4& y, bool with_continuity) {
  Residuals r;
  r.fill(std::nan(""));
  const maxwell::FieldPoint p = maxwell::build_field_point(space, x, y);
  const auto& geo = p.geo;
  const auto& e = p.em;
  const Vec4& u = geo.y;
  const expr::Point pt = geometry::make_point(x, u);

  const double Fv = geo.F.value();
  r[kFHomogeneity] = expr::check_homogeneity(space.F, 1.0, pt, 1.7) /
                     std::max(1.0, 1.7 * std::fabs(Fv));
  const double L1v = space.L1.is_zero() ? 0.0 : expr::evaluate(space.L1, pt);
  r[kL1Homogeneity] =
      space.L1.is_zero()
          ? 0.0
          : expr::check_homogeneity(space.L1, 1.0, pt, 1.7) /
                std::max(1.0, 1.7 * std::fabs(L1v));

  const Mat4 g = values(geo.g);
  const Mat4 gi = values(geo.g_inv);
  double sym = 0.0, inv = 0.0;
  const Mat4 prod = mat_mul(g, gi);
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      sym = std::max(sym, std::fabs(g[i][j] - g[j][i]));
      inv = std::max(inv, std::fabs(prod[i][j] - (i == j ? 1.0 : 0.0)));
    }
  }
  r[kMetricSymmetry] = sym;
  r[kMetricInverse] = inv;

  const Vec4 gu = mat_vec(g, u);
  r[kMetricEuler] = rel(dot(gu, u), geo.F2.value());
  double lowered = 0.0;
  for (int i = 0; i < kDim; ++i) {
    lowered = std::max(lowered, rel(gu[i], geo.y_lower[i].value()));
  }
  r[kLoweredY] = lowered;

  double scaling = 0.0;
  for (const double s : {0.5, 2.0, 10.0}) {
    Vec4 ys = y;
    for (double& c : ys) c *= s;
    SpaceDef unit = space;
    const Vec4 us = [&] {
      Vec4 v = ys;
      for (double& c : v) c /= space.H;
      return v;
    }();
    unit.H = 1.0;
    const Mat4 gs = geometry::metric(unit, x, us).g;
    for (int i = 0; i < kDim; ++i) {
      for (int j = 0; j < kDim; ++j) scaling = std::max(scaling, rel(gs[i][j], g[i][j]));
    }
  }
  r[kMetricScaling] = scaling;

  const Mat4 N = values(geo.N);
  const Vec4 G = values(geo.G);
  const Vec4 Nu = mat_vec(N, u);
  double spray = 0.0;
  for (int i = 0; i < kDim; ++i) spray = std::max(spray, rel(Nu[i], 2.0 * G[i]));
  r[kSprayEuler] = spray;

  r[kDeltaF2] = max_abs(values(geo.delta(geo.F2))) /
                std::max(1.0, std::fabs(geo.F2.value()));

  const Tensor3 L = values(geo.L);
  const Tensor3 R = values(geo.R);
  double lsym = 0.0, ranti = 0.0;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      for (int k = 0; k < kDim; ++k) {
        lsym = std::max(lsym, std::fabs(L[i][j][k] - L[i][k][j]));
        ranti = std::max(ranti, std::fabs(R[i][j][k] + R[i][k][j]));
      }
    }
  }
  r[kChernSymmetry] = lsym;
  r[kCurvatureAntisymmetry] = ranti;

  double hmet = 0.0, defl = 0.0;
  for (int i = 0; i < kDim; ++i) {
    const Vec4 dyl = values(geo.delta(geo.y_lower[i]));
    for (int j = 0; j < kDim; ++j) {
      const Vec4 dg = values(geo.delta(geo.g[i][j]));
      for (int k = 0; k < kDim; ++k) {
        double v = dg[k];
        for (int m = 0; m < kDim; ++m) v -= L[m][i][k] * g[m][j] + L[m][j][k] * g[i][m];
        hmet = std::max(hmet, std::fabs(v));
      }
      double d = dyl[j];
      for (int m = 0; m < kDim; ++m) d -= L[m][i][j] * gu[m];
      defl = std::max(defl, std::fabs(d));
    }
  }
  r[kHMetricity] = hmet;
  r[kDeflection] = defl;

  r[kVolumeFactor] = rel(geo.sqrtG.value(), std::fabs(geo.det_g.value()));

  const Vec4 A = values(e.A);
  r[kPotentialEuler] = rel(dot(A, u), L1v);
  const Mat4 Av = values(e.A_v);
  const Mat4 Ft = values(e.F_hv);
  double av = 0.0, fy = 0.0, fa = 0.0;
  for (int i = 0; i < kDim; ++i) {
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, scale = 1.0;
    for (int k = 0; k < kDim; ++k) {
      s1 += Av[i][k] * u[k];
      s2 += Ft[k][i] * u[k];
      s3 += Ft[i][k] * u[k];
      scale = std::max(scale, std::fabs(Av[i][k] * u[k]));
    }
    av = std::max(av, std::fabs(s1) / scale);
    fy = std::max(fy, std::fabs(s2) / scale);
    fa = std::max(fa, std::fabs(s3) / scale);
  }
  r[kPotentialDerivativeEuler] = av;
  r[kFtildeY] = fy;
  r[kFtildeA] = fa;

  const Mat4 F = values(e.F_hh);
  double anti = 0.0;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) anti = std::max(anti, std::fabs(F[i][j] + F[j][i]));
  }
  r[kFAntisymmetry] = anti;
  const Mat4 lowered_F = mat_mul(mat_mul(g, values(e.F_up)), g);
  double rl = 0.0;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) rl = std::max(rl, std::fabs(lowered_F[i][j] - F[i][j]));
  }
  r[kRaisedLowered] = rl / std::max(1.0, max_abs(F));

  const auto bianchi = maxwell::homogeneous_residuals(p);
  r[kBianchiHHH] = max_abs(bianchi.hhh);
  r[kBianchiHHV] = max_abs(bianchi.hhv);
  r[kBianchiHVV] = max_abs(bianchi.hvv);

  const auto c = maxwell::currents(space, p);
  double split = 0.0;
  for (int i = 0; i < kDim; ++i) {
    split = std::max(split, rel(c.J_h[i] * space.coupling,
                                c.classical[i] + c.zeta[i]));
  }
  r[kCurrentSplit] = split;
  r[kZeta] = max_abs(c.zeta);
  r[kVerticalCurrent] = max_abs(c.J_v);
  if (with_continuity) {
    r[kContinuity] = std::fabs(maxwell::continuity_residual(space, x, y));
  }
  return r;
}

}  // namespace

ValidateReport validate(const Scene& s, const ValidateOptions& opt) {
  ValidateReport rep;
  rep.scene = s.name;
  rep.seed = opt.seed.value_or(s.sampling.seed);
  rep.samples_requested = opt.samples;
  rep.tol = opt.tol;

  scene::PointSampler sampler(s.space, s.sampling, rep.seed);
  std::vector<scene::PointSampler::Draw> draws;
  draws.reserve(static_cast<std::size_t>(std::max(0, opt.samples)));
  for (int n = 0; n < opt.samples; ++n) draws.push_back(sampler.next());

  std::vector<std::optional<Residuals>> results(draws.size());
  std::vector<std::string> errors(draws.size());
  parallel_for(draws.size(), [&](std::size_t n) {
    try {
      results[n] = sample_identities(
          s.space, draws[n].x, draws[n].y,
          static_cast<int>(n) < opt.continuity_samples);
    } catch (const Error& e) {
      errors[n] = to_string(e.kind());
    }
  });

  rep.identities.resize(kIdCount);
  for (int id = 0; id < kIdCount; ++id) {
    rep.identities[id].name = kIds[id].name;
    rep.identities[id].informational = kIds[id].informational;
  }
  for (std::size_t n = 0; n < draws.size(); ++n) {
    if (!results[n]) {
      ++rep.errors[errors[n]];
      continue;
    }
    ++rep.samples_evaluated;
    for (int id = 0; id < kIdCount; ++id) {
      const double v = (*results[n])[id];
      if (std::isnan(v) && id == kContinuity) continue;
      auto& row = rep.identities[id];
      ++row.evaluated;
      // A NaN residual counts as a failure.
      row.max_residual = std::isnan(v) || std::isnan(row.max_residual)
                             ? std::nan("")
                             : std::max(row.max_residual, v);
    }
  }
  rep.pass = rep.samples_evaluated > 0;
  for (const auto& row : rep.identities) {
    if (!row.pass(rep.tol)) rep.pass = false;
  }
  return rep;
}

void write_report(std::ostream& out, const ValidateReport& r, Format f) {
  const auto status = [&](const IdentityResult& row) {
    if (row.informational) return "INFO";
    return row.pass(r.tol) ? "PASS" : "FAIL";
  };
  if (f == Format::kJson) {
    json j;
    j["scene"] = r.scene;
    j["seed"] = r.seed;
    j["samples_requested"] = r.samples_requested;
    j["samples_evaluated"] = r.samples_evaluated;
    j["tol"] = r.tol;
    j["pass"] = r.pass;
    j["errors"] = json::object();
    for (const auto& [k, v] : r.errors) j["errors"][k] = v;
    j["identities"] = json::array();
    for (const auto& row : r.identities) {
      j["identities"].push_back({{"name", row.name},
                                 {"max_residual", row.max_residual},
                                 {"samples", row.evaluated},
                                 {"status", status(row)}});
    }
    out << j.dump(2) << "\n";
    return;
  }
  out << "identity,max_residual,tol,samples,status\n";
  for (const auto& row : r.identities) {
    out << '"' << row.name << "\"," << fmt(row.max_residual) << ','
        << (row.informational ? "" : fmt(r.tol)) << ',' << row.evaluated << ','
        << status(row) << "\n";
  }
  for (const auto& [k, v] : r.errors) {
    out << "\"errors: " << k << "\",,," << v << ",ERROR\n";
  }
}

dynamics::Trajectory run_trajectory(const Scene& s) {
  const Vec4 y0 = s.particle.unit_speed
                      ? dynamics::unit_speed(s.space, s.particle.x0, s.particle.y0)
                      : s.particle.y0;
  return dynamics::integrate(s.space, s.particle.x0, y0, s.integrate.t_end,
                             s.integrate.method, s.integrate.params);
}

void write_trajectory(std::ostream& out, const dynamics::Trajectory& t,
                      Format f) {
  if (f == Format::kJson) {
    json j;
    j["method"] = dynamics::to_string(t.method);
    j["states"] = json::array();
    for (const auto& s : t.states) {
      j["states"].push_back({{"t", s.t},
                             {"x", to_json(s.x)},
                             {"y", to_json(s.y)},
                             {"delta_y_dt", to_json(s.delta_y_dt)},
                             {"F_value", s.monitors.F_value},
                             {"ortho_F", s.monitors.ortho_F},
                             {"ortho_Ftilde", s.monitors.ortho_Ftilde},
                             {"omega_residual", s.monitors.omega_residual}});
    }
    out << j.dump(2) << "\n";
    return;
  }
  out << "t,x0,x1,x2,x3,y0,y1,y2,y3,dy0,dy1,dy2,dy3,F_value,ortho_F,"
         "ortho_Ftilde,omega_residual\n";
  std::string line;
  for (const auto& s : t.states) {
    line = fmt(s.t);
    for (double v : s.x) line += ',' + fmt(v);
    for (double v : s.y) line += ',' + fmt(v);
    for (double v : s.delta_y_dt) line += ',' + fmt(v);
    line += ',' + fmt(s.monitors.F_value);
    line += ',' + fmt(s.monitors.ortho_F);
    line += ',' + fmt(s.monitors.ortho_Ftilde);
    line += ',' + fmt(s.monitors.omega_residual);
    out << line << '\n';
  }
}

CurrentsReport run_currents(const Scene& s, const scene::Grid& grid,
                            double step) {
  CurrentsReport rep;
  rep.rows.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t n) {
    CurrentRow& row = rep.rows[n];
    std::tie(row.x, row.y) = grid.point(n);
    row.interior = grid.interior(n);
    try {
      row.sample = maxwell::sample_currents(s.space, row.x, row.y, step);
    } catch (const Error& e) {
      row.error = to_string(e.kind());
    }
  });
  for (const auto& row : rep.rows) {
    if (!row.error.empty()) {
      ++rep.failed;
      continue;
    }
    if (!row.interior) continue;
    rep.max_divergence = std::max(rep.max_divergence, std::fabs(row.sample.continuity));
    rep.max_zeta = std::max(rep.max_zeta, max_abs(row.sample.zeta));
    rep.max_vertical = std::max(rep.max_vertical, max_abs(row.sample.J_v));
  }
  return rep;
}

void write_currents(std::ostream& out, const CurrentsReport& r, Format f) {
  if (f == Format::kJson) {
    json j;
    j["summary"] = {{"points", r.rows.size()},
                    {"failed", r.failed},
                    {"max_abs_divJ", r.max_divergence},
                    {"max_abs_zeta", r.max_zeta},
                    {"max_abs_Jtilde", r.max_vertical}};
    j["rows"] = json::array();
    for (const auto& row : r.rows) {
      json e = {{"x", to_json(row.x)},
                {"y", to_json(row.y)},
                {"interior", row.interior},
                {"status", row.error.empty() ? "ok" : row.error}};
      if (row.error.empty()) {
        e["J"] = to_json(row.sample.J_h);
        e["Jtilde"] = to_json(row.sample.J_v);
        e["zeta"] = to_json(row.sample.zeta);
        e["divJ"] = row.sample.continuity;
      }
      j["rows"].push_back(std::move(e));
    }
    out << j.dump(2) << "\n";
    return;
  }
  out << "x0,x1,x2,x3,y0,y1,y2,y3,J0,J1,J2,J3,Jt0,Jt1,Jt2,Jt3,zeta0,zeta1,"
         "zeta2,zeta3,divJ,interior,status\n";
  std::string line;
  for (const auto& row : r.rows) {
    line.clear();
    for (double v : row.x) line += fmt(v) + ',';
    for (double v : row.y) line += fmt(v) + ',';
    if (row.error.empty()) {
      for (double v : row.sample.J_h) line += fmt(v) + ',';
      for (double v : row.sample.J_v) line += fmt(v) + ',';
      for (double v : row.sample.zeta) line += fmt(v) + ',';
      line += fmt(row.sample.continuity) + ',';
    } else {
      for (int k = 0; k < 13; ++k) line += "nan,";
    }
    line += row.interior ? "1," : "0,";
    line += row.error.empty() ? "ok" : row.error;
    out << line << '\n';
  }
}

namespace {

double gap(const Vec4& a, const Vec4& b) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

CompareReport run_compare(const Scene& s, const CompareOptions& opt) {
  CompareReport rep;
  rep.y_ref = opt.y_ref.value_or(s.reference_direction());
  const SpaceDef iso = em::isotropic_truncation(s.space, rep.y_ref);

  struct Variant {
    std::string label;
    double kappa;
    SpaceDef space;
  };
  std::vector<Variant> variants;
  variants.push_back({"scene", s.anisotropy, s.space});
  std::vector<double> kappas = opt.kappas;
  std::sort(kappas.begin(), kappas.end());
  for (double k : kappas) {
    variants.push_back({"kappa", k,
                        em::scale_anisotropy(s.space, rep.y_ref, k / s.anisotropy)});
  }

  scene::PointSampler sampler(s.space, s.sampling);
  std::vector<scene::PointSampler::Draw> points;
  for (int n = 0; n < opt.current_samples; ++n) points.push_back(sampler.next());

  const auto endpoint = [&](const SpaceDef& space) {
    Scene copy = s;
    copy.space = space;
    return run_trajectory(copy).states.back();
  };
  std::optional<dynamics::TrajectoryState> iso_end;
  std::string iso_error;
  try {
    iso_end = endpoint(iso);
  } catch (const Error& e) {
    iso_error = e.what();
  }

  rep.rows.resize(variants.size());
  parallel_for(variants.size(), [&](std::size_t v) {
    Deltas& d = rep.rows[v];
    d.label = variants[v].label;
    d.kappa = variants[v].kappa;
    try {
      if (!iso_end) throw Error(ErrorKind::kIntegration, iso_error);
      const auto end = endpoint(variants[v].space);
      d.endpoint = gap(end.x, iso_end->x) + gap(end.y, iso_end->y);
      for (const auto& p : points) {
        const auto a = maxwell::currents(variants[v].space, p.x, p.y);
        const auto b = maxwell::currents(iso, p.x, p.y);
        for (int i = 0; i < kDim; ++i) {
          d.J_h = std::max(d.J_h, std::fabs(a.J_h[i] - b.J_h[i]));
          d.J_v = std::max(d.J_v, std::fabs(a.J_v[i] - b.J_v[i]));
          d.zeta = std::max(d.zeta, std::fabs(a.zeta[i] - b.zeta[i]));
        }
      }
    } catch (const Error& e) {
      d.error = e.what();
    }
  });

  const Deltas* prev = nullptr;
  for (const auto& d : rep.rows) {
    if (d.label != "kappa") continue;
    if (!d.error.empty()) rep.monotone = false;
    if (prev && !(d.endpoint > prev->endpoint && d.J_h > prev->J_h)) {
      rep.monotone = false;
    }
    prev = &d;
  }
  return rep;
}

void write_compare(std::ostream& out, const CompareReport& r, Format f) {
  if (f == Format::kJson) {
    json j;
    j["y_ref"] = to_json(r.y_ref);
    j["monotone"] = r.monotone;
    j["rows"] = json::array();
    for (const auto& d : r.rows) {
      j["rows"].push_back({{"case", d.label},
                           {"kappa", d.kappa},
                           {"endpoint_delta", d.endpoint},
                           {"J_delta", d.J_h},
                           {"Jtilde_delta", d.J_v},
                           {"zeta_delta", d.zeta},
                           {"status", d.error.empty() ? "ok" : d.error}});
    }
    out << j.dump(2) << "\n";
    return;
  }
  out << "case,kappa,endpoint_delta,J_delta,Jtilde_delta,zeta_delta,status\n";
  for (const auto& d : r.rows) {
    out << d.label << ',' << fmt(d.kappa) << ',' << fmt(d.endpoint) << ','
        << fmt(d.J_h) << ',' << fmt(d.J_v) << ',' << fmt(d.zeta) << ','
        << (d.error.empty() ? "ok" : "\"" + d.error + "\"") << '\n';
  }
}

}  // namespace finsler::commands
