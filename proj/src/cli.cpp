#include "cmc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

namespace cmc {

namespace {

[[noreturn]] void usage(const std::string& msg) { throw Error("UsageError", msg); }

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"cylinder", "dress the identity and check the reference cylinder"},
    {"dress", "dress the cylinder by a plus loop on a z-grid"},
    {"surface", "Sym mesh of a dressed surface at one or more lambda0 (OBJ)"},
    {"potential", "meromorphic potential f, E on the grid"},
    {"metric", "metric u and sinh-Gordon residual on the grid"},
    {"check-symmetry", "necessary conditions and F(z+q) = chi F(z) for a translation q"},
    {"closing", "closing-order classification of beta^2 at lambda0"},
    {"periods", "normalized differentials, periods U and V, period matrix"},
    {"construct", "build a^2, b^2, c^2, p and h_+ from curve data"},
    {"check-torus", "torus integer-matrix conditions"},
    {"delaunay", "common real direction of the periods U_k"},
    {"genus1-report", "genus-one Omega1 coefficient and E/(rK) table"},
    {"finite-type", "trivial-flow certificates for N = g+1 .."},
};

const std::vector<std::string> kSingle = {"hplus", "curve",  "family", "q",         "m",   "nu0",     "scale",
                                          "grid",  "extent", "N",      "r",         "H",   "out",     "report",
                                          "obj",   "tol",    "int-tol", "zero-tol", "flow-N", "phi", "q1",
                                          "q2",    "hplus-out"};
const std::vector<std::string> kMulti = {"lambda", "theta"};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    usage("--" + key + ": not a number: " + v);
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) usage("--" + key + ": not an integer: " + v);
  return int(x);
}

cplx to_complex(const std::string& key, const std::string& v) {
  auto parts = split(v, ',');
  if (parts.size() == 1) return {to_double(key, parts[0]), 0.0};
  if (parts.size() == 2) return {to_double(key, parts[0]), to_double(key, parts[1])};
  usage("--" + key + ": expected re or re,im, got " + v);
}

// JSON config value to the flag's string form
std::string json_to_raw(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_number()) return j.dump();
  if (j.is_object() && j.contains("re")) return json(j.at("re")).dump() + "," + json(j.value("im", 0.0)).dump();
  if (j.is_array()) {
    std::string s;
    for (const auto& e : j) s += (s.empty() ? "" : ",") + json_to_raw(e);
    return s;
  }
  usage("unsupported config value " + j.dump());
}

std::string canonical_key(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

void require(bool ok, const std::string& what) {
  if (!ok) usage(what);
}

json grid_json(const ZGrid& g) {
  return json{{"nx", g.nx}, {"ny", g.ny}, {"x0", g.x0}, {"y0", g.y0}, {"dx", g.dx}, {"dy", g.dy}};
}

DressOptions dress_opts(const RunConfig& cfg) {
  DressOptions o;
  o.H = cfg.H;
  return o;
}

LoopMatrix load_hplus(const RunConfig& cfg) {
  require(!cfg.hplus.empty(), cfg.command + " needs --hplus");
  return loop_from_json(read_json_file(cfg.hplus));
}

FamilyParams load_family(const RunConfig& cfg) {
  FamilyParams fp;
  if (!cfg.family.empty()) {
    fp = family_from_json(read_json_file(cfg.family));
  } else {
    require(!cfg.curve.empty(), cfg.command + " needs --curve (or --family)");
    fp.curve = curve_from_json(read_json_file(cfg.curve));
  }
  if (cfg.q) {
    fp.q = *cfg.q;
  } else if (!cfg.m.empty()) {
    require(int(cfg.m.size()) == fp.curve.genus(), "--m needs one integer per cut");
    auto cs = build_cycles(fp.curve);
    auto pr = periods_U(fp.curve, cs, build_omega1(fp.curve, cs), build_omega2(fp.curve, cs));
    fp.q = solve_q(pr.U, cfg.m).q;
  } else if (cfg.family.empty()) {
    usage(cfg.command + " needs --q or --m with --curve");
  }
  if (cfg.nu0) fp.nu0 = cfg.nu0;
  if (cfg.scale) fp.scale = cfg.scale;
  return fp;
}

// Base points for pointwise checks: 3 x 3 sub-lattice of the grid, limited to |x|, |y| <= 0.5.
std::vector<cplx> check_points(const RunConfig& cfg) {
  const double e = std::min(cfg.extent, 0.5);
  std::vector<cplx> zs;
  for (int j = -1; j <= 1; ++j)
    for (int i = -1; i <= 1; ++i) zs.emplace_back(0.6 * e * i + 0.05 * j, 0.6 * e * j);
  return zs;
}

struct Output {
  json result = json::object();
  json truncation = json::object();
  int code = kExitOk;
};

double frame_tail(const FrameGrid& fg) {
  double t = 0.0;
  for (const auto& F : fg.frames) t = std::max(t, F.tail);
  return t;
}

// ---- commands ----

Output cmd_cylinder(const RunConfig& cfg) {
  Output o;
  const ZGrid grid = cfg.grid();
  const LoopMatrix h = LoopMatrix::identity(cfg.r, cfg.N);
  auto fg = dress(h, grid, dress_opts(cfg));
  double ferr = 0.0;
  for (int idx = 0; idx < grid.size(); ++idx) {
    const cplx z = grid.at(idx % grid.nx, idx / grid.nx);
    for (int k = 0; k < 16; ++k) {
      const cplx l = std::polar(1.0, 2 * kPi * (k + 0.5) / 16);
      ferr = std::max(ferr, maxabs(fg.frames[size_t(idx)].eval(l) - cylinder_value(z, l)));
    }
  }
  const cplx l0 = cfg.lambdas.empty() ? cplx(1.0) : cfg.lambdas.front();
  auto mesh = surface_mesh(fg, l0);
  // axis: rulings run along z = e^{i theta} s, circles along z = i e^{i theta} y with period pi/2
  const cplx dir = l0 / std::abs(l0);
  auto P = [&](cplx z) {
    auto p = sym_point(cylinder_frame(z, 1.0, 60), l0, cfg.H);
    return Eigen::Vector3d(p[0], p[1], p[2]);
  };
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int k = 0; k < 16; ++k) c += P(kI * dir * (kPi / 2) * (k / 16.0)) / 16.0;
  const Eigen::Vector3d d = (P(dir) - P(0.0)).normalized();
  const double R = 1.0 / (2.0 * std::abs(cfg.H));
  double rdev = 0.0;
  for (const auto& v : mesh.vertices) {
    Eigen::Vector3d x = Eigen::Vector3d(v[0], v[1], v[2]) - c;
    rdev = std::max(rdev, std::abs((x - x.dot(d) * d).norm() - R));
  }
  if (!cfg.obj.empty()) write_obj(mesh, cfg.obj);
  o.result = json{{"grid", grid_json(grid)},
                  {"frame_error", ferr},
                  {"max_unitarity", fg.max_unitarity},
                  {"initial_error", fg.initial_error},
                  {"lambda0", complex_to_json(l0)},
                  {"radius", R},
                  {"radius_deviation", rdev},
                  {"imag_residue", mesh.imag_residue},
                  {"obj", cfg.obj.empty() ? json(nullptr) : json(cfg.obj)}};
  o.truncation["frame_tail"] = frame_tail(fg);
  return o;
}

Output cmd_dress(const RunConfig& cfg) {
  Output o;
  const auto h = load_hplus(cfg);
  auto fg = dress(h, cfg.grid(), dress_opts(cfg));
  o.result = json{{"grid", grid_json(fg.grid)}, {"max_unitarity", fg.max_unitarity}, {"initial_error", fg.initial_error}};
  if (cfg.with_frames) {
    json fr = json::array();
    for (const auto& F : fg.frames) fr.push_back(loop_to_json(F));
    o.result["frames"] = fr;
  }
  o.truncation["seed_tail"] = h.tail;
  o.truncation["frame_tail"] = frame_tail(fg);
  return o;
}

Output cmd_surface(const RunConfig& cfg) {
  Output o;
  require(!cfg.out.empty(), "surface needs --out mesh.obj");
  const auto h = load_hplus(cfg);
  const ZGrid grid = cfg.grid();
  auto fg = dress(h, grid, dress_opts(cfg));
  const std::vector<cplx> ls = cfg.lambdas.empty() ? std::vector<cplx>{1.0} : cfg.lambdas;
  json meshes = json::array();
  for (size_t k = 0; k < ls.size(); ++k) {
    std::string path = cfg.out;
    if (ls.size() > 1) {
      const auto dot = path.rfind('.');
      const std::string tag = "_" + std::to_string(k);
      path = dot == std::string::npos ? path + tag : path.substr(0, dot) + tag + path.substr(dot);
    }
    auto mesh = surface_mesh(fg, ls[k]);
    write_obj(mesh, path);
    auto Hm = mesh_mean_curvature(mesh, grid);
    double lo = 1e300, hi = -1e300, sum = 0.0;
    int cnt = 0;
    for (double v : Hm)
      if (!std::isnan(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        ++cnt;
      }
    json mc = cnt ? json{{"mean", sum / cnt}, {"min", lo}, {"max", hi}, {"spread", hi - lo}} : json(nullptr);
    meshes.push_back(json{{"lambda0", complex_to_json(ls[k])},
                          {"path", path},
                          {"vertices", mesh.vertices.size()},
                          {"faces", mesh.faces.size()},
                          {"imag_residue", mesh.imag_residue},
                          {"mean_curvature", mc}});
  }
  o.result = json{{"grid", grid_json(grid)}, {"max_unitarity", fg.max_unitarity}, {"meshes", meshes}};
  o.truncation["frame_tail"] = frame_tail(fg);
  return o;
}

Output cmd_potential(const RunConfig& cfg) {
  Output o;
  const auto h = load_hplus(cfg);
  auto fg = dress(h, cfg.grid(), dress_opts(cfg));
  auto ps = extract_potential(fg, dress_opts(cfg));
  json f = json::array(), E = json::array(), valid = json::array();
  double edev = 0.0, off = 0.0;
  int bad = 0;
  for (size_t i = 0; i < ps.f.size(); ++i) {
    f.push_back(complex_to_json(ps.f[i]));
    E.push_back(complex_to_json(ps.E[i]));
    valid.push_back(bool(ps.valid[i]));
    if (ps.valid[i]) {
      edev = std::max(edev, std::abs(ps.E[i] - 1.0));
      off = std::max(off, ps.off_band[i]);
    } else {
      ++bad;
    }
  }
  o.result = json{{"grid", grid_json(fg.grid)}, {"max_E_deviation", edev}, {"max_off_band", off},
                  {"invalid_nodes", bad}, {"poles", complex_list(ps.poles)}, {"f", f}, {"E", E}, {"valid", valid}};
  o.truncation["frame_tail"] = frame_tail(fg);
  return o;
}

Output cmd_metric(const RunConfig& cfg) {
  Output o;
  const auto h = load_hplus(cfg);
  auto fg = dress(h, cfg.grid(), dress_opts(cfg));
  auto ms = extract_metric(fg, nullptr, dress_opts(cfg));
  double off = 0.0, real = 0.0, ugap = 0.0;
  for (size_t i = 0; i < ms.u.size(); ++i) {
    off = std::max(off, ms.off_band[i]);
    real = std::max(real, ms.reality_gap[i]);
    ugap = std::max(ugap, ms.u_exact_gap[i]);
  }
  json res = json::array();
  for (double v : ms.residual) res.push_back(std::isnan(v) ? json(nullptr) : json(v));
  o.result = json{{"grid", grid_json(fg.grid)},
                  {"max_sinh_gordon_residual", ms.max_residual},
                  {"max_off_band", off},
                  {"max_reality_gap", real},
                  {"max_u_gap", ugap},
                  {"u", ms.u},
                  {"residual", res}};
  o.truncation["frame_tail"] = frame_tail(fg);
  return o;
}

struct SymSource {
  SymmetryData sd;
  std::optional<ConstructedData> cd;
};

SymSource symmetry_source(const RunConfig& cfg) {
  SymSource s;
  if (!cfg.family.empty() || !cfg.curve.empty()) {
    s.cd = assemble_family(load_family(cfg));
    s.sd = s.cd->sd;
  } else {
    require(cfg.q.has_value(), cfg.command + " needs --q (cylinder) or --curve/--family");
    s.sd = cylinder_symmetry(*cfg.q, cfg.r);
  }
  return s;
}

Output cmd_check_symmetry(const RunConfig& cfg) {
  Output o;
  auto src = symmetry_source(cfg);
  auto nec = validate_necessary(src.sd);
  const auto zs = check_points(cfg);
  double trans = 0.0, uvar = 0.0, unit = 0.0;
  if (src.cd) {
    auto fc = check_family(*src.cd, zs, dress_opts(cfg));
    trans = fc.translation_residual;
    uvar = fc.u_variation;
    unit = fc.chi_unitarity;
    o.truncation["hplus_negative_tail"] = src.cd->hplus.negative_tail;
  } else {
    auto chi = build_chi(src.sd);
    Dresser d(LoopMatrix::identity(cfg.r, cfg.N), dress_opts(cfg));
    trans = verify_translation(d, src.sd.q, chi, zs).residual;
    unit = chi.unitarity;
  }
  const bool ok = nec.all_pass && trans < cfg.tol;
  o.result = json{{"source", src.cd ? "constructed" : "cylinder"},
                  {"q", complex_to_json(src.sd.q)},
                  {"necessary", necessary_to_json(nec)},
                  {"translation_residual", trans},
                  {"u_variation", uvar},
                  {"chi_unitarity", unit},
                  {"base_points", complex_list(zs)},
                  {"verdict", ok ? "symmetric" : "not-symmetric"}};
  o.code = ok ? kExitOk : kExitVerdict;
  return o;
}

Output cmd_closing(const RunConfig& cfg) {
  Output o;
  require(!cfg.lambdas.empty(), "closing needs --lambda or --theta");
  auto src = symmetry_source(cfg);
  ScalarFn b2 = [sd = src.sd](cplx l) { return sd.two_sided(l).beta2; };
  json rows = json::array();
  for (cplx l0 : cfg.lambdas) {
    json r = closing_to_json(closing_test(b2, l0));
    r["lambda0"] = complex_to_json(l0);
    rows.push_back(r);
  }
  o.result = json{{"q", complex_to_json(src.sd.q)}, {"closing", rows}};
  return o;
}

Output cmd_periods(const RunConfig& cfg) {
  Output o;
  require(!cfg.curve.empty(), "periods needs --curve");
  const auto s = curve_from_json(read_json_file(cfg.curve));
  auto cs = build_cycles(s);
  auto o1 = build_omega1(s, cs), o2 = build_omega2(s, cs);
  auto pr = periods_U(s, cs, o1, o2);
  double a1 = 0.0, a2 = 0.0;
  for (cplx v : cycle_periods(s, cs, cs.a, o1)) a1 = std::max(a1, std::abs(v));
  for (cplx v : cycle_periods(s, cs, cs.a, o2)) a2 = std::max(a2, std::abs(v));
  auto tau = period_matrix(s, cs);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tau.imag());
  json T = json::array();
  for (int i = 0; i < tau.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < tau.cols(); ++k) row.push_back(complex_to_json(tau(i, k)));
    T.push_back(row);
  }
  o.result = json{{"curve", curve_to_json(s)},
                  {"genus", s.genus()},
                  {"c0", complex_to_json(s.c0)},
                  {"omega1", differential_to_json(o1)},
                  {"omega2", differential_to_json(o2)},
                  {"a_periods_max", json{{"omega1", a1}, {"omega2", a2}}},
                  {"periods", period_report_to_json(pr)},
                  {"period_matrix", T},
                  {"period_matrix_asymmetry", (tau - tau.transpose()).cwiseAbs().maxCoeff()},
                  {"im_tau_min_eigenvalue", es.eigenvalues().minCoeff()}};
  if (cfg.q) {
    auto w = build_omega_q(o1, o2, *cfg.q);
    double aw = 0.0;
    for (cplx v : cycle_periods(s, cs, cs.a, w)) aw = std::max(aw, std::abs(v));
    auto sc = check_sym_condition(pr.U, *cfg.q, cfg.tol);
    o.result["omega"] = differential_to_json(w);
    o.result["omega_a_periods_max"] = aw;
    o.result["symmetry_condition"] = json{{"m", sc.m}, {"deviation", sc.deviation}, {"pass", sc.pass}};
  }
  return o;
}

Output cmd_construct(const RunConfig& cfg) {
  Output o;
  auto cd = assemble_family(load_family(cfg));
  auto nec = validate_necessary(cd.sd);
  o.result = constructed_to_json(cd);
  o.result["necessary"] = necessary_to_json(nec);
  if (!cfg.hplus_out.empty()) {
    write_json_file(loop_to_json(cd.hplus.loop), cfg.hplus_out);
    o.result["hplus_path"] = cfg.hplus_out;
  } else {
    o.result["hplus"] = loop_to_json(cd.hplus.loop);
  }
  o.truncation["hplus_negative_tail"] = cd.hplus.negative_tail;
  o.truncation["hplus_conj_residual"] = cd.hplus.conj_residual;
  o.code = nec.all_pass ? kExitOk : kExitVerdict;
  return o;
}

Output cmd_check_torus(const RunConfig& cfg) {
  Output o;
  require(!cfg.curve.empty(), "check-torus needs --curve");
  const auto s = curve_from_json(read_json_file(cfg.curve));
  auto cs = build_cycles(s);
  auto o1 = build_omega1(s, cs), o2 = build_omega2(s, cs);
  auto pr = periods_U(s, cs, o1, o2);
  std::optional<cplx> l0;
  if (!cfg.lambdas.empty()) l0 = cfg.lambdas.front();
  auto v = check_torus(s, o1, pr.U, cfg.q1.value_or(1.0), cfg.q2.value_or(kI), l0, cfg.int_tol, cfg.zero_tol);
  o.result = torus_to_json(v);
  o.result["U"] = complex_list(pr.U);
  o.code = v.verdict == "torus-conditions-met" ? kExitOk : kExitVerdict;
  return o;
}

Output cmd_delaunay(const RunConfig& cfg) {
  Output o;
  require(!cfg.curve.empty(), "delaunay needs --curve");
  const auto s = curve_from_json(read_json_file(cfg.curve));
  auto cs = build_cycles(s);
  auto pr = periods_U(s, cs, build_omega1(s, cs), build_omega2(s, cs));
  o.result = period_report_to_json(pr);
  o.result["delaunay"] = pr.delaunay_phi.has_value();
  o.code = pr.delaunay_phi ? kExitOk : kExitVerdict;
  return o;
}

Output cmd_genus1(const RunConfig& cfg) {
  Output o;
  std::vector<double> rs = cfg.rs;
  if (rs.empty())
    for (int k = 1; k <= 9; ++k) rs.push_back(0.1 * k);
  json rows = json::array();
  bool all = true;
  double min_margin = 1e300;
  for (double r : rs) {
    const cplx nu1 = std::polar(r, cfg.phi);
    const auto s = build_curve({nu1});
    auto cs = build_cycles(s);
    auto o1 = build_omega1(s, cs), o2 = build_omega2(s, cs);
    auto pr = periods_U(s, cs, o1, o2);
    auto [K, E] = elliptic_KE(std::sqrt((1.0 - r) * (1.0 + r)));
    const double ratio = E / (r * K);
    const cplx closed = genus1_omega1_c0(nu1);
    auto tv = check_torus(s, o1, pr.U, 1.0, kI, std::nullopt, cfg.int_tol, cfg.zero_tol);
    min_margin = std::min(min_margin, ratio - 1.0);
    all = all && ratio > 1.0 && tv.verdict == "no-torus";
    rows.push_back(json{{"r", r},
                        {"nu1", complex_to_json(nu1)},
                        {"b_numeric", complex_to_json(o1.coeff(0))},
                        {"b_closed_form", complex_to_json(closed)},
                        {"b_gap", std::abs(o1.coeff(0) - closed)},
                        {"abs_b", std::abs(o1.coeff(0))},
                        {"K", K},
                        {"E", E},
                        {"ratio", ratio},
                        {"margin", ratio - 1.0},
                        {"torus_verdict", tv.verdict}});
  }
  o.result = json{{"phi", cfg.phi}, {"rows", rows}, {"min_margin", min_margin}, {"all_no_torus", all}};
  o.code = all ? kExitOk : kExitVerdict;
  return o;
}

Output cmd_finite_type(const RunConfig& cfg) {
  Output o;
  auto cd = assemble_family(load_family(cfg));
  const int g = cd.params.curve.genus();
  std::vector<int> Ns = cfg.Ns;
  if (Ns.empty())
    for (int N = g + 1; N <= g + 4; ++N) Ns.push_back(N);
  const std::vector<cplx> zs = {cplx(0.0), cplx(0.2, 0.1), cplx(-0.3, 0.25)};
  json certs = json::array();
  bool all = true;
  int kappa = 0;
  for (int N : Ns) {
    require(N >= g + 1, "--flow-N values must be at least g + 1");
    auto c = certify_finite_type(cd.params.curve, cd.sd, cd.hplus.loop, N, zs, 0.5, dress_opts(cfg));
    kappa = c.kappa;
    all = all && c.trivial;
    certs.push_back(certificate_to_json(c));
  }
  o.result = json{{"genus", g}, {"kappa", kappa}, {"codim_bound", kappa + g}, {"all_trivial", all},
                  {"certificates", certs}};
  o.truncation["hplus_negative_tail"] = cd.hplus.negative_tail;
  o.code = all ? kExitOk : kExitVerdict;
  return o;
}

}  // namespace

json RunConfig::to_json() const {
  auto opt_c = [](const std::optional<cplx>& z) { return z ? complex_to_json(*z) : json(nullptr); };
  json j;
  j["command"] = command;
  j["hplus"] = hplus;
  j["curve"] = curve;
  j["family"] = family;
  j["q"] = opt_c(q);
  j["m"] = m;
  j["nu0"] = opt_c(nu0);
  j["scale"] = scale ? json(*scale) : json(nullptr);
  j["grid"] = json::array({nx, ny});
  j["extent"] = extent;
  j["N"] = N;
  j["r"] = r;
  j["H"] = H;
  j["lambda"] = complex_list(lambdas);
  j["out"] = out;
  j["flow_N"] = Ns;
  j["r_list"] = rs;
  j["phi"] = phi;
  j["q1"] = opt_c(q1);
  j["q2"] = opt_c(q2);
  return j;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"cmc: loop-group construction of CMC surfaces with periodic metric", "cmc"};
  app.require_subcommand(1);
  std::map<std::string, std::string> single;
  std::map<std::string, std::vector<std::string>> multi;
  std::string config;
  bool with_frames = false;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, desc] : kCommands) {
    auto* sub = app.add_subcommand(name, desc);
    subs[name] = sub;
    for (const auto& k : kSingle) sub->add_option("--" + k, single[k]);
    for (const auto& k : kMulti) sub->add_option("--" + k, multi[k]);
    sub->add_option("--config", config, "JSON file with default values for any flag");
    sub->add_flag("--with-frames", with_frames, "include frame loops in the dress output");
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw Error("Help", app.help());
  } catch (const CLI::ParseError& e) {
    usage(e.what());
  }

  RunConfig cfg;
  CLI::App* sub = nullptr;
  for (auto& [name, s] : subs)
    if (s->parsed()) {
      cfg.command = name;
      sub = s;
    }
  if (!config.empty()) {
    cfg.config = config;
    const json j = read_json_file(config);
    if (!j.is_object()) usage("--config must hold a JSON object");
    for (const auto& [k0, v] : j.items()) {
      const std::string k = canonical_key(k0);
      if (std::find(kSingle.begin(), kSingle.end(), k) != kSingle.end()) {
        if (sub->count("--" + k) == 0) single[k] = json_to_raw(v);
      } else if (std::find(kMulti.begin(), kMulti.end(), k) != kMulti.end()) {
        if (sub->count("--" + k) == 0) {
          multi[k].clear();
          if (v.is_array() && !(k == "lambda" && v.size() == 2 && v[0].is_number()))
            for (const auto& e : v) multi[k].push_back(json_to_raw(e));
          else
            multi[k].push_back(json_to_raw(v));
        }
      } else if (k == "with-frames") {
        if (sub->count("--with-frames") == 0) with_frames = v.get<bool>();
      } else {
        usage("unknown config key " + k0);
      }
    }
  }

  auto has = [&](const std::string& k) { return !single[k].empty(); };
  cfg.hplus = single["hplus"];
  cfg.curve = single["curve"];
  cfg.family = single["family"];
  cfg.out = single["out"];
  cfg.report = single["report"];
  cfg.obj = single["obj"];
  cfg.hplus_out = single["hplus-out"];
  cfg.with_frames = with_frames;
  if (has("q")) cfg.q = to_complex("q", single["q"]);
  if (has("nu0")) cfg.nu0 = to_complex("nu0", single["nu0"]);
  if (has("q1")) cfg.q1 = to_complex("q1", single["q1"]);
  if (has("q2")) cfg.q2 = to_complex("q2", single["q2"]);
  if (has("m"))
    for (const auto& s : split(single["m"], ',')) cfg.m.push_back(to_int("m", s));
  if (has("scale")) cfg.scale = to_double("scale", single["scale"]);
  if (has("grid")) {
    auto g = split(single["grid"], ',');
    if (g.size() == 1) g.push_back(g[0]);
    if (g.size() != 2) usage("--grid expects nx,ny");
    cfg.nx = to_int("grid", g[0]);
    cfg.ny = to_int("grid", g[1]);
  }
  if (has("extent")) cfg.extent = to_double("extent", single["extent"]);
  if (has("N")) cfg.N = to_int("N", single["N"]);
  if (has("r")) {
    for (const auto& s : split(single["r"], ',')) cfg.rs.push_back(to_double("r", s));
    if (cfg.rs.empty()) usage("--r is empty");
    cfg.r = cfg.rs.front();
  }
  if (has("H")) cfg.H = to_double("H", single["H"]);
  if (has("tol")) cfg.tol = to_double("tol", single["tol"]);
  if (has("int-tol")) cfg.int_tol = to_double("int-tol", single["int-tol"]);
  if (has("zero-tol")) cfg.zero_tol = to_double("zero-tol", single["zero-tol"]);
  if (has("phi")) cfg.phi = to_double("phi", single["phi"]);
  if (has("flow-N"))
    for (const auto& s : split(single["flow-N"], ',')) cfg.Ns.push_back(to_int("flow-N", s));
  for (const auto& v : multi["lambda"]) cfg.lambdas.push_back(to_complex("lambda", v));
  for (const auto& v : multi["theta"])
    for (const auto& s : split(v, ',')) cfg.lambdas.push_back(std::polar(1.0, to_double("theta", s)));

  // validation
  if (cfg.nx < 4 || cfg.ny < 4) usage("--grid: both sizes must be at least 4");
  if (!(cfg.extent > 0.0)) usage("--extent must be positive");
  if (cfg.N < 8) usage("--N must be at least 8");
  for (double r : cfg.rs)
    if (!(r > 0.0 && r < 1.0)) usage("--r values must lie in (0, 1)");
  if (!(cfg.r > 0.0 && cfg.r < 1.0)) usage("--r must lie in (0, 1)");
  if (cfg.H == 0.0 || !std::isfinite(cfg.H)) usage("--H must be nonzero");
  for (double t : {cfg.tol, cfg.int_tol, cfg.zero_tol})
    if (!(t > 0.0)) usage("tolerances must be positive");
  for (cplx l : cfg.lambdas)
    if (std::abs(std::abs(l) - 1.0) > 1e-12) usage("--lambda values must lie on the unit circle");
  if (cfg.command == "construct" || cfg.command == "finite-type")
    if (cfg.curve.empty() && cfg.family.empty()) usage(cfg.command + " needs --curve (or --family)");
  return cfg;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, Output (*)(const RunConfig&)> table = {
      {"cylinder", cmd_cylinder},     {"dress", cmd_dress},
      {"surface", cmd_surface},       {"potential", cmd_potential},
      {"metric", cmd_metric},         {"check-symmetry", cmd_check_symmetry},
      {"closing", cmd_closing},       {"periods", cmd_periods},
      {"construct", cmd_construct},   {"check-torus", cmd_check_torus},
      {"delaunay", cmd_delaunay},     {"genus1-report", cmd_genus1},
      {"finite-type", cmd_finite_type}};
  auto it = table.find(cfg.command);
  if (it == table.end()) {
    err << dump(error_to_json("UsageError", "unknown command " + cfg.command));
    return kExitUsage;
  }
  try {
    Output o = it->second(cfg);
    json doc;
    doc["command"] = cfg.command;
    doc["exit_code"] = o.code;
    doc["result"] = o.result;
    doc["provenance"] = json{{"config", cfg.to_json()},
                             {"tolerances", json{{"tol", cfg.tol}, {"int_tol", cfg.int_tol}, {"zero_tol", cfg.zero_tol}}},
                             {"truncation", o.truncation}};
    // surface writes its mesh to --out; its report goes to --report
    const std::string path = cfg.command == "surface" ? cfg.report : cfg.out;
    if (path.empty())
      out << dump(doc);
    else
      write_json_file(doc, path);
    return o.code;
  } catch (const Error& e) {
    err << dump(error_to_json(e.code(), e.what()));
    const bool input = e.code() == "UsageError" || e.code() == "FileNotFound" || e.code() == "BadInput";
    return input ? kExitUsage : kExitNumeric;
  } catch (const std::exception& e) {
    err << dump(error_to_json("InternalError", e.what()));
    return kExitNumeric;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const Error& e) {
    if (e.code() == "Help") {
      out << e.what();
      return kExitOk;
    }
    err << dump(error_to_json(e.code() == "FileNotFound" ? "FileNotFound" : "UsageError", e.what()));
    return kExitUsage;
  }
  return dispatch(cfg, out, err);
}

}  // namespace cmc
