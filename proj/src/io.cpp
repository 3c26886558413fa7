#include "cmc/io.hpp"

#include <fstream>
#include <sstream>

namespace cmc {

json complex_to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.contains("re")) return {j.at("re").get<double>(), j.value("im", 0.0)};
  throw Error("BadInput", "expected a complex number as {\"re\", \"im\"}, [re, im] or a real number");
}

json complex_list(const std::vector<cplx>& v) {
  json a = json::array();
  for (cplx z : v) a.push_back(complex_to_json(z));
  return a;
}

json loop_to_json(const LoopMatrix& g) {
  json c = json::object();
  for (const auto& [n, m] : g.coeffs) {
    json rows = json::array();
    for (int i = 0; i < 2; ++i) {
      json row = json::array();
      for (int k = 0; k < 2; ++k) row.push_back(json::array({m(i, k).real(), m(i, k).imag()}));
      rows.push_back(row);
    }
    c[std::to_string(n)] = rows;
  }
  return json{{"r", g.r}, {"N", g.N}, {"twisted", g.twisted}, {"coeffs", c}};
}

LoopMatrix loop_from_json(const json& j) {
  if (!j.is_object() || !j.contains("coeffs")) throw Error("BadInput", "loop JSON needs a \"coeffs\" object");
  std::map<int, Mat2> coeffs;
  for (const auto& [key, rows] : j.at("coeffs").items()) {
    int n = 0;
    try {
      size_t used = 0;
      n = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw Error("BadInput", "loop degree keys must be integers, got \"" + key + "\"");
    }
    if (!rows.is_array() || rows.size() != 2) throw Error("BadInput", "loop coefficient must be a 2x2 matrix");
    Mat2 m;
    for (int i = 0; i < 2; ++i) {
      if (!rows[i].is_array() || rows[i].size() != 2) throw Error("BadInput", "loop coefficient must be a 2x2 matrix");
      for (int k = 0; k < 2; ++k) m(i, k) = complex_from_json(rows[i][k]);
    }
    coeffs[n] = m;
  }
  const double r = j.value("r", 0.5);
  const int N = j.value("N", -1);
  return make_loop(coeffs, r, j.value("twisted", true), N);
}

json curve_to_json(const CurveSpec& s) {
  json j;
  j["inner_points"] = complex_list(s.inner);
  return j;
}

CurveSpec curve_from_json(const json& j) {
  const json& pts = j.is_array() ? j : j.at("inner_points");
  std::vector<cplx> v;
  for (const auto& p : pts) v.push_back(complex_from_json(p));
  return build_curve(v);
}

json rational_to_json(const RationalFn& f) {
  auto roots = [](const std::vector<Root>& rs) {
    json a = json::array();
    for (const auto& r : rs) a.push_back(json{{"z", complex_to_json(r.z)}, {"mult", r.mult}});
    return a;
  };
  return json{{"gain", complex_to_json(f.gain)}, {"nu_power", f.nu_power}, {"zeros", roots(f.zeros)},
              {"poles", roots(f.poles)}};
}

RationalFn rational_from_json(const json& j) {
  RationalFn f;
  f.gain = complex_from_json(j.at("gain"));
  f.nu_power = j.value("nu_power", 0);
  for (const char* key : {"zeros", "poles"}) {
    if (!j.contains(key)) continue;
    auto& dst = std::string(key) == "zeros" ? f.zeros : f.poles;
    for (const auto& r : j.at(key)) dst.push_back({complex_from_json(r.at("z")), r.value("mult", 1)});
  }
  return f;
}

json differential_to_json(const SecondKindDifferential& w) {
  json c = json::object();
  for (int k = -1; k <= w.genus; ++k) c[std::to_string(k)] = complex_to_json(w.coeff(k));
  return json{{"label", w.label}, {"genus", w.genus}, {"coeffs", c}};
}

FamilyParams family_from_json(const json& j) {
  if (!j.contains("curve")) throw Error("BadInput", "family config needs a \"curve\"");
  FamilyParams fp;
  fp.curve = curve_from_json(j.at("curve"));
  if (j.contains("q")) {
    fp.q = complex_from_json(j.at("q"));
  } else if (j.contains("m")) {
    auto m = j.at("m").get<std::vector<int>>();
    if (int(m.size()) != fp.curve.genus()) throw Error("BadInput", "\"m\" needs one integer per cut");
    auto cs = build_cycles(fp.curve);
    auto pr = periods_U(fp.curve, cs, build_omega1(fp.curve, cs), build_omega2(fp.curve, cs));
    fp.q = solve_q(pr.U, m).q;
  }
  if (j.contains("f_tilde")) {
    fp.f_tilde.clear();
    for (const auto& [k, v] : j.at("f_tilde").items()) fp.f_tilde[std::stoi(k)] = complex_from_json(v);
  }
  if (j.contains("nu0") && !j.at("nu0").is_null()) fp.nu0 = complex_from_json(j.at("nu0"));
  if (j.contains("scale") && !j.at("scale").is_null()) fp.scale = j.at("scale").get<double>();
  return fp;
}

json family_to_json(const FamilyParams& fp) {
  json j;
  j["curve"] = curve_to_json(fp.curve);
  j["q"] = complex_to_json(fp.q);
  json f = json::object();
  for (auto [k, v] : fp.f_tilde) f[std::to_string(k)] = complex_to_json(v);
  j["f_tilde"] = f;
  j["nu0"] = fp.nu0 ? complex_to_json(*fp.nu0) : json(nullptr);
  j["scale"] = fp.scale ? json(*fp.scale) : json(nullptr);
  return j;
}

json constructed_to_json(const ConstructedData& cd) {
  json j;
  j["family"] = family_to_json(cd.params);
  j["genus"] = cd.params.curve.genus();
  j["a2"] = rational_to_json(cd.a2);
  j["b2"] = rational_to_json(cd.b2);
  j["c2"] = rational_to_json(cd.c2);
  j["a2_scale"] = cd.a.scale;
  j["a2_sup_before_scaling"] = cd.a.sup;
  j["inner_zeros_of_1_minus_a2"] = complex_list(cd.bc.inner_zeros);
  j["sqrt_delta_gap"] = cd.bc.identity_gap;
  j["omega1"] = differential_to_json(cd.omega1);
  j["omega2"] = differential_to_json(cd.omega2);
  j["omega"] = differential_to_json(cd.omega);
  j["periods"] = period_report_to_json(cd.periods);
  json sym;
  sym["m"] = cd.sym.m;
  sym["deviation"] = cd.sym.deviation;
  sym["pass"] = cd.sym.pass;
  j["symmetry_condition"] = sym;
  j["p_constant"] = complex_to_json(cd.p->constant());
  j["f_plus_coeffs"] = complex_list(cd.p->f_plus_coeffs());
  j["r0"] = cd.r0;
  j["r_final"] = cd.r_final;
  j["omega_period_gap"] = cd.omega_period_gap;
  j["beta_at_branch"] = cd.beta_at_branch;
  j["hplus_conj_residual"] = cd.hplus.conj_residual;
  j["hplus_negative_tail"] = cd.hplus.negative_tail;
  return j;
}

json necessary_to_json(const NecessaryReport& r) {
  json a = json::array();
  for (const auto& c : r.conditions)
    a.push_back(json{{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}, {"note", c.note}});
  return json{{"all_pass", r.all_pass}, {"conditions", a}};
}

json closing_to_json(const ClosingResult& r) {
  return json{{"verdict", r.verdict}, {"order", r.order}, {"value", complex_to_json(r.value)},
              {"fit_coeff_abs", r.coeff_abs}};
}

json period_report_to_json(const PeriodReport& r) {
  json j{{"U", complex_list(r.U)}, {"V", complex_list(r.V)}, {"uv_gap", r.uv_gap}};
  j["delaunay_phi"] = r.delaunay_phi ? json(*r.delaunay_phi) : json(nullptr);
  return j;
}

json torus_to_json(const TorusVerdict& v) {
  json j{{"verdict", v.verdict},
         {"matrix", v.matrix},
         {"integer_deviation", v.integer_deviation},
         {"omega1_value", v.omega1_value},
         {"c", complex_to_json(v.c)}};
  j["lambda0"] = v.lambda0 ? complex_to_json(*v.lambda0) : json(nullptr);
  return j;
}

json certificate_to_json(const FiniteTypeCertificate& c) {
  return json{{"N", c.N},
              {"kappa", c.kappa},
              {"pole_order", c.pole_order},
              {"flow_residual", c.flow_residual},
              {"trivial", c.trivial},
              {"t", c.t},
              {"metric_residual", c.metric_residual},
              {"hplus_gap", c.hplus_gap},
              {"fit_method", c.fit.method}};
}

json error_to_json(const std::string& code, const std::string& message) {
  return json{{"error", code}, {"message", message}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("FileNotFound", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("BadInput", path + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("FileNotWritable", "cannot write " + path);
  out << dump(j);
}

}  // namespace cmc
