#pragma once

#include <string>

#include "json.hpp"

#include "cmc/construct.hpp"
#include "cmc/flows.hpp"
#include "cmc/periods.hpp"
#include "cmc/symmetry.hpp"

namespace cmc {

using json = nlohmann::ordered_json;

// Complex scalars are {"re": x, "im": y}; a bare number or [re, im] is accepted on input.
json complex_to_json(cplx z);
cplx complex_from_json(const json& j);
json complex_list(const std::vector<cplx>& v);

// {"r", "N", "twisted", "coeffs": {"n": [[[re,im],[re,im]],[[re,im],[re,im]]]}}
json loop_to_json(const LoopMatrix& g);
LoopMatrix loop_from_json(const json& j);

// {"inner_points": [{"re", "im"}, ...]}
json curve_to_json(const CurveSpec& s);
CurveSpec curve_from_json(const json& j);

// {"gain", "nu_power", "zeros": [{"z", "mult"}], "poles": [...]}
json rational_to_json(const RationalFn& f);
RationalFn rational_from_json(const json& j);

json differential_to_json(const SecondKindDifferential& w);

// {"curve": ..., "q": z | "m": [ints], "f_tilde": {"k": z}, "nu0": z, "scale": x}
FamilyParams family_from_json(const json& j);
json family_to_json(const FamilyParams& fp);

json constructed_to_json(const ConstructedData& cd);
json necessary_to_json(const NecessaryReport& r);
json closing_to_json(const ClosingResult& r);
json period_report_to_json(const PeriodReport& r);
json torus_to_json(const TorusVerdict& v);
json certificate_to_json(const FiniteTypeCertificate& c);
json error_to_json(const std::string& code, const std::string& message);

json read_json_file(const std::string& path);
void write_json_file(const json& j, const std::string& path);
// Fixed formatting: two-space indent, shortest round-trip doubles, NaN and inf as null.
std::string dump(const json& j);

}  // namespace cmc
