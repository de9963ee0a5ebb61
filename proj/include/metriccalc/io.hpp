#pragma once

#include "metriccalc/lip.hpp"
#include "metriccalc/mds.hpp"
#include "metriccalc/modalg.hpp"
#include "metriccalc/space.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace mc::io {

using json = nlohmann::json;

// Space JSON: { "points": [[..]..] | "dist": [[..]..], "weights": [..],
//               "metric": "euclidean" | {"snowflake": a} | "matrix", "labels": [..] }
json space_to_json(const Space& space);
Space space_from_json(const json& j);

json stencil_to_json(const Derivation& d);
Derivation stencil_from_json(const Space& space, const json& j);

json stratification_to_json(const Stratification& s);
json atlas_to_json(const Atlas& a);

std::string field_to_csv(const ScalarField& f);
std::vector<double> field_values_from_csv(const std::string& text);

std::string lip_profile_to_csv(const LipProfile& p);
std::string component_table_to_csv(const ComponentTable& t);
std::string partial_derivatives_to_csv(const PartialDerivativeTable& pd);

std::string format_double(double v); // full-precision, locale-free

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace mc::io
