#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "halfline/boundary_conditions.hpp"
#include "halfline/darboux.hpp"
#include "halfline/forward_scattering.hpp"
#include "halfline/marchenko.hpp"
#include "halfline/potential.hpp"
#include "halfline/star_graph.hpp"

namespace halfline::io {

using Json = nlohmann::json;

// 17 significant digits, '.' separator, independent of the locale.
std::string format_number(double v);

// Dense matrices as [[{"re":..,"im":..},..],..].
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j);

// {"n":.., "U":[[..]]} or {"kind":"robin","n":..,"phases":[..]}; U wins when both are present.
Json bc_to_json(const BoundaryCondition& bc);
BoundaryCondition bc_from_json(const Json& j);

// {"n":.., "x":[..], "Q":[[[re,im], ..n*n row-major..], ..]}
Json potential_to_json(const MatrixPotential& q);
MatrixPotential potential_from_json(const Json& j);

// {"shape":"gaussian","amplitude":<number | real rows | matrix>,"center":..,"width":..}
PotentialPreset preset_from_json(const Json& j, int n);

// Either a sampled potential or {"n", "x_max", "h", "presets":[..]}.
MatrixPotential potential_spec_from_json(const Json& j);

Json scattering_to_json(const ScatteringData& data);
ScatteringData scattering_from_json(const Json& j);

// {"n":.., "k":[..], "rays":[{"j":..,"R":[[re,im],..]}, ..], "kappa":[..], "b":[[..]], "orders":[..]}
Json partial_to_json(const RayScatteringData& data);
RayScatteringData partial_from_json(const Json& j);

Json diagnostics_to_json(const Diagnostics& d);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// CSV layouts; all numbers through format_number.
std::string scattering_csv(const std::vector<double>& kgrid, const std::vector<CMatrix>& s);
std::string potential_csv(const MatrixPotential& q);
std::string factor_csv(const DarbouxFactor& v);
std::string kernel_csv(const TransformKernel& k);
std::string columns_csv(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& columns);

}  // namespace halfline::io
