#include "halfline/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace halfline::io {

namespace {

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorKind::ConfigError, message);
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) config_error(std::string("missing field '") + name + "'");
  return j.at(name);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) config_error(std::string("'") + what + "' must be a number");
  return j.get<double>();
}

int integer(const Json& j, const char* what) {
  if (!j.is_number_integer()) config_error(std::string("'") + what + "' must be an integer");
  return j.get<int>();
}

std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) config_error(std::string("'") + what + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

Json pair(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_value(const Json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2) return {number(j[0], what), number(j[1], what)};
  if (j.is_object()) return {number(field(j, "re"), what), number(field(j, "im"), what)};
  config_error(std::string("'") + what + "' entries must be numbers, [re, im] or {re, im}");
}

Json flat_matrix(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(pair(m(r, c)));
  return out;
}

CMatrix flat_matrix_from(const Json& j, int n, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != n * n)
    config_error(std::string("'") + what + "' needs n*n entries per node");
  CMatrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = complex_value(j[static_cast<std::size_t>(r * n + c)], what);
  return m;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({{"re", m(r, c).real()}, {"im", m(r, c).imag()}});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) config_error("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) config_error("matrix rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) config_error("matrix rows differ in length");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_value(row[static_cast<std::size_t>(c)], "matrix");
  }
  return m;
}

Json bc_to_json(const BoundaryCondition& bc) {
  Json j{{"n", bc.channels()}, {"U", matrix_to_json(bc.U())}};
  if (!bc.kind().empty()) j["kind"] = bc.kind();
  return j;
}

BoundaryCondition bc_from_json(const Json& j) {
  const int n = integer(field(j, "n"), "n");
  if (n < 1) config_error("'n' must be positive");
  if (j.contains("U")) {
    const CMatrix u = matrix_from_json(j.at("U"));
    if (u.rows() != n || u.cols() != n) config_error("'U' must be n x n");
    return make_bc(u);
  }
  if (!j.contains("kind")) config_error("boundary condition needs 'U' or 'kind'");
  const auto& kind = j.at("kind");
  if (!kind.is_string()) config_error("'kind' must be a string");
  std::vector<double> phases;
  if (j.contains("phases")) phases = numbers(j.at("phases"), "phases");
  return standard_bc(parse_standard_kind(kind.get<std::string>()), n, phases);
}

Json potential_to_json(const MatrixPotential& q) {
  Json values = Json::array();
  for (const auto& v : q.values()) values.push_back(flat_matrix(v));
  return {{"n", q.channels()}, {"x", q.grid()}, {"Q", std::move(values)}};
}

MatrixPotential potential_from_json(const Json& j) {
  const int n = integer(field(j, "n"), "n");
  const auto x = numbers(field(j, "x"), "x");
  const auto& q = field(j, "Q");
  if (!q.is_array() || q.size() != x.size()) config_error("'Q' needs one entry per x node");
  std::vector<CMatrix> values;
  values.reserve(x.size());
  for (const auto& v : q) values.push_back(flat_matrix_from(v, n, "Q"));
  return MatrixPotential(x, std::move(values));
}

PotentialPreset preset_from_json(const Json& j, int n) {
  PotentialPreset p;
  const auto& shape = field(j, "shape");
  if (!shape.is_string()) config_error("'shape' must be a string");
  p.shape = parse_preset_shape(shape.get<std::string>());
  const auto& a = field(j, "amplitude");
  if (a.is_number()) {
    p.amplitude = CMatrix::Zero(n, n);
    if (j.contains("ray")) {
      const int r = integer(j.at("ray"), "ray");
      if (r < 0 || r >= n) config_error("'ray' out of range");
      p.amplitude(r, r) = a.get<double>();
    } else {
      p.amplitude.diagonal().setConstant(a.get<double>());
    }
  } else if (a.is_array() && !a.empty() && a[0].is_number()) {
    const auto d = numbers(a, "amplitude");
    if (static_cast<int>(d.size()) != n) config_error("diagonal 'amplitude' needs n entries");
    p.amplitude = CMatrix::Zero(n, n);
    for (int r = 0; r < n; ++r) p.amplitude(r, r) = d[static_cast<std::size_t>(r)];
  } else {
    p.amplitude = matrix_from_json(a);
    if (p.amplitude.rows() != n || p.amplitude.cols() != n) config_error("'amplitude' must be n x n");
  }
  if (j.contains("center")) p.center = number(j.at("center"), "center");
  if (j.contains("width")) p.width = number(j.at("width"), "width");
  if (!(p.width > 0.0)) config_error("'width' must be positive");
  return p;
}

MatrixPotential potential_spec_from_json(const Json& j) {
  if (j.contains("Q")) return potential_from_json(j);
  const int n = integer(field(j, "n"), "n");
  const double x_max = number(field(j, "x_max"), "x_max");
  const double h = number(field(j, "h"), "h");
  if (!(x_max > 0.0) || !(h > 0.0) || h > x_max) config_error("need 0 < h <= x_max");
  std::vector<PotentialPreset> presets;
  if (j.contains("presets")) {
    if (!j.at("presets").is_array()) config_error("'presets' must be an array");
    for (const auto& p : j.at("presets")) presets.push_back(preset_from_json(p, n));
  }
  if (presets.empty()) return MatrixPotential::zero(n, x_max, std::max(1, static_cast<int>(std::lround(x_max / h))));
  return sample_presets(presets, n, x_max, h);
}

Json scattering_to_json(const ScatteringData& data) {
  Json s = Json::array();
  for (const auto& m : data.S) s.push_back(flat_matrix(m));
  Json bound = Json::array();
  for (const auto& b : data.bound_states)
    bound.push_back({{"kappa", b.kappa}, {"order", b.order}, {"C2", matrix_to_json(b.C2)}});
  return {{"n", data.channels()}, {"k", data.kgrid}, {"S", std::move(s)},
          {"U_hat", matrix_to_json(data.U_hat)}, {"bound_states", std::move(bound)}};
}

ScatteringData scattering_from_json(const Json& j) {
  ScatteringData data;
  const int n = integer(field(j, "n"), "n");
  data.kgrid = numbers(field(j, "k"), "k");
  const auto& s = field(j, "S");
  if (!s.is_array() || s.size() != data.kgrid.size()) config_error("'S' needs one entry per k node");
  for (const auto& m : s) data.S.push_back(flat_matrix_from(m, n, "S"));
  data.U_hat = matrix_from_json(field(j, "U_hat"));
  if (data.U_hat.rows() != n || data.U_hat.cols() != n) config_error("'U_hat' must be n x n");
  if (j.contains("bound_states")) {
    for (const auto& b : j.at("bound_states")) {
      BoundState bs;
      bs.kappa = number(field(b, "kappa"), "kappa");
      if (b.contains("order")) bs.order = integer(b.at("order"), "order");
      bs.C2 = matrix_from_json(field(b, "C2"));
      data.bound_states.push_back(std::move(bs));
    }
  }
  return data;
}

Json partial_to_json(const RayScatteringData& data) {
  Json rays = Json::array();
  for (std::size_t r = 0; r < data.rays.size(); ++r) {
    Json values = Json::array();
    for (const auto& v : data.R[r]) values.push_back(pair(v));
    rays.push_back({{"j", data.rays[r]}, {"R", std::move(values)}});
  }
  return {{"n", data.n}, {"k", data.kgrid}, {"rays", std::move(rays)}, {"kappa", data.kappa},
          {"b", data.b}, {"orders", data.orders}};
}

RayScatteringData partial_from_json(const Json& j) {
  RayScatteringData data;
  data.n = integer(field(j, "n"), "n");
  data.kgrid = numbers(field(j, "k"), "k");
  const auto& rays = field(j, "rays");
  if (!rays.is_array() || rays.empty()) config_error("'rays' must be a non-empty array");
  for (const auto& r : rays) {
    data.rays.push_back(integer(field(r, "j"), "j"));
    const auto& values = field(r, "R");
    if (!values.is_array() || values.size() != data.kgrid.size()) config_error("'R' needs one entry per k node");
    std::vector<Complex> row;
    for (const auto& v : values) row.push_back(complex_value(v, "R"));
    data.R.push_back(std::move(row));
  }
  if (j.contains("kappa")) data.kappa = numbers(j.at("kappa"), "kappa");
  if (j.contains("b")) {
    if (!j.at("b").is_array()) config_error("'b' must be an array of rows");
    for (const auto& row : j.at("b")) data.b.push_back(numbers(row, "b"));
  }
  if (j.contains("orders"))
    for (const auto& o : j.at("orders")) data.orders.push_back(integer(o, "orders"));
  data.validate();
  return data;
}

Json diagnostics_to_json(const Diagnostics& d) {
  Json values = Json::object();
  for (const auto& [k, v] : d.values) values[k] = std::isfinite(v) ? Json(v) : Json(nullptr);
  return {{"values", std::move(values)}, {"warnings", d.warnings}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    config_error(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) config_error("cannot write '" + path + "'");
  out << text;
}

namespace {

std::string matrix_rows_csv(const char* xname, const char* name, const std::vector<double>& x,
                            const std::vector<CMatrix>& v) {
  std::string out = xname;
  const Eigen::Index n = v.empty() ? 0 : v.front().rows();
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::string idx = std::to_string(r + 1) + std::to_string(c + 1);
      out += std::string(",re_") + name + idx + ",im_" + name + idx;
    }
  out += '\n';
  for (std::size_t i = 0; i < x.size(); ++i) {
    out += format_number(x[i]);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c)
        out += ',' + format_number(v[i](r, c).real()) + ',' + format_number(v[i](r, c).imag());
    out += '\n';
  }
  return out;
}

}  // namespace

std::string scattering_csv(const std::vector<double>& kgrid, const std::vector<CMatrix>& s) {
  return matrix_rows_csv("k", "S", kgrid, s);
}

std::string potential_csv(const MatrixPotential& q) {
  return matrix_rows_csv("x", "Q", q.grid(), q.values());
}

std::string factor_csv(const DarbouxFactor& v) { return matrix_rows_csv("x", "V", v.grid, v.V); }

std::string kernel_csv(const TransformKernel& k) {
  return columns_csv({"x", "residual", "condition"}, {k.xgrid, k.residual, k.condition});
}

std::string columns_csv(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& columns) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + format_number(columns[c][r]);
    out += '\n';
  }
  return out;
}

}  // namespace halfline::io
