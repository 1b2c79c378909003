#include "halfline/workbench.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "halfline/linalg.hpp"

namespace halfline::workbench {

namespace fs = std::filesystem;
using io::Json;

namespace {

std::string resolve(const std::string& base, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? path : (fs::path(base) / p).string();
}

// ---- validation -----------------------------------------------------------

struct Checker {
  std::vector<ConfigIssue> issues;
  std::string base_dir;

  void add(std::string pointer, std::string message) {
    issues.push_back({std::move(pointer), std::move(message)});
  }

  void require(const Json& j, const std::string& ptr, const char* name) {
    if (!j.is_object() || !j.contains(name)) add(ptr + "/" + name, "required field is missing");
  }

  bool positive_number(const Json& j, const std::string& ptr) {
    if (!j.is_number() || !(j.get<double>() > 0.0)) {
      add(ptr, "must be a positive number");
      return false;
    }
    return true;
  }

  void file_exists(const Json& j, const std::string& ptr) {
    if (!j.is_string()) {
      add(ptr, "must be a file path");
      return;
    }
    if (!fs::exists(resolve(base_dir, j.get<std::string>())))
      add(ptr, "file not found: " + j.get<std::string>());
  }

  std::optional<int> channels(const Json& j, const std::string& ptr) {
    if (!j.contains("n")) {
      add(ptr + "/n", "required field is missing");
      return {};
    }
    if (!j.at("n").is_number_integer() || j.at("n").get<int>() < 1) {
      add(ptr + "/n", "must be a positive integer");
      return {};
    }
    return j.at("n").get<int>();
  }

  void presets(const Json& list, const std::string& ptr) {
    if (!list.is_array()) {
      add(ptr, "must be an array of presets");
      return;
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = ptr + "/" + std::to_string(i);
      const auto& e = list[i];
      if (!e.is_object()) {
        add(p, "preset must be an object");
        continue;
      }
      if (!e.contains("shape") || !e.at("shape").is_string()) {
        add(p + "/shape", "must be one of constant_well, gaussian, sech2");
      } else {
        try {
          parse_preset_shape(e.at("shape").get<std::string>());
        } catch (const Error& err) {
          add(p + "/shape", err.what());
        }
      }
      if (!e.contains("amplitude")) add(p + "/amplitude", "required field is missing");
      if (e.contains("width")) positive_number(e.at("width"), p + "/width");
    }
  }

  std::optional<int> potential(const Json& j, const Json& grid) {
    const std::string ptr = "/potential";
    if (!j.is_object()) {
      add(ptr, "must be an object");
      return {};
    }
    if (j.contains("file")) {
      file_exists(j.at("file"), ptr + "/file");
      return {};
    }
    const auto n = channels(j, ptr);
    if (j.contains("Q")) return n;
    if (!j.contains("x_max") && !grid.contains("x_max"))
      add(ptr + "/x_max", "required here or as /grid/x_max");
    if (j.contains("x_max")) positive_number(j.at("x_max"), ptr + "/x_max");
    if (j.contains("h")) positive_number(j.at("h"), ptr + "/h");
    if (j.contains("presets")) presets(j.at("presets"), ptr + "/presets");
    return n;
  }

  std::optional<int> bc(const Json& j) {
    const std::string ptr = "/bc";
    if (!j.is_object()) {
      add(ptr, "must be an object");
      return {};
    }
    if (j.contains("file")) {
      file_exists(j.at("file"), ptr + "/file");
      return {};
    }
    const auto n = channels(j, ptr);
    if (!j.contains("U") && !j.contains("kind")) {
      add(ptr + "/kind", "needs 'kind' (dirichlet, neumann, kirchhoff, robin) or 'U'");
      return n;
    }
    if (!n) return n;
    try {
      io::bc_from_json(j);
    } catch (const Error& e) {
      add(ptr + (j.contains("U") ? "/U" : "/kind"), e.what());
    }
    return n;
  }
};

void check_grid(Checker& c, const Json& grid) {
  if (!grid.is_object()) {
    c.add("/grid", "must be an object");
    return;
  }
  for (const char* name : {"x_max", "h", "k_max", "T_max", "x_step"})
    if (grid.contains(name)) c.positive_number(grid.at(name), std::string("/grid/") + name);
  if (grid.contains("k_count")) {
    const auto& k = grid.at("k_count");
    if (!k.is_number_integer() || k.get<int>() < 4 || k.get<int>() % 2 != 0)
      c.add("/grid/k_count", "must be an even integer >= 4");
  }
  if (grid.contains("T_max") && grid.contains("x_max") && grid.at("T_max").is_number() &&
      grid.at("x_max").is_number()) {
    const double t = grid.at("T_max").get<double>(), x = grid.at("x_max").get<double>();
    if (t < x)
      c.add("/grid/T_max", "T_max (" + io::format_number(t) + ") must be >= /grid/x_max (" +
                               io::format_number(x) + ")");
  }
}

void require_grid(Checker& c, const Json& grid, std::initializer_list<const char*> names) {
  for (const char* name : names)
    if (!grid.is_object() || !grid.contains(name))
      c.add(std::string("/grid/") + name, "required for this mode");
}

// ---- artifacts --------------------------------------------------------------

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void text(const std::string& name, const std::string& content) {
    io::write_text_file((dir_ / name).string(), content);
    entries_.push_back({name, sha256_hex(content), content.size()});
  }
  void json(const std::string& name, const Json& j) { text(name, j.dump(2) + "\n"); }

  const std::vector<ManifestEntry>& entries() const { return entries_; }

  void manifest() {
    Json files = Json::array();
    for (const auto& e : entries_) files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    io::write_text_file((dir_ / "manifest.json").string(), Json{{"files", files}}.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::vector<ManifestEntry> entries_;
};

struct Context {
  Context(const JobConfig& c, Writer& w) : config(c), out(w) {}

  const JobConfig& config;
  Writer& out;
  Json summary = Json::object();
  Diagnostics diagnostics;
  std::string stage;
};

double tolerance(const JobConfig& c, const char* name, double fallback) {
  const auto& t = c.raw.value("tolerances", Json::object());
  return t.contains(name) ? t.at(name).get<double>() : fallback;
}

MatrixPotential load_potential(const JobConfig& c, const Json& spec) {
  if (spec.contains("file")) return io::potential_from_json(io::read_json_file(resolve(c.base_dir, spec.at("file"))));
  Json j = spec;
  if (!j.contains("Q")) {
    if (!j.contains("x_max")) j["x_max"] = c.grid.x_max;
    if (!j.contains("h")) j["h"] = c.grid.h;
  }
  return io::potential_spec_from_json(j);
}

BoundaryCondition load_bc(const JobConfig& c) {
  const auto& spec = c.raw.at("bc");
  if (spec.contains("file")) return io::bc_from_json(io::read_json_file(resolve(c.base_dir, spec.at("file"))));
  return io::bc_from_json(spec);
}

std::vector<double> kgrid(const JobConfig& c) {
  return symmetric_kgrid(c.grid.k_max, c.grid.k_count / 2);
}

PipelineOptions pipeline_options(const JobConfig& c) {
  PipelineOptions p;
  p.threads = c.parallel;
  p.bound.forward.ode.rtol = tolerance(c, "ode_rtol", p.bound.forward.ode.rtol);
  p.bound.forward.ode.atol = tolerance(c, "ode_atol", p.bound.forward.ode.atol);
  return p;
}

InverseOptions inverse_options(const JobConfig& c) {
  InverseOptions o;
  o.g.t_max = c.grid.T_max;
  o.g.tail_bound = tolerance(c, "tail_bound", o.g.tail_bound);
  o.g.threads = c.parallel;
  o.nystrom.max_condition = tolerance(c, "max_condition", o.nystrom.max_condition);
  o.x_step = c.grid.x_step;
  o.x_end = c.grid.x_max > 0.0 ? c.grid.x_max : c.grid.T_max;
  o.threads = c.parallel;
  return o;
}

ScatteringData forward_data(Context& ctx, const MatrixPotential& q, const BoundaryCondition& bc) {
  ctx.stage = "forward_scattering";
  const double kappa_max = tolerance(ctx.config, "kappa_max", default_kappa_max(q, bc));
  auto data = scattering_pipeline(q, bc, kgrid(ctx.config), kappa_max, pipeline_options(ctx.config));
  ctx.diagnostics.merge(data.diagnostics, "forward.");
  double high = 0.0;
  if (!data.S.empty()) high = (data.S.back() - data.U_hat).norm();
  ctx.summary["bound_states"] = data.bound_states.size();
  ctx.summary["max_unitarity_defect"] = data.diagnostics.values["max_unitarity_defect"];
  ctx.summary["high_energy_defect"] = high;
  return data;
}

double potential_error(const MatrixPotential& rec, const MatrixPotential& truth, double x_limit) {
  double err = 0.0;
  for (std::size_t i = 0; i < rec.grid().size(); ++i) {
    const double x = rec.grid()[i];
    if (x <= x_limit) err = std::max(err, (rec.values()[i] - truth(x)).cwiseAbs().maxCoeff());
  }
  return err;
}

void write_inverse(Context& ctx, const InverseResult& r) {
  ctx.out.json("potential.json", io::potential_to_json(r.Q_hat));
  ctx.out.text("potential.csv", io::potential_csv(r.Q_hat));
  ctx.out.json("U.json", {{"U", io::matrix_to_json(r.U_recovered)},
                          {"U_hat", io::matrix_to_json(r.U_hat_recovered)}});
  ctx.out.text("kernel.csv", io::kernel_csv(r.kernel));
  ctx.diagnostics.merge(r.diagnostics, "inverse.");
}

void run_forward(Context& ctx) {
  ctx.stage = "load";
  const auto q = load_potential(ctx.config, ctx.config.raw.at("potential"));
  const auto bc = load_bc(ctx.config);
  const auto data = forward_data(ctx, q, bc);
  ctx.out.json("scattering.json", io::scattering_to_json(data));
  ctx.out.text("scattering.csv", io::scattering_csv(data.kgrid, data.S));
}

void run_inverse(Context& ctx) {
  ctx.stage = "load";
  const auto data = io::scattering_from_json(
      io::read_json_file(resolve(ctx.config.base_dir, ctx.config.raw.at("scattering"))));
  ctx.stage = "marchenko_inverse";
  const auto r = invert(data, inverse_options(ctx.config));
  write_inverse(ctx, r);
  ctx.summary["u_unitarity_defect"] = r.diagnostics.values.count("u_unitarity_defect")
                                          ? r.diagnostics.values.at("u_unitarity_defect")
                                          : 0.0;
}

void run_roundtrip(Context& ctx) {
  ctx.stage = "load";
  const auto q = load_potential(ctx.config, ctx.config.raw.at("potential"));
  const auto bc = load_bc(ctx.config);
  const auto data = forward_data(ctx, q, bc);
  ctx.out.json("scattering.json", io::scattering_to_json(data));
  ctx.stage = "marchenko_inverse";
  auto opt = inverse_options(ctx.config);
  if (!(ctx.config.grid.x_max > 0.0)) opt.x_end = std::min(q.x_max(), ctx.config.grid.T_max);
  const auto r = invert(data, opt);
  write_inverse(ctx, r);
  const double limit = 0.8 * q.x_max();
  ctx.summary["q_error_inf"] = potential_error(r.Q_hat, q, limit);
  ctx.summary["q_error_interval"] = Json::array({0.0, limit});
  ctx.summary["u_error"] = (r.U_recovered - bc.U()).norm();
}

void run_darboux(Context& ctx) {
  ctx.stage = "load";
  const auto q = load_potential(ctx.config, ctx.config.raw.at("potential"));
  const auto bc = load_bc(ctx.config);
  std::optional<CMatrix> u0;
  const auto& d = ctx.config.raw.value("darboux", Json::object());
  if (d.contains("U0")) u0 = io::matrix_from_json(d.at("U0"));
  ctx.stage = "darboux.frame";
  const CMatrix u = choose_U0(bc, u0);
  const auto frame = zero_energy_frame(q, u);
  const auto v = darboux_potential(frame);
  ctx.stage = "darboux.residuals";
  const auto riccati = riccati_residual(v, q);
  double herm = 0.0;
  for (std::size_t i = 0; i < v.grid.size(); ++i)
    if (v.usable(i)) herm = std::max(herm, (v.V[i] - v.V[i].adjoint()).norm());
  ctx.summary["hermiticity_residual"] = herm;
  ctx.summary["riccati_residual"] = max_finite(riccati);
  ctx.summary["singular_points"] = v.singular_points;
  if (v.usable(0)) ctx.summary["initial_condition_residual"] = (bc.P() * v.V[0] + bc.P() * bc.H()).norm();
  ctx.out.text("factor.csv", io::factor_csv(v));
  ctx.out.text("riccati.csv", io::columns_csv({"x", "residual"}, {v.grid, riccati}));
  ctx.stage = "darboux.partner";
  try {
    const auto partner = partner_operator(v, bc, q);
    ctx.out.json("partner_potential.json", io::potential_to_json(partner.Q));
    ctx.out.text("partner_potential.csv", io::potential_csv(partner.Q));
    ctx.out.json("partner_bc.json", io::bc_to_json(partner.bc));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularAtOrigin && e.kind() != ErrorKind::DomainViolation) throw;
    ctx.diagnostics.warn(std::string("partner operator skipped: ") + e.what());
  }
}

RayScatteringData generated_partial(Context& ctx, MatrixPotential& truth, int& last) {
  const auto& star = ctx.config.raw.at("star");
  const auto& rays = star.at("rays");
  const int n = static_cast<int>(rays.size());
  Json spec{{"n", n}, {"x_max", ctx.config.grid.x_max}, {"h", ctx.config.grid.h}, {"presets", Json::array()}};
  for (int j = 0; j < n; ++j)
    for (auto p : rays[static_cast<std::size_t>(j)]) {
      p["ray"] = j;
      spec["presets"].push_back(p);
    }
  truth = io::potential_spec_from_json(spec);
  std::vector<int> given;
  if (star.contains("given")) given = star.at("given").get<std::vector<int>>();
  else for (int j = 0; j + 1 < n; ++j) given.push_back(j);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int j : given)
    if (j >= 0 && j < n) seen[static_cast<std::size_t>(j)] = true;
  last = static_cast<int>(std::find(seen.begin(), seen.end(), false) - seen.begin());

  ctx.stage = "star_graph.forward";
  const auto bc = standard_bc(StandardKind::Kirchhoff, n);
  const auto k = kgrid(ctx.config);
  const auto sf = star_forward(truth, k, pipeline_options(ctx.config).bound.forward, ctx.config.parallel);
  ScatteringData data;
  data.kgrid = k;
  data.S = sf.S;
  data.U_hat = bc.U_hat();
  const auto bs = bound_states(truth, bc, tolerance(ctx.config, "kappa_max", default_kappa_max(truth, bc)));
  data.bound_states = bs.states;
  ctx.diagnostics.merge(bs.diagnostics, "forward.");
  auto partial = partial_data(data, given);
  ctx.out.json("partial.json", io::partial_to_json(partial));
  return partial;
}

void run_graph_recover(Context& ctx) {
  ctx.stage = "load";
  RayScatteringData partial;
  MatrixPotential truth;
  int last = -1;
  if (ctx.config.raw.contains("partial"))
    partial = io::partial_from_json(io::read_json_file(resolve(ctx.config.base_dir, ctx.config.raw.at("partial"))));
  else
    partial = generated_partial(ctx, truth, last);
  ctx.stage = "star_graph.recover";
  StarRecoveryOptions opt;
  opt.inverse = inverse_options(ctx.config);
  opt.threads = ctx.config.parallel;
  const auto r = recover_last_ray(partial, opt);
  ctx.diagnostics.merge(r.diagnostics, "recover.");
  ctx.out.text("q_hat_n.csv", io::potential_csv(r.q_n));
  ctx.out.json("q_hat_n.json", io::potential_to_json(r.q_n));
  ScatteringData full;
  full.kgrid = partial.kgrid;
  full.S = r.S_full;
  full.U_hat = standard_bc(StandardKind::Kirchhoff, partial.n).U_hat();
  ctx.out.json("scattering_full.json", io::scattering_to_json(full));
  std::vector<double> re, im, mod, arg;
  for (const auto& m : r.M) {
    re.push_back(m.real());
    im.push_back(m.imag());
    mod.push_back(std::abs(m));
    arg.push_back(std::arg(m));
  }
  ctx.out.text("dispersion.csv", io::columns_csv({"k", "re_M", "im_M", "abs_M", "arg_M"},
                                                 {partial.kgrid, re, im, mod, arg}));
  ctx.summary["b_n"] = r.b_n;
  ctx.summary["q_hat_n_sup"] = r.q_n.sup_norm();
  if (last >= 0) {
    const auto ray = truth.channel(last);
    ctx.summary["q_error_inf"] = potential_error(r.q_n, ray, 0.8 * truth.x_max());
  }
}

std::string line_of(const std::string& text, std::size_t byte) {
  const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
  return "line " + std::to_string(1 + std::count(text.begin(), end, '\n'));
}

}  // namespace

std::vector<ConfigIssue> validate(const Json& config, const std::string& base_dir) {
  Checker c;
  c.base_dir = base_dir;
  if (!config.is_object()) {
    c.add("", "config must be a JSON object");
    return c.issues;
  }
  std::string mode;
  if (!config.contains("mode")) {
    c.add("/mode", "required field is missing");
  } else if (!config.at("mode").is_string() ||
             std::find(kModes.begin(), kModes.end(), config.at("mode").get<std::string>()) == kModes.end()) {
    c.add("/mode", "must be one of forward, darboux, inverse, graph-recover, roundtrip");
  } else {
    mode = config.at("mode").get<std::string>();
  }
  const Json grid = config.value("grid", Json::object());
  check_grid(c, grid);
  if (config.contains("parallel") &&
      (!config.at("parallel").is_number_integer() || config.at("parallel").get<int>() < 1))
    c.add("/parallel", "must be a positive integer");
  if (config.contains("out") && !config.at("out").is_string()) c.add("/out", "must be a string");
  if (config.contains("tolerances")) {
    const auto& t = config.at("tolerances");
    if (!t.is_object()) c.add("/tolerances", "must be an object");
    else
      for (const auto& [k, v] : t.items()) c.positive_number(v, "/tolerances/" + k);
  }

  std::optional<int> np, nb;
  const bool wants_q = mode == "forward" || mode == "darboux" || mode == "roundtrip";
  if (wants_q) {
    c.require(config, "", "potential");
    c.require(config, "", "bc");
    if (config.contains("potential")) np = c.potential(config.at("potential"), grid);
    if (config.contains("bc")) nb = c.bc(config.at("bc"));
    if (np && nb && *np != *nb)
      c.add("/bc/n", "channel count " + std::to_string(*nb) + " differs from /potential/n (" +
                         std::to_string(*np) + ")");
  }
  if (mode == "forward" || mode == "roundtrip") require_grid(c, grid, {"k_max", "k_count"});
  if (mode == "roundtrip" || mode == "inverse") require_grid(c, grid, {"T_max"});
  if (mode == "inverse") {
    if (!config.contains("scattering")) c.add("/scattering", "required field is missing");
    else c.file_exists(config.at("scattering"), "/scattering");
  }
  if (mode == "graph-recover") {
    require_grid(c, grid, {"T_max"});
    if (config.contains("partial")) {
      c.file_exists(config.at("partial"), "/partial");
    } else if (!config.contains("star") || !config.at("star").is_object()) {
      c.add("/star", "graph-recover needs 'partial' (file) or 'star' (ray presets)");
    } else {
      const auto& star = config.at("star");
      if (!star.contains("rays") || !star.at("rays").is_array()) {
        c.add("/star/rays", "missing rays array");
      } else {
        const auto& rays = star.at("rays");
        if (rays.size() < 2) c.add("/star/rays", "a star needs at least two rays");
        for (std::size_t j = 0; j < rays.size(); ++j) c.presets(rays[j], "/star/rays/" + std::to_string(j));
        if (star.contains("given")) {
          const auto& g = star.at("given");
          bool ok = g.is_array() && g.size() + 1 == rays.size();
          std::vector<int> seen;
          if (ok)
            for (const auto& v : g) {
              ok = ok && v.is_number_integer() && v.get<int>() >= 0 &&
                   v.get<int>() < static_cast<int>(rays.size()) &&
                   std::find(seen.begin(), seen.end(), v.get<int>()) == seen.end();
              if (ok) seen.push_back(v.get<int>());
            }
          if (!ok) c.add("/star/given", "must list n - 1 distinct ray indices");
        }
      }
      require_grid(c, grid, {"x_max", "k_max", "k_count"});
    }
  }
  return c.issues;
}

std::vector<ConfigIssue> load(const std::string& path, JobConfig& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {{"", "cannot open '" + path + "'"}};
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    return {{line_of(text, e.byte), e.what()}};
  }
  out.base_dir = fs::path(path).parent_path().string();
  if (out.base_dir.empty()) out.base_dir = ".";
  auto issues = validate(j, out.base_dir);
  if (!issues.empty()) return issues;
  out.raw = j;
  out.mode = j.at("mode").get<std::string>();
  const Json grid = j.value("grid", Json::object());
  out.grid.x_max = grid.value("x_max", 0.0);
  out.grid.h = grid.value("h", out.grid.h);
  out.grid.k_max = grid.value("k_max", 0.0);
  out.grid.k_count = grid.value("k_count", 0);
  out.grid.T_max = grid.value("T_max", 0.0);
  out.grid.x_step = grid.value("x_step", out.grid.x_step);
  out.parallel = j.value("parallel", 1);
  if (j.contains("out")) out.out = resolve(out.base_dir, j.at("out").get<std::string>());
  return {};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

RunResult run(JobConfig config, const RunFlags& flags) {
  RunResult result;
  if (flags.mode) {
    config.mode = *flags.mode;
    config.raw["mode"] = *flags.mode;
    const auto issues = validate(config.raw, config.base_dir);
    if (!issues.empty()) {
      result.exit_code = kConfigError;
      result.message = issues.front().pointer + ": " + issues.front().message;
      return result;
    }
  }
  if (flags.out) config.out = *flags.out;
  if (flags.parallel) config.parallel = std::max(1, *flags.parallel);

  Writer writer(config.out);
  Context ctx(config, writer);
  Json report{{"mode", config.mode}, {"parallel", config.parallel}};
  try {
    if (config.mode == "forward") run_forward(ctx);
    else if (config.mode == "inverse") run_inverse(ctx);
    else if (config.mode == "roundtrip") run_roundtrip(ctx);
    else if (config.mode == "darboux") run_darboux(ctx);
    else if (config.mode == "graph-recover") run_graph_recover(ctx);
    else throw Error(ErrorKind::ConfigError, "unknown mode '" + config.mode + "'");
    report["status"] = "ok";
  } catch (const Error& e) {
    const bool config_error = e.kind() == ErrorKind::ConfigError;
    result.exit_code = config_error ? kConfigError : kNumericalFailure;
    result.stage = ctx.stage;
    result.message = e.what();
    report["status"] = "failed";
    report["stage"] = ctx.stage;
    report["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  }
  report["summary"] = ctx.summary;
  report["diagnostics"] = io::diagnostics_to_json(ctx.diagnostics);
  result.warnings = ctx.diagnostics.warnings;
  if (result.exit_code == kSuccess && flags.strict && !result.warnings.empty()) {
    result.exit_code = kStrictWarning;
    result.message = "warnings escalated by --strict: " + result.warnings.front();
    report["status"] = "strict_warning";
  }
  writer.json("report.json", report);
  writer.manifest();
  result.manifest = writer.entries();
  return result;
}

}  // namespace halfline::workbench
