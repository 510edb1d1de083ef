#include "homog/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "homog/error.hpp"

namespace homog {
namespace {

using Json = nlohmann::json;

/// Typed access to one section with a record of the keys that were read.
class Section {
 public:
  Section(const Json& root, std::string name, std::string origin)
      : name_(std::move(name)), origin_(std::move(origin)) {
    if (root.contains(name_)) {
      node_ = &root.at(name_);
      if (!node_->is_object()) fail("", "section must be a table");
    }
  }

  bool has(const std::string& key) const { return node_ != nullptr && node_->contains(key); }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    used_.insert(key);
    try {
      out = node_->at(key).get<T>();
    } catch (const Json::exception&) {
      fail(key, "wrong type (got " + node_->at(key).dump() + ")");
    }
  }

  void read_number(const std::string& key, double& out) {
    if (!has(key)) return;
    used_.insert(key);
    const Json& v = node_->at(key);
    if (v.is_number()) {
      out = v.get<double>();
    } else if (v.is_string()) {
      try {
        out = parse_rational(v.get<std::string>());
      } catch (const InvalidArgument& e) {
        fail(key, e.what());
      }
    } else {
      fail(key, "expected a number");
    }
  }

  void read_numbers(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    used_.insert(key);
    const Json& v = node_->at(key);
    if (!v.is_array()) fail(key, "expected a list");
    out.clear();
    for (const auto& e : v) {
      if (e.is_number()) {
        out.push_back(e.get<double>());
      } else if (e.is_string()) {
        try {
          out.push_back(parse_rational(e.get<std::string>()));
        } catch (const InvalidArgument& ex) {
          fail(key, ex.what());
        }
      } else {
        fail(key, "list entries must be numbers");
      }
    }
  }

  void read_point(const std::string& key, Point& out, int dim) {
    std::vector<double> v;
    read_numbers(key, v);
    if (!has(key)) return;
    if (v.size() != 1 && v.size() != 2) fail(key, "expected 1 or 2 coordinates");
    if (static_cast<int>(v.size()) > dim) fail(key, "more coordinates than the dimension");
    out = {v[0], v.size() == 2 ? v[1] : 0.0};
  }

  const Json* raw(const std::string& key) {
    if (!has(key)) return nullptr;
    used_.insert(key);
    return &node_->at(key);
  }

  void finish() const {
    if (node_ == nullptr) return;
    for (const auto& [k, v] : node_->items()) {
      if (!used_.count(k)) fail(k, "unknown key");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::string where = origin_ + ": [" + name_ + "]";
    if (!key.empty()) where += " " + key;
    throw ConfigError(where + ": " + what);
  }

 private:
  const Json* node_ = nullptr;
  std::string name_;
  std::string origin_;
  std::set<std::string> used_;
};

const std::set<std::string> kSections{"kernel", "coefficient", "grid", "study", "rhs", "solver",
                                      "stencil", "diagnostics", "probe", "validation", "output"};

std::optional<TailMode> parse_mode(const std::string& s) {
  if (s.empty() || s == "kernel") return std::nullopt;
  if (s == "plain") return TailMode::Plain;
  if (s == "slowly-varying") return TailMode::SlowlyVarying;
  throw InvalidArgument("mode must be plain, slowly-varying or kernel");
}

RunConfig from_tree(const Json& root, const std::string& origin) {
  if (!root.is_object()) throw ConfigError(origin + ": top level must be an object of sections");
  for (const auto& [k, v] : root.items()) {
    if (!kSections.count(k)) throw ConfigError(origin + ": unknown section [" + k + "]");
  }
  RunConfig rc;
  rc.source = origin;
  StudyConfig& s = rc.study;

  Section grid(root, "grid", origin);
  grid.read("dim", s.dim);
  grid.read_number("T", s.side);
  grid.read("rho", s.rho);
  grid.finish();

  Section study(root, "study", origin);
  study.read_number("alpha", s.alpha);
  study.read_number("m", s.m);
  study.read_numbers("eps", s.eps);
  study.read("j0", s.j0);
  study.read("j1", s.j1);
  study.read("symbol_angular", s.symbol_angular);
  study.read("allow_invalid_kernel", s.allow_invalid_kernel);
  if (study.has("acceptance_threshold")) {
    double t = 0.0;
    study.read_number("acceptance_threshold", t);
    s.acceptance_threshold = t;
  }
  study.finish();

  Section kernel(root, "kernel", origin);
  kernel.read("family", s.kernel.family);
  kernel.read_number("inner_radius", s.kernel.params.inner_radius);
  kernel.read_number("anisotropy", s.kernel.params.anisotropy);
  kernel.read_number("core_noise", s.kernel.params.core_noise);
  std::string mode;
  kernel.read("validate_mode", mode);
  try {
    s.validation.mode = parse_mode(mode);
  } catch (const InvalidArgument& e) {
    kernel.fail("validate_mode", e.what());
  }
  kernel.finish();
  const auto& families = builtin_kernel_families();
  if (std::find(families.begin(), families.end(), s.kernel.family) == families.end()) {
    kernel.fail("family", "unknown kernel family '" + s.kernel.family + "'");
  }

  Section coeff(root, "coefficient", origin);
  coeff.read("family", s.coefficient.family);
  coeff.read_number("value", s.coefficient.params.value);
  coeff.read_number("amplitude", s.coefficient.params.amplitude);
  coeff.read("mean_quadrature", s.coefficient.mean_quadrature);
  coeff.finish();
  const auto& cf = builtin_coefficient_families();
  if (std::find(cf.begin(), cf.end(), s.coefficient.family) == cf.end()) {
    coeff.fail("family", "unknown coefficient family '" + s.coefficient.family + "'");
  }

  Section rhs(root, "rhs", origin);
  rhs.read("type", s.rhs.type);
  rhs.read_number("width", s.rhs.width);
  rhs.read_number("amplitude", s.rhs.amplitude);
  if (const Json* h = rhs.raw("harmonics")) {
    if (!h->is_array()) rhs.fail("harmonics", "expected a list of [kx, ky, amplitude]");
    for (const auto& e : *h) {
      Harmonic hm;
      if (e.is_array() && e.size() == 3 && e[0].is_number_integer() && e[1].is_number_integer() && e[2].is_number()) {
        hm.k = {e[0].get<int>(), e[1].get<int>()};
        hm.amplitude = e[2].get<double>();
      } else {
        rhs.fail("harmonics", "entries must be [kx, ky, amplitude] with integer wave numbers");
      }
      s.rhs.harmonics.push_back(hm);
    }
  }
  rhs.finish();

  Section solver(root, "solver", origin);
  solver.read_number("tol", s.solver.tol);
  solver.read("maxit", s.solver.maxit);
  solver.read("jacobi", s.solver.jacobi);
  solver.finish();

  Section stencil(root, "stencil", origin);
  stencil.read("image_radius", s.stencil.image_radius);
  stencil.read("subsamples", s.stencil.subsamples);
  stencil.read("tail_correction", s.stencil.tail_correction);
  stencil.read_number("tail_cap", s.stencil.tail_cap);
  stencil.finish();

  Section diag(root, "diagnostics", origin);
  diag.read("energy_tail", s.diagnostics.energy_tail);
  diag.read("translation", s.diagnostics.translation);
  diag.read("mass_escape", s.diagnostics.mass_escape);
  diag.read_numbers("translation_shifts", s.diagnostics.translation_shifts);
  diag.read_numbers("mass_escape_fractions", s.diagnostics.mass_escape_fractions);
  diag.finish();

  Section probe(root, "probe", origin);
  WeakProbeSpec& w = s.diagnostics.weak;
  probe.read("enabled", w.enabled);
  rc.probe_delta_given = probe.has("delta");
  probe.read_number("delta", w.delta);
  probe.read_number("psi_radius", w.psi_radius);
  probe.read_point("x0", w.x0, s.dim);
  probe.read_point("y0", w.y0, s.dim);
  probe.finish();

  Section val(root, "validation", origin);
  ValidationBudget& b = s.validation;
  val.read_number("r_min", b.oscillation.r_min);
  val.read_number("r_max", b.oscillation.r_max);
  val.read("radial_per_octave", b.oscillation.radial_per_octave);
  val.read("angular", b.oscillation.angular);
  val.read_number("shift_step", b.oscillation.shift_step);
  val.read("shift_angular", b.oscillation.shift_angular);
  if (val.has("K")) {
    double k = 0.0;
    val.read_number("K", k);
    b.shift_radius = k;
  }
  val.read("phi_radii", b.phi_radii);
  val.read_number("phi_tol", b.phi_tol);
  val.read_numbers("tail_radii", b.tail_radii);
  val.read_number("tail_ratio_tol", b.tail_ratio_tol);
  val.read_number("tail_mass_rel_tol", b.tail_mass_rel_tol);
  val.read_number("tail_bound_rel_tol", b.tail_bound_rel_tol);
  if (val.has("normalization_tol")) {
    double t = 0.0;
    val.read_number("normalization_tol", t);
    b.normalization_tol = t;
  }
  val.read_number("symmetry_tol", b.symmetry_tol);
  val.finish();

  Section out(root, "output", origin);
  out.read("dir", rc.out_dir);
  if (const Json* f = out.raw("formats")) {
    try {
      rc.formats = f->is_string() ? std::vector<std::string>{f->get<std::string>()} : f->get<std::vector<std::string>>();
    } catch (const Json::exception&) {
      out.fail("formats", "expected a list of strings");
    }
    for (const auto& x : rc.formats) {
      if (x != "json" && x != "csv" && x != "svg" && x != "all") out.fail("formats", "unknown format '" + x + "'");
    }
  }
  out.read("verbosity", rc.verbosity);
  out.read("seed", rc.seed);
  if (out.has("eps")) {
    double e = 0.0;
    out.read_number("eps", e);
    rc.eps = e;
  }
  out.finish();
  b.oscillation.seed = rc.seed;

  try {
    check_config(s);
  } catch (const Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return rc;
}

/// Scalar INI text to JSON: lists, numbers, booleans and quoted strings go
/// through the JSON parser; anything else stays a bare string.
Json ini_value(const std::string& raw) {
  std::string v = raw;
  const auto a = v.find_first_not_of(" \t");
  const auto b = v.find_last_not_of(" \t");
  v = a == std::string::npos ? "" : v.substr(a, b - a + 1);
  if (v.empty()) return "";
  try {
    return Json::parse(v);
  } catch (const Json::exception&) {
    return v;
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

double parse_rational(const std::string& text) {
  const auto parse = [&](std::string_view s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
      throw InvalidArgument("not a number or p/q rational: '" + text + "'");
    }
    return v;
  };
  const std::string_view sv(text);
  const auto slash = sv.find('/');
  if (slash == std::string_view::npos) return parse(sv);
  const double den = parse(sv.substr(slash + 1));
  if (den == 0.0) throw InvalidArgument("zero denominator in '" + text + "'");
  return parse(sv.substr(0, slash)) / den;
}

RunConfig parse_config_ini(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Json root = Json::object();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(origin + ": key '" + section + "' outside any section");
    Json sec = Json::object();
    for (const auto& [key, val] : body) sec[key] = ini_value(val.get_value<std::string>());
    root[section] = sec;
  }
  return from_tree(root, origin);
}

RunConfig parse_config_json(const std::string& text, const std::string& origin) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(origin + ": byte " + std::to_string(e.byte) + ": malformed JSON");
  }
  return from_tree(root, origin);
}

RunConfig load_config(const std::string& path) {
  const std::string text = slurp(path);
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? parse_config_json(text, path) : parse_config_ini(text, path);
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["study"] = to_json(c.study);
  j["output"] = {{"dir", c.out_dir}, {"formats", c.formats}, {"verbosity", c.verbosity}, {"seed", c.seed}};
  j["output"]["eps"] = c.eps ? nlohmann::ordered_json(*c.eps) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace homog
