#include "ultraloc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ultraloc::io {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ConfigInvalid, path + ": " + what);
}

double required(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) invalid(path, std::string("missing '") + key + "'");
  return to_number(j.at(key), path + "." + key);
}

std::string text(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || !j.at(key).is_string()) invalid(path, std::string("missing string '") + key + "'");
  return j.at(key).get<std::string>();
}

std::complex<double> complex_from(const json& j, const std::string& path) {
  if (j.is_array()) {
    if (j.size() != 2) invalid(path, "complex value needs [re, im]");
    return {to_number(j[0], path + "[0]"), to_number(j[1], path + "[1]")};
  }
  return to_number(j, path);
}

json complex_json(std::complex<double> z) {
  if (z.imag() == 0.0) return number(z.real());
  return json::array({number(z.real()), number(z.imag())});
}

UltradiffOp op_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) invalid(path, "operator needs a non-empty coefficient array");
  UltradiffOp op;
  op.coeffs.clear();
  for (std::size_t k = 0; k < j.size(); ++k) op.coeffs.push_back(complex_from(j[k], path + "[" + std::to_string(k) + "]"));
  return op;
}

json op_json(const UltradiffOp& op) {
  json j = json::array();
  for (auto c : op.coeffs) j.push_back(complex_json(c));
  return j;
}

Envelope envelope_from(const json& j, const std::string& path) {
  expect_keys(j, path, {"kind", "l", "q"});
  const auto kind = text(j, "kind", path);
  if (kind == "exp_power") return ExpPowerFactor{required(j, "l", path), number_or(j, "q", path, 1.0)};
  if (kind == "double_exp_growth") return DoubleExpGrowthFactor{required(j, "l", path), number_or(j, "q", path, 1.0)};
  invalid(path, "unknown envelope kind '" + kind + "'");
}

SampledFactor sampled_from(const json& j, const std::string& path) {
  expect_keys(j, path, {"kind", "x0", "dx", "logmag", "phase", "envelope"});
  const auto lm = number_list(j.value("logmag", json::array()), path + ".logmag");
  const auto ph = j.contains("phase") ? number_list(j.at("phase"), path + ".phase") : std::vector<double>(lm.size(), 0.0);
  if (lm.empty() || ph.size() != lm.size()) invalid(path, "logmag and phase must be non-empty and equally long");
  std::vector<LogComplex> v(lm.size());
  for (std::size_t k = 0; k < lm.size(); ++k) v[k] = lm[k] == kNegInf ? LogComplex::zero() : LogComplex::polar(lm[k], ph[k]);
  SampledFactor s{SampledFunction(Grid1D(required(j, "x0", path), required(j, "dx", path), lm.size()), std::move(v)),
                  std::nullopt};
  if (j.contains("envelope")) s.envelope = envelope_from(j.at("envelope"), path + ".envelope");
  return s;
}

json sampled_json(const SampledFactor& s) {
  const auto& g = s.samples.grid1d();
  json lm = json::array(), ph = json::array();
  for (const auto& z : s.samples.values()) lm.push_back(number(z.logmag)), ph.push_back(number(z.phase));
  json j{{"kind", "sampled"}, {"x0", g.x0()}, {"dx", g.dx()}, {"logmag", lm}, {"phase", ph}};
  if (s.envelope)
    j["envelope"] = std::visit(overloaded{[](const ExpPowerFactor& e) { return json{{"kind", "exp_power"}, {"l", e.l}, {"q", e.q}}; },
                                          [](const DoubleExpGrowthFactor& e) {
                                            return json{{"kind", "double_exp_growth"}, {"l", e.l}, {"q", e.q}};
                                          }},
                               *s.envelope);
  return j;
}

GrowthFactor factor_from(const json& j, const std::string& path) {
  if (!j.is_object()) invalid(path, "expected an object");
  const auto kind = text(j, "kind", path);
  if (kind == "constant") {
    expect_keys(j, path, {"kind", "value"});
    return ConstantFactor{j.contains("value") ? complex_from(j.at("value"), path + ".value") : 1.0};
  }
  if (kind == "gaussian") {
    expect_keys(j, path, {"kind", "a", "center", "amp"});
    return GaussianFactor{number_or(j, "a", path, 1.0), number_or(j, "center", path, 0.0),
                          j.contains("amp") ? complex_from(j.at("amp"), path + ".amp") : 1.0};
  }
  if (kind == "exp_power") {
    expect_keys(j, path, {"kind", "l", "q"});
    return ExpPowerFactor{required(j, "l", path), number_or(j, "q", path, 1.0)};
  }
  if (kind == "double_exp_growth") {
    expect_keys(j, path, {"kind", "l", "q"});
    return DoubleExpGrowthFactor{required(j, "l", path), number_or(j, "q", path, 1.0)};
  }
  if (kind == "sampled") return sampled_from(j, path);
  invalid(path, "unknown factor kind '" + kind + "'");
}

json factor_json(const GrowthFactor& f) {
  return std::visit(
      overloaded{
          [](const ConstantFactor& c) { return json{{"kind", "constant"}, {"value", complex_json(c.value)}}; },
          [](const GaussianFactor& g) {
            return json{{"kind", "gaussian"}, {"a", g.a}, {"center", g.center}, {"amp", complex_json(g.amp)}};
          },
          [](const ExpPowerFactor& e) { return json{{"kind", "exp_power"}, {"l", e.l}, {"q", e.q}}; },
          [](const DoubleExpGrowthFactor& e) { return json{{"kind", "double_exp_growth"}, {"l", e.l}, {"q", e.q}}; },
          [](const SampledFactor& s) { return sampled_json(s); }},
      f);
}

TemperedFactor tempered_from(const json& j, const std::string& path) {
  expect_keys(j, path, {"base", "op"});
  TemperedFactor t;
  if (j.contains("base")) {
    const auto f = factor_from(j.at("base"), path + ".base");
    if (auto* c = std::get_if<ConstantFactor>(&f)) t.base = *c;
    else if (auto* g = std::get_if<GaussianFactor>(&f)) t.base = *g;
    else if (auto* s = std::get_if<SampledFactor>(&f)) t.base = *s;
    else invalid(path + ".base", "xi factors must be constant, gaussian or sampled");
  }
  if (j.contains("op")) t.op = op_from(j.at("op"), path + ".op");
  return t;
}

json tempered_json(const TemperedFactor& t) {
  const GrowthFactor base = std::visit([](const auto& b) -> GrowthFactor { return b; }, t.base);
  return {{"base", factor_json(base)}, {"op", op_json(t.op)}};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return kNegInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  invalid(path, "expected a number");
}

void expect_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) invalid(path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) invalid(path, "unknown key '" + k + "'");
}

double number_or(const json& j, const char* key, const std::string& path, double fallback) {
  return j.contains(key) ? to_number(j.at(key), path + "." + key) : fallback;
}

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t k = 0; k < j.size(); ++k) v.push_back(to_number(j[k], path + "[" + std::to_string(k) + "]"));
  return v;
}

json to_json(const LogComplex& z) { return {{"logmag", number(z.logmag)}, {"phase", number(z.phase)}}; }

json to_json(const WeightSequence& s) {
  json lv = json::array();
  for (double v : s.log_values()) lv.push_back(number(v));
  json j{{"p_max", s.p_max()}, {"log_values", lv}};
  if (auto sigma = s.gevrey_sigma()) {
    j["family"] = "gevrey";
    j["sigma"] = *sigma;
  } else {
    j["family"] = "custom";
  }
  return j;
}

json to_json(const ConditionReport& r) {
  auto verdict = [](const ConditionVerdict& v) {
    json j{{"kind", to_string(v.kind)}, {"holds", v.holds()}, {"conclusive", v.conclusive}};
    if (v.fail_p >= 0) j["fail_p"] = v.fail_p;
    return j;
  };
  return {{"m1", verdict(r.m1)},
          {"m2", verdict(r.m2)},
          {"m3_prime", verdict(r.m3_prime)},
          {"m3", verdict(r.m3)},
          {"divergence", verdict(r.divergence)},
          {"c0", number(r.c0)},
          {"H", number(r.H)},
          {"m3_constant", number(r.m3_constant)}};
}

json to_json(const WindowSpec& w) {
  return std::visit(
      overloaded{[](const GaussianWindow& g) {
                   return json{{"variant", "gaussian"}, {"a", g.a}, {"center", g.center}, {"freq", g.freq}};
                 },
                 [](const SubGaussianWindow& s) { return json{{"variant", "subgaussian"}, {"r", s.r}, {"q", s.q}}; },
                 [](const DoubleExpWindow& d) { return json{{"variant", "doubleexp"}, {"t", d.t}, {"q", d.q}}; },
                 [](const SampledWindow& s) {
                   auto j = sampled_json(SampledFactor{s.samples, std::nullopt});
                   j.erase("kind");
                   j["variant"] = "sampled";
                   return j;
                 }},
      w);
}

json to_json(const TensorSymbol& a) {
  json terms = json::array();
  for (const auto& t : a.terms)
    terms.push_back({{"x_op", op_json(t.x_op)}, {"x_factor", factor_json(t.x_factor)}, {"xi_factor", tempered_json(t.xi_factor)}});
  return {{"terms", terms}};
}

json to_json(const DecayFit& f) {
  json notes = f.notes;
  return {{"C", number(f.C)},
          {"c_prime", number(f.c_prime)},
          {"r_prime", number(f.r_prime)},
          {"feasible", f.feasible},
          {"max_violation", number(f.max_violation)},
          {"notes", notes}};
}

json to_json(const DerivativeFit& f) {
  json ca = json::array();
  for (double c : f.C_alpha) ca.push_back(number(c));
  return {{"C", number(f.C)}, {"C_alpha", ca}, {"feasible", f.feasible}, {"max_rel_error", number(f.max_rel_error)}};
}

json to_json(const GelfandFit& f) {
  return {{"C", number(f.C)},
          {"candidate", f.candidate},
          {"feasible", f.feasible},
          {"decay_C", number(f.decay_C)},
          {"decay_c", number(f.decay_c)},
          {"decay_feasible", f.decay_feasible}};
}

json to_json(const PairingResult& r) {
  json j{{"value", to_json(r.value)}, {"route", r.route}, {"truncation_warning", r.truncation_warning},
         {"warnings", r.warnings}};
  if (!r.epsilons.empty()) {
    j["epsilons"] = r.epsilons;
    j["spread"] = number(r.spread);
  }
  return j;
}

json to_json(const PropertyReport& r) {
  json params = json::object();
  for (const auto& [k, v] : r.parameters) params[k] = number(v);
  json worst = json::array();
  for (double v : r.worst) worst.push_back(number(v));
  return {{"id", r.id},
          {"samples", r.samples},
          {"seed", r.seed},
          {"max_violation", number(r.max_violation)},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"parameters", params},
          {"worst", worst}};
}

json to_json(const DivergenceReport& r) {
  json lv = json::array();
  for (double v : r.log_values) lv.push_back(number(v));
  return {{"l", r.l},
          {"q", r.q},
          {"log_values", lv},
          {"strictly_increasing", r.strictly_increasing},
          {"superlinear", r.superlinear},
          {"last_ratio", number(r.last_ratio)}};
}

json to_json(const ThresholdScan& s) {
  json entries = json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"l", e.l}, {"divergent", e.divergent}, {"tail_excess", number(e.tail_excess)}});
  return {{"r", s.r},
          {"q", s.q},
          {"entries", entries},
          {"last_finite", number(s.last_finite)},
          {"first_divergent", number(s.first_divergent)},
          {"brackets", s.brackets}};
}

WeightSequence weight_sequence_from_json(const json& j, const std::string& path) {
  expect_keys(j, path, {"family", "sigma", "p_max", "log_values"});
  const auto family = text(j, "family", path);
  if (family == "gevrey") {
    const double p = number_or(j, "p_max", path, 256.0);
    if (p != std::floor(p) || p < 1 || p > 1e6) invalid(path + ".p_max", "expected a positive integer");
    return WeightSequence::gevrey(required(j, "sigma", path), static_cast<int>(p));
  }
  if (family == "custom") {
    if (!j.contains("log_values")) invalid(path, "missing 'log_values'");
    return WeightSequence::from_log_values(number_list(j.at("log_values"), path + ".log_values"));
  }
  invalid(path, "unknown family '" + family + "'");
}

WindowSpec window_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) invalid(path, "expected an object");
  const auto variant = text(j, "variant", path);
  WindowSpec w;
  if (variant == "gaussian") {
    expect_keys(j, path, {"variant", "a", "center", "freq"});
    w = GaussianWindow{number_or(j, "a", path, 1.0), number_or(j, "center", path, 0.0), number_or(j, "freq", path, 0.0)};
  } else if (variant == "subgaussian") {
    expect_keys(j, path, {"variant", "r", "q"});
    w = SubGaussianWindow{required(j, "r", path), number_or(j, "q", path, 1.0)};
  } else if (variant == "doubleexp") {
    expect_keys(j, path, {"variant", "t", "q"});
    w = DoubleExpWindow{required(j, "t", path), number_or(j, "q", path, 1.0)};
  } else if (variant == "sampled") {
    json k = j;
    k.erase("variant");
    k["kind"] = "sampled";
    auto s = sampled_from(k, path);
    if (s.envelope) invalid(path, "sampled windows carry no envelope");
    w = SampledWindow{std::move(s.samples)};
  } else {
    invalid(path, "unknown variant '" + variant + "'");
  }
  try {
    validate(w);
  } catch (const Error& e) {
    invalid(path, e.what());
  }
  return w;
}

TensorSymbol symbol_from_json(const json& j, const std::string& path) {
  expect_keys(j, path, {"terms"});
  if (!j.contains("terms") || !j.at("terms").is_array()) invalid(path, "missing 'terms' array");
  TensorSymbol a;
  const auto& terms = j.at("terms");
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto p = path + ".terms[" + std::to_string(k) + "]";
    expect_keys(terms[k], p, {"x_op", "x_factor", "xi_factor"});
    SymbolTerm t;
    if (terms[k].contains("x_op")) t.x_op = op_from(terms[k].at("x_op"), p + ".x_op");
    if (terms[k].contains("x_factor")) t.x_factor = factor_from(terms[k].at("x_factor"), p + ".x_factor");
    if (terms[k].contains("xi_factor")) t.xi_factor = tempered_from(terms[k].at("xi_factor"), p + ".xi_factor");
    a.terms.push_back(std::move(t));
  }
  try {
    validate(a);
  } catch (const Error& e) {
    invalid(path, e.what());
  }
  return a;
}

Grid1D grid_from_json(const json& j, const std::string& path) {
  expect_keys(j, path, {"radius", "step"});
  const double r = required(j, "radius", path), h = required(j, "step", path);
  if (!(r > 0) || !(h > 0) || r / h > 1e6) invalid(path, "need radius > 0, step > 0 and at most 2e6 points");
  return Grid1D::with_radius(r, h);
}

PhaseGrid phase_grid_from_json(const json& j, const std::string& path) {
  expect_keys(j, path, {"x_radius", "x_step", "xi_radius", "xi_step"});
  const double xr = required(j, "x_radius", path), xs = required(j, "x_step", path);
  const double fr = required(j, "xi_radius", path), fs = required(j, "xi_step", path);
  if (!(xr > 0) || !(xs > 0) || !(fr > 0) || !(fs > 0) || (xr / xs) * (fr / fs) > 1e7)
    invalid(path, "need positive radii and steps and at most ~4e7 points");
  return {Grid1D::with_radius(xr, xs), Grid1D::with_radius(fr, fs)};
}

json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) invalid(file, "cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    invalid(file, e.what());
  }
}

void write_csv(std::ostream& out, const SampledFunction& f) {
  if (f.is_phase_space()) {
    const auto& g = f.phase_grid();
    out << "x,xi,logmag,phase\n";
    for (std::size_t i = 0; i < g.x.size(); ++i)
      for (std::size_t j = 0; j < g.xi.size(); ++j) {
        const auto& z = f.at(i, j);
        out << format_double(g.x[i]) << ',' << format_double(g.xi[j]) << ',' << format_double(z.logmag) << ','
            << format_double(z.phase) << '\n';
      }
  } else {
    const auto& g = f.grid1d();
    out << "x,logmag,phase\n";
    for (std::size_t i = 0; i < g.size(); ++i)
      out << format_double(g[i]) << ',' << format_double(f[i].logmag) << ',' << format_double(f[i].phase) << '\n';
  }
}

void write_csv_file(const std::string& file, const SampledFunction& f) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigInvalid, file + ": cannot write");
  write_csv(out, f);
}

void write_json_file(const std::string& file, const json& j) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigInvalid, file + ": cannot write");
  out << j.dump(2) << '\n';
}

}  // namespace ultraloc::io
