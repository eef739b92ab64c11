#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>

namespace ultraloc::cli {

namespace {

using io::json;

std::string out_path(const Options& opt, const char* name) { return (std::filesystem::path(opt.out_dir) / name).string(); }

void check_header(const json& cfg, const char* command) {
  if (!cfg.is_object()) throw Error(ErrorKind::ConfigInvalid, "config: expected an object");
  if (!cfg.contains("schema_version") || cfg.at("schema_version") != 1)
    throw Error(ErrorKind::ConfigInvalid, "config.schema_version: expected 1");
  if (cfg.contains("command") && cfg.at("command") != command)
    throw Error(ErrorKind::ConfigInvalid, std::string("config.command: expected '") + command + "'");
}

json grid_json(const Grid1D& g) { return {{"x0", g.x0()}, {"dx", g.dx()}, {"n", g.size()}}; }

const json& section(const json& cfg, const char* key, const json& fallback) {
  return cfg.contains(key) ? cfg.at(key) : fallback;
}

std::size_t count(const json& cfg, const char* key, const std::string& path, double fallback, double max) {
  const double v = io::number_or(cfg, key, path, fallback);
  if (!(v >= 1 && v <= max) || v != std::floor(v))
    throw Error(ErrorKind::ConfigInvalid, path + "." + key + ": expected an integer in [1, " + std::to_string(static_cast<long long>(max)) + "]");
  return static_cast<std::size_t>(v);
}

std::string expectation(const json& cfg, const std::string& path, std::initializer_list<const char*> allowed) {
  const std::string v = cfg.value("expect", *allowed.begin());
  for (const char* a : allowed)
    if (v == a) return v;
  throw Error(ErrorKind::ConfigInvalid, path + ".expect: unexpected value '" + v + "'");
}

TensorSymbol load_symbol(const json& cfg, const std::string& path, const std::filesystem::path& base) {
  if (cfg.contains("symbol") == cfg.contains("symbol_file"))
    throw Error(ErrorKind::ConfigInvalid, path + ": give exactly one of 'symbol' and 'symbol_file'");
  if (cfg.contains("symbol")) return io::symbol_from_json(cfg.at("symbol"), path + ".symbol");
  if (!cfg.at("symbol_file").is_string()) throw Error(ErrorKind::ConfigInvalid, path + ".symbol_file: expected a path");
  const auto file = (base / cfg.at("symbol_file").get<std::string>()).string();
  return io::symbol_from_json(io::read_json_file(file), file);
}

std::pair<WindowSpec, WindowSpec> load_pair(const json& cfg, const std::string& path, const json& fallback) {
  const auto& w = section(cfg, "windows", fallback);
  if (!w.is_array() || w.size() != 2) throw Error(ErrorKind::ConfigInvalid, path + ".windows: expected [w1, w2]");
  return {io::window_from_json(w[0], path + ".windows[0]"), io::window_from_json(w[1], path + ".windows[1]")};
}

// ln|z1 - z2| - ln|z2|
double relative_gap(const LogComplex& a, const LogComplex& b) {
  if (b.is_zero()) return a.is_zero() ? 0.0 : std::numeric_limits<double>::infinity();
  const double m = a.is_zero() ? 0.0 : std::exp(a.logmag - b.logmag);
  return std::abs(std::polar(m, a.phase - b.phase) - 1.0);
}

struct SuiteOutcome {
  bool ok = false;
  std::string verdict;
  json report;
};

SuiteOutcome judged(bool passed, const std::string& expect, json report) {
  const bool expect_pass = expect == "pass" || expect == "feasible" || expect == "admissible";
  SuiteOutcome o;
  o.ok = passed == expect_pass;
  o.verdict = o.ok ? (expect_pass ? "pass" : "expected-failure") : "fail";
  report["expect"] = expect;
  o.report = std::move(report);
  return o;
}

const json kSubGaussPair = json::array({{{"variant", "subgaussian"}, {"r", 1.0}, {"q", 1.0}},
                                        {{"variant", "subgaussian"}, {"r", 1.0}, {"q", 1.0}}});

struct Context {
  std::uint64_t seed = 0;
  std::size_t samples = 10000;
  /// directory of the config file, for relative symbol_file paths
  std::filesystem::path base;
};

using Suite = std::function<SuiteOutcome(const json&, const std::string&, const Context&)>;

SuiteOutcome property(PropertyReport (*check)(std::size_t, std::uint64_t), const json& p, const std::string& path,
                      const Context& ctx) {
  io::expect_keys(p, path, {"samples"});
  const auto r = check(p.contains("samples") ? count(p, "samples", path, 1, 1e7) : ctx.samples, ctx.seed);
  return judged(r.pass, "pass", io::to_json(r));
}

const std::map<std::string, Suite>& suites() {
  static const std::map<std::string, Suite> table{
      {"product_split",
       [](const json& p, const std::string& path, const Context& c) { return property(check_product_split, p, path, c); }},
      {"geometric_mean_decay",
       [](const json& p, const std::string& path, const Context& c) {
         return property(check_geometric_mean_decay, p, path, c);
       }},
      {"peetre_type",
       [](const json& p, const std::string& path, const Context& c) { return property(check_peetre_type, p, path, c); }},
      {"subadditive_bracket",
       [](const json& p, const std::string& path, const Context& c) {
         return property(check_subadditive_bracket, p, path, c);
       }},
      {"divergence",
       [](const json& p, const std::string& path, const Context&) {
         io::expect_keys(p, path, {"l", "q", "n_max"});
         const auto r = divergence_demo(io::number_or(p, "l", path, 1.0), io::number_or(p, "q", path, 1.0),
                                        static_cast<int>(count(p, "n_max", path, 8, 30)));
         return judged(r.strictly_increasing && r.superlinear, "pass", io::to_json(r));
       }},
      {"threshold",
       [](const json& p, const std::string& path, const Context&) {
         io::expect_keys(p, path, {"r", "q", "ls", "y_radius", "dy"});
         const auto r = threshold_scan(io::number_or(p, "r", path, 1.0), io::number_or(p, "q", path, 1.0),
                                       p.contains("ls") ? io::number_list(p.at("ls"), path + ".ls") : std::vector<double>{},
                                       io::number_or(p, "y_radius", path, 60.0), io::number_or(p, "dy", path, 0.1));
         return judged(r.brackets, "pass", io::to_json(r));
       }},
      {"wigner_decay",
       [](const json& p, const std::string& path, const Context&) {
         io::expect_keys(p, path, {"windows", "r_prime", "q", "sequence", "c_candidates", "signal_grid", "phase_grid", "c_max", "expect"});
         const auto [w1, w2] = load_pair(p, path, kSubGaussPair);
         const auto seq = io::weight_sequence_from_json(section(p, "sequence", {{"family", "gevrey"}, {"sigma", 1.0}}), path + ".sequence");
         const TFPlan plan{io::grid_from_json(section(p, "signal_grid", {{"radius", 60.0}, {"step", 0.05}}), path + ".signal_grid"),
                           io::phase_grid_from_json(section(p, "phase_grid", {{"x_radius", 12.0}, {"x_step", 0.1}, {"xi_radius", 3.0}, {"xi_step", 0.1}}),
                                                    path + ".phase_grid")};
         const auto cs = p.contains("c_candidates") ? io::number_list(p.at("c_candidates"), path + ".c_candidates")
                                                    : std::vector<double>{8.0, 4.0, 2.0, 1.0, 0.5};
         const double c_max = io::number_or(p, "c_max", path, 1e3);
         const auto f = wigner_decay_fit(w1, w2, io::number_or(p, "r_prime", path, 0.9), io::number_or(p, "q", path, 1.0), seq, cs,
                                         plan, c_max);
         return judged(f.feasible && f.C <= c_max && f.c_prime > 0.0, expectation(p, path, {"feasible", "infeasible"}), io::to_json(f));
       }},
      {"wigner_envelope",
       [](const json& p, const std::string& path, const Context&) {
         io::expect_keys(p, path, {"windows", "tau", "q", "sequence", "c_candidates", "signal_grid", "phase_grid", "c_max", "expect"});
         const json dexp = json::array({{{"variant", "doubleexp"}, {"t", 1.0}, {"q", 1.0}}, {{"variant", "doubleexp"}, {"t", 1.0}, {"q", 1.0}}});
         const auto [w1, w2] = load_pair(p, path, dexp);
         const auto seq = io::weight_sequence_from_json(section(p, "sequence", {{"family", "gevrey"}, {"sigma", 2.0}}), path + ".sequence");
         const TFPlan plan{io::grid_from_json(section(p, "signal_grid", {{"radius", 8.0}, {"step", 0.01}}), path + ".signal_grid"),
                           io::phase_grid_from_json(section(p, "phase_grid", {{"x_radius", 3.0}, {"x_step", 0.05}, {"xi_radius", 6.0}, {"xi_step", 0.1}}),
                                                    path + ".phase_grid")};
         const auto cs = p.contains("c_candidates") ? io::number_list(p.at("c_candidates"), path + ".c_candidates")
                                                    : std::vector<double>{2.0, 1.0, 0.5, 0.25, 0.1};
         const double c_max = io::number_or(p, "c_max", path, 1e3);
         const auto f = wigner_envelope_fit(w1, w2, io::number_or(p, "tau", path, 0.5), io::number_or(p, "q", path, 1.0), seq, cs, plan, c_max);
         return judged(f.feasible && f.C <= c_max, expectation(p, path, {"feasible", "infeasible"}), io::to_json(f));
       }},
      {"admissibility",
       [](const json& p, const std::string& path, const Context& ctx) {
         io::expect_keys(p, path, {"symbol", "symbol_file", "windows", "expect"});
         const auto a = load_symbol(p, path, ctx.base);
         const auto [w1, w2] = load_pair(p, path, kSubGaussPair);
         const auto v = admissibility(a, w1, w2);
         json report{{"verdict", to_string(v.verdict)}, {"reason", v.reason}, {"threshold", io::number(v.threshold)}};
         const auto expect = expectation(p, path, {"admissible", "not-admissible"});
         if (v.verdict == Admissibility::Unknown) {
           report["expect"] = expect;
           return SuiteOutcome{false, "fail", report};
         }
         return judged(v.verdict == Admissibility::Admissible, expect, report);
       }},
      {"gelfand",
       [](const json& p, const std::string& path, const Context& ctx) {
         io::expect_keys(p, path, {"symbol", "symbol_file", "windows", "conv_grid", "sequence", "x_radius", "kp_powers", "decay_candidates", "c_max"});
         const auto a = load_symbol(p, path, ctx.base);
         const auto [w1, w2] = load_pair(p, path, kSubGaussPair);
         ConvolutionPlan plan{io::phase_grid_from_json(
             section(p, "conv_grid", {{"x_radius", 4.0}, {"x_step", 0.05}, {"xi_radius", 3.0}, {"xi_step", 0.05}}), path + ".conv_grid")};
         const auto b = convolve_symbol_wigner(a, w1, w2, plan);
         const auto seq = io::weight_sequence_from_json(section(p, "sequence", {{"family", "gevrey"}, {"sigma", 2.0}}), path + ".sequence");
         std::vector<RSequence> kp;
         for (double e : p.contains("kp_powers") ? io::number_list(p.at("kp_powers"), path + ".kp_powers") : std::vector<double>{0.25, 0.5, 1.0})
           kp.push_back(e == 0.0 ? RSequence::constant(1.0, 256) : RSequence::power(e, 256));
         const auto decay = p.contains("decay_candidates") ? io::number_list(p.at("decay_candidates"), path + ".decay_candidates")
                                                          : std::vector<double>{2.0, 1.0, 0.5};
         const auto f = gelfand_bound_fit(b, seq, io::number_or(p, "x_radius", path, 3.0), kp, decay, io::number_or(p, "c_max", path, 1e6));
         auto report = io::to_json(f);
         report["truncation_warning"] = b.truncation_warning;
         report["warnings"] = b.warnings;
         return judged(f.feasible, "pass", report);
       }},
  };
  return table;
}

}  // namespace

int cmd_transform(const json& cfg, const Options& opt) {
  check_header(cfg, "transform");
  io::expect_keys(cfg, "config", {"schema_version", "command", "seed", "signal", "window", "signal_grid", "phase_grid", "method", "outputs"});
  if (!cfg.contains("signal") || !cfg.contains("window")) throw Error(ErrorKind::ConfigInvalid, "config: 'signal' and 'window' are required");

  const auto window = io::window_from_json(cfg.at("window"), "config.window");
  const auto sg = io::grid_from_json(section(cfg, "signal_grid", {{"radius", 8.0}, {"step", 0.05}}), "config.signal_grid");
  const auto pg = io::phase_grid_from_json(
      section(cfg, "phase_grid", {{"x_radius", 4.0}, {"x_step", 0.1}, {"xi_radius", 4.0}, {"xi_step", 0.1}}), "config.phase_grid");
  const std::string method = cfg.value("method", "direct");
  TFPlan plan{sg, pg};
  if (method == "fft") {
    const double stride = std::round(pg.x.dx() / sg.dx());
    if (stride < 1 || std::abs(stride * sg.dx() - pg.x.dx()) > 1e-9 * pg.x.dx())
      throw Error(ErrorKind::ConfigInvalid, "config.phase_grid.x_step: must be a multiple of the signal step for method 'fft'");
    plan = TFPlan::fft_compatible(sg, pg.x.radius(), static_cast<std::size_t>(stride), pg.xi.radius(), TFMethod::FftBridge);
  } else if (method != "direct") {
    throw Error(ErrorKind::ConfigInvalid, "config.method: expected 'direct' or 'fft'");
  }

  bool want_stft = true, want_wigner = false;
  if (cfg.contains("outputs")) {
    const auto& o = cfg.at("outputs");
    if (!o.is_array() || o.empty()) throw Error(ErrorKind::ConfigInvalid, "config.outputs: expected a non-empty array");
    want_stft = false;
    for (const auto& e : o) {
      if (e == "stft") want_stft = true;
      else if (e == "wigner") want_wigner = true;
      else throw Error(ErrorKind::ConfigInvalid, "config.outputs: unknown output " + e.dump());
    }
  }

  const auto& sj = cfg.at("signal");
  const bool zero = sj.is_object() && sj.value("variant", "") == "zero";
  if (zero) io::expect_keys(sj, "config.signal", {"variant"});
  const Profile signal = zero ? Profile{[](double) { return LogComplex::zero(); }} : profile(io::window_from_json(sj, "config.signal"));
  const auto f = SampledFunction::sample(sg, signal.eval);

  json meta{{"command", "transform"},
            {"schema_version", 1},
            {"signal", zero ? json{{"variant", "zero"}} : io::to_json(io::window_from_json(sj, "config.signal"))},
            {"window", io::to_json(window)},
            {"signal_grid", grid_json(plan.signal)},
            {"phase_grid", {{"x", grid_json(plan.phase.x)}, {"xi", grid_json(plan.phase.xi)}}},
            {"method", method}};
  json files = json::array(), warnings = json::array();
  bool truncated = false;
  std::filesystem::create_directories(opt.out_dir);
  if (want_stft) {
    const auto V = stft(f, window, plan);
    io::write_csv_file(out_path(opt, "stft.csv"), V.values);
    files.push_back("stft.csv");
    truncated |= V.truncation_warning;
    for (const auto& w : V.warnings) warnings.push_back("stft: " + w);
  }
  if (want_wigner) {
    const auto W = wigner(signal, profile(window), plan);
    io::write_csv_file(out_path(opt, "wigner.csv"), W.values);
    files.push_back("wigner.csv");
    truncated |= W.truncation_warning;
    for (const auto& w : W.warnings) warnings.push_back("wigner: " + w);
  }
  files.push_back("transform.json");
  meta["files"] = files;
  meta["truncation_warning"] = truncated;
  meta["warnings"] = warnings;
  io::write_json_file(out_path(opt, "transform.json"), meta);

  for (const auto& f : files) std::printf("wrote %s\n", f.get<std::string>().c_str());
  if (truncated) std::printf("truncation warning\n");
  return opt.strict && truncated ? kNumericalFailure : kOk;
}

int cmd_verify(const json& cfg, const Options& opt) {
  check_header(cfg, "verify");
  io::expect_keys(cfg, "config", {"schema_version", "command", "seed", "samples", "suites"});
  const std::uint64_t seed = opt.seed ? *opt.seed : static_cast<std::uint64_t>(io::number_or(cfg, "seed", "config", 0.0));
  const std::size_t samples = count(cfg, "samples", "config", 10000, 1e7);

  json selected = json::object();
  if (cfg.contains("suites")) {
    selected = cfg.at("suites");
    if (!selected.is_object() || selected.empty()) throw Error(ErrorKind::ConfigInvalid, "config.suites: expected a non-empty object");
  } else {
    for (const char* s : {"product_split", "geometric_mean_decay", "peetre_type", "subadditive_bracket", "divergence", "threshold",
                          "wigner_decay", "wigner_envelope"})
      selected[s] = json::object();
  }
  for (const auto& [name, params] : selected.items()) {
    if (!suites().count(name)) throw Error(ErrorKind::ConfigInvalid, "config.suites: unknown suite '" + name + "'");
    if (!params.is_object()) throw Error(ErrorKind::ConfigInvalid, "config.suites." + name + ": expected an object");
  }

  std::filesystem::create_directories(opt.out_dir);
  json summary = json::object();
  std::string lines;
  bool all_ok = true;
  for (const auto& [name, params] : selected.items()) {
    auto o = suites().at(name)(params, "config.suites." + name, Context{seed, samples, opt.config_dir});
    o.report["suite"] = name;
    o.report["verdict"] = o.verdict;
    lines += o.report.dump() + "\n";
    summary[name] = o.verdict;
    all_ok &= o.ok;
    std::printf("%-22s %s\n", name.c_str(), o.verdict.c_str());
  }
  {
    std::FILE* fp = std::fopen(out_path(opt, "verify.jsonl").c_str(), "wb");
    if (!fp) throw Error(ErrorKind::ConfigInvalid, out_path(opt, "verify.jsonl") + ": cannot write");
    std::fwrite(lines.data(), 1, lines.size(), fp);
    std::fclose(fp);
  }
  io::write_json_file(out_path(opt, "verify.json"), {{"seed", seed}, {"samples", samples}, {"suites", summary}, {"pass", all_ok}});
  return all_ok ? kOk : kVerificationFailure;
}

int cmd_locop(const json& cfg, const Options& opt) {
  check_header(cfg, "locop");
  io::expect_keys(cfg, "config", {"schema_version", "command", "seed", "symbol", "symbol_file", "windows", "psi", "theta", "signal_grid",
                                  "phase_grid", "conv_grid", "y_radius", "s_step_max", "drop", "mild_sigma", "mild_h"});
  const auto a = load_symbol(cfg, "config", opt.config_dir);
  if (!cfg.contains("windows")) throw Error(ErrorKind::ConfigInvalid, "config: 'windows' is required");
  const auto [w1, w2] = load_pair(cfg, "config", {});
  const json gauss{{"variant", "gaussian"}, {"a", 1.0}};
  const auto psi = profile(io::window_from_json(section(cfg, "psi", gauss), "config.psi"));
  const auto theta = profile(io::window_from_json(section(cfg, "theta", gauss), "config.theta"));

  LocopPlan plan{TFPlan{io::grid_from_json(section(cfg, "signal_grid", {{"radius", 10.0}, {"step", 0.05}}), "config.signal_grid"),
                        io::phase_grid_from_json(
                            section(cfg, "phase_grid", {{"x_radius", 6.0}, {"x_step", 0.1}, {"xi_radius", 6.0}, {"xi_step", 0.1}}),
                            "config.phase_grid")},
                 ConvolutionPlan{io::phase_grid_from_json(
                     section(cfg, "conv_grid", {{"x_radius", 6.0}, {"x_step", 0.05}, {"xi_radius", 5.0}, {"xi_step", 0.05}}), "config.conv_grid")}};
  plan.conv.y_radius = io::number_or(cfg, "y_radius", "config", 0.0);
  plan.conv.s_step_max = io::number_or(cfg, "s_step_max", "config", plan.conv.s_step_max);
  plan.conv.drop = io::number_or(cfg, "drop", "config", plan.conv.drop);
  plan.mild_sigma = io::number_or(cfg, "mild_sigma", "config", plan.mild_sigma);
  plan.mild_h = io::number_or(cfg, "mild_h", "config", plan.mild_h);

  std::filesystem::create_directories(opt.out_dir);
  json out{{"command", "locop"}, {"symbol", io::to_json(a)}, {"windows", {io::to_json(w1), io::to_json(w2)}}};
  std::vector<PairingResult> routes;
  bool mild = true;
  try {
    routes.push_back(locop_direct(a, w1, w2, psi, theta, plan));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotMild) throw;
    mild = false;
  }
  try {
    routes.push_back(locop_via_weyl(a, w1, w2, psi, theta, plan));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotAdmissible && e.kind() != ErrorKind::DivergentIntegrand) throw;
    out["refused"] = {{"kind", to_string(e.kind())}, {"reason", e.what()}};
    io::write_json_file(out_path(opt, "locop.json"), out);
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kNumericalFailure;
  }

  out["mild"] = mild;
  json rs = json::array();
  bool truncated = false;
  for (const auto& r : routes) {
    rs.push_back(io::to_json(r));
    truncated |= r.truncation_warning;
    std::printf("%-17s logmag %.17g phase %.17g\n", r.route.c_str(), r.value.logmag, r.value.phase);
  }
  out["routes"] = rs;
  if (routes.size() == 2) {
    const double delta = relative_gap(routes[0].value, routes[1].value);
    out["delta"] = io::number(delta);
    std::printf("delta %.3e\n", delta);
  }
  io::write_json_file(out_path(opt, "locop.json"), out);
  return opt.strict && truncated ? kNumericalFailure : kOk;
}

int cmd_weights(const json& cfg, const Options& opt) {
  check_header(cfg, "weights");
  io::expect_keys(cfg, "config", {"schema_version", "command", "seed", "sequence", "rho", "fit"});
  if (!cfg.contains("sequence")) throw Error(ErrorKind::ConfigInvalid, "config: 'sequence' is required");
  const auto seq = io::weight_sequence_from_json(cfg.at("sequence"), "config.sequence");
  const AssociatedFunction af(seq);

  json out{{"command", "weights"}, {"sequence", io::to_json(seq)}, {"conditions", io::to_json(check_conditions(seq))}};
  json values = json::array();
  for (double rho : cfg.contains("rho") ? io::number_list(cfg.at("rho"), "config.rho") : std::vector<double>{1.0, 10.0, 100.0, 1e3, 1e4}) {
    if (!(rho >= 0)) throw Error(ErrorKind::ConfigInvalid, "config.rho: values must be >= 0");
    values.push_back({{"rho", rho}, {"M", io::number(af(rho))}, {"argmax", af.argmax(rho)}});
  }
  out["associated"] = values;

  const json fc = section(cfg, "fit", json::object());
  io::expect_keys(fc, "config.fit", {"rho_lo", "rho_hi", "samples"});
  const auto fit = assoc_exponent_fit(af, io::number_or(fc, "rho_lo", "config.fit", 10.0), io::number_or(fc, "rho_hi", "config.fit", 1e4),
                                      static_cast<int>(count(fc, "samples", "config.fit", 64, 1e5)));
  json fj{{"k", io::number(fit.k)}, {"A", io::number(fit.A)}, {"B", io::number(fit.B)}, {"loglog_slope", io::number(fit.loglog_slope)}};
  if (auto sigma = seq.gevrey_sigma()) {
    fj["target"] = 1.0 / *sigma;
    fj["relative_error"] = std::abs(fit.k * *sigma - 1.0);
  }
  out["exponent_fit"] = fj;

  std::filesystem::create_directories(opt.out_dir);
  io::write_json_file(out_path(opt, "weights.json"), out);
  std::printf("exponent %.6f\n", fit.k);
  return kOk;
}

}  // namespace ultraloc::cli
