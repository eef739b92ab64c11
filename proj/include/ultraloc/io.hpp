#pragma once

// JSON forms of the library types and CSV export of sampled functions.
// Parsers throw Error(ConfigInvalid) naming the offending path.

#include <json.hpp>

#include <initializer_list>
#include <ostream>
#include <string>

#include "ultraloc/numerics.hpp"
#include "ultraloc/quantize.hpp"
#include "ultraloc/symbols.hpp"
#include "ultraloc/tf.hpp"
#include "ultraloc/verify.hpp"
#include "ultraloc/weights.hpp"
#include "ultraloc/windows.hpp"

namespace ultraloc::io {

using json = nlohmann::json;

/// Finite doubles as numbers, +-inf and nan as the strings "inf", "-inf", "nan".
json number(double v);
double to_number(const json& j, const std::string& path);
/// Throws ConfigInvalid unless j is an object whose keys are all in `allowed`.
void expect_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed);
double number_or(const json& j, const char* key, const std::string& path, double fallback);
std::vector<double> number_list(const json& j, const std::string& path);

json to_json(const LogComplex& z);
json to_json(const WeightSequence& s);
json to_json(const ConditionReport& r);
json to_json(const WindowSpec& w);
json to_json(const TensorSymbol& a);
json to_json(const DecayFit& f);
json to_json(const DerivativeFit& f);
json to_json(const GelfandFit& f);
json to_json(const PairingResult& r);
json to_json(const PropertyReport& r);
json to_json(const DivergenceReport& r);
json to_json(const ThresholdScan& s);

/// {family: "gevrey", sigma, p_max} or {family: "custom", log_values[]}
WeightSequence weight_sequence_from_json(const json& j, const std::string& path = "sequence");
/// {variant: gaussian|subgaussian|doubleexp, a?, center?, freq?, r?, q?, t?}
WindowSpec window_from_json(const json& j, const std::string& path = "window");
/// {terms: [{x_op?, x_factor?, xi_factor?: {base?, op?}}]}
TensorSymbol symbol_from_json(const json& j, const std::string& path = "symbol");
/// {radius, step}
Grid1D grid_from_json(const json& j, const std::string& path = "grid");
/// {x_radius, x_step, xi_radius, xi_step}
PhaseGrid phase_grid_from_json(const json& j, const std::string& path = "phase_grid");

/// Reads and parses a JSON file; unreadable or malformed input is ConfigInvalid.
json read_json_file(const std::string& file);

/// Columns x[, xi], logmag, phase, every value printed with %.17g.
void write_csv(std::ostream& out, const SampledFunction& f);
void write_csv_file(const std::string& file, const SampledFunction& f);
/// dump(2) plus a trailing newline.
void write_json_file(const std::string& file, const json& j);

}  // namespace ultraloc::io
