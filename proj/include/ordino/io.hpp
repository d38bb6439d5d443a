#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordino/estimation.hpp"
#include "ordino/mrc.hpp"

namespace ordino {

using Json = nlohmann::ordered_json;

// Doubles as JSON numbers; +-inf as the strings "inf" / "-inf", NaN as null.
Json number_to_json(double v);
double number_from_json(const Json& j, const std::string& what);
// Shortest round-trip text of v, the same characters the JSON writer emits.
std::string format_number(double v);

// {"M": [M1, M2], "A1": [[...]], "A2": [[...]]} with boundary rows included.
Json structure_to_json(const ThresholdStructure& ts);
ThresholdStructure structure_from_json(const Json& j);

// Model specification, schema "v1":
//   {"schema": "v1", "M": [M1, M2], "x1": [names], "x2": [names],
//    "thresholds": structure (optional)}
// A name listed in both x1 and x2 is a shared regressor.
struct ModelSpec {
    ResponseSpec spec;
    std::vector<std::string> x1;
    std::vector<std::string> x2;
    std::optional<ThresholdStructure> thresholds;

    int k1() const { return static_cast<int>(x1.size()); }
    int k2() const { return static_cast<int>(x2.size()); }
    // Names of columns that enter only equation d.
    std::vector<std::string> exclusive(int d) const;
};
Json spec_to_json(const ModelSpec& s);
ModelSpec spec_from_json(const Json& j);
ModelSpec spec_for_design(const DesignConfig& d);

// {"beta1": [...], "beta2": [...], "rho": r, "thresholds": structure}. The
// reader also accepts an estimation result and uses its "params" member.
Json params_to_json(const ModelParams& p);
ModelParams params_from_json(const Json& j);

Json result_to_json(const EstimationResult& r, const FitConfig& config);
Json mrc_result_to_json(const MrcResult& r, const MrcConfig& config);

// File helpers; parse and open failures are UserError.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ordino
