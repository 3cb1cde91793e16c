// JSON and CSV renderings of models, estimates and reports. JSON numbers
// round-trip exactly, so a saved model reloads to identical parameters.
#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "scs/baselines.hpp"
#include "scs/estimators.hpp"
#include "scs/eval.hpp"
#include "scs/model.hpp"
#include "scs/split.hpp"

namespace scs {

using ordered_json = nlohmann::ordered_json;

// A fitted model bundled with the covariate transform it was trained under.
struct ModelFile {
    ScsParams params;
    Standardizer standardizer;
    std::vector<std::string> feature_names;
};

ordered_json to_json(const EffectEstimate& e);
ordered_json to_json(const StepFunction& f);
ordered_json to_json(const Standardizer& s);
ordered_json to_json(const ModelFile& m);
ordered_json to_json(const FitDiagnostics& d, const std::vector<std::string>& feature_names);
ordered_json to_json(const RocCurve& c);
ordered_json to_json(const SubgroupReport& r);
ordered_json to_json(const PhenotypeScorer& s);

StepFunction step_function_from_json(const ordered_json& j);
ModelFile model_from_json(const ordered_json& j);
PhenotypeScorer scorer_from_json(const ordered_json& j);

void save_json(const std::string& path, const ordered_json& j);
ordered_json load_json(const std::string& path);

// One CSV row per method x fraction.
void write_report_csv(const std::string& path, const std::vector<SubgroupReport>& reports);

// Appendix-style text table: methods as rows, subgroup fractions as columns,
// cells formatted "point, (lo, hi)". The intervals are percentile bootstrap.
std::string format_report_table(const std::vector<SubgroupReport>& reports);

}  // namespace scs
