#include "scs/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace scs {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_vector(const std::vector<double>& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

}  // namespace

ordered_json to_json(const EffectEstimate& e) {
    ordered_json j;
    j["metric"] = metric_name(e.metric);
    j["point"] = e.point;
    j["ci_low"] = e.ci_low;
    j["ci_high"] = e.ci_high;
    if (e.horizon) {
        j["horizon"] = *e.horizon;
    }
    if (e.extrapolated) {
        j["extrapolated"] = true;
    }
    return j;
}

ordered_json to_json(const StepFunction& f) {
    ordered_json j;
    j["breakpoints"] = f.breakpoints();
    j["values"] = f.values();
    j["value_before_first"] = f.value_before_first();
    return j;
}

ordered_json to_json(const Standardizer& s) {
    ordered_json j;
    j["feature_names"] = s.feature_names();
    j["mean"] = to_vector(s.mean());
    j["scale"] = to_vector(s.scale());
    return j;
}

ordered_json to_json(const ModelFile& m) {
    ordered_json j;
    j["format"] = "scs-model";
    j["version"] = 1;
    j["groups"] = m.params.latent.groups;
    ordered_json theta = ordered_json::array();
    for (Eigen::Index k = 0; k < m.params.theta.rows(); ++k) {
        theta.push_back(to_vector(m.params.theta.row(k).transpose()));
    }
    j["theta"] = std::move(theta);
    j["beta"] = to_vector(m.params.beta);
    j["omega"] = m.params.omega;
    j["baseline_cumhaz"] = to_json(m.params.baseline_cumhaz);
    j["standardization"] = to_json(m.standardizer);
    j["feature_names"] = m.feature_names;
    return j;
}

ordered_json to_json(const FitDiagnostics& d, const std::vector<std::string>& feature_names) {
    ordered_json j;
    j["final_objective"] = d.final_objective;
    j["outer_iterations"] = d.outer_iterations;
    j["objective_trace"] = d.objective_trace;
    j["active_features"] = d.active_features;
    ordered_json names = ordered_json::array();
    for (int idx : d.active_features) {
        if (idx >= 0 && static_cast<std::size_t>(idx) < feature_names.size()) {
            names.push_back(feature_names[static_cast<std::size_t>(idx)]);
        }
    }
    j["active_feature_names"] = std::move(names);
    j["degenerate_rows"] = d.degenerate_rows;
    j["restart_objectives"] = d.restart_objectives;
    j["chosen_restart"] = d.chosen_restart;
    j["canonicalized"] = d.canonicalized;
    return j;
}

ordered_json to_json(const RocCurve& c) {
    ordered_json j;
    j["auc"] = c.auc;
    j["thresholds"] = c.thresholds;
    j["tpr"] = c.tpr;
    j["fpr"] = c.fpr;
    return j;
}

ordered_json to_json(const SubgroupReport& r) {
    ordered_json j;
    j["method"] = r.method;
    j["metric"] = metric_name(r.metric);
    if (r.horizon) j["horizon"] = *r.horizon;
    ordered_json rows = ordered_json::array();
    for (const SweepRow& row : r.rows) {
        ordered_json rj;
        rj["fraction"] = row.fraction;
        rj["n_selected"] = row.n_selected;
        rj["n_treated"] = row.n_treated;
        rj["n_control"] = row.n_control;
        rj["n_events"] = row.n_events;
        rj["estimable"] = row.estimable;
        if (row.estimable) {
            rj["estimate"] = to_json(row.estimate);
        } else {
            rj["note"] = row.note;
        }
        rows.push_back(std::move(rj));
    }
    j["rows"] = std::move(rows);
    return j;
}

ordered_json to_json(const PhenotypeScorer& s) {
    ordered_json j;
    j["kind"] = scorer_kind_name(s.kind);
    j["theta"] = to_vector(s.theta);
    j["beta"] = to_vector(s.beta);
    j["intercept"] = s.intercept;
    if (s.horizon) j["horizon"] = *s.horizon;
    if (s.kind == ScorerKind::bin_int) j["excluded"] = s.excluded;
    return j;
}

StepFunction step_function_from_json(const ordered_json& j) {
    return StepFunction(j.at("breakpoints").get<std::vector<double>>(),
                        j.at("values").get<std::vector<double>>(),
                        j.at("value_before_first").get<double>());
}

ModelFile model_from_json(const ordered_json& j) {
    if (!j.contains("format") || j.at("format") != "scs-model") {
        throw ConfigError("not an scs model file");
    }
    ModelFile m;
    m.params.latent.groups = j.at("groups").get<std::vector<int>>();
    m.params.latent.validate();
    const auto theta_rows = j.at("theta").get<std::vector<std::vector<double>>>();
    const std::size_t K = theta_rows.size();
    const std::size_t d = K == 0 ? 0 : theta_rows[0].size();
    m.params.theta.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < K; ++k) {
        if (theta_rows[k].size() != d) throw ConfigError("ragged theta in model file");
        m.params.theta.row(static_cast<Eigen::Index>(k)) =
            from_vector(theta_rows[k]).transpose();
    }
    m.params.beta = from_vector(j.at("beta").get<std::vector<double>>());
    m.params.omega = j.at("omega").get<double>();
    m.params.baseline_cumhaz = step_function_from_json(j.at("baseline_cumhaz"));
    const ordered_json& s = j.at("standardization");
    m.standardizer = Standardizer(from_vector(s.at("mean").get<std::vector<double>>()),
                                  from_vector(s.at("scale").get<std::vector<double>>()),
                                  s.at("feature_names").get<std::vector<std::string>>());
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    return m;
}

PhenotypeScorer scorer_from_json(const ordered_json& j) {
    PhenotypeScorer s;
    s.kind = scorer_kind_from_name(j.at("kind").get<std::string>());
    s.theta = from_vector(j.at("theta").get<std::vector<double>>());
    s.beta = from_vector(j.at("beta").get<std::vector<double>>());
    s.intercept = j.at("intercept").get<double>();
    if (j.contains("horizon")) s.horizon = j.at("horizon").get<double>();
    if (j.contains("excluded")) s.excluded = j.at("excluded").get<int>();
    return s;
}

void save_json(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed while writing '" + path + "'");
}

ordered_json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
}

void write_report_csv(const std::string& path, const std::vector<SubgroupReport>& reports) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "method,metric,horizon,fraction,n_selected,n_treated,n_control,n_events,"
           "point,ci_low,ci_high,extrapolated,estimable,note\n";
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const SubgroupReport& r : reports) {
        for (const SweepRow& row : r.rows) {
            out << r.method << ',' << metric_name(r.metric) << ','
                << (r.horizon ? fmt(*r.horizon) : "") << ',' << fmt(row.fraction) << ','
                << row.n_selected << ',' << row.n_treated << ',' << row.n_control << ','
                << row.n_events << ',';
            if (row.estimable) {
                out << fmt(row.estimate.point) << ',' << fmt(row.estimate.ci_low) << ','
                    << fmt(row.estimate.ci_high) << ',' << (row.estimate.extrapolated ? 1 : 0)
                    << ",1,";
            } else {
                out << ",,,0,0," << row.note;
            }
            out << '\n';
        }
    }
    if (!out) throw IoError("failed while writing '" + path + "'");
}

std::string format_report_table(const std::vector<SubgroupReport>& reports) {
    std::ostringstream out;
    if (reports.empty()) return "";
    out << "metric: " << metric_name(reports.front().metric);
    if (reports.front().horizon) {
        out << " (horizon " << *reports.front().horizon << ")";
    }
    out << "\nintervals: percentile bootstrap\n\n";
    std::size_t width = 8;
    for (const SubgroupReport& r : reports) width = std::max(width, r.method.size() + 2);
    out << std::string(width, ' ');
    for (const SweepRow& row : reports.front().rows) {
        char head[32];
        std::snprintf(head, sizeof(head), "%3.0f%%", row.fraction * 100.0);
        out << head << std::string(24, ' ');
    }
    out << '\n';
    for (const SubgroupReport& r : reports) {
        out << r.method << std::string(width - r.method.size(), ' ');
        for (const SweepRow& row : r.rows) {
            std::string cell = row.estimable ? format_estimate(row.estimate) : "n/a";
            cell.resize(28, ' ');
            out << cell;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace scs
