#include "scs/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <vector>

#include "scs/cox.hpp"
#include "scs/parallel.hpp"
#include "scs/rng.hpp"

namespace scs {

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::hazard_ratio: return "hazard_ratio";
        case Metric::risk_difference: return "risk_difference";
        case Metric::rmst_difference: return "rmst_difference";
    }
    return "unknown";
}

Metric metric_from_name(const std::string& name) {
    if (name == "hazard_ratio" || name == "hr") return Metric::hazard_ratio;
    if (name == "risk_difference" || name == "risk") return Metric::risk_difference;
    if (name == "rmst_difference" || name == "rmst") return Metric::rmst_difference;
    throw ArgumentError("unknown metric '" + name + "'");
}

namespace {

// Aggregated (time, deaths, at-risk) walk shared by KM and NA.
template <typename Visitor>
void walk_event_times(const Dataset& ds, Visitor&& visit) {
    std::vector<std::size_t> order(ds.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ds.record(a).time < ds.record(b).time;
    });
    std::size_t at_risk = ds.n();
    std::size_t pos = 0;
    while (pos < order.size()) {
        const double t = ds.record(order[pos]).time;
        std::size_t deaths = 0;
        std::size_t count = 0;
        while (pos < order.size() && ds.record(order[pos]).time == t) {
            deaths += static_cast<std::size_t>(ds.record(order[pos]).event);
            ++count;
            ++pos;
        }
        if (deaths > 0) visit(t, deaths, at_risk);
        at_risk -= count;
    }
}

}  // namespace

StepFunction kaplan_meier(const Dataset& ds) {
    if (ds.empty()) {
        throw ArgumentError("kaplan_meier: empty dataset");
    }
    std::vector<double> times, values;
    double s = 1.0;
    walk_event_times(ds, [&](double t, std::size_t deaths, std::size_t at_risk) {
        s *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
        times.push_back(t);
        values.push_back(s);
    });
    return StepFunction(std::move(times), std::move(values), 1.0);
}

StepFunction nelson_aalen(const Dataset& ds) {
    if (ds.empty()) {
        throw ArgumentError("nelson_aalen: empty dataset");
    }
    std::vector<double> times, values;
    double cum = 0.0;
    walk_event_times(ds, [&](double t, std::size_t deaths, std::size_t at_risk) {
        cum += static_cast<double>(deaths) / static_cast<double>(at_risk);
        times.push_back(t);
        values.push_back(cum);
    });
    return StepFunction(std::move(times), std::move(values), 0.0);
}

double rmst(const StepFunction& curve, double tau) {
    if (!(tau > 0.0)) {
        throw ArgumentError("rmst: tau must be positive");
    }
    if (curve.value_before_first() != 1.0) {
        throw ArgumentError("rmst: curve must start at 1");
    }
    double prev = 1.0;
    for (double v : curve.values()) {
        if (v < -1e-12 || v > prev + 1e-12) {
            throw ArgumentError("rmst: curve must be non-increasing with values in [0, 1]");
        }
        prev = v;
    }
    double area = 0.0;
    double t_prev = 0.0;
    double v_prev = 1.0;
    for (std::size_t i = 0; i < curve.size() && curve.breakpoints()[i] < tau; ++i) {
        area += (curve.breakpoints()[i] - t_prev) * v_prev;
        t_prev = curve.breakpoints()[i];
        v_prev = curve.values()[i];
    }
    area += (tau - t_prev) * v_prev;
    return area;
}

namespace {

void require_both_arms(const Dataset& ds, const char* op) {
    if (ds.n_treated() == 0) {
        throw EstimationError(std::string(op) + ": treated arm is empty");
    }
    if (ds.n_treated() == ds.n()) {
        throw EstimationError(std::string(op) + ": control arm is empty");
    }
}

double hr_point(const Dataset& ds) {
    Eigen::MatrixXd X(ds.n(), 1);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        X(static_cast<Eigen::Index>(i), 0) = static_cast<double>(ds.record(i).treatment);
    }
    CoxFitResult fit = cox_fit(X, ds.times(), ds.events(), {});
    return std::exp(fit.coef[0]);
}

double risk_diff_point(const Dataset& ds, double horizon, bool* extrapolated) {
    const Dataset treated = ds.treated_arm();
    const Dataset control = ds.control_arm();
    const double st = kaplan_meier(treated)(horizon);
    const double sc = kaplan_meier(control)(horizon);
    if (extrapolated) {
        const double max_t = std::max(treated.times().maxCoeff(), control.times().maxCoeff());
        const double min_last = std::min(treated.times().maxCoeff(), control.times().maxCoeff());
        (void)max_t;
        *extrapolated = horizon > min_last;
    }
    return (1.0 - st) - (1.0 - sc);
}

double rmst_diff_point(const Dataset& ds, double tau, bool* extrapolated) {
    const Dataset treated = ds.treated_arm();
    const Dataset control = ds.control_arm();
    if (extrapolated) {
        const double min_last = std::min(treated.times().maxCoeff(), control.times().maxCoeff());
        *extrapolated = tau > min_last;
    }
    return rmst(kaplan_meier(treated), tau) - rmst(kaplan_meier(control), tau);
}

double percentile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

// Percentile bootstrap, resampling within arms so every replicate keeps both
// arms. Replicates where the statistic is undefined (e.g. no events) are
// skipped. The interval is widened to contain the point estimate, which the
// interval contract guarantees.
EffectEstimate bootstrap_estimate(const Dataset& ds, const BootstrapConfig& boot,
                                  Metric metric, std::optional<double> horizon,
                                  const std::function<double(const Dataset&)>& stat,
                                  double point, bool extrapolated) {
    std::vector<std::size_t> treated_idx, control_idx;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        (ds.record(i).treatment == 1 ? treated_idx : control_idx).push_back(i);
    }
    std::vector<double> stats(static_cast<std::size_t>(std::max(boot.replicates, 0)),
                              std::numeric_limits<double>::quiet_NaN());
    parallel_for(stats.size(), boot.threads, [&](std::size_t rep) {
        Rng rng(Rng::stream(boot.seed, rep));
        std::vector<std::size_t> rows;
        rows.reserve(ds.n());
        for (std::size_t k = 0; k < treated_idx.size(); ++k) {
            rows.push_back(treated_idx[rng.uniform_int(treated_idx.size())]);
        }
        for (std::size_t k = 0; k < control_idx.size(); ++k) {
            rows.push_back(control_idx[rng.uniform_int(control_idx.size())]);
        }
        try {
            stats[rep] = stat(ds.subset(rows));
        } catch (const Error&) {
            // leave NaN; skipped below
        }
    });
    std::vector<double> ok;
    ok.reserve(stats.size());
    for (double s : stats) {
        if (std::isfinite(s)) ok.push_back(s);
    }
    EffectEstimate e;
    e.metric = metric;
    e.horizon = horizon;
    e.point = point;
    e.extrapolated = extrapolated;
    if (ok.size() >= 2) {
        std::sort(ok.begin(), ok.end());
        e.ci_low = std::min(percentile(ok, 0.025), point);
        e.ci_high = std::max(percentile(ok, 0.975), point);
    } else {
        e.ci_low = point;
        e.ci_high = point;
    }
    return e;
}

}  // namespace

EffectEstimate treatment_hr(const Dataset& ds, const BootstrapConfig& boot) {
    require_both_arms(ds, "treatment_hr");
    if (ds.n_events() == 0) {
        throw EstimationError("treatment_hr: no events");
    }
    const double point = hr_point(ds);
    return bootstrap_estimate(ds, boot, Metric::hazard_ratio, std::nullopt, hr_point, point,
                              false);
}

EffectEstimate risk_difference(const Dataset& ds, double horizon, const BootstrapConfig& boot) {
    if (!(horizon > 0.0)) {
        throw ArgumentError("risk_difference: horizon must be positive");
    }
    require_both_arms(ds, "risk_difference");
    bool extrapolated = false;
    const double point = risk_diff_point(ds, horizon, &extrapolated);
    return bootstrap_estimate(
        ds, boot, Metric::risk_difference, horizon,
        [horizon](const Dataset& d) { return risk_diff_point(d, horizon, nullptr); }, point,
        extrapolated);
}

EffectEstimate rmst_difference(const Dataset& ds, double tau, const BootstrapConfig& boot) {
    if (!(tau > 0.0)) {
        throw ArgumentError("rmst_difference: tau must be positive");
    }
    require_both_arms(ds, "rmst_difference");
    bool extrapolated = false;
    const double point = rmst_diff_point(ds, tau, &extrapolated);
    return bootstrap_estimate(
        ds, boot, Metric::rmst_difference, tau,
        [tau](const Dataset& d) { return rmst_diff_point(d, tau, nullptr); }, point,
        extrapolated);
}

std::string format_estimate(const EffectEstimate& e, int decimals) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.*f, (%.*f, %.*f)", decimals, e.point, decimals, e.ci_low,
                  decimals, e.ci_high);
    return std::string(buf);
}

}  // namespace scs
