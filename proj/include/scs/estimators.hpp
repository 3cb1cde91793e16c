// Nonparametric survival estimation and treatment-effect metrics: the
// Kaplan-Meier and Nelson-Aalen estimators, restricted mean survival time,
// and arm-contrast estimates (hazard ratio, risk difference, RMST
// difference) with percentile-bootstrap confidence intervals.
#pragma once

#include <optional>
#include <string>

#include "scs/types.hpp"

namespace scs {

enum class Metric { hazard_ratio, risk_difference, rmst_difference };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

struct EffectEstimate {
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    Metric metric = Metric::hazard_ratio;
    std::optional<double> horizon;
    // Set when the horizon lies beyond the last follow-up time of an arm.
    bool extrapolated = false;
};

struct BootstrapConfig {
    int replicates = 200;
    std::uint64_t seed = 20240501;
    int threads = 1;
};

// Product-limit survival estimate; steps only at event times, ties
// aggregated. S(0) = 1.
StepFunction kaplan_meier(const Dataset& ds);

// Cumulative hazard sum(d_t / n_at_risk_t) over event times <= t.
StepFunction nelson_aalen(const Dataset& ds);

// Exact integral of a piecewise-constant survival curve over [0, tau].
double rmst(const StepFunction& curve, double tau);

// Univariate Cox fit on the treatment indicator; point = exp(coefficient).
EffectEstimate treatment_hr(const Dataset& ds, const BootstrapConfig& boot = {});

// (1 - S_treated(h)) - (1 - S_control(h)) from arm-wise Kaplan-Meier curves.
EffectEstimate risk_difference(const Dataset& ds, double horizon,
                               const BootstrapConfig& boot = {});

// RMST_treated(tau) - RMST_control(tau).
EffectEstimate rmst_difference(const Dataset& ds, double tau, const BootstrapConfig& boot = {});

// Table-style rendering: "1.06, (1.01, 1.12)".
std::string format_estimate(const EffectEstimate& e, int decimals = 2);

}  // namespace scs
