#include "scs/types.hpp"

#include <algorithm>
#include <cmath>

namespace scs {

Dataset::Dataset(std::vector<SubjectRecord> records, std::vector<std::string> feature_names)
    : records_(std::move(records)), feature_names_(std::move(feature_names)) {
    const std::size_t n = records_.size();
    const std::size_t d = feature_names_.size();
    covariates_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    times_.resize(static_cast<Eigen::Index>(n));
    events_.resize(static_cast<Eigen::Index>(n));
    treatments_.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const SubjectRecord& r = records_[i];
        if (static_cast<std::size_t>(r.covariates.size()) != d) {
            throw ValidationError("record " + std::to_string(i + 1) + ": covariate length " +
                                  std::to_string(r.covariates.size()) + " does not match " +
                                  std::to_string(d) + " feature names");
        }
        if (!(r.time > 0.0) || !std::isfinite(r.time)) {
            throw ValidationError("record " + std::to_string(i + 1) +
                                  ": time must be a positive finite number");
        }
        if (r.event != 0 && r.event != 1) {
            throw ValidationError("record " + std::to_string(i + 1) + ": event must be 0 or 1");
        }
        if (r.treatment != 0 && r.treatment != 1) {
            throw ValidationError("record " + std::to_string(i + 1) +
                                  ": treatment must be 0 or 1");
        }
        for (Eigen::Index j = 0; j < r.covariates.size(); ++j) {
            if (!std::isfinite(r.covariates[j])) {
                throw ValidationError("record " + std::to_string(i + 1) +
                                      ": non-finite covariate");
            }
        }
        covariates_.row(static_cast<Eigen::Index>(i)) = r.covariates.transpose();
        times_[static_cast<Eigen::Index>(i)] = r.time;
        events_[static_cast<Eigen::Index>(i)] = r.event;
        treatments_[static_cast<Eigen::Index>(i)] = r.treatment;
        n_events_ += static_cast<std::size_t>(r.event);
        n_treated_ += static_cast<std::size_t>(r.treatment);
    }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    std::vector<SubjectRecord> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        out.push_back(records_[i]);
    }
    return Dataset(std::move(out), feature_names_);
}

Dataset Dataset::treated_arm() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n(); ++i) {
        if (records_[i].treatment == 1) idx.push_back(i);
    }
    return subset(idx);
}

Dataset Dataset::control_arm() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n(); ++i) {
        if (records_[i].treatment == 0) idx.push_back(i);
    }
    return subset(idx);
}

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values,
                           double value_before_first)
    : breakpoints_(std::move(breakpoints)),
      values_(std::move(values)),
      value_before_first_(value_before_first) {
    if (breakpoints_.size() != values_.size()) {
        throw ArgumentError("step function: breakpoints and values must have equal length");
    }
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (!std::isfinite(breakpoints_[i])) {
            throw ArgumentError("step function: non-finite breakpoint");
        }
        if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1])) {
            throw ArgumentError("step function: breakpoints must be strictly increasing");
        }
    }
}

StepFunction StepFunction::constant(double value) { return StepFunction({}, {}, value); }

std::ptrdiff_t StepFunction::index_at(double t) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return static_cast<std::ptrdiff_t>(it - breakpoints_.begin()) - 1;
}

double StepFunction::operator()(double t) const { return value_at_index(index_at(t)); }

}  // namespace scs
