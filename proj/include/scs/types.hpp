// Core domain types: right-censored subject records, immutable datasets and
// right-continuous step functions (cumulative hazards, survival curves).
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scs/errors.hpp"

namespace scs {

// One right-censored observation: covariates x, follow-up time u, event
// indicator (1 = event observed, 0 = censored) and treatment arm.
struct SubjectRecord {
    Eigen::VectorXd covariates;
    double time = 0.0;
    int event = 0;
    int treatment = 0;
};

// Immutable after construction; safe to share read-only across threads.
// The covariate matrix is materialized once so estimators can work in
// vectorized form.
class Dataset {
   public:
    Dataset() = default;
    Dataset(std::vector<SubjectRecord> records, std::vector<std::string> feature_names);

    std::size_t n() const { return records_.size(); }
    std::size_t dim() const { return feature_names_.size(); }
    bool empty() const { return records_.empty(); }

    const std::vector<SubjectRecord>& records() const { return records_; }
    const SubjectRecord& record(std::size_t i) const { return records_[i]; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    // n x d covariate matrix, one row per record.
    const Eigen::MatrixXd& covariates() const { return covariates_; }
    const Eigen::VectorXd& times() const { return times_; }
    const Eigen::VectorXi& events() const { return events_; }
    const Eigen::VectorXi& treatments() const { return treatments_; }

    std::size_t n_events() const { return n_events_; }
    std::size_t n_treated() const { return n_treated_; }

    // New dataset holding the given rows (in the given order).
    Dataset subset(const std::vector<std::size_t>& indices) const;
    Dataset treated_arm() const;
    Dataset control_arm() const;

   private:
    std::vector<SubjectRecord> records_;
    std::vector<std::string> feature_names_;
    Eigen::MatrixXd covariates_;
    Eigen::VectorXd times_;
    Eigen::VectorXi events_;
    Eigen::VectorXi treatments_;
    std::size_t n_events_ = 0;
    std::size_t n_treated_ = 0;
};

// Right-continuous piecewise-constant function of time. Evaluation at t
// returns the value at the last breakpoint <= t, or value_before_first when
// t precedes every breakpoint; the last value is carried forward beyond the
// final breakpoint.
class StepFunction {
   public:
    StepFunction() = default;
    StepFunction(std::vector<double> breakpoints, std::vector<double> values,
                 double value_before_first);

    static StepFunction constant(double value);

    double operator()(double t) const;

    // Index of the last breakpoint <= t, or -1.
    std::ptrdiff_t index_at(double t) const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }
    double value_before_first() const { return value_before_first_; }
    double value_at_index(std::ptrdiff_t idx) const {
        return idx < 0 ? value_before_first_ : values_[static_cast<std::size_t>(idx)];
    }
    std::size_t size() const { return breakpoints_.size(); }

   private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
    double value_before_first_ = 0.0;
};

}  // namespace scs
