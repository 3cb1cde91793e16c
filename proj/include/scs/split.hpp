// Stratified train/validation splitting and covariate standardization.
#pragma once

#include <utility>

#include "scs/types.hpp"

namespace scs {

// Partitions the dataset into two pieces. Within each (event x treatment)
// stratum the first piece receives a rounded share of `fraction`, with
// cascade rounding across strata so the overall allocation tracks the
// requested fraction (a 2-record dataset split at 0.5 yields one record per
// side). Deterministic given the seed; no record is duplicated or dropped.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double fraction,
                                             std::uint64_t seed);

// Per-feature affine transform to zero mean / unit variance. Statistics are
// computed on the training split and applied unchanged to validation data.
// Constant features are left unscaled.
class Standardizer {
   public:
    Standardizer() = default;
    Standardizer(Eigen::VectorXd mean, Eigen::VectorXd scale,
                 std::vector<std::string> feature_names);

    static Standardizer fit(const Dataset& ds);

    Dataset apply(const Dataset& ds) const;

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::VectorXd& scale() const { return scale_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    // Identity transform of the given dimension.
    static Standardizer identity(const std::vector<std::string>& feature_names);

   private:
    Eigen::VectorXd mean_;
    Eigen::VectorXd scale_;
    std::vector<std::string> feature_names_;
};

}  // namespace scs
