#include "scs/split.hpp"

#include <array>
#include <cmath>

#include "scs/rng.hpp"

namespace scs {

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double fraction,
                                             std::uint64_t seed) {
    if (!(fraction > 0.0) || !(fraction < 1.0)) {
        throw ArgumentError("split fraction must lie in (0, 1)");
    }
    // Strata in fixed order: (event, treatment) = (1,1), (1,0), (0,1), (0,0).
    std::array<std::vector<std::size_t>, 4> strata;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const SubjectRecord& r = ds.record(i);
        const std::size_t s = (r.event == 1 ? 0 : 2) + (r.treatment == 1 ? 0 : 1);
        strata[s].push_back(i);
    }
    Rng rng(seed);
    std::vector<std::size_t> first, second;
    double running = 0.0;
    long long taken = 0;
    for (auto& stratum : strata) {
        // Fisher-Yates shuffle for a seeded, deterministic permutation.
        for (std::size_t i = stratum.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
            std::swap(stratum[i - 1], stratum[j]);
        }
        running += fraction * static_cast<double>(stratum.size());
        const long long upto = static_cast<long long>(std::floor(running + 0.5));
        const std::size_t count = static_cast<std::size_t>(upto - taken);
        taken = upto;
        for (std::size_t i = 0; i < stratum.size(); ++i) {
            (i < count ? first : second).push_back(stratum[i]);
        }
    }
    return {ds.subset(first), ds.subset(second)};
}

Standardizer::Standardizer(Eigen::VectorXd mean, Eigen::VectorXd scale,
                           std::vector<std::string> feature_names)
    : mean_(std::move(mean)), scale_(std::move(scale)), feature_names_(std::move(feature_names)) {
    if (mean_.size() != scale_.size() ||
        static_cast<std::size_t>(mean_.size()) != feature_names_.size()) {
        throw ArgumentError("standardizer: mismatched dimensions");
    }
    for (Eigen::Index j = 0; j < scale_.size(); ++j) {
        if (!(scale_[j] > 0.0)) {
            throw ArgumentError("standardizer: scale entries must be positive");
        }
    }
}

Standardizer Standardizer::fit(const Dataset& ds) {
    if (ds.empty()) {
        throw ArgumentError("standardizer: empty dataset");
    }
    const Eigen::MatrixXd& X = ds.covariates();
    const double n = static_cast<double>(ds.n());
    Eigen::VectorXd mean = X.colwise().mean();
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(X.cols());
    if (ds.n() > 1) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double ss = (X.col(j).array() - mean[j]).square().sum();
            const double sd = std::sqrt(ss / (n - 1.0));
            if (sd > 0.0) scale[j] = sd;
        }
    }
    return Standardizer(std::move(mean), std::move(scale), ds.feature_names());
}

Dataset Standardizer::apply(const Dataset& ds) const {
    if (ds.dim() != feature_names_.size()) {
        throw ConfigError("standardizer: dataset has " + std::to_string(ds.dim()) +
                          " features, expected " + std::to_string(feature_names_.size()));
    }
    std::vector<SubjectRecord> out = ds.records();
    for (SubjectRecord& r : out) {
        r.covariates = (r.covariates - mean_).cwiseQuotient(scale_);
    }
    return Dataset(std::move(out), ds.feature_names());
}

Standardizer Standardizer::identity(const std::vector<std::string>& feature_names) {
    const Eigen::Index d = static_cast<Eigen::Index>(feature_names.size());
    return Standardizer(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d), feature_names);
}

}  // namespace scs
