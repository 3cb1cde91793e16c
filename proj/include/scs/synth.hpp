// Synthetic benchmark with known latent phenogroups. Subjects draw a latent
// group uniformly; the group places a Gaussian cluster in the first two
// covariates and scales the treated hazard by HR(k). Event times follow a
// Gompertz hazard rate_scale * HR(k)^a * exp(shape * t); censoring replaces
// the event time with a uniform draw on (0, T).
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scs/model.hpp"
#include "scs/types.hpp"

namespace scs {

struct SynthConfig {
    int n = 10000;
    LatentSpec latent = LatentSpec::three_group();
    std::map<int, double> hr = {{0, 1.0}, {+1, 0.5}, {-1, 2.0}};
    std::map<int, std::array<double, 2>> mu = {
        {0, {0.0, 2.0}}, {+1, {-2.0, 0.0}}, {-1, {2.0, 0.0}}};
    std::map<int, double> sigma = {{0, 0.7}, {+1, 0.7}, {-1, 0.7}};
    double gompertz_shape = 1.0;
    double rate_scale = 0.25;
    double censor_prob = 0.8;  // probability that the true event time is observed
    int noise_dims = 4;
    std::uint64_t seed = 1;

    // Two-group variant of the defaults (drops the harmed group).
    static SynthConfig case_one();

    void validate() const;
};

struct LabeledDataset {
    Dataset data;
    std::vector<int> true_z;
};

LabeledDataset generate(const SynthConfig& config);

// Closed-form Gompertz survival S(t) = exp(-(rate/shape) (e^{shape t} - 1))
// and the matching inverse-CDF sampler, exposed for distribution checks.
double gompertz_survival(double t, double shape, double rate);
double gompertz_quantile(double u, double shape, double rate);

void write_truth_csv(const std::string& path, const std::vector<int>& true_z);
std::vector<int> load_truth_csv(const std::string& path);

}  // namespace scs
