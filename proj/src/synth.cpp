#include "scs/synth.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "scs/rng.hpp"

namespace scs {

SynthConfig SynthConfig::case_one() {
    SynthConfig c;
    c.latent = LatentSpec::two_group();
    c.hr.erase(-1);
    c.mu.erase(-1);
    c.sigma.erase(-1);
    return c;
}

void SynthConfig::validate() const {
    latent.validate();
    if (n < 1) throw ArgumentError("synth: n must be positive");
    if (noise_dims < 0) throw ArgumentError("synth: noise_dims must be non-negative");
    if (!(gompertz_shape > 0.0)) throw ArgumentError("synth: gompertz_shape must be positive");
    if (!(rate_scale > 0.0)) throw ArgumentError("synth: rate_scale must be positive");
    if (censor_prob < 0.0 || censor_prob > 1.0) {
        throw ArgumentError("synth: censor_prob must lie in [0, 1]");
    }
    for (int k : latent.groups) {
        if (!hr.count(k) || !mu.count(k) || !sigma.count(k)) {
            throw ArgumentError("synth: group " + std::to_string(k) +
                                " missing from hr/mu/sigma maps");
        }
        if (!(hr.at(k) > 0.0)) throw ArgumentError("synth: hazard ratios must be positive");
        if (!(sigma.at(k) > 0.0)) throw ArgumentError("synth: sigmas must be positive");
    }
    if (hr.at(0) != 1.0) throw ArgumentError("synth: hr(0) must be 1");
}

double gompertz_survival(double t, double shape, double rate) {
    return std::exp(-(rate / shape) * (std::exp(shape * t) - 1.0));
}

double gompertz_quantile(double u, double shape, double rate) {
    // Solve S(t) = 1 - u for t; u in [0, 1).
    return std::log(1.0 - shape * std::log1p(-u) / rate) / shape;
}

LabeledDataset generate(const SynthConfig& config) {
    config.validate();
    const std::size_t K = config.latent.K();
    const int d = 2 + config.noise_dims;
    Rng rng(config.seed);

    std::vector<SubjectRecord> records;
    std::vector<int> true_z;
    records.reserve(static_cast<std::size_t>(config.n));
    true_z.reserve(static_cast<std::size_t>(config.n));
    for (int i = 0; i < config.n; ++i) {
        const int a = rng.bernoulli(0.5);
        const int z = config.latent.groups[rng.uniform_int(K)];
        SubjectRecord rec;
        rec.treatment = a;
        rec.covariates.resize(d);
        rec.covariates[0] = rng.normal(config.mu.at(z)[0], config.sigma.at(z));
        rec.covariates[1] = rng.normal(config.mu.at(z)[1], config.sigma.at(z));
        for (int j = 0; j < config.noise_dims; ++j) {
            rec.covariates[2 + j] = rng.uniform(-1.0, 1.0);
        }
        const double rate =
            config.rate_scale * std::pow(config.hr.at(z), static_cast<double>(a));
        double t = gompertz_quantile(rng.uniform01(), config.gompertz_shape, rate);
        if (!(t > 0.0)) t = 1e-12;  // guard against an exact-zero draw
        if (rng.bernoulli(config.censor_prob)) {
            rec.time = t;
            rec.event = 1;
        } else {
            double c = rng.uniform(0.0, t);
            if (!(c > 0.0)) c = t * 0.5;
            rec.time = c;
            rec.event = 0;
        }
        records.push_back(std::move(rec));
        true_z.push_back(z);
    }

    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(d));
    for (int j = 1; j <= d; ++j) {
        names.push_back("X" + std::to_string(j));
    }
    return LabeledDataset{Dataset(std::move(records), std::move(names)), std::move(true_z)};
}

void write_truth_csv(const std::string& path, const std::vector<int>& true_z) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "true_z\n";
    for (int z : true_z) out << z << '\n';
    if (!out) throw IoError("failed while writing '" + path + "'");
}

std::vector<int> load_truth_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || (line != "true_z" && line != "true_z\r")) {
        throw SchemaError("'" + path + "': expected header 'true_z'");
    }
    std::vector<int> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.eof()) break;
        int z = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), z);
        if (ec != std::errc() || ptr != line.data() + line.size()) {
            throw ParseError("row " + std::to_string(row) + ": cannot parse '" + line +
                             "' as a group label");
        }
        out.push_back(z);
    }
    return out;
}

}  // namespace scs
