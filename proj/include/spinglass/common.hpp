#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinglass {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Tensor storage would exceed the configured memory budget.
struct capacity_error : std::runtime_error {
    int degree;
    capacity_error(int p, const std::string& what) : std::runtime_error(what), degree(p) {}
};

// Bad experiment configuration; message names the offending field path.
struct config_error : std::runtime_error {
    std::string field;
    config_error(std::string f, const std::string& what)
        : std::runtime_error(what), field(std::move(f)) {}
};

// Sampler cannot make progress with the current step size.
struct tuning_error : std::runtime_error {
    double suggested_step;
    tuning_error(double eta, const std::string& what)
        : std::runtime_error(what), suggested_step(eta) {}
};

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Mean / standard error of a sample, pairwise-summed so the result does not
// depend on accumulation order beyond ~1e-16.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return pairwise_sum(v.data(), v.size()) / double(v.size());
}

inline double variance_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return pairwise_sum(sq.data(), sq.size()) / double(v.size() - 1);
}

}  // namespace spinglass
