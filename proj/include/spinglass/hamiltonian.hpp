#pragma once

// Sampled Gaussian Hamiltonians at desk scale.  A Disorder holds, per degree
// p, the full array of i.i.d. standard Gaussian coefficients (N^p entries,
// all ordered index tuples, no symmetrization), materialized lazily and
// regenerable bit-exactly from (mixture, dim, seed, generator id).
//
//   H(s) = sum_p g_p N^{-(p-1)/2} sum_{i1..ip} J^(p)_{i1..ip} s_{i1}...s_{ip}

#include <memory>
#include <mutex>
#include <optional>

#include "spinglass/common.hpp"
#include "spinglass/mixture.hpp"

namespace spinglass {

struct Configuration {
    Vec coords;
    double radius_sq = 0;  // |s|^2 / N

    Configuration() = default;
    explicit Configuration(Vec c) : coords(std::move(c)) {
        radius_sq = coords.squaredNorm() / double(coords.size());
        if (!(radius_sq > 0 && radius_sq <= 1.0 + 1e-12))
            throw std::invalid_argument("configuration: radius_sq outside (0,1]");
    }
    Eigen::Index dim() const { return coords.size(); }
};

inline constexpr std::size_t kDefaultTensorBudgetBytes = std::size_t(2) << 30;  // 2 GiB

class Disorder {
  public:
    Disorder(Mixture mixture, int dim, std::uint64_t seed,
             std::size_t budget_bytes = kDefaultTensorBudgetBytes);

    const Mixture& mixture() const { return mixture_; }
    int dim() const { return dim_; }
    std::uint64_t seed() const { return seed_; }

    // Flat coefficient tensor for degree p, row-major over ordered tuples.
    // First call materializes; synchronized.
    const Vec& tensor(int p) const;

    double energy(const Configuration& s) const;
    Vec gradient(const Configuration& s) const;

    void materialize_all() const;

  private:
    Mixture mixture_;
    int dim_;
    std::uint64_t seed_;
    std::size_t budget_;
    mutable std::vector<std::unique_ptr<Vec>> tensors_;  // index by degree
    mutable std::vector<std::unique_ptr<std::once_flag>> once_;
};

Disorder sample_disorder(const Mixture& m, int dim, std::uint64_t seed,
                         std::size_t budget_bytes = kDefaultTensorBudgetBytes);

// Covariance the law of H prescribes for a fixed pair: N nu(<s,s'>/N).
double theoretical_covariance(const Mixture& m, const Configuration& a, const Configuration& b);

// Exact regrouping of the coefficient sum around the canonical axis point
// s0 = (0,...,0,sqrt(Nq)): for any point with last coordinate sqrt(Nq),
//   H(y, sqrt(Nq)) = h0 + sum_k <K^(k), y^{(x)k}>       (y in R^{N-1})
// holds to rounding error.  In law, the field on the embedded cross-section
// sphere equals sqrt(N/(N-1)) times the Hamiltonian of restrict_mixture(m,q)
// in dimension N-1.
class SectionField {
  public:
    SectionField(double h0, int sub_dim, double q, int n_full,
                 std::vector<Vec> grouped);

    double h0() const { return h0_; }
    int dim() const { return sub_dim_; }

    // Polynomial in the raw first N-1 coordinates of the ambient space.
    double energy_raw(const Vec& y) const;

    // Same field parameterized by a point on the sphere of radius
    // sqrt(N-1) in dimension N-1 (the isometric cross-section chart).
    double energy_embedded(const Vec& sigma_bar) const;

    // Ambient point (y, sqrt(Nq)) for a chart point.
    Vec ambient_point(const Vec& sigma_bar) const;

    double chart_scale() const { return chart_scale_; }

    // Degree-k contribution alone, chart parameterization.
    double energy_embedded_degree(int k, const Vec& sigma_bar) const;
    int max_degree() const { return int(grouped_.size()); }

  private:
    double h0_;
    int sub_dim_;
    double q_;
    int n_full_;
    double chart_scale_;
    std::vector<Vec> grouped_;  // grouped_[k-1]: degree-k tensor over [N-1]^k
};

SectionField restrict_to_section(const Disorder& d, double q);

// Contraction helpers shared with tests: value and gradient of
// sum_{tuples} T_{i1..ip} s_{i1}...s_{ip} for a flat row-major tensor.
double contract_full(const Vec& flat, int degree, const Vec& s);
Vec contract_gradient(const Vec& flat, int degree, const Vec& s);

}  // namespace spinglass
