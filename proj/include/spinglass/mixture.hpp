#pragma once

// Mixture polynomials nu(x) = sum_p g2_p x^p with nonnegative coefficients
// g2_p (squared amplitudes), and the transforms used throughout: restriction
// to a cross-section, removal of the degree-1 term, and inner-sphere
// rescaling.

#include <map>
#include <string>
#include <vector>

#include "spinglass/common.hpp"

namespace spinglass {

inline constexpr int kMaxMixtureDegree = 32;

class Mixture {
  public:
    // coeffs: degree p >= 1 -> g2_p >= 0; at least one strictly positive.
    explicit Mixture(std::map<int, double> coeffs);

    static Mixture pure(int p, double g2 = 1.0) { return Mixture({{p, g2}}); }

    const std::map<int, double>& coeffs() const { return coeffs_; }
    int p_max() const { return p_max_; }
    bool has_degree(int p) const { return coeffs_.count(p) > 0; }
    double coeff(int p) const;

    // Total variance parameter nu(1).
    double total_variance() const { return eval(1.0, 0); }

    // order-th derivative of nu at x, order <= 3 (analytic differentiation).
    double eval(double x, int order = 0) const;

    // JSON literal {"2": 0.5, "3": 0.5}.
    std::string to_json() const;
    static Mixture from_json(const std::string& text);

  private:
    std::map<int, double> coeffs_;
    int p_max_ = 0;
};

// Cross-section restriction: coefficient at degree k becomes
//   a2_k(q) = (1-q)^k sum_{p>=k} g2_p C(p,k) q^(p-k),   k = 1..p_max,
// satisfying the closed form nu_q(x) = nu(q + (1-q)x) - nu(q).
Mixture restrict_mixture(const Mixture& m, double q);

// Same with the degree-1 coefficient removed (the "starting from k=2" model).
Mixture drop_one_spin(const Mixture& m);

// Inner-sphere rescaling: coefficient at degree p becomes q^p g2_p.
Mixture inner_sphere(const Mixture& m, double q);

// Single restricted coefficient a2_k(q) without building the whole mixture.
double restricted_coefficient(const Mixture& m, double q, int k);

// Exact binomial coefficient in double (exact for p <= 32).
double binomial(int p, int k);

struct GenericityReport {
    std::vector<int> odd_degrees;
    std::vector<int> even_degrees;
    double odd_inverse_sum = 0;   // sum of 1/p over odd degrees present
    double even_inverse_sum = 0;  // sum of 1/p over even degrees present
    bool odd_represented = false;
    bool even_represented = false;
    bool generic = false;  // always false for a finite mixture
    std::string note;
    std::string to_json() const;
};

// Genericity requires both parity inverse-sums to diverge; a finite mixture
// never satisfies that, so the report is informational: which parities are
// present and how far the finite sums got.
GenericityReport genericity_report(const Mixture& m);

}  // namespace spinglass
