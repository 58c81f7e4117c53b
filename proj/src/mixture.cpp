#include "spinglass/mixture.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace spinglass {

Mixture::Mixture(std::map<int, double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw std::invalid_argument("mixture: no coefficients");
    bool any_positive = false;
    for (auto& [p, g2] : coeffs_) {
        if (p < 1) throw std::invalid_argument("mixture: degree must be >= 1");
        if (p > kMaxMixtureDegree)
            throw std::invalid_argument("mixture: degree exceeds cap " +
                                        std::to_string(kMaxMixtureDegree));
        if (g2 < 0) throw std::invalid_argument("mixture: negative coefficient at degree " +
                                                std::to_string(p));
        if (g2 > 0) any_positive = true;
        p_max_ = std::max(p_max_, p);
    }
    if (!any_positive) throw std::invalid_argument("mixture: all coefficients zero");
}

double Mixture::coeff(int p) const {
    auto it = coeffs_.find(p);
    return it == coeffs_.end() ? 0.0 : it->second;
}

double Mixture::eval(double x, int order) const {
    if (order < 0 || order > 3) throw std::invalid_argument("mixture eval: order must be 0..3");
    double s = 0;
    for (auto& [p, g2] : coeffs_) {
        if (p < order) continue;
        double fall = 1;  // p (p-1) ... (p-order+1)
        for (int j = 0; j < order; ++j) fall *= double(p - j);
        s += g2 * fall * std::pow(x, double(p - order));
    }
    return s;
}

std::string Mixture::to_json() const {
    nlohmann::ordered_json j;
    for (auto& [p, g2] : coeffs_) j[std::to_string(p)] = g2;
    return j.dump();
}

Mixture Mixture::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    std::map<int, double> c;
    for (auto it = j.begin(); it != j.end(); ++it) c[std::stoi(it.key())] = it.value().get<double>();
    return Mixture(c);
}

double binomial(int p, int k) {
    if (k < 0 || k > p) return 0;
    k = std::min(k, p - k);
    double r = 1;
    for (int j = 1; j <= k; ++j) r = r * double(p - k + j) / double(j);
    return r;
}

double restricted_coefficient(const Mixture& m, double q, int k) {
    double s = 0;
    for (auto& [p, g2] : m.coeffs())
        if (p >= k) s += g2 * binomial(p, k) * std::pow(q, double(p - k));
    return std::pow(1.0 - q, double(k)) * s;
}

Mixture restrict_mixture(const Mixture& m, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("restrict: q must lie strictly inside (0,1)");
    std::map<int, double> c;
    for (int k = 1; k <= m.p_max(); ++k) {
        double a2 = restricted_coefficient(m, q, k);
        if (a2 > 0) c[k] = a2;
    }
    return Mixture(c);
}

Mixture drop_one_spin(const Mixture& m) {
    std::map<int, double> c = m.coeffs();
    c.erase(1);
    bool any = false;
    for (auto& [p, g2] : c) any = any || g2 > 0;
    if (!any) throw std::invalid_argument("drop_one_spin: resulting mixture is empty");
    return Mixture(c);
}

Mixture inner_sphere(const Mixture& m, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("inner_sphere: q must be in (0,1]");
    std::map<int, double> c;
    for (auto& [p, g2] : m.coeffs())
        if (g2 > 0) c[p] = std::pow(q, double(p)) * g2;
    return Mixture(c);
}

GenericityReport genericity_report(const Mixture& m) {
    GenericityReport r;
    for (auto& [p, g2] : m.coeffs()) {
        if (g2 <= 0) continue;
        if (p % 2 == 1) {
            r.odd_degrees.push_back(p);
            r.odd_inverse_sum += 1.0 / double(p);
        } else {
            r.even_degrees.push_back(p);
            r.even_inverse_sum += 1.0 / double(p);
        }
    }
    r.odd_represented = !r.odd_degrees.empty();
    r.even_represented = !r.even_degrees.empty();
    r.generic = false;
    r.note =
        "finite mixture: both parity sums of 1/p are finite, so the genericity "
        "criterion cannot hold exactly; truncation cap is a report, not a formula";
    return r;
}

std::string GenericityReport::to_json() const {
    nlohmann::ordered_json j;
    j["odd_degrees"] = odd_degrees;
    j["even_degrees"] = even_degrees;
    j["odd_inverse_sum"] = odd_inverse_sum;
    j["even_inverse_sum"] = even_inverse_sum;
    j["odd_represented"] = odd_represented;
    j["even_represented"] = even_represented;
    j["generic"] = generic;
    j["note"] = note;
    return j.dump(2);
}

}  // namespace spinglass
