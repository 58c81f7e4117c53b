#include "spinglass/hamiltonian.hpp"

#include <cmath>

#include "spinglass/rng.hpp"

namespace spinglass {

namespace {

double checked_pow_size(int n, int p, bool& overflow) {
    double s = 1;
    for (int i = 0; i < p; ++i) s *= double(n);
    overflow = s > 9e15;
    return s;
}

}  // namespace

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

double contract_full(const Vec& flat, int degree, const Vec& s) {
    const int n = int(s.size());
    if (degree == 1) return flat.dot(s);
    Vec cur, next;
    cur.noalias() = RowMajorMap(flat.data(), flat.size() / n, n) * s;
    for (int k = 2; k < degree; ++k) {
        next.noalias() = RowMajorMap(cur.data(), cur.size() / n, n) * s;
        cur.swap(next);
    }
    return cur.dot(s);
}

namespace {
// Contract the first index of a row-major flat tensor with s.
void contract_first(const Vec& in, int n, const Vec& s, Vec& out) {
    const Eigen::Index cols = in.size() / n;
    RowMajorMap m(in.data(), n, cols);
    out.noalias() = m.transpose() * s;
}
}  // namespace

Vec contract_gradient(const Vec& flat, int degree, const Vec& s) {
    const int n = int(s.size());
    if (degree == 1) return flat;
    // right[m] = tensor with the last m indices contracted, m = 1..degree-1.
    std::vector<Vec> right(degree);
    right[1].noalias() = RowMajorMap(flat.data(), flat.size() / n, n) * s;
    for (int m = 2; m < degree; ++m)
        right[m].noalias() = RowMajorMap(right[m - 1].data(), right[m - 1].size() / n, n) * s;

    Vec grad = Vec::Zero(n);
    Vec tmp, cur;
    for (int pos = 1; pos <= degree; ++pos) {
        // Indices i1..i_pos survive on the right partial; contract the
        // first pos-1 of them to isolate the derivative slot.
        if (pos < degree)
            cur = right[degree - pos];
        else
            contract_first(flat, n, s, cur);
        int done = pos == degree ? 1 : 0;
        for (int j = done; j < pos - 1; ++j) {
            contract_first(cur, n, s, tmp);
            cur.swap(tmp);
        }
        grad += cur;
    }
    return grad;
}

Disorder::Disorder(Mixture mixture, int dim, std::uint64_t seed, std::size_t budget_bytes)
    : mixture_(std::move(mixture)), dim_(dim), seed_(seed), budget_(budget_bytes) {
    if (dim_ < 2) throw std::invalid_argument("disorder: dim must be >= 2");
    double total_bytes = 0;
    for (auto& [p, g2] : mixture_.coeffs()) {
        if (g2 <= 0) continue;
        bool overflow = false;
        double entries = checked_pow_size(dim_, p, overflow);
        total_bytes += entries * 8.0;
        if (overflow || total_bytes > double(budget_)) {
            throw capacity_error(
                p, "disorder: degree " + std::to_string(p) + " tensor needs " +
                       std::to_string(entries * 8.0 / (1 << 20)) + " MiB at N=" +
                       std::to_string(dim_) + ", exceeding the " +
                       std::to_string(double(budget_) / (1 << 20)) +
                       " MiB budget (desk-scale envelope: N<=128 for p<=3, N<=48 for p=4)");
        }
    }
    tensors_.resize(std::size_t(mixture_.p_max()) + 1);
    once_.resize(tensors_.size());
    for (auto& f : once_) f = std::make_unique<std::once_flag>();
}

const Vec& Disorder::tensor(int p) const {
    if (p < 1 || p > mixture_.p_max() || mixture_.coeff(p) <= 0)
        throw std::invalid_argument("disorder: no tensor at degree " + std::to_string(p));
    std::call_once(*once_[p], [&] {
        std::size_t entries = 1;
        for (int i = 0; i < p; ++i) entries *= std::size_t(dim_);
        auto t = std::make_unique<Vec>(entries);
        NormalStream g(derive_seed(seed_, 0x7e6e5047u, std::uint64_t(p)));
        for (std::size_t i = 0; i < entries; ++i) (*t)(Eigen::Index(i)) = g.next();
        tensors_[p] = std::move(t);
    });
    return *tensors_[p];
}

void Disorder::materialize_all() const {
    for (auto& [p, g2] : mixture_.coeffs())
        if (g2 > 0) tensor(p);
}

double Disorder::energy(const Configuration& s) const {
    if (s.dim() != dim_) throw std::invalid_argument("energy: dimension mismatch");
    double h = 0;
    for (auto& [p, g2] : mixture_.coeffs()) {
        if (g2 <= 0) continue;
        double amp = std::sqrt(g2) * std::pow(double(dim_), -(double(p) - 1.0) / 2.0);
        h += amp * contract_full(tensor(p), p, s.coords);
    }
    return h;
}

Vec Disorder::gradient(const Configuration& s) const {
    if (s.dim() != dim_) throw std::invalid_argument("gradient: dimension mismatch");
    Vec g = Vec::Zero(dim_);
    for (auto& [p, g2] : mixture_.coeffs()) {
        if (g2 <= 0) continue;
        double amp = std::sqrt(g2) * std::pow(double(dim_), -(double(p) - 1.0) / 2.0);
        g += amp * contract_gradient(tensor(p), p, s.coords);
    }
    return g;
}

Disorder sample_disorder(const Mixture& m, int dim, std::uint64_t seed,
                         std::size_t budget_bytes) {
    return Disorder(m, dim, seed, budget_bytes);
}

double theoretical_covariance(const Mixture& m, const Configuration& a, const Configuration& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("covariance: dimension mismatch");
    double n = double(a.dim());
    return n * m.eval(a.coords.dot(b.coords) / n, 0);
}

SectionField::SectionField(double h0, int sub_dim, double q, int n_full,
                           std::vector<Vec> grouped)
    : h0_(h0), sub_dim_(sub_dim), q_(q), n_full_(n_full), grouped_(std::move(grouped)) {
    chart_scale_ = std::sqrt((1.0 - q_) * double(n_full_) / double(sub_dim_));
}

double SectionField::energy_raw(const Vec& y) const {
    if (int(y.size()) != sub_dim_)
        throw std::invalid_argument("section energy: dimension mismatch");
    double h = 0;
    for (std::size_t k = 1; k <= grouped_.size(); ++k) {
        if (grouped_[k - 1].size() == 0) continue;
        h += contract_full(grouped_[k - 1], int(k), y);
    }
    return h;
}

double SectionField::energy_embedded(const Vec& sigma_bar) const {
    return energy_raw(chart_scale_ * sigma_bar);
}

double SectionField::energy_embedded_degree(int k, const Vec& sigma_bar) const {
    if (k < 1 || k > int(grouped_.size()) || grouped_[k - 1].size() == 0) return 0.0;
    Vec y = chart_scale_ * sigma_bar;
    return contract_full(grouped_[k - 1], k, y);
}

Vec SectionField::ambient_point(const Vec& sigma_bar) const {
    Vec full(n_full_);
    full.head(sub_dim_) = chart_scale_ * sigma_bar;
    full(n_full_ - 1) = std::sqrt(double(n_full_) * q_);
    return full;
}

SectionField restrict_to_section(const Disorder& d, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("restrict_to_section: q must be in (0,1)");
    const int n = d.dim();
    const int sub = n - 1;
    const double axis = std::sqrt(double(n) * q);
    const auto& mix = d.mixture();

    std::vector<Vec> grouped(std::size_t(mix.p_max()));
    for (int k = 1; k <= mix.p_max(); ++k) {
        std::size_t entries = 1;
        for (int i = 0; i < k; ++i) entries *= std::size_t(sub);
        grouped[k - 1] = Vec::Zero(Eigen::Index(entries));
    }
    double h0 = 0;

    std::vector<int> digits;
    for (auto& [p, g2] : mix.coeffs()) {
        if (g2 <= 0) continue;
        const Vec& t = d.tensor(p);
        const double amp = std::sqrt(g2) * std::pow(double(n), -(double(p) - 1.0) / 2.0);
        // Precompute amp * axis^(p-k) per k.
        std::vector<double> w(std::size_t(p) + 1);
        for (int k = 0; k <= p; ++k) w[k] = amp * std::pow(axis, double(p - k));
        digits.assign(std::size_t(p), 0);
        const std::size_t total = std::size_t(t.size());
        for (std::size_t idx = 0; idx < total; ++idx) {
            // Bucket = the subsequence of digits != n-1, flattened over [sub]^k.
            int k = 0;
            std::size_t bucket = 0;
            for (int j = 0; j < p; ++j) {
                if (digits[j] != n - 1) {
                    bucket = bucket * std::size_t(sub) + std::size_t(digits[j]);
                    ++k;
                }
            }
            const double v = w[k] * t(Eigen::Index(idx));
            if (k == 0)
                h0 += v;
            else
                grouped[k - 1](Eigen::Index(bucket)) += v;
            // Odometer increment, last digit fastest.
            for (int j = p - 1; j >= 0; --j) {
                if (++digits[j] < n) break;
                digits[j] = 0;
            }
        }
    }
    return SectionField(h0, sub, q, n, std::move(grouped));
}

}  // namespace spinglass
