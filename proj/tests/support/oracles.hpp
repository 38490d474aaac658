#pragma once

// Independent reference implementations used only to check the library:
// a dense Toeplitz solver for Levinson-Durbin, synthetic AR sources with
// known coefficients, and finite-difference gradients for the MLP. None of
// these call the code paths they verify.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "adpcm/mlp.hpp"
#include "adpcm/rng.hpp"

namespace testsupport {

// Gaussian-elimination solve of the order-P normal equations R a = r[1..P]
// with the same 1.0001 white-noise correction on r(0) the library applies.
inline std::vector<double> solve_normal_equations(std::vector<double> r, int order) {
    if (static_cast<int>(r.size()) < order + 1) throw std::invalid_argument("r too short");
    r[0] *= 1.0001;
    const int n = order;
    std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m[i][j] = r[static_cast<std::size_t>(std::abs(i - j))];
        m[i][n] = r[static_cast<std::size_t>(i) + 1];
    }
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
        std::swap(m[col], m[pivot]);
        if (m[col][col] == 0.0) throw std::runtime_error("singular normal equations");
        for (int row = 0; row < n; ++row) {
            if (row == col) continue;
            const double f = m[row][col] / m[col][col];
            for (int k = col; k <= n; ++k) m[row][k] -= f * m[col][k];
        }
    }
    std::vector<double> a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = m[i][n] / m[i][i];
    return a;
}

// Direct-form coefficients from reflection coefficients (all |k| < 1 gives a
// stable predictor), using the step-up recursion.
inline std::vector<double> ar_from_reflections(std::span<const double> ks) {
    std::vector<double> a(ks.size(), 0.0);
    for (std::size_t m = 0; m < ks.size(); ++m) {
        const double k = ks[m];
        std::vector<double> prev(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(m));
        a[m] = k;
        for (std::size_t i = 0; i < m; ++i) a[i] = prev[i] - k * prev[m - 1 - i];
    }
    return a;
}

// x(n) = sum a_k x(n-k) + noise_scale * u(n), u uniform in [-1, 1).
inline std::vector<double> generate_ar(std::span<const double> a, std::size_t count,
                                       std::uint64_t seed, double noise_scale = 0.02) {
    adpcm::SplitMix64 rng(seed);
    std::vector<double> x(count, 0.0);
    for (std::size_t n = 0; n < count; ++n) {
        double v = noise_scale * rng.next_symmetric();
        for (std::size_t k = 0; k < a.size() && k < n; ++k) v += a[k] * x[n - 1 - k];
        x[n] = v;
    }
    return x;
}

// Random stable AR coefficient set via bounded reflection coefficients.
inline std::vector<double> random_stable_ar(int order, std::uint64_t seed,
                                            double max_reflection = 0.7) {
    adpcm::SplitMix64 rng(seed);
    std::vector<double> ks(static_cast<std::size_t>(order));
    for (double& k : ks) k = max_reflection * rng.next_symmetric();
    return ar_from_reflections(ks);
}

inline std::vector<double> flatten_params(const adpcm::MlpPredictor& net) {
    std::vector<double> flat;
    for (const adpcm::ParamGroup& g : adpcm::split_groups(net))
        flat.insert(flat.end(), g.values.begin(), g.values.end());
    return flat;
}

inline adpcm::MlpPredictor unflatten_params(const std::vector<double>& flat) {
    std::array<adpcm::ParamGroup, 4> groups;
    std::size_t pos = 0;
    for (std::size_t g = 0; g < 4; ++g) {
        groups[g].kind = static_cast<adpcm::ParamGroupKind>(g);
        groups[g].values.assign(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                                flat.begin() + static_cast<std::ptrdiff_t>(pos + adpcm::kGroupSizes[g]));
        pos += adpcm::kGroupSizes[g];
    }
    return adpcm::merge_groups(groups);
}

// Central finite differences of 0.5*(forward - target)^2 per parameter.
inline std::vector<double> finite_difference_gradient(const adpcm::MlpPredictor& net,
                                                      std::span<const double> history,
                                                      double target, double h = 1e-6) {
    const std::vector<double> base = flatten_params(net);
    std::vector<double> grad(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        std::vector<double> p = base;
        p[i] = base[i] + h;
        const double up = adpcm::mlp_forward(unflatten_params(p), history) - target;
        p[i] = base[i] - h;
        const double dn = adpcm::mlp_forward(unflatten_params(p), history) - target;
        grad[i] = (0.5 * up * up - 0.5 * dn * dn) / (2.0 * h);
    }
    return grad;
}

} // namespace testsupport
