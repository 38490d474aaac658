#include "adpcm/lpc.hpp"

#include <cmath>
#include <stdexcept>

namespace adpcm {

namespace {
constexpr double kWhiteNoiseCorrection = 1.0001;
}

std::vector<double> autocorrelation(std::span<const double> window, int max_lag) {
    const int n = static_cast<int>(window.size());
    if (n < 1) throw std::invalid_argument("autocorrelation needs a non-empty window");
    if (max_lag < 0 || max_lag > n - 1)
        throw std::invalid_argument("max_lag exceeds window length - 1");
    std::vector<double> r(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (int i = k; i < n; ++i) acc += window[i] * window[i - k];
        r[k] = acc;
    }
    return r;
}

LpcResult levinson_durbin(const std::vector<double>& r_in, int order) {
    if (order < 1) throw std::invalid_argument("order must be positive");
    if (r_in.size() < static_cast<std::size_t>(order) + 1)
        throw std::invalid_argument("autocorrelation too short for order");

    std::vector<double> r = r_in;
    r[0] *= kWhiteNoiseCorrection;
    if (r[0] <= 0.0) throw std::domain_error("r(0) must be positive");

    LpcResult out;
    out.predictor.coeffs.assign(order, 0.0);
    out.reflection.reserve(order);
    std::vector<double>& a = out.predictor.coeffs;
    double err = r[0];

    for (int m = 0; m < order; ++m) {
        double acc = r[m + 1];
        for (int i = 0; i < m; ++i) acc -= a[i] * r[m - i];
        const double k = acc / err;
        out.reflection.push_back(k);

        a[m] = k;
        for (int i = 0; i < m / 2 + (m & 1); ++i) {
            const double tmp = a[i] - k * a[m - 1 - i];
            a[m - 1 - i] -= k * a[i];
            a[i] = tmp;
        }
        err *= 1.0 - k * k;
        if (err < 0.0) err = 0.0;
    }
    out.error_power = err;
    return out;
}

LinearPredictor bandwidth_expand(const LinearPredictor& p, double lambda) {
    LinearPredictor out = p;
    double scale = 1.0;
    for (double& c : out.coeffs) {
        scale *= lambda;
        c *= scale;
    }
    return out;
}

LmsState make_lms(int order, double step_size, double leakage, double epsilon) {
    if (order < 1) throw std::invalid_argument("order must be positive");
    if (step_size <= 0.0) throw std::invalid_argument("step_size must be positive");
    if (leakage <= 0.0 || leakage > 1.0) throw std::invalid_argument("leakage must be in (0, 1]");
    LmsState s;
    s.predictor.coeffs.assign(order, 0.0);
    s.step_size = step_size;
    s.leakage = leakage;
    s.epsilon = epsilon;
    return s;
}

double lms_predict(const LmsState& state, std::span<const double> history) {
    const std::vector<double>& a = state.predictor.coeffs;
    if (history.size() != a.size())
        throw std::invalid_argument("history length must equal predictor order");
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * history[k];
    return acc;
}

LmsState lms_update(const LmsState& state, std::span<const double> history,
                    double quantized_error) {
    const std::size_t order = state.predictor.coeffs.size();
    if (history.size() != order)
        throw std::invalid_argument("history length must equal predictor order");
    double energy = 0.0;
    for (double h : history) energy += h * h;
    const double gain = state.step_size * quantized_error / (state.epsilon + energy);

    LmsState next = state;
    for (std::size_t k = 0; k < order; ++k)
        next.predictor.coeffs[k] = state.leakage * state.predictor.coeffs[k] + gain * history[k];
    return next;
}

} // namespace adpcm
