#pragma once

#include <span>
#include <vector>

namespace adpcm {

/// Order-P short-term predictor. Prediction convention:
///   x_hat(n) = sum_{k=1..P} coeffs[k-1] * x(n-k)
struct LinearPredictor {
    std::vector<double> coeffs;

    int order() const { return static_cast<int>(coeffs.size()); }
};

// Biased autocorrelation r(k) = sum_{n=k}^{N-1} w(n) w(n-k), k = 0..max_lag.
std::vector<double> autocorrelation(std::span<const double> window, int max_lag);

struct LpcResult {
    LinearPredictor predictor;
    double error_power = 0.0;
    std::vector<double> reflection; // one per recursion order
};

// Solves the Toeplitz normal equations order-recursively. r must have at
// least order+1 entries and r[0] > 0; a white-noise correction of 1.0001 on
// r(0) is applied first so near-silent frames stay positive definite.
LpcResult levinson_durbin(const std::vector<double>& r, int order);

// coeffs[k-1] *= lambda^k. Scales every zero of the prediction-error filter
// radially by lambda.
LinearPredictor bandwidth_expand(const LinearPredictor& p, double lambda);

/// Normalized-LMS state for sample-adaptive backward prediction.
struct LmsState {
    LinearPredictor predictor;
    double step_size = 0.005; // mu
    double leakage = 0.9999;
    double epsilon = 1e-6;
};

LmsState make_lms(int order, double step_size = 0.005, double leakage = 0.9999,
                  double epsilon = 1e-6);

// history holds the last `order` reconstructed samples, newest first.
double lms_predict(const LmsState& state, std::span<const double> history);

// a_k <- leakage*a_k + mu * quantized_error * history[k-1] / (eps + |history|^2).
// Uses only decoder-available quantities, never the unquantized error.
LmsState lms_update(const LmsState& state, std::span<const double> history,
                    double quantized_error);

} // namespace adpcm
