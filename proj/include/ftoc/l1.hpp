#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ftoc {

// Discrete Caputo derivative kernels on a uniform grid (L1 method).
//
// Left operator at t_k:   b0 * sum_{j=1..k} (phi_j - phi_{j-1}) * w[k-j]
// with b0 = -dt^(-alpha)/Gamma(2-alpha) and w[m] = m^(1-alpha) - (m+1)^(1-alpha).
// The right operator is the time reflection of the left one.
struct L1Stencil {
    double alpha;
    double dt;
    double b0;
    std::vector<double> weights;  // w[m], lag m = 0..n; w[0] = -1, all negative

    // Coefficient multiplying the unknown sample in an implicit step; always > 0.
    double diag() const { return -b0; }
};

inline L1Stencil build_stencil(double alpha, double dt, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("L1 stencil: alpha must lie in (0,1)");
    if (!(dt > 0.0))
        throw std::invalid_argument("L1 stencil: dt must be positive");
    if (n < 1)
        throw std::invalid_argument("L1 stencil: need at least one step");
    L1Stencil s;
    s.alpha = alpha;
    s.dt = dt;
    s.b0 = -std::pow(dt, -alpha) / std::tgamma(2.0 - alpha);
    s.weights.resize(n + 1);
    const double e = 1.0 - alpha;
    double prev = 0.0;
    for (std::size_t m = 0; m <= n; ++m) {
        const double next = std::pow(double(m + 1), e);
        s.weights[m] = prev - next;
        prev = next;
    }
    return s;
}

// Left Caputo derivative of the sampled sequence at step k (k >= 1).
inline double caputo_left(std::span<const double> samples, const L1Stencil& s,
                          std::size_t k) {
    if (k < 1) throw std::invalid_argument("caputo_left: k = 0 has no history");
    if (samples.size() < k + 1 || s.weights.size() < k)
        throw std::invalid_argument("caputo_left: not enough samples or weights");
    double acc = 0.0;
    for (std::size_t j = 1; j <= k; ++j)
        acc += (samples[j] - samples[j - 1]) * s.weights[k - j];
    return s.b0 * acc;
}

struct L1Split {
    double diag;     // coefficient on the unknown sample
    double history;  // fully known remainder: operator = diag*unknown + history
};

// Splits the left operator at step k into the coefficient on phi_k and the
// known history, for assembling implicit systems.
inline L1Split caputo_left_split(std::span<const double> samples,
                                 const L1Stencil& s, std::size_t k) {
    if (k < 1) throw std::invalid_argument("caputo_left_split: k = 0 has no history");
    if (samples.size() < k || s.weights.size() < k)
        throw std::invalid_argument("caputo_left_split: not enough samples or weights");
    double hist = -samples[0] * s.weights[k - 1];
    for (std::size_t j = 1; j < k; ++j)
        hist += samples[j] * (s.weights[k - j] - s.weights[k - j - 1]);
    return {-s.b0, s.b0 * hist};
}

// Right Caputo derivative at t_k from the future samples phi_k..phi_N,
// obtained by reflecting the left L1 operator in time. Valid for k <= N-1.
inline double caputo_right(std::span<const double> samples, const L1Stencil& s,
                           std::size_t k) {
    const std::size_t N = samples.size() - 1;
    if (k >= N)
        throw std::invalid_argument("caputo_right: k = N is fixed by the terminal value");
    double acc = 0.0;
    for (std::size_t j = k + 1; j <= N; ++j)
        acc -= (samples[j] - samples[j - 1]) * s.weights[j - k - 1];
    return s.b0 * acc;  // = -b0 * sum (phi_j - phi_{j-1}) * w[j-k-1], b0 < 0
}

// Splits the right operator at t_k into the coefficient on the unknown phi_k
// and the known future history (phi_{k+1}..phi_N), mirroring caputo_left_split.
inline L1Split caputo_right_split(std::span<const double> samples,
                                  const L1Stencil& s, std::size_t k) {
    const std::size_t N = samples.size() - 1;
    if (k >= N)
        throw std::invalid_argument(
            "caputo_right_split: k = N is fixed by the terminal value");
    const double c0 = -s.b0;
    double hist = samples[N] * s.weights[N - k - 1];
    for (std::size_t j = k + 1; j < N; ++j)
        hist += samples[j] * (s.weights[j - k - 1] - s.weights[j - k]);
    return {c0, c0 * hist};
}

}  // namespace ftoc
