#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "ftoc/model.hpp"

namespace ftoc {

struct SingularSystem : std::runtime_error {
    std::size_t step;
    explicit SingularSystem(std::size_t k)
        : std::runtime_error("singular 5x5 system at step " + std::to_string(k)),
          step(k) {}
};

// Dense 5x5 solve with partial pivoting. Throws SingularSystem when a pivot
// falls below 1e-14 of the matrix scale.
inline Vec5 solve5(Mat5 A, Vec5 b, std::size_t step = 0) {
    double scale = 0.0;
    for (const auto& row : A)
        for (double v : row) scale = std::max(scale, std::abs(v));
    const double tiny = 1e-14 * std::max(scale, 1e-300);
    for (int col = 0; col < 5; ++col) {
        int piv = col;
        for (int r = col + 1; r < 5; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < tiny) throw SingularSystem(step);
        if (piv != col) {
            std::swap(A[piv], A[col]);
            std::swap(b[piv], b[col]);
        }
        for (int r = col + 1; r < 5; ++r) {
            const double f = A[r][col] / A[col][col];
            if (f == 0.0) continue;
            for (int c = col; c < 5; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec5 x{};
    for (int r = 4; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < 5; ++c) acc -= A[r][c] * x[c];
        x[r] = acc / A[r][r];
    }
    return x;
}

}  // namespace ftoc
