// expm.hpp: dense matrix exponential by scaling and squaring with a [13/13] Pade approximant
//
// Higham, "The scaling and squaring method for the matrix exponential
// revisited", SIAM J. Matrix Anal. Appl. 26 (2005).

#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace lindblad3 {

template <int N>
Eigen::Matrix<double, N, N> expm(const Eigen::Matrix<double, N, N>& A) {
    using Mat = Eigen::Matrix<double, N, N>;
    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    if (!A.allFinite()) throw std::range_error("expm: matrix has non-finite entries");
    const Eigen::Index n = A.rows();
    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 == 0.0) return Mat::Identity(n, n);

    int s = 0;
    if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    // 2^1000 squarings cannot produce a representable result.
    if (s > 1000) throw std::range_error("expm: norm too large");
    const Mat As = A / std::ldexp(1.0, s);

    const Mat I = Mat::Identity(n, n);
    const Mat A2 = As * As;
    const Mat A4 = A2 * A2;
    const Mat A6 = A4 * A2;
    const Mat U = As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    const Mat V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

    Mat R = (V - U).partialPivLu().solve(V + U);
    for (int i = 0; i < s; ++i) {
        R = R * R;
        if (!R.allFinite()) throw std::range_error("expm: result overflowed");
    }
    if (!R.allFinite()) throw std::range_error("expm: result overflowed");
    return R;
}

} // namespace lindblad3
