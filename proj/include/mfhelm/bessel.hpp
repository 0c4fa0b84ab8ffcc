#pragma once

#include <cmath>
#include <vector>

#include "mfhelm/common.hpp"

namespace mfhelm {

namespace detail {

/// Ascending power series sum_m (-1)^m (z/2)^{2m+n} / (m! (m+n)!).
/// Accurate near machine precision for |z| <= 12 (worst-case term growth
/// there stays below ~5e3, so cancellation costs < 1e-12 absolute).
inline double bessel_j_series(int n, double z)
{
    double half = 0.5 * z;
    double term = 1.0;
    for (int i = 1; i <= n; ++i) term *= half / i;  // (z/2)^n / n!
    double sum = term;
    double z2 = -half * half;
    for (int m = 1; m <= 60; ++m) {
        term *= z2 / (static_cast<double>(m) * (m + n));
        sum += term;
        if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
    }
    return sum;
}

/// Miller's downward recurrence with the normalization
/// J0 + 2*sum_{m>=1} J_{2m} = 1. Stable for all z; used for z > 12.
inline void bessel_j01_recurrence(double z, double& j0, double& j1)
{
    int nstart = static_cast<int>(z) + 52;
    if (nstart % 2) ++nstart;
    double jnext = 0.0, jcur = 1e-30;  // unnormalized J_{nstart+1}, J_{nstart}
    double norm = 0.0;
    j0 = j1 = 0.0;
    for (int n = nstart; n >= 1; --n) {
        double jprev = (2.0 * n / z) * jcur - jnext;  // J_{n-1}
        jnext = jcur;
        jcur = jprev;
        if ((n - 1) % 2 == 0) norm += (n == 1) ? jcur : 2.0 * jcur;
        if (n - 1 == 1) j1 = jcur;
        if (n - 1 == 0) j0 = jcur;
        if (std::abs(jcur) > 1e250) {  // rescale to avoid overflow
            jnext /= 1e250;
            jcur /= 1e250;
            norm /= 1e250;
            j0 /= 1e250;
            j1 /= 1e250;
        }
    }
    j0 /= norm;
    j1 /= norm;
}

}  // namespace detail

/// Bessel function of the first kind, order 0. In-house: ascending series for
/// |z| <= 12, downward recurrence beyond.
inline double bessel_j0(double z)
{
    z = std::abs(z);
    if (z <= 12.0) return detail::bessel_j_series(0, z);
    double j0, j1;
    detail::bessel_j01_recurrence(z, j0, j1);
    return j0;
}

/// Bessel function of the first kind, order 1 (odd: J1(-z) = -J1(z)).
inline double bessel_j1(double z)
{
    double s = (z < 0.0) ? -1.0 : 1.0;
    z = std::abs(z);
    if (z <= 12.0) return s * detail::bessel_j_series(1, z);
    double j0, j1;
    detail::bessel_j01_recurrence(z, j0, j1);
    return s * j1;
}

}  // namespace mfhelm
