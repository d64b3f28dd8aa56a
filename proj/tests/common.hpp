#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <gabba/gabba.hpp>

namespace testutil {

using gabba::CMat;
using gabba::CVec;

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20240917);
    return g;
}

template <class Real = double>
CVec<Real> crandn(std::size_t n, std::mt19937_64& g = rng()) {
    std::normal_distribution<double> nd;
    CVec<Real> v(static_cast<Eigen::Index>(n));
    for (auto& x : v) {
        const double re = nd(g);
        x = {Real(re), Real(nd(g))};
    }
    return v;
}

// Classical BPSK error rate with L-branch Rayleigh maximal-ratio combining.
inline double mrc_bpsk_rayleigh(double gbar, int L) {
    const double mu = std::sqrt(gbar / (1 + gbar));
    double sum = 0;
    for (int l = 0; l < L; ++l) {
        double c = 1;
        for (int i = 1; i <= l; ++i) c = c * (L - 1 + i) / i;
        sum += c * std::pow((1 + mu) / 2, l);
    }
    return std::pow((1 - mu) / 2, L) * sum;
}

inline double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Received block with every antenna driven by the same codeword.
template <class Real = double>
CMat<Real> receive(const CMat<Real>& C, const std::vector<CVec<Real>>& Hs) {
    CMat<Real> R(C.rows(), Eigen::Index(Hs.size()));
    for (std::size_t a = 0; a < Hs.size(); ++a) R.col(Eigen::Index(a)) = C * Hs[a];
    return R;
}

}  // namespace testutil
