#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "fading.hpp"
#include "modem.hpp"

namespace gabba {

struct QuadratureConfig {
    enum class Rule { trapezoid, corrected_trapezoid };
    int points = 5000;
    // Trapezoid plus the first Euler-Maclaurin end term, both on the same uniform grid.
    Rule rule = Rule::corrected_trapezoid;
};

struct BerParams {
    double rho = 1.0;
    double eta = 1.0;
    unsigned n_r = 1;
    std::vector<BranchStat> branches;  // one per transmit antenna
    bool nakagami_approx = false;
};

inline double mgf(const BranchStat& b, double gamma_bar, double s, bool nakagami_approx = false) {
    if (s > 0) throw DomainError("mgf: argument must be <= 0");
    const double x = s * gamma_bar;
    if (nakagami_approx || b.family == Fading::Nakagami) return std::pow(1 - x / b.m, -b.m);
    switch (b.family) {
        case Fading::Rayleigh: return 1 / (1 - x);
        case Fading::Hoyt: {
            const double q = m_to_hoyt_q(b.m);
            const double t = 2 * x * q / (1 + q * q);
            return 1 / std::sqrt(1 - 2 * x + t * t);
        }
        case Fading::Rice: {
            const double k = m_to_rice_k(b.m);
            return (1 + k) / (1 + k - x) * std::exp(k * x / (1 + k - x));
        }
        default: break;
    }
    return 1 / (1 - x);
}

// Signed (1/pi) * integral over [0, pi(1-delta)] of prod_n mgf_n(-g/(rho sin^2))^(n_r eta).
inline double I_general(double delta, double g, const BerParams& p, double N0, const QuadratureConfig& q = {}) {
    if (q.points < 100) throw DomainError("quadrature needs at least 100 points");
    if (!(g > 0)) throw DomainError("I_general: g must be positive");
    if (p.branches.empty()) throw DomainError("I_general: no branches");
    const int P = q.points;
    const double a = 1e-50, b = std::numbers::pi * (1 - delta);
    const double h = (b - a) / (P - 1);
    if (h == 0) return 0;
    const double expo = p.n_r * p.eta;
    std::vector<double> f(static_cast<std::size_t>(P));
    for (int i = 0; i < P; ++i) {
        const double th = (i == P - 1) ? b : a + i * h;
        const double sn = std::sin(th);
        const double s = -g / (p.rho * sn * sn);
        double v = 1;
        for (const auto& br : p.branches) v *= std::pow(mgf(br, br.omega / N0, s, p.nakagami_approx), expo);
        f[std::size_t(i)] = std::isfinite(v) ? v : 0.0;
    }
    double t = 0;
    for (int i = 0; i < P; ++i) t += f[std::size_t(i)];
    t -= 0.5 * (f.front() + f.back());
    t *= h;
    if (q.rule == QuadratureConfig::Rule::corrected_trapezoid) {
        const std::size_t n = f.size() - 1;
        const double fa = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
        const double fb = (3 * f[n] - 4 * f[n - 1] + f[n - 2]) / (2 * h);
        t -= h * h / 12 * (fb - fa);
    }
    return t / std::numbers::pi;
}

inline double esno_to_N0(double esno_db) { return std::pow(10.0, -esno_db / 10); }

inline double psk_ber(unsigned M, const BerParams& p, double esno_db, const QuadratureConfig& q = {}) {
    const auto d = psk_distance_spectrum(M);
    const double N0 = esno_to_N0(esno_db);
    const int bits = ilog2(M);
    auto I = [&](double delta) {
        const double sn = std::sin(std::numbers::pi * delta);
        const double g = sn * sn;
        return g > 0 ? I_general(delta, g, p, N0, q) : 0.0;
    };
    double acc = 0;
    for (unsigned k = 1; k < M; ++k) {
        const double dm = (2.0 * k - 1) / M, dp = (2.0 * k + 1) / M;
        acc += d[k - 1] * (I(dm) - I(dp));
    }
    return acc / (2.0 * bits);
}

// Signed weight of the i-th Q-term in the k-th bit's error probability (1-based k).
inline double qam_coefficient(unsigned M, unsigned k, unsigned i) {
    const double sq = std::sqrt(double(M));
    const double t = double(i) * std::pow(2.0, double(k) - 1) / sq;
    const double sign = (static_cast<long>(std::floor(t)) % 2) ? -1.0 : 1.0;
    return sign * (std::pow(2.0, double(k) - 1) - std::floor(t + 0.5));
}

inline double qam_ber(unsigned M, const BerParams& p, double esno_db, const QuadratureConfig& q = {}) {
    const ModulationSpec mod(ModFamily::QAM, M);
    const double N0 = esno_to_N0(esno_db);
    const unsigned sq = 1u << (mod.bits / 2);
    std::vector<double> Ii(sq, std::nan(""));
    double acc = 0;
    for (unsigned k = 1; k <= mod.bits / 2; ++k) {
        const unsigned imax = unsigned((1.0 - std::pow(2.0, -double(k))) * sq) - 1;
        for (unsigned i = 0; i <= imax; ++i) {
            if (std::isnan(Ii[i])) {
                const double g = 3.0 * (2.0 * i + 1) * (2.0 * i + 1) / (2.0 * (M - 1));
                Ii[i] = I_general(0.5, g, p, N0, q);
            }
            acc += qam_coefficient(M, k, i) * Ii[i];
        }
    }
    return 4 * acc / (sq * double(mod.bits));
}

inline double ber(const ModulationSpec& m, const BerParams& p, double esno_db, const QuadratureConfig& q = {}) {
    return m.family == ModFamily::PSK ? psk_ber(m.M, p, esno_db, q) : qam_ber(m.M, p, esno_db, q);
}

inline double binary_entropy(double p) {
    if (p <= 0 || p >= 1) return 0;
    return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

// Rate through a hard-decision pipeline seen as a binary symmetric channel.
inline double capacity(double bits_per_symbol, double rho, double pbar) {
    if (!(pbar >= 0 && pbar <= 0.5)) throw DomainError("capacity: BER must lie in [0, 0.5]");
    return rho * bits_per_symbol * (1 - binary_entropy(pbar));
}

// (K-k)! k! / (K+1)!, the integral of x^k (1-x)^(K-k) over [0, 1].
inline double order_stat_integral(unsigned k, unsigned K) {
    return std::exp(std::lgamma(K - k + 1.0) + std::lgamma(k + 1.0) - std::lgamma(K + 2.0));
}

inline double order_stat_mean(unsigned k, unsigned K, double pmax) {
    if (k < 1 || k > K) throw DomainError("order_stat_mean: k out of range");
    const double pref = std::exp(std::lgamma(K + 1.0) - std::lgamma(double(k)) - std::lgamma(K - k + 1.0));
    return pref * pmax * order_stat_integral(k, K);
}

}  // namespace gabba
