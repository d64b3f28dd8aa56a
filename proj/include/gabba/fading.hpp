#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"

namespace gabba {

enum class Fading { Rayleigh, Rice, Hoyt, Nakagami };

inline std::string fading_name(Fading f) {
    switch (f) {
        case Fading::Rayleigh: return "rayleigh";
        case Fading::Rice: return "rice";
        case Fading::Hoyt: return "hoyt";
        case Fading::Nakagami: return "nakagami";
    }
    return "?";
}

struct BranchStat {
    Fading family = Fading::Rayleigh;
    double m = 1.0;
    double omega = 1.0;
};

// Single-severity model: Hoyt below m = 1, Rayleigh at 1, Rice above.
inline BranchStat physical_branch(double m, double omega = 1.0) {
    if (!(m >= 0.5)) throw DomainError("fading severity m must be >= 0.5");
    if (!(omega > 0)) throw DomainError("branch power must be positive");
    const Fading f = m < 1 ? Fading::Hoyt : (m > 1 ? Fading::Rice : Fading::Rayleigh);
    return {f, m, omega};
}

inline double m_to_hoyt_q(double m) {
    if (!(m >= 0.5 && m <= 1)) throw DomainError("Hoyt severity must lie in [0.5, 1]");
    if (m == 0.5) return 0.0;  // limit of the 0/0 form
    if (m == 1.0) return 1.0;
    return std::sqrt((1 - 2 * std::sqrt(m - m * m)) / (2 * m - 1));
}

inline double m_to_rice_k(double m) {
    if (!(m >= 1)) throw DomainError("Rice severity must be >= 1");
    const double r = std::sqrt(m * m - m);
    return r / (m - r);
}

template <class URBG>
std::complex<double> sample_gain(const BranchStat& b, URBG& g) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 2 * std::numbers::pi);
    auto diffuse = [&](double power) {
        const double sd = std::sqrt(power / 2);
        const double re = nd(g) * sd;
        return std::complex<double>(re, nd(g) * sd);
    };
    switch (b.family) {
        case Fading::Rayleigh: return diffuse(b.omega);
        case Fading::Rice: {
            const double k = m_to_rice_k(b.m);
            return std::sqrt(b.omega * k / (1 + k)) + diffuse(b.omega / (1 + k));
        }
        case Fading::Hoyt: {
            const double q = m_to_hoyt_q(b.m);
            const double si = std::sqrt(b.omega / (1 + q * q));
            const double re = nd(g) * si;
            const std::complex<double> z(re, nd(g) * si * q);
            return z * std::polar(1.0, ud(g));
        }
        case Fading::Nakagami: {
            std::gamma_distribution<double> gd(b.m, b.omega / b.m);
            const double env = std::sqrt(gd(g));
            return std::polar(env, ud(g));
        }
    }
    return {};
}

// Mean of the k-th of K ordered uniform powers, rescaled to the requested mean.
inline std::vector<double> linear_profile(std::size_t K, double mean_power = 1.0) {
    if (K < 1) throw DomainError("linear_profile: K must be positive");
    std::vector<double> w(K);
    for (std::size_t k = 1; k <= K; ++k) w[k - 1] = 2.0 * double(k) / double(K + 1) * mean_power;
    return w;
}

inline std::vector<double> severity_profile(std::size_t K) {
    if (K < 2) throw DomainError("severity_profile: K must be >= 2");
    std::vector<double> m(K);
    for (std::size_t k = 1; k <= K; ++k) m[k - 1] = 0.5 + 3.5 * double(k - 1) / double(K - 1);
    return m;
}

// Decreasing powers summing to one, paired with severity_profile.
inline std::vector<double> severity_powers(std::size_t K) {
    std::vector<double> w = linear_profile(K, 1.0 / double(K));
    std::reverse(w.begin(), w.end());
    return w;
}

template <class URBG, class Vec>
void add_awgn(Vec& signal, double N0, URBG& g) {
    if (N0 <= 0) return;
    std::normal_distribution<double> nd(0.0, std::sqrt(N0 / 2));
    for (auto& x : signal) {
        const double re = nd(g);
        x += std::complex<double>(re, nd(g));
    }
}

// Stream key for (seed, a, b); each worker seeds its own engine from it.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ a) ^ (b * 0xd6e8feb86659fd93ull));
}

}  // namespace gabba
