#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace gabba {

enum class ModFamily { PSK, QAM };

inline std::uint32_t gray(std::uint32_t x) { return x ^ (x >> 1); }

inline std::uint32_t gray_inverse(std::uint32_t g) {
    std::uint32_t x = g;
    for (std::uint32_t s = g >> 1; s; s >>= 1) x ^= s;
    return x;
}

struct ModulationSpec {
    ModFamily family = ModFamily::PSK;
    unsigned M = 2;
    unsigned bits = 1;

    ModulationSpec() = default;
    ModulationSpec(ModFamily f, unsigned m) : family(f), M(m), bits(unsigned(ilog2(m))) {
        if (!is_pow2(m) || m < 2) throw DomainError("constellation size must be a power of two >= 2");
        if (f == ModFamily::QAM && (bits % 2 || m < 4)) throw DomainError("square QAM needs an even bit count");
    }

    std::string name() const { return (family == ModFamily::PSK ? "psk" : "qam") + std::to_string(M); }

    // Labels are integers whose bits, most significant first, are the symbol's bits.
    std::complex<double> map(std::uint32_t label) const {
        if (label >= M) throw DomainError("label out of range for " + name());
        if (family == ModFamily::PSK) {
            const double ang = 2 * std::numbers::pi * gray_inverse(label) / M;
            if (M == 2) return {gray_inverse(label) ? -1.0 : 1.0, 0.0};
            return std::polar(1.0, ang);
        }
        const unsigned half = bits / 2;
        const unsigned L = 1u << half;
        const std::uint32_t li = gray_inverse(label >> half), lq = gray_inverse(label & (L - 1));
        return std::complex<double>(2.0 * li - (L - 1), 2.0 * lq - (L - 1)) / qam_scale();
    }

    std::uint32_t demap(std::complex<double> y) const {
        if (family == ModFamily::PSK) {
            if (M == 2) return y.real() < 0 ? 1u : 0u;
            double a = std::arg(y) * M / (2 * std::numbers::pi);
            long m = std::lround(a);
            m = ((m % long(M)) + long(M)) % long(M);
            return gray(std::uint32_t(m));
        }
        const unsigned half = bits / 2;
        const long L = 1l << half;
        auto axis = [&](double v) {
            long l = std::lround((v * qam_scale() + double(L - 1)) / 2);
            l = std::clamp(l, 0l, L - 1);
            return gray(std::uint32_t(l));
        };
        return (axis(y.real()) << half) | axis(y.imag());
    }

    double qam_scale() const { return std::sqrt(2.0 * (M - 1) / 3.0); }

    std::vector<std::complex<double>> constellation() const {
        std::vector<std::complex<double>> pts;
        for (std::uint32_t l = 0; l < M; ++l) pts.push_back(map(l));
        return pts;
    }
};

// Accepts bpsk, qpsk, pskN, qamN.
inline ModulationSpec parse_modulation(const std::string& s) {
    if (s == "bpsk") return {ModFamily::PSK, 2};
    if (s == "qpsk") return {ModFamily::PSK, 4};
    auto num = [&](std::size_t pos) {
        try {
            std::size_t used = 0;
            long v = std::stol(s.substr(pos), &used);
            if (used + pos != s.size() || v < 2) throw 0;
            return unsigned(v);
        } catch (...) {
            throw DomainError("bad modulation '" + s + "'");
        }
    };
    if (s.rfind("psk", 0) == 0) return {ModFamily::PSK, num(3)};
    if (s.rfind("qam", 0) == 0) return {ModFamily::QAM, num(3)};
    throw DomainError("bad modulation '" + s + "' (expected bpsk, qpsk, pskN or qamN)");
}

inline std::vector<std::uint8_t> label_bits(std::uint32_t label, unsigned bits) {
    std::vector<std::uint8_t> out(bits);
    for (unsigned b = 0; b < bits; ++b) out[b] = (label >> (bits - 1 - b)) & 1u;
    return out;
}

inline std::uint32_t bits_label(const std::vector<std::uint8_t>& v) {
    std::uint32_t l = 0;
    for (auto b : v) l = (l << 1) | (b & 1u);
    return l;
}

inline std::size_t count_bit_errors(const std::vector<std::uint8_t>& tx, const std::vector<std::uint8_t>& rx) {
    if (tx.size() != rx.size()) throw DimensionError("count_bit_errors: length mismatch");
    std::size_t n = 0;
    for (std::size_t i = 0; i < tx.size(); ++i) n += (tx[i] != rx[i]);
    return n;
}

inline unsigned label_errors(std::uint32_t a, std::uint32_t b) { return unsigned(std::popcount(a ^ b)); }

// Mean Hamming distance between labels k ring positions apart, k = 1..M-1.
inline std::vector<double> psk_distance_spectrum(unsigned M) {
    if (!is_pow2(M) || M < 2) throw DomainError("psk_distance_spectrum: M must be a power of two >= 2");
    const int bits = ilog2(M);
    std::vector<double> d;
    for (unsigned k = 1; k < M; ++k) {
        double x = 2 * std::abs(double(k) / M - std::round(double(k) / M));
        for (int i = 2; i <= bits; ++i) {
            const double q = double(k) / double(1u << i);
            x += 2 * std::abs(q - std::round(q));
        }
        d.push_back(x);
    }
    return d;
}

}  // namespace gabba
