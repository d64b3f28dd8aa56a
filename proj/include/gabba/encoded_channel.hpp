#pragma once

#include <sstream>
#include <string>

#include "code_construction.hpp"

namespace gabba {

template <class Real>
struct EncodedChannel {
    std::size_t K = 0;
    CMat<Real> H1;  // K/2 x K, acts on s
    CMat<Real> H2;  // K/2 x K, acts on conj(s)
};

template <class Real>
CVec<Real> extend_channel(const CVec<Real>& h, std::size_t K) {
    require_pow2(K, "extend_channel K", 2);
    if (std::size_t(h.size()) > K || h.size() == 0)
        throw DimensionError("extend_channel: n_t=" + std::to_string(h.size()) + " does not fit K=" +
                             std::to_string(K));
    CVec<Real> out = CVec<Real>::Zero(Eigen::Index(K));
    out.head(h.size()) = h;
    return out;
}

template <class Real>
CVec<Real> modify_channel(const CVec<Real>& hplus) {
    const Eigen::Index K = hplus.size();
    if (K % 2) throw DimensionError("modify_channel: odd length");
    CVec<Real> out(K);
    out << hplus.tail(K / 2), hplus.head(K / 2);
    return out;
}

template <class Real>
EncodedChannel<Real> build_encoded_channel(const CVec<Real>& h, std::size_t K) {
    const CVec<Real> hp = extend_channel(h, K);
    const std::size_t half = K / 2;
    EncodedChannel<Real> E;
    E.K = K;
    E.H1.resize(Eigen::Index(half), Eigen::Index(K));
    E.H2.resize(Eigen::Index(half), Eigen::Index(K));
    for (std::size_t i = 0; i < half; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            const auto x = i ^ j;
            const Cplx<Real> a = hp(Eigen::Index(x)), b = hp(Eigen::Index(x ^ half));
            E.H1(Eigen::Index(i), Eigen::Index(j)) = manifold_sign(i, j, K, gen_H) < 0 ? -a : a;
            E.H2(Eigen::Index(i), Eigen::Index(j)) = manifold_sign(i, j, K, gen_Ht) < 0 ? -b : b;
        }
    return E;
}

template <class Real>
CVec<Real> augmented(const CVec<Real>& s) {
    CVec<Real> out(2 * s.size());
    out << s, s.conjugate();
    return out;
}

template <class Real>
CVec<Real> apply_encoded_channel(const EncodedChannel<Real>& E, const CVec<Real>& sbar) {
    const Eigen::Index K = Eigen::Index(E.K);
    if (sbar.size() != 2 * K) throw DimensionError("apply_encoded_channel: augmented length mismatch");
    CVec<Real> r(K);
    r << E.H1 * sbar.head(K), E.H2 * sbar.tail(K);
    return r;
}

// Off-diagonal block of H^H H + Ht^T conj(Ht) on the full manifolds,
// relative to the largest entry.
template <class Real>
Real channel_quasi_orthogonality(const CVec<Real>& h, std::size_t K) {
    const CVec<Real> hp = extend_channel(h, K);
    const CMat<Real> Hm = manifold_of(hp, gen_H);
    const CMat<Real> Ht = manifold_of(modify_channel(hp), gen_Ht);
    const CMat<Real> M = Hm.adjoint() * Hm + Ht.transpose() * Ht.conjugate();
    const Eigen::Index q = Eigen::Index(K / 2);
    const Real off = std::max(M.topRightCorner(q, q).cwiseAbs().maxCoeff(),
                              M.bottomLeftCorner(q, q).cwiseAbs().maxCoeff());
    const Real top = M.cwiseAbs().maxCoeff();
    return top > 0 ? off / top : Real(0);
}

// Symbolic minors for n_t active antennas, entries like "-h18", padded ones as "0".
inline std::string dump_encoded_channel(std::size_t K, std::size_t n_t) {
    require_pow2(K, "dump K", 2);
    if (n_t < 1 || n_t > K) throw DimensionError("dump_encoded_channel: n_t out of range");
    std::ostringstream os;
    const std::size_t half = K / 2;
    auto cell = [&](std::size_t idx, int sg) {
        if (idx >= n_t) return std::string("0");
        return std::string(sg < 0 ? "-" : "") + "h" + std::to_string(idx + 1);
    };
    for (int which = 1; which <= 2; ++which) {
        os << "H" << K << "_" << which << '\n';
        for (std::size_t i = 0; i < half; ++i) {
            for (std::size_t j = 0; j < K; ++j) {
                if (j) os << ' ';
                if (which == 1)
                    os << cell(i ^ j, manifold_sign(i, j, K, gen_H));
                else
                    os << cell((i ^ j) ^ half, manifold_sign(i, j, K, gen_Ht));
            }
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace gabba
