#pragma once

#include <algorithm>
#include <array>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace gabba {

// 2x2 block template [[s00*A, s01*B], [s10*B, s11*A]].
struct Generator {
    std::array<int, 4> s;
    constexpr int sign(int bi, int bj) const { return s[2 * bi + bj]; }
};

inline constexpr Generator gen_X{{1, 1, -1, 1}};
inline constexpr Generator gen_H{{1, 1, 1, -1}};
inline constexpr Generator gen_Ht{{1, -1, 1, 1}};

// Entry (i,j) of any manifold is sign * v[i ^ j]; the sign is the product
// of the template signs picked at each recursion level.
inline int manifold_sign(std::size_t i, std::size_t j, std::size_t n, const Generator& g) {
    int sg = 1;
    for (std::size_t bit = n >> 1; bit; bit >>= 1) sg *= g.sign((i & bit) ? 1 : 0, (j & bit) ? 1 : 0);
    return sg;
}

// Literal recursive construction: generator(manifold(first half), manifold(second half)).
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> abba_manifold(const std::vector<Scalar>& v,
                                                                  const Generator& g) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    require_pow2(v.size(), "abba_manifold length");
    const Eigen::Index n = static_cast<Eigen::Index>(v.size());
    if (n == 1) {
        Mat m(1, 1);
        m(0, 0) = v[0];
        return m;
    }
    const auto h = n / 2;
    Mat A = abba_manifold(std::vector<Scalar>(v.begin(), v.begin() + h), g);
    Mat B = abba_manifold(std::vector<Scalar>(v.begin() + h, v.end()), g);
    Mat out(n, n);
    out.topLeftCorner(h, h) = Scalar(g.s[0]) * A;
    out.topRightCorner(h, h) = Scalar(g.s[1]) * B;
    out.bottomLeftCorner(h, h) = Scalar(g.s[2]) * B;
    out.bottomRightCorner(h, h) = Scalar(g.s[3]) * A;
    return out;
}

// Same matrix via the closed-form index/sign pattern; O(n^2).
template <class Derived>
auto manifold_of(const Eigen::MatrixBase<Derived>& v, const Generator& g) {
    using Scalar = typename Derived::Scalar;
    const std::size_t n = static_cast<std::size_t>(v.size());
    require_pow2(n, "manifold length");
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(v.size(), v.size());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out(Eigen::Index(i), Eigen::Index(j)) =
                Scalar(Scalar(manifold_sign(i, j, n, g)) * v(Eigen::Index(i ^ j)));
    return out;
}

struct CodeEntry {
    int raw_index = 0;  // 1-based symbol index
    int sign = 1;
    bool conjugated = false;

    CodeEntry operator-() const { return {raw_index, -sign, conjugated}; }
    CodeEntry conj() const { return {raw_index, sign, !conjugated}; }
    bool operator==(const CodeEntry&) const = default;

    std::string str() const {
        std::string t = sign < 0 ? "-" : "";
        t += "s" + std::to_string(raw_index);
        if (conjugated) t += "*";
        return t;
    }
};

struct EncodingStructure {
    std::size_t K = 0;
    std::vector<CodeEntry> entries;              // K x K, row-major
    std::vector<std::size_t> selected_columns;  // 0-based, increasing

    const CodeEntry& at(std::size_t i, std::size_t j) const { return entries[i * K + j]; }
    std::size_t n_t() const { return selected_columns.size(); }
};

// Smallest admissible block size for n_t antennas.
inline std::size_t block_size_for(std::size_t n_t) {
    if (n_t == 0) throw DimensionError("n_t must be positive");
    return std::max<std::size_t>(2, std::size_t{1} << ilog2(n_t));
}

// [[A, B], [-B^H, A^H]] with A, B the X-manifolds of the two symbol halves.
inline EncodingStructure build_mother(std::size_t K) {
    require_pow2(K, "build_mother K", 2);
    const std::size_t h = K / 2;
    EncodingStructure st;
    st.K = K;
    st.entries.resize(K * K);
    auto x = [&](std::size_t i, std::size_t j, int offset) {
        return CodeEntry{int(offset + (i ^ j) + 1), manifold_sign(i, j, h, gen_X), false};
    };
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            CodeEntry e;
            if (i < h && j < h)
                e = x(i, j, 0);
            else if (i < h)
                e = x(i, j - h, int(h));
            else if (j < h)
                e = -x(j, i - h, int(h)).conj();
            else
                e = x(j - h, i - h, 0).conj();
            st.entries[i * K + j] = e;
        }
    st.selected_columns.resize(K);
    for (std::size_t j = 0; j < K; ++j) st.selected_columns[j] = j;
    return st;
}

// Keeps the leftmost n_t columns.
inline EncodingStructure puncture(const EncodingStructure& st, std::size_t n_t) {
    if (n_t < 1 || n_t > st.K)
        throw DimensionError("puncture: n_t=" + std::to_string(n_t) + " outside [1, " + std::to_string(st.K) + "]");
    EncodingStructure out = st;
    out.selected_columns.resize(n_t);
    for (std::size_t j = 0; j < n_t; ++j) out.selected_columns[j] = j;
    return out;
}

// Every row and every retained column carries each raw index at most once,
// and all K indices per row when nothing is punctured.
inline bool is_dense_complete(const EncodingStructure& st) {
    const std::size_t K = st.K;
    for (std::size_t i = 0; i < K; ++i) {
        std::vector<int> seen(K + 1, 0);
        for (auto j : st.selected_columns) {
            int r = st.at(i, j).raw_index;
            if (r < 1 || r > int(K) || seen[r]++) return false;
        }
    }
    for (auto j : st.selected_columns) {
        std::vector<int> seen(K + 1, 0);
        for (std::size_t i = 0; i < K; ++i) {
            int r = st.at(i, j).raw_index;
            if (r < 1 || r > int(K) || seen[r]++) return false;
        }
    }
    return true;
}

template <class Real>
CMat<Real> encode(const EncodingStructure& st, const CVec<Real>& s) {
    if (std::size_t(s.size()) != st.K)
        throw DimensionError("encode: symbol vector length " + std::to_string(s.size()) + " != K=" +
                             std::to_string(st.K));
    CMat<Real> C(st.K, st.n_t());
    for (std::size_t i = 0; i < st.K; ++i)
        for (std::size_t c = 0; c < st.n_t(); ++c) {
            const CodeEntry& e = st.at(i, st.selected_columns[c]);
            Cplx<Real> v = s(e.raw_index - 1);
            if (e.conjugated) v = std::conj(v);
            C(Eigen::Index(i), Eigen::Index(c)) = e.sign < 0 ? -v : v;
        }
    return C;
}

template <class Real>
struct GramCheck {
    CMat<Real> top_left;
    Real residual = 0;  // max |entry| of the off-diagonal block of C C^H
    Real relative = 0;  // residual / ||C||_F^2
};

template <class Real>
GramCheck<Real> gram_check(const CMat<Real>& C) {
    const Eigen::Index K = C.rows();
    if (C.cols() != K || K % 2) throw DimensionError("gram_check: need an even square matrix");
    const Eigen::Index h = K / 2;
    CMat<Real> G = C * C.adjoint();
    GramCheck<Real> g;
    g.top_left = G.topLeftCorner(h, h);
    g.residual = G.topRightCorner(h, h).cwiseAbs().maxCoeff();
    const Real n2 = C.squaredNorm();
    g.relative = n2 > 0 ? g.residual / n2 : Real(0);
    return g;
}

// One row per line, entries like "-s3*".
inline std::string dump(const EncodingStructure& st) {
    std::ostringstream os;
    for (std::size_t i = 0; i < st.K; ++i) {
        for (std::size_t c = 0; c < st.n_t(); ++c) {
            if (c) os << ' ';
            os << st.at(i, st.selected_columns[c]).str();
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace gabba
