#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "encoded_channel.hpp"

namespace gabba {

// 0-based index sets; p0 holds the x with parity 1.
struct PermutationPair {
    std::vector<std::size_t> p0, p1;
};

inline PermutationPair permutation_indexes(std::size_t N) {
    require_pow2(N, "permutation_indexes N", 2);
    const int levels = ilog2(N);
    PermutationPair pp;
    for (std::size_t x = 1; x <= N; ++x) {
        std::size_t p = x;
        for (int n = 1; n < levels; ++n) p += (x - 1) >> n;
        (p % 2 ? pp.p0 : pp.p1).push_back(x - 1);
    }
    return pp;
}

template <class Real>
CMat<Real> submatrix(const CMat<Real>& M, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols) {
    CMat<Real> out(Eigen::Index(rows.size()), Eigen::Index(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(Eigen::Index(i), Eigen::Index(j)) = M(Eigen::Index(rows[i]), Eigen::Index(cols[j]));
    return out;
}

template <class Real>
CVec<Real> subvector(const CVec<Real>& v, const std::vector<std::size_t>& idx) {
    CVec<Real> out{Eigen::Index(idx.size())};
    for (std::size_t i = 0; i < idx.size(); ++i) out(Eigen::Index(i)) = v(Eigen::Index(idx[i]));
    return out;
}

template <class Real>
struct FirstStage {
    CVec<Real> r1, r2;
};

template <class Real>
FirstStage<Real> first_stage(const CVec<Real>& r, const EncodedChannel<Real>& E) {
    const Eigen::Index K = Eigen::Index(E.K), h = K / 2;
    if (r.size() != K) throw DimensionError("first_stage: received length != K");
    const auto top = r.head(h);
    const CVec<Real> bot = r.tail(h).conjugate();
    FirstStage<Real> f;
    f.r1 = E.H1.leftCols(h).adjoint() * top + E.H2.leftCols(h).transpose() * bot;
    f.r2 = E.H1.rightCols(h).adjoint() * top + E.H2.rightCols(h).transpose() * bot;
    return f;
}

enum class Partition { upper, lower };

// K/2 x K/2 matrix coupling each symbol half to its first-stage output.
template <class Real>
CMat<Real> reduce_channel(const EncodedChannel<Real>& E, Partition part = Partition::upper) {
    const Eigen::Index h = Eigen::Index(E.K / 2);
    const Eigen::Index c0 = part == Partition::upper ? 0 : h;
    const auto A = E.H1.middleCols(c0, h);
    const auto B = E.H2.middleCols(c0, h);
    return A.adjoint() * A + B.transpose() * B.conjugate();
}

template <class Real>
struct ReducedStage {
    std::size_t order = 1;
    CMat<Real> first, second;
};

template <class Real>
struct StageReduction {
    PermutationPair perm;
    CMat<Real> product;  // first^T second
    Real residual = 0;   // largest off-block entry / (||first|| ||second||)
    ReducedStage<Real> next;
};

template <class Real>
ReducedStage<Real> order_one(const CMat<Real>& G) {
    return {1, G, G};
}

template <class Real>
StageReduction<Real> higher_order_reduce(const ReducedStage<Real>& st,
                                         Real tol = std::numeric_limits<Real>::infinity()) {
    const std::size_t N = std::size_t(st.first.rows());
    StageReduction<Real> out;
    out.perm = permutation_indexes(N);
    out.product = st.first.transpose() * st.second;
    const auto& [p0, p1] = out.perm;
    Real off = 0;
    for (auto i : p0)
        for (auto j : p1) {
            off = std::max(off, std::abs(out.product(Eigen::Index(i), Eigen::Index(j))));
            off = std::max(off, std::abs(out.product(Eigen::Index(j), Eigen::Index(i))));
        }
    const Real scale = st.first.norm() * st.second.norm();
    out.residual = scale > 0 ? off / scale : Real(0);
    if (!(out.residual <= tol))
        throw StructuralFailure("reduction order " + std::to_string(st.order) + " (size " + std::to_string(N) +
                                "): off-block residual " + std::to_string(double(out.residual)));
    out.next = {st.order + 1, submatrix(out.product, p0, p0), submatrix(out.product, p1, p1)};
    return out;
}

// Residuals of every reduction down to scalars.
template <class Real>
std::vector<Real> reduction_residuals(const CMat<Real>& G) {
    std::vector<Real> res;
    ReducedStage<Real> st = order_one(CMat<Real>(G / G.norm()));
    while (st.first.rows() >= 2) {
        auto r = higher_order_reduce(st);
        res.push_back(r.residual);
        st = std::move(r.next);
        const Real n = st.first.norm();
        st.first /= n;
        st.second /= n;
    }
    return res;
}

// Entry j is the 0-based symbol behind the j-th raw decoder output.
inline std::vector<std::size_t> symbol_order(std::size_t K) {
    require_pow2(K, "symbol_order K", 2);
    std::vector<std::vector<std::size_t>> cols(2);
    for (std::size_t k = 0; k < K; ++k) cols[k < K / 2 ? 0 : 1].push_back(k);
    for (std::size_t N = K / 2; N >= 2; N /= 2) {
        const auto pp = permutation_indexes(N);
        std::vector<std::vector<std::size_t>> next;
        for (const auto& c : cols) {
            std::vector<std::size_t> a, b;
            for (auto i : pp.p0) a.push_back(c[i]);
            for (auto i : pp.p1) b.push_back(c[i]);
            next.push_back(std::move(a));
            next.push_back(std::move(b));
        }
        cols = std::move(next);
    }
    std::vector<std::size_t> flat;
    for (const auto& c : cols) flat.push_back(c[0]);
    return flat;
}

struct DecoderOptions {
    double structural_tol = 1e-8;
    // Residual-correction passes; each reuses the same combiner on r - G s.
    int refine_passes = 2;
};

template <class Real>
struct DecodeResult {
    CVec<Real> estimates;  // ordered s_1..s_K
    Real gain = 0;         // post-combining SNR gain, same for every symbol
};

template <class Real>
class OrthogonalDecoder {
public:
    OrthogonalDecoder(const std::vector<CVec<Real>>& Hs, std::size_t K, DecoderOptions opt = {})
        : K_(K), opt_(opt), order_(symbol_order(K)) {
        require_pow2(K, "decode K", 2);
        if (Hs.empty()) throw DimensionError("decode: need at least one receive antenna");
        const Eigen::Index h = Eigen::Index(K / 2);
        G_ = CMat<Real>::Zero(h, h);
        for (const auto& hv : Hs) {
            if (!hv.allFinite()) throw DomainError("decode: non-finite channel gain");
            enc_.push_back(build_encoded_channel(hv, K));
            G_ += reduce_channel(enc_.back());
        }
        const Real n0 = G_.norm();
        if (!(n0 > 0)) throw DegenerateChannel("decode: channel is identically zero");
        scale0_ = n0;
        ReducedStage<Real> st = order_one(CMat<Real>(G_ / n0));
        while (st.first.rows() >= 2) {
            auto red = higher_order_reduce(st, Real(opt_.structural_tol));
            Level lv{red.perm, std::move(st.first), std::move(st.second), 0};
            st = std::move(red.next);
            lv.scale = st.first.norm();
            if (!(lv.scale > 0)) throw DegenerateChannel("decode: reduction collapsed to zero");
            st.first /= lv.scale;
            st.second /= lv.scale;
            levels_.push_back(std::move(lv));
        }
        t0_ = st.first(0, 0);
        t1_ = st.second(0, 0);
        // Estimation noise has covariance N0 G^-1; one probe gives its diagonal.
        CVec<Real> e = CVec<Real>::Zero(h);
        e(0) = 1;
        alpha_ = Real(1) / nested(e, CVec<Real>::Zero(h))(0).real();
    }

    std::size_t K() const { return K_; }
    std::size_t n_r() const { return enc_.size(); }
    const CMat<Real>& reduced() const { return G_; }
    const std::vector<EncodedChannel<Real>>& encoded() const { return enc_; }
    Real gain() const { return alpha_; }

    // Combined first-stage outputs summed over receive antennas.
    FirstStage<Real> combine(const CMat<Real>& R) const {
        if (std::size_t(R.rows()) != K_ || std::size_t(R.cols()) != enc_.size())
            throw DimensionError("decode: received matrix must be K x n_r");
        FirstStage<Real> acc{CVec<Real>::Zero(Eigen::Index(K_ / 2)), CVec<Real>::Zero(Eigen::Index(K_ / 2))};
        for (std::size_t a = 0; a < enc_.size(); ++a) {
            auto f = first_stage(CVec<Real>(R.col(Eigen::Index(a))), enc_[a]);
            acc.r1 += f.r1;
            acc.r2 += f.r2;
        }
        return acc;
    }

    // Nested combining of (r1, r2) into estimates of both symbol halves.
    CVec<Real> nested(const CVec<Real>& r1, const CVec<Real>& r2) const {
        std::vector<CVec<Real>> vecs{r1 / scale0_, r2 / scale0_};
        for (const auto& lv : levels_) {
            std::vector<CVec<Real>> next;
            next.reserve(2 * vecs.size());
            for (std::size_t j = 0; j < vecs.size(); ++j) {
                const CVec<Real> z = ((j % 2 == 0) ? lv.second : lv.first).transpose() * vecs[j];
                next.push_back(subvector(z, lv.perm.p0) / lv.scale);
                next.push_back(subvector(z, lv.perm.p1) / lv.scale);
            }
            vecs = std::move(next);
        }
        CVec<Real> out{Eigen::Index(K_)};
        for (std::size_t j = 0; j < vecs.size(); ++j)
            out(Eigen::Index(order_[j])) = vecs[j](0) / (j % 2 == 0 ? t0_ : t1_);
        return out;
    }

    DecodeResult<Real> decode(const CMat<Real>& R) const {
        const auto f = combine(R);
        const Eigen::Index h = Eigen::Index(K_ / 2);
        CVec<Real> s = nested(f.r1, f.r2);
        auto residual = [&](const CVec<Real>& est, CVec<Real>& e1, CVec<Real>& e2) {
            e1 = f.r1 - G_ * est.head(h);
            e2 = f.r2 - G_ * est.tail(h);
            return std::sqrt(e1.squaredNorm() + e2.squaredNorm());
        };
        CVec<Real> e1, e2;
        Real res = residual(s, e1, e2);
        const Real floor = std::numeric_limits<Real>::epsilon() * std::sqrt(f.r1.squaredNorm() + f.r2.squaredNorm());
        for (int pass = 0; pass < opt_.refine_passes && res > floor; ++pass) {
            CVec<Real> cand = s + nested(e1, e2);
            CVec<Real> c1, c2;
            const Real r2 = residual(cand, c1, c2);
            if (!(r2 < res)) break;
            s = std::move(cand);
            e1 = std::move(c1);
            e2 = std::move(c2);
            res = r2;
        }
        return {std::move(s), gain()};
    }

private:
    struct Level {
        PermutationPair perm;
        CMat<Real> first, second;
        Real scale;
    };
    std::size_t K_;
    DecoderOptions opt_;
    std::vector<std::size_t> order_;
    std::vector<EncodedChannel<Real>> enc_;
    CMat<Real> G_;
    Real scale0_ = 1;
    Real alpha_ = 0;
    std::vector<Level> levels_;
    Cplx<Real> t0_, t1_;
};

template <class Real>
DecodeResult<Real> decode(const CMat<Real>& R, const std::vector<CVec<Real>>& Hs, std::size_t K,
                          DecoderOptions opt = {}) {
    return OrthogonalDecoder<Real>(Hs, K, opt).decode(R);
}

// Widely-linear single-step form of the decoder: s_hat = F1 r + F2 conj(r),
// r being the received matrix stacked column by column.
template <class Real>
struct CombinerWeights {
    CMat<Real> F1, F2;
    std::vector<Real> alpha;  // post-combining SNR gain per symbol
};

template <class Real>
CombinerWeights<Real> combiner_weights(const std::vector<CVec<Real>>& Hs, std::size_t K, DecoderOptions opt = {}) {
    const OrthogonalDecoder<Real> dec(Hs, K, opt);
    const Eigen::Index n = Eigen::Index(K * Hs.size());
    CombinerWeights<Real> w;
    w.F1.resize(Eigen::Index(K), n);
    w.F2.resize(Eigen::Index(K), n);
    const Cplx<Real> I(0, 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        CMat<Real> R = CMat<Real>::Zero(Eigen::Index(K), Eigen::Index(Hs.size()));
        R(j % Eigen::Index(K), j / Eigen::Index(K)) = 1;
        const CVec<Real> y1 = dec.decode(R).estimates;
        R *= I;
        const CVec<Real> y2 = dec.decode(R).estimates;
        w.F1.col(j) = (y1 - I * y2) / Real(2);
        w.F2.col(j) = (y1 + I * y2) / Real(2);
    }
    for (Eigen::Index k = 0; k < Eigen::Index(K); ++k)
        w.alpha.push_back(Real(1) / (w.F1.row(k).squaredNorm() + w.F2.row(k).squaredNorm()));
    return w;
}

template <class Real>
CVec<Real> apply_combiner(const CombinerWeights<Real>& w, const CMat<Real>& R) {
    const CVec<Real> r = R.reshaped();
    return w.F1 * r + w.F2 * r.conjugate();
}

}  // namespace gabba
