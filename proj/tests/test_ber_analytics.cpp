#include <gtest/gtest.h>

#include "common.hpp"

using namespace gabba;
using testutil::mrc_bpsk_rayleigh;
using testutil::qfunc;

namespace {

BerParams branches(std::vector<BranchStat> b, unsigned n_r = 1) {
    BerParams p;
    p.branches = std::move(b);
    p.n_r = n_r;
    return p;
}

BerParams rayleigh(std::size_t L, unsigned n_r = 1) { return branches(std::vector<BranchStat>(L), n_r); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const ModulationSpec kBpsk{ModFamily::PSK, 2}, kQpsk{ModFamily::PSK, 4};

}  // namespace

TEST(Mgf, Examples) {
    EXPECT_DOUBLE_EQ(mgf({Fading::Rayleigh, 1, 1}, 1.0, -1.0), 0.5);
    EXPECT_DOUBLE_EQ(mgf({Fading::Nakagami, 2, 1}, 2.0, -1.0), 0.25);
    EXPECT_THROW(mgf({}, 1.0, 0.1), DomainError);
    EXPECT_DOUBLE_EQ(mgf({}, 3.0, 0.0), 1.0);
}

TEST(Mgf, ContinuousAtRayleighPoint) {
    for (double s : {-0.3, -1.0, -7.0}) {
        const double r = mgf({}, 1.5, s);
        EXPECT_NEAR(mgf({Fading::Hoyt, 1.0, 1}, 1.5, s), r, 1e-9 * r);
        EXPECT_NEAR(mgf({Fading::Rice, 1.0, 1}, 1.5, s), r, 1e-9 * r);
        EXPECT_NEAR(mgf({Fading::Nakagami, 1.0, 1}, 1.5, s), r, 1e-9 * r);
        double prev = 1;
        for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
            const double d = std::abs(mgf({Fading::Hoyt, 1 - eps, 1}, 1.5, s) - r) +
                             std::abs(mgf({Fading::Rice, 1 + eps, 1}, 1.5, s) - r);
            EXPECT_LT(d, prev);
            prev = d;
        }
    }
}

TEST(Mgf, NakagamiApproximationFlag) {
    const BranchStat h{Fading::Hoyt, 0.7, 1};
    EXPECT_DOUBLE_EQ(mgf(h, 2.0, -1.0, true), std::pow(1 + 2.0 / 0.7, -0.7));
    EXPECT_NE(mgf(h, 2.0, -1.0, false), mgf(h, 2.0, -1.0, true));
}

TEST(Integral, EmptyRangeAndSignedSymmetry) {
    const auto p = rayleigh(2);
    EXPECT_NEAR(I_general(1.0, 0.4, p, 0.5), 0.0, 1e-40);
    for (double g : {0.2, 1.0, 3.0}) EXPECT_NEAR(I_general(1.5, g, p, 0.5), -I_general(0.5, g, p, 0.5), 1e-13);
    EXPECT_THROW(I_general(0.5, 0.0, p, 1.0), DomainError);
    EXPECT_THROW(I_general(0.5, 1.0, p, 1.0, {50}), DomainError);
    EXPECT_THROW(I_general(0.5, 1.0, BerParams{}, 1.0), DomainError);
}

TEST(PskBer, RayleighClosedForm) {
    for (double db : {0.0, 10.0, 20.0}) {
        const double gb = std::pow(10.0, db / 10);
        const double ref = 0.5 * (1 - std::sqrt(gb / (1 + gb)));
        EXPECT_LT(rel(ber(kBpsk, rayleigh(1), db), ref), 1e-6) << db;
    }
    EXPECT_NEAR(ber(kBpsk, rayleigh(1), 0.0), 0.5 * (1 - 1 / std::sqrt(2.0)), 1e-9);
}

TEST(PskBer, MaximalRatioCombiningClosedForm) {
    for (int L : {2, 4})
        for (double db : {0.0, 5.0, 10.0, 20.0}) {
            const double ref = mrc_bpsk_rayleigh(std::pow(10.0, db / 10), L);
            EXPECT_LT(rel(ber(kBpsk, rayleigh(std::size_t(L)), db), ref), 1e-6) << L << " " << db;
            // Replicating one branch over L receivers is the same channel.
            EXPECT_LT(rel(ber(kBpsk, rayleigh(1, unsigned(L)), db), ref), 1e-6) << L << " " << db;
        }
}

TEST(PskBer, AwgnLimitIsGaussianTail) {
    const auto p = branches({{Fading::Nakagami, 1e4, 1}});
    const double g = 4;
    EXPECT_LT(rel(ber(kBpsk, p, 10 * std::log10(g)), qfunc(std::sqrt(2 * g))), 0.005);
}

TEST(PskBer, RateAndDiversityParameters) {
    // Halving the rate doubles the effective SNR.
    auto p = rayleigh(2);
    p.rho = 0.5;
    EXPECT_LT(rel(ber(kQpsk, p, 7.0), ber(kQpsk, rayleigh(2), 7.0 + 10 * std::log10(2.0))), 1e-9);
    // eta scales the diversity exponent.
    auto q = rayleigh(1, 4);
    q.eta = 0.5;
    EXPECT_LT(rel(ber(kQpsk, q, 9.0), ber(kQpsk, rayleigh(1, 2), 9.0)), 1e-12);
}

TEST(QamBer, FourQamIsQpsk) {
    const ModulationSpec q4(ModFamily::QAM, 4);
    const std::vector<BerParams> cases{rayleigh(1), rayleigh(3, 2), branches({{Fading::Rice, 2.5, 1}}),
                                       branches({{Fading::Hoyt, 0.6, 0.8}, {Fading::Hoyt, 0.9, 1.2}}),
                                       branches({{Fading::Nakagami, 3.0, 1}}, 2)};
    for (const auto& p : cases)
        for (double db : {-5.0, 0.0, 10.0, 25.0}) EXPECT_NEAR(ber(q4, p, db), ber(kQpsk, p, db), 1e-9);
}

TEST(QamBer, Coefficients) {
    EXPECT_EQ(qam_coefficient(4, 1, 0), 1.0);
    EXPECT_EQ(qam_coefficient(16, 1, 0), 1.0);
    EXPECT_EQ(qam_coefficient(16, 1, 1), 1.0);
    EXPECT_EQ(qam_coefficient(16, 2, 0), 2.0);
    EXPECT_EQ(qam_coefficient(16, 2, 1), 1.0);
    EXPECT_EQ(qam_coefficient(16, 2, 2), -1.0);
}

TEST(QamBer, SixteenQamAwgnClosedForm) {
    // Gray 16-QAM over AWGN: (3/4) Q(a) + (1/2) Q(3a) - (1/4) Q(5a), a = sqrt(Es/(5 N0)) in Q form.
    const auto p = branches({{Fading::Nakagami, 1e5, 1}});
    const ModulationSpec q16(ModFamily::QAM, 16);
    for (double db : {6.0, 10.0, 14.0}) {
        const double a = std::sqrt(std::pow(10.0, db / 10) / 5);
        const double ref = 0.75 * qfunc(a) + 0.5 * qfunc(3 * a) - 0.25 * qfunc(5 * a);
        EXPECT_LT(rel(ber(q16, p, db), ref), 0.005) << db;
    }
}

TEST(Ber, FamilyConsistencyAtRayleighPoint) {
    const std::vector<BranchStat> fams{{Fading::Rayleigh, 1, 1}, {Fading::Hoyt, 1, 1}, {Fading::Rice, 1, 1},
                                       {Fading::Nakagami, 1, 1}};
    for (const char* name : {"bpsk", "psk8", "qam16"})
        for (double db : {0.0, 12.0}) {
            const double r = ber(parse_modulation(name), branches({fams[0]}, 2), db);
            for (const auto& f : fams) EXPECT_NEAR(ber(parse_modulation(name), branches({f}, 2), db), r, 1e-9);
        }
}

TEST(Ber, MonotoneAndBounded) {
    const auto p = branches({{Fading::Rice, 2, 1}, {Fading::Hoyt, 0.7, 1}});
    for (const char* name : {"bpsk", "qpsk", "psk8", "psk16", "qam16", "qam64", "qam256"}) {
        double prev = 0.5 + 1e-12;
        for (double db = -10; db <= 40; db += 5) {
            const double b = ber(parse_modulation(name), p, db);
            EXPECT_GT(b, 0.0);
            EXPECT_LT(b, prev) << name << " " << db;
            prev = b;
        }
    }
    for (double db : {0.0, 10.0, 20.0}) {
        double prev = 0;
        for (const char* name : {"qpsk", "psk8", "psk16", "psk32"}) {
            const double b = ber(parse_modulation(name), p, db);
            EXPECT_GT(b, prev);
            prev = b;
        }
        prev = 0;
        for (const char* name : {"qam4", "qam16", "qam64", "qam256"}) {
            const double b = ber(parse_modulation(name), p, db);
            EXPECT_GT(b, prev);
            prev = b;
        }
    }
}

TEST(Ber, DiversitySlope) {
    for (int L : {1, 2, 4}) {
        const auto p = rayleigh(std::size_t(L));
        std::vector<double> x, y;
        for (double db = 20; db <= 30; db += 1) {
            x.push_back(db / 10);
            y.push_back(std::log10(ber(kBpsk, p, db)));
        }
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
        }
        EXPECT_NEAR(sxy / sxx, -double(L), 0.1 * L) << L;
    }
}

TEST(Ber, QuadratureConverges) {
    const std::vector<BerParams> cases{rayleigh(1), rayleigh(4, 2), branches({{Fading::Rice, 3, 1}}, 4),
                                       branches({{Fading::Hoyt, 0.6, 1}, {Fading::Nakagami, 2, 1}})};
    QuadratureConfig a{5000}, b{10000};
    for (const auto& p : cases)
        for (const char* name : {"bpsk", "psk8", "qam16", "qam64"})
            for (double db = 0; db <= 30; db += 10) {
                const auto m = parse_modulation(name);
                const double x = ber(m, p, db, a);
                if (x < 1e-8) continue;
                EXPECT_LT(rel(ber(m, p, db, b), x), 1e-8) << name << " " << db;
            }
}

TEST(Ber, PlainTrapezoidStaysClose) {
    QuadratureConfig q{5000, QuadratureConfig::Rule::trapezoid};
    for (double db : {0.0, 10.0, 20.0})
        EXPECT_LT(rel(ber(kQpsk, rayleigh(2), db, q), ber(kQpsk, rayleigh(2), db)), 1e-6);
}

TEST(Ber, DirectAverageOverTwoBranches) {
    // Two Rayleigh branches at unit mean SNR, averaging the AWGN BPSK rate over both
    // exponential SNRs directly. Substituting g = u^2 keeps the integrand smooth.
    const int n = 600;
    const double top = 6.5, h = top / n;
    auto w = [&](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
    double acc = 0;
    for (int i = 0; i <= n; ++i) {
        const double u = i * h;
        for (int j = 0; j <= n; ++j) {
            const double v = j * h;
            const double g = u * u + v * v;
            acc += w(i) * w(j) * qfunc(std::sqrt(2 * g)) * std::exp(-g) * 4 * u * v;
        }
    }
    acc *= h * h / 9;
    EXPECT_LT(rel(ber(kBpsk, rayleigh(2), 0.0), acc), 1e-4);
}

TEST(Capacity, Examples) {
    EXPECT_DOUBLE_EQ(capacity(3, 1, 0), 3.0);
    EXPECT_DOUBLE_EQ(capacity(6, 0.5, 0), 3.0);
    EXPECT_DOUBLE_EQ(capacity(4, 1, 0.5), 0.0);
    EXPECT_NEAR(capacity(2, 1, 0.11), 1.0, 2e-3);
    EXPECT_THROW(capacity(2, 1, 0.6), DomainError);
    EXPECT_THROW(capacity(2, 1, -0.1), DomainError);
    double prev = 2;
    for (double p = 0.01; p <= 0.5; p += 0.01) {
        const double c = capacity(2, 1, p);
        EXPECT_LT(c, prev);
        prev = c;
    }
}

TEST(OrderStatistics, ClosedForms) {
    EXPECT_DOUBLE_EQ(order_stat_mean(1, 1, 1), 0.5);
    for (unsigned K : {1, 3, 7, 20})
        for (unsigned k = 1; k <= K; ++k) EXPECT_NEAR(order_stat_mean(k, K, 2.5), 2.5 * k / (K + 1.0), 1e-12);
    EXPECT_THROW(order_stat_mean(0, 4, 1), DomainError);
    EXPECT_THROW(order_stat_mean(5, 4, 1), DomainError);
}

TEST(OrderStatistics, QuadratureOfDensity) {
    // Mean of the 3rd of 7 uniforms from its density 7!/(2!4!) x^2 (1-x)^4.
    const int n = 2000;
    double acc = 0;
    for (int i = 0; i <= n; ++i) {
        const double x = double(i) / n;
        const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        acc += w * x * 105 * x * x * std::pow(1 - x, 4);
    }
    acc /= 3.0 * n;
    EXPECT_NEAR(acc, 3.0 / 8, 1e-12);
    EXPECT_NEAR(order_stat_integral(3, 7), 6.0 * 24 / 40320, 1e-15);
    EXPECT_NEAR(order_stat_mean(3, 7, 1), acc, 1e-12);
}
