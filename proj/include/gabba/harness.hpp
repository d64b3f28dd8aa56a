#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ber_analytics.hpp"
#include "orthogonal_decoder.hpp"

namespace gabba {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ChannelSpec {
    Fading family = Fading::Rayleigh;
    double m = 1.0;
    std::string str() const {
        std::ostringstream os;
        os << fading_name(family);
        if (family != Fading::Rayleigh) os << ":m=" << m;
        return os.str();
    }
};

struct ProfileSpec {
    enum class Kind { equipower, linear, severity } kind = Kind::equipower;
    double pmax = 2.0;
    std::string str() const {
        if (kind == Kind::equipower) return "equipower";
        if (kind == Kind::severity) return "severity";
        std::ostringstream os;
        os << "linear:pmax=" << pmax;
        return os.str();
    }
};

namespace detail {
inline double parse_kv(const std::string& s, const std::string& key) {
    const auto p = s.find(':');
    if (p == std::string::npos) throw ConfigError("expected '" + key + "=' in '" + s + "'");
    const std::string kv = s.substr(p + 1);
    if (kv.rfind(key + "=", 0) != 0) throw ConfigError("expected '" + key + "=' in '" + s + "'");
    try {
        std::size_t used = 0;
        const double v = std::stod(kv.substr(key.size() + 1), &used);
        if (used + key.size() + 1 != kv.size()) throw 0;
        return v;
    } catch (...) {
        throw ConfigError("bad number in '" + s + "'");
    }
}
}  // namespace detail

// rayleigh | rice:m=2 | hoyt:m=0.7 | nakagami:m=2.5 | awgn
inline ChannelSpec parse_channel(const std::string& s) {
    const std::string head = s.substr(0, s.find(':'));
    ChannelSpec c;
    if (s == "rayleigh") return c;
    if (s == "awgn") return {Fading::Nakagami, 1e4};
    if (head == "rice") c.family = Fading::Rice;
    else if (head == "hoyt") c.family = Fading::Hoyt;
    else if (head == "nakagami") c.family = Fading::Nakagami;
    else throw ConfigError("unknown channel '" + s + "'");
    c.m = detail::parse_kv(s, "m");
    if (c.family == Fading::Rice && !(c.m >= 1)) throw ConfigError("rice needs m >= 1");
    if (c.family == Fading::Hoyt && !(c.m >= 0.5 && c.m <= 1)) throw ConfigError("hoyt needs 0.5 <= m <= 1");
    if (c.family == Fading::Nakagami && !(c.m >= 0.5)) throw ConfigError("nakagami needs m >= 0.5");
    if (c.family == Fading::Rice && c.m == 1) c.family = Fading::Rayleigh;
    if (c.family == Fading::Hoyt && c.m == 1) c.family = Fading::Rayleigh;
    return c;
}

// equipower | linear:pmax=2 | severity
inline ProfileSpec parse_profile(const std::string& s) {
    ProfileSpec p;
    if (s == "equipower") return p;
    if (s == "severity") {
        p.kind = ProfileSpec::Kind::severity;
        return p;
    }
    if (s.rfind("linear", 0) == 0) {
        p.kind = ProfileSpec::Kind::linear;
        if (s != "linear") p.pmax = detail::parse_kv(s, "pmax");
        if (!(p.pmax > 0)) throw ConfigError("pmax must be positive");
        return p;
    }
    throw ConfigError("unknown profile '" + s + "'");
}

// Per-transmit-antenna branch statistics. The severity profile overrides the
// channel family with the single-severity Hoyt/Rayleigh/Rice model.
inline std::vector<BranchStat> make_branches(const ChannelSpec& c, const ProfileSpec& p, std::size_t n_t) {
    std::vector<BranchStat> b(n_t, BranchStat{c.family, c.family == Fading::Rayleigh ? 1.0 : c.m, 1.0});
    if (p.kind == ProfileSpec::Kind::linear) {
        for (std::size_t k = 1; k <= n_t; ++k) b[k - 1].omega = double(k) / double(n_t + 1) * p.pmax;
    } else if (p.kind == ProfileSpec::Kind::severity) {
        if (n_t < 2) throw ConfigError("severity profile needs n_t >= 2");
        const auto m = severity_profile(n_t);
        const auto w = severity_powers(n_t);
        for (std::size_t k = 0; k < n_t; ++k) b[k] = physical_branch(m[k], w[k] * double(n_t));
    }
    return b;
}

struct ExperimentConfig {
    std::size_t K = 0;  // 0: smallest block size holding n_t
    std::size_t n_t = 2;
    std::size_t n_r = 1;
    ModulationSpec mod{ModFamily::PSK, 2};
    ChannelSpec channel;
    ProfileSpec profile;
    std::vector<double> esno_db{0.0};
    std::uint64_t trials = 100000;  // cap per point
    std::uint64_t target_errors = 200;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0: hardware concurrency
    QuadratureConfig quad;
    bool analytic = true;
    bool record_time = true;

    std::size_t block() const { return K ? K : block_size_for(n_t); }

    void validate() const {
        if (n_t < 1) throw ConfigError("n_t must be >= 1");
        if (n_r < 1) throw ConfigError("n_r must be >= 1");
        const std::size_t k = block();
        if (!is_pow2(k) || k < 2) throw ConfigError("K must be a power of two >= 2");
        if (n_t > k) throw ConfigError("n_t exceeds K");
        if (trials < 1) throw ConfigError("trials must be >= 1");
        if (target_errors < 1) throw ConfigError("target errors must be >= 1");
        if (esno_db.empty()) throw ConfigError("empty Es/N0 sweep");
        if (quad.points < 100) throw ConfigError("quadrature needs at least 100 points");
        if (profile.kind == ProfileSpec::Kind::severity && n_t < 2) throw ConfigError("severity profile needs n_t >= 2");
    }

    // Analytic model: each pair of antennas sees Omega_n / (n_t N0).
    BerParams ber_params() const {
        BerParams p;
        p.n_r = unsigned(n_r);
        p.branches = make_branches(channel, profile, n_t);
        for (auto& b : p.branches) b.omega /= double(n_t);
        return p;
    }
};

inline std::vector<double> sweep_points(double start, double stop, double step) {
    if (!(step > 0)) throw ConfigError("Es/N0 step must be positive");
    if (stop < start) throw ConfigError("Es/N0 stop is below start");
    std::vector<double> v;
    const long n = std::lround(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) v.push_back(start + double(i) * step);
    return v;
}

struct SweepRow {
    double esno_db = 0;
    double ber_sim = 0;
    double ber_analytic = 0;
    std::uint64_t trials = 0;
    std::uint64_t bit_errors = 0;
    double seconds = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

// Bit errors of one codeword; all randomness comes from the (point, trial) stream.
inline std::uint64_t run_trial(const ExperimentConfig& c, const EncodingStructure& st,
                               const std::vector<BranchStat>& branches, double N0, std::size_t point,
                               std::uint64_t trial) {
    std::mt19937_64 g(stream_key(c.seed, point, trial));
    const std::size_t K = st.K;
    std::uniform_int_distribution<std::uint32_t> lab(0, c.mod.M - 1);
    std::vector<std::uint32_t> tx(K);
    CVec<double> s(static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) {
        tx[k] = lab(g);
        s(Eigen::Index(k)) = c.mod.map(tx[k]);
    }
    const CMat<double> C = encode<double>(st, s);
    const double tx_scale = 1.0 / std::sqrt(double(c.n_t));
    std::vector<CVec<double>> Hs;
    CMat<double> R(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(c.n_r));
    for (std::size_t a = 0; a < c.n_r; ++a) {
        CVec<double> h(static_cast<Eigen::Index>(c.n_t));
        for (std::size_t n = 0; n < c.n_t; ++n) h(Eigen::Index(n)) = sample_gain(branches[n], g) * tx_scale;
        R.col(Eigen::Index(a)) = C * h;
        Hs.push_back(std::move(h));
    }
    for (std::size_t a = 0; a < c.n_r; ++a) {
        auto col = R.col(Eigen::Index(a));
        add_awgn(col, N0, g);
    }
    const auto est = decode(R, Hs, K).estimates;
    std::uint64_t errs = 0;
    for (std::size_t k = 0; k < K; ++k) errs += label_errors(tx[k], c.mod.demap(est(Eigen::Index(k))));
    return errs;
}

inline SweepResult run_sweep(const ExperimentConfig& c) {
    c.validate();
    const std::size_t K = c.block();
    const EncodingStructure st = puncture(build_mother(K), c.n_t);
    const auto branches = make_branches(c.channel, c.profile, c.n_t);
    const BerParams bp = c.ber_params();
    const unsigned workers = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
    constexpr std::uint64_t batch = 2048;  // fixed, so the stop point never depends on workers

    SweepResult res;
    for (std::size_t pi = 0; pi < c.esno_db.size(); ++pi) {
        const auto t0 = std::chrono::steady_clock::now();
        SweepRow row;
        row.esno_db = c.esno_db[pi];
        const double N0 = esno_to_N0(row.esno_db);
        std::uint64_t done = 0, errors = 0;
        bool stop = false;
        std::vector<std::uint64_t> per(batch);
        while (!stop && done < c.trials) {
            const std::uint64_t n = std::min<std::uint64_t>(batch, c.trials - done);
            std::atomic<std::uint64_t> next{0};
            std::exception_ptr failure;
            std::mutex fm;
            auto work = [&] {
                try {
                    for (std::uint64_t i; (i = next.fetch_add(1)) < n;)
                        per[i] = run_trial(c, st, branches, N0, pi, done + i);
                } catch (...) {
                    std::lock_guard lk(fm);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            };
            std::vector<std::thread> pool;
            for (unsigned w = 1; w < std::min<std::uint64_t>(workers, n); ++w) pool.emplace_back(work);
            work();
            for (auto& t : pool) t.join();
            if (failure) std::rethrow_exception(failure);
            for (std::uint64_t i = 0; i < n; ++i) {
                errors += per[i];
                ++done;
                if (errors >= c.target_errors) {
                    stop = true;
                    break;
                }
            }
        }
        row.trials = done;
        row.bit_errors = errors;
        row.ber_sim = double(errors) / (double(done) * double(K) * c.mod.bits);
        if (c.analytic) row.ber_analytic = N0 > 0 ? ber(c.mod, bp, row.esno_db, c.quad) : 0.0;
        if (c.record_time)
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.rows.push_back(row);
    }
    return res;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    os << "esno_db,ber_sim,ber_analytic,trials,bit_errors,seconds\n";
    os << std::setprecision(10);
    for (const auto& x : r.rows)
        os << x.esno_db << ',' << x.ber_sim << ',' << x.ber_analytic << ',' << x.trials << ',' << x.bit_errors << ','
           << std::setprecision(4) << x.seconds << std::setprecision(10) << '\n';
}

inline void write_analysis_csv(std::ostream& os, const std::vector<double>& esno, const std::vector<double>& b) {
    os << "esno_db,ber\n" << std::setprecision(10);
    for (std::size_t i = 0; i < esno.size(); ++i) os << esno[i] << ',' << b[i] << '\n';
}

// ---- structural verification ----

struct CheckResult {
    std::string module;
    std::size_t K = 0;
    std::string name;
    double value = 0;
    double tol = 0;
    bool pass = false;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
    }
};

struct VerifyOptions {
    int instances = 2;
    std::uint64_t seed = 7;
    // Applied to every mother structure before use; lets tests inject faults.
    std::function<void(EncodingStructure&)> tamper;
};

inline VerifyReport verify(std::size_t K_max, const VerifyOptions& opt = {}) {
    require_pow2(K_max, "verify K_max", 2);
    VerifyReport rep;
    auto add = [&](std::string mod, std::size_t K, std::string name, double v, double tol) {
        rep.checks.push_back({std::move(mod), K, std::move(name), v, tol, v <= tol});
    };
    auto exact = [&](std::string mod, std::size_t K, std::string name, bool ok) {
        rep.checks.push_back({std::move(mod), K, std::move(name), ok ? 0.0 : 1.0, 0.0, ok});
    };

    const std::vector<std::pair<std::size_t, PermutationPair>> listed{
        {4, {{0, 3}, {1, 2}}},
        {8, {{0, 3, 5, 6}, {1, 2, 4, 7}}},
        {16, {{0, 3, 5, 6, 9, 10, 12, 15}, {1, 2, 4, 7, 8, 11, 13, 14}}}};
    for (const auto& [N, pp] : listed) {
        const auto got = permutation_indexes(N);
        exact("orthogonal_decoder", N, "permutation sets", got.p0 == pp.p0 && got.p1 == pp.p1);
    }

    std::mt19937_64 g(opt.seed);
    std::normal_distribution<double> nd;
    auto cr = [&](std::size_t n) {
        CVec<double> v(static_cast<Eigen::Index>(n));
        for (auto& x : v) {
            const double re = nd(g);
            x = {re, nd(g)};
        }
        return v;
    };
    auto widen = [](const CVec<double>& v) { return CVec<long double>(v.cast<std::complex<long double>>()); };

    for (std::size_t K = 2; K <= K_max; K *= 2) {
        EncodingStructure mother = build_mother(K);
        if (opt.tamper) opt.tamper(mother);
        exact("code_construction", K, "dense and complete", is_dense_complete(mother));
        double gram = 0, identity = 0, quasi = 0, parts = 0, conj = 0, rt = 0;
        for (int it = 0; it < opt.instances; ++it) {
            const CVec<double> s = cr(K), h = cr(K);
            const CMat<double> C = encode<double>(mother, s);
            gram = std::max(gram, double(gram_check<double>(C).relative));
            const auto E = build_encoded_channel(h, K);
            const CVec<double> direct = C * h;
            identity = std::max(identity, (direct - apply_encoded_channel(E, augmented(s))).norm() / direct.norm());
            quasi = std::max(quasi, channel_quasi_orthogonality(h, K));
            const CMat<double> up = reduce_channel(E, Partition::upper), lo = reduce_channel(E, Partition::lower);
            parts = std::max(parts, (up - lo).norm() / up.norm());
            if (K >= 4) {
                const auto El = build_encoded_channel(widen(h), K);
                for (long double r : reduction_residuals(CMat<long double>(reduce_channel(El))))
                    conj = std::max(conj, double(r));
            }
            for (std::size_t nt : {K, K - 1, std::size_t(3)}) {
                if (nt > K || nt < 1) continue;
                const EncodingStructure p = puncture(mother, nt);
                for (std::size_t nr : {1, 2, 4}) {
                    const CVec<double> x = cr(K);
                    const CMat<double> Cp = encode<double>(p, x);
                    std::vector<CVec<double>> Hs;
                    CMat<double> R(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(nr));
                    for (std::size_t a = 0; a < nr; ++a) {
                        Hs.push_back(cr(nt));
                        R.col(Eigen::Index(a)) = Cp * Hs.back();
                    }
                    try {
                        rt = std::max(rt, (decode(R, Hs, K).estimates - x).norm() / x.norm());
                    } catch (const StructuralFailure&) {
                        rt = std::max(rt, 1.0);
                    }
                }
            }
        }
        add("code_construction", K, "gram off-block", gram, 1e-12);
        add("encoded_channel", K, "received-signal identity", identity, 1e-12);
        add("encoded_channel", K, "channel quasi-orthogonality", quasi, 1e-10);
        add("orthogonal_decoder", K, "upper/lower reduced channel", parts, 1e-12);
        if (K >= 4) add("orthogonal_decoder", K, "reduction block-vanishing", conj, K <= 256 ? 1e-10 : 1e-8);
        add("orthogonal_decoder", K, "noiseless round trip", rt, 1e-9);
    }
    return rep;
}

inline void write_report(std::ostream& os, const VerifyReport& r) {
    os << std::scientific << std::setprecision(2);
    for (const auto& c : r.checks)
        os << (c.pass ? "PASS " : "FAIL ") << std::left << std::setw(19) << c.module << " K=" << std::setw(4) << c.K
           << ' ' << std::setw(30) << c.name << " value=" << c.value << " tol=" << c.tol << '\n';
    os << std::defaultfloat;
}

// ---- capacity ----

inline const std::vector<ModulationSpec>& capacity_modulations() {
    static const std::vector<ModulationSpec> mods{
        {ModFamily::PSK, 2},    {ModFamily::PSK, 4},    {ModFamily::PSK, 8},     {ModFamily::QAM, 16},
        {ModFamily::QAM, 64},   {ModFamily::QAM, 256},  {ModFamily::QAM, 1024}, {ModFamily::QAM, 4096}};
    return mods;
}

struct CapacityRow {
    double esno_db = 0;
    std::vector<double> rate;  // per capacity_modulations()
    double envelope = 0;
    double shannon_simo = 0;
};

// Ergodic log2(1 + gamma/n_t * sum|h|^2) over the n_t*n_r branches.
inline double shannon_simo(const ExperimentConfig& c, double esno_db, int draws = 4000) {
    const auto br = make_branches(c.channel, c.profile, c.n_t);
    std::mt19937_64 g(stream_key(c.seed, 0xCAFE, std::uint64_t(std::llround(esno_db * 1000))));
    const double snr = 1.0 / esno_to_N0(esno_db) / double(c.n_t);
    double acc = 0;
    for (int d = 0; d < draws; ++d) {
        double p = 0;
        for (std::size_t a = 0; a < c.n_r; ++a)
            for (const auto& b : br) p += std::norm(sample_gain(b, g));
        acc += std::log2(1 + snr * p);
    }
    return acc / draws;
}

inline std::vector<CapacityRow> capacity_sweep(const ExperimentConfig& c) {
    c.validate();
    const BerParams bp = c.ber_params();
    std::vector<CapacityRow> rows;
    for (double e : c.esno_db) {
        CapacityRow r;
        r.esno_db = e;
        for (const auto& m : capacity_modulations()) {
            const double p = std::clamp(ber(m, bp, e, c.quad), 0.0, 0.5);
            r.rate.push_back(capacity(m.bits, 1.0, p));
        }
        r.envelope = *std::max_element(r.rate.begin(), r.rate.end());
        r.shannon_simo = shannon_simo(c, e);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_capacity_csv(std::ostream& os, const std::vector<CapacityRow>& rows) {
    os << "esno_db";
    for (const auto& m : capacity_modulations()) os << ',' << m.name();
    os << ",envelope,shannon_simo\n" << std::setprecision(8);
    for (const auto& r : rows) {
        os << r.esno_db;
        for (double x : r.rate) os << ',' << x;
        os << ',' << r.envelope << ',' << r.shannon_simo << '\n';
    }
}

}  // namespace gabba
