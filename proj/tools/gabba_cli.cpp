#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include <gabba/gabba.hpp>

namespace {

using namespace gabba;

struct CommonArgs {
    std::size_t K = 0, nt = 2, nr = 1;
    std::string mod = "bpsk", channel = "rayleigh", profile = "equipower", out;
    double esno_start = 0, esno_stop = 20, esno_step = 2;
    int points = 5000;
    std::uint64_t seed = 1;
};

void add_common(CLI::App* sc, CommonArgs& a, bool with_mod) {
    sc->add_option("--K", a.K, "block size (power of two; default: smallest that fits n_t)");
    sc->add_option("--nt", a.nt, "transmit antennas");
    sc->add_option("--nr", a.nr, "receive antennas");
    if (with_mod) sc->add_option("--mod", a.mod, "bpsk, qpsk, pskN or qamN");
    sc->add_option("--channel", a.channel, "rayleigh | rice:m=M | hoyt:m=M | nakagami:m=M | awgn");
    sc->add_option("--profile", a.profile, "equipower | linear:pmax=P | severity");
    sc->add_option("--esno-start", a.esno_start, "first Es/N0 in dB");
    sc->add_option("--esno-stop", a.esno_stop, "last Es/N0 in dB");
    sc->add_option("--esno-step", a.esno_step, "Es/N0 step in dB");
    sc->add_option("--points", a.points, "quadrature points");
    sc->add_option("--seed", a.seed, "RNG seed");
    sc->add_option("--out", a.out, "output CSV (default stdout)");
}

ExperimentConfig to_config(const CommonArgs& a) {
    ExperimentConfig c;
    c.K = a.K;
    c.n_t = a.nt;
    c.n_r = a.nr;
    c.mod = parse_modulation(a.mod);
    c.channel = parse_channel(a.channel);
    c.profile = parse_profile(a.profile);
    c.esno_db = sweep_points(a.esno_start, a.esno_stop, a.esno_step);
    c.quad.points = a.points;
    c.seed = a.seed;
    c.validate();
    return c;
}

std::ostream& sink(const std::string& path, std::unique_ptr<std::ofstream>& f) {
    if (path.empty() || path == "-") return std::cout;
    f = std::make_unique<std::ofstream>(path);
    if (!*f) throw ConfigError("cannot open '" + path + "' for writing");
    return *f;
}

nlohmann::json config_json(const ExperimentConfig& c) {
    return {{"K", c.block()},
            {"n_t", c.n_t},
            {"n_r", c.n_r},
            {"modulation", c.mod.name()},
            {"channel", c.channel.str()},
            {"profile", c.profile.str()},
            {"esno_db", c.esno_db},
            {"trials", c.trials},
            {"target_errors", c.target_errors},
            {"seed", c.seed},
            {"quadrature_points", c.quad.points}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GABBA space-time block code toolkit"};
    app.require_subcommand(1);

    CommonArgs sim, ana, cap;
    std::uint64_t trials = 100000, target = 200;
    unsigned threads = 0;
    bool no_timing = false;
    std::string json_path;
    auto* s = app.add_subcommand("simulate", "Monte-Carlo BER sweep");
    add_common(s, sim, true);
    s->add_option("--trials", trials, "codeword cap per point");
    s->add_option("--target-errors", target, "stop a point after this many bit errors");
    s->add_option("--threads", threads, "worker threads (0: all cores)");
    s->add_option("--json", json_path, "write a JSON sidecar with the full config");
    s->add_flag("--no-timing", no_timing, "write 0 in the seconds column");

    double rho = 1, eta = 1;
    bool naka = false;
    auto* a = app.add_subcommand("analyze", "analytic BER sweep");
    add_common(a, ana, true);
    a->add_option("--rho", rho, "code rate");
    a->add_option("--eta", eta, "diversity order");
    a->add_flag("--nakagami", naka, "use the Nakagami approximation for every branch");

    std::size_t kmax = 32;
    int instances = 2;
    std::uint64_t vseed = 7;
    std::size_t corrupt = 0;
    auto* v = app.add_subcommand("verify", "structural suite up to a block size");
    v->add_option("K_max", kmax, "largest block size")->default_val(32);
    v->add_option("--instances", instances, "random instances per block size");
    v->add_option("--seed", vseed, "RNG seed");
    v->add_option("--corrupt", corrupt, "flip one code sign at this block size (self-test of the suite)");

    auto* c = app.add_subcommand("capacity", "hard-decision rate per modulation and envelope");
    add_common(c, cap, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        std::unique_ptr<std::ofstream> f;
        if (*s) {
            ExperimentConfig cfg = to_config(sim);
            cfg.trials = trials;
            cfg.target_errors = target;
            cfg.threads = threads;
            cfg.record_time = !no_timing;
            cfg.validate();
            const auto res = run_sweep(cfg);
            write_sweep_csv(sink(sim.out, f), res);
            if (!json_path.empty()) {
                std::ofstream js(json_path);
                if (!js) throw ConfigError("cannot open '" + json_path + "'");
                js << config_json(cfg).dump(2) << '\n';
            }
        } else if (*a) {
            ExperimentConfig cfg = to_config(ana);
            if (!(rho > 0 && rho <= 1) || !(eta > 0 && eta <= 1)) throw ConfigError("rho and eta must lie in (0, 1]");
            BerParams p = cfg.ber_params();
            p.rho = rho;
            p.eta = eta;
            p.nakagami_approx = naka;
            std::vector<double> b;
            for (double e : cfg.esno_db) b.push_back(ber(cfg.mod, p, e, cfg.quad));
            write_analysis_csv(sink(ana.out, f), cfg.esno_db, b);
        } else if (*v) {
            if (!is_pow2(kmax) || kmax < 2) throw ConfigError("K_max must be a power of two >= 2");
            if (instances < 1) throw ConfigError("instances must be >= 1");
            VerifyOptions o;
            o.instances = instances;
            o.seed = vseed;
            if (corrupt) {
                if (!is_pow2(corrupt) || corrupt < 2 || corrupt > kmax)
                    throw ConfigError("--corrupt must be a power of two in [2, K_max]");
                o.tamper = [corrupt](EncodingStructure& st) {
                    if (st.K == corrupt) st.entries[1] = -st.entries[1];
                };
            }
            const auto rep = verify(kmax, o);
            write_report(std::cout, rep);
            std::cout << (rep.ok() ? "verify: all checks passed\n" : "verify: FAILED\n");
            return rep.ok() ? 0 : 1;
        } else if (*c) {
            ExperimentConfig cfg = to_config(cap);
            write_capacity_csv(sink(cap.out, f), capacity_sweep(cfg));
        }
    } catch (const StructuralFailure& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 1;
    } catch (const DegenerateChannel& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
