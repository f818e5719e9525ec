#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <CLI11.hpp>

#include "mpcsr/bench.hpp"
#include "mpcsr/kernels.hpp"
#include "mpcsr/secure_eval.hpp"

namespace {

using namespace mpcsr;

int run_command(const std::string& benchmark, const std::string& mode, int runs, u64 seed,
                int pop, int gens, unsigned ring_bits, unsigned frac_bits,
                const std::string& transport, const std::string& out_path) {
    const BenchmarkSpec& spec = benchmark_by_name(benchmark);
    ExperimentOptions options;
    options.mode = mode == "secure" ? RunMode::Secure : RunMode::Plaintext;
    options.transport = transport == "tcp" ? TransportKind::Tcp : TransportKind::InProc;
    options.runs = runs;
    options.seed = seed;
    options.gp.population_size = pop;
    options.gp.max_generations = gens;
    options.codec = FixedCodec{Ring{ring_bits}, frac_bits};

    std::printf("%s | %s | %d run(s) | base seed %llu\n", spec.name.c_str(), mode.c_str(), runs,
                static_cast<unsigned long long>(seed));
    ExperimentResult result;
    for (int i = 0; i < runs; ++i) {
        RunRecord rec = run_single(spec, options, seed + static_cast<u64>(i));
        std::printf("  run %2d  seed %llu  train_mse %.3e  test_r2 %+.4f  %s  (%lld ms)\n", i,
                    static_cast<unsigned long long>(rec.seed), rec.train_mse, rec.test_r2,
                    rec.recovered ? "recovered" : "not recovered",
                    static_cast<long long>(rec.wall_ms));
        result.runs.push_back(std::move(rec));
    }
    int recovered = 0;
    for (const RunRecord& r : result.runs) recovered += r.recovered ? 1 : 0;
    result.recovery_rate = runs > 0 ? static_cast<double>(recovered) / runs : 0.0;
    std::printf("recovery rate: %.2f (%d/%d)\n", result.recovery_rate, recovered, runs);

    std::ofstream csv(out_path + ".csv");
    csv << to_csv(result.runs);
    std::ofstream json(out_path + ".json");
    json << summary_json(spec, options, result) << '\n';
    std::printf("wrote %s.csv and %s.json\n", out_path.c_str(), out_path.c_str());
    return 0;
}

bool report(const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    return ok;
}

// quick self-checks against plaintext oracles
int verify_command() {
    const FixedCodec codec{};
    const Ring ring = codec.ring;
    bool all = true;

    {
        Rng rng(2024);
        bool exact = true;
        for (int i = 0; i < 10000 && exact; ++i) {
            const u64 x = rng.ring_element(ring), y = rng.ring_element(ring);
            const BeaverTriple t = deal_triple(ring, rng);
            const auto xs = share_value(ring, x, rng);
            const auto ys = share_value(ring, y, rng);
            const auto zs = beaver_mul(ring, xs, ys, t);
            exact = reconstruct(ring, zs.first, zs.second) == ring.mul(x, y);
        }
        all &= report("beaver multiplication reconstructs the exact modular product", exact);
    }
    {
        Rng rng(2025);
        int outliers = 0;
        for (int i = 0; i < 10000; ++i) {
            const double x = codec.decode(codec.encode(rng.uniform(-100, 100)));
            const double y = codec.decode(codec.encode(rng.uniform(-100, 100)));
            const auto xs = share_value(ring, codec.encode(x), rng);
            const auto ys = share_value(ring, codec.encode(y), rng);
            const auto zs = truncate_shares(
                ring, beaver_mul(ring, xs, ys, deal_triple(ring, rng)), codec.frac_bits);
            const double got = codec.decode(reconstruct(ring, zs.first, zs.second));
            if (std::fabs(got - x * y) > std::ldexp(1.0, 1 - static_cast<int>(codec.frac_bits)))
                ++outliers;
        }
        all &= report("fixed-point multiply pipeline within 2^(1-B)", outliers == 0);
    }
    {
        const int n = 256;
        RingVector enc(n);
        VectorXd xs(n);
        Rng rng(7);
        for (int i = 0; i < n; ++i) {
            xs[i] = rng.uniform(-std::numbers::pi, std::numbers::pi);
            enc[i] = codec.encode(xs[i]);
        }
        const RingVector mask = rng.ring_vector(ring, n);
        auto [s0, s1] = run_pair(codec, 99, [&](PartyEngine& eng) {
            RingVector in = eng.party() == 0 ? mask : ring_sub(ring, enc, mask);
            return sec_sin(eng, in);
        });
        double worst = 0;
        for (int i = 0; i < n; ++i) {
            const double got = codec.decode(ring.add(s0[i], s1[i]));
            worst = std::max(worst, std::fabs(got - std::sin(xs[i])));
        }
        all &= report("secure sine within 1e-3 on [-pi, pi]", worst <= 1e-3);
    }
    {
        const ExprPtr truth = benchmark_by_name("nguyen9").ground_truth;
        const bool id = equivalent(truth, truth, 2);
        const bool near_miss =
            !equivalent(parse("(+ (sin x1) (* x2 x2))"), truth, 2) &&
            !equivalent(parse("(+ (sin x1) (* x2 (sin x2)))"), truth, 2);
        const bool prod_sum = equivalent(parse("(* (* 2 (sin x1)) (cos x2))"),
                                         parse("(+ (sin (+ x1 x2)) (sin (- x1 x2)))"), 2);
        all &= report("equivalence checker separates the ground-truth cases",
                      id && near_miss && prod_sum);
    }
    {
        const BenchmarkSpec& spec = benchmark_by_name("nguyen9");
        auto [train, test] = generate_datasets(spec, 5);
        const std::vector<ClientDataset> parts = vertical_split(train, spec.client_vars);
        const Dataset merged = merge_clients(parts);
        all &= report("vertical split re-merges exactly",
                      merged.x == train.x && merged.y == train.y);
    }
    std::printf(all ? "verify: all checks passed\n" : "verify: FAILURES\n");
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symbolic regression over additively secret-shared vertical data"};
    app.require_subcommand(1);

    std::string benchmark = "nguyen9", mode = "plaintext", transport = "inproc", out = "results";
    int runs = 1, pop = 1000, gens = 50;
    unsigned ring_bits = 64, frac_bits = 16;
    u64 seed = 1;

    CLI::App* run = app.add_subcommand("run", "run a benchmark experiment");
    run->add_option("--benchmark", benchmark, "nguyen9|nguyen10|nguyen12|friedman2")
        ->check(CLI::IsMember({"nguyen9", "nguyen10", "nguyen12", "friedman2"}));
    run->add_option("--mode", mode)->check(CLI::IsMember({"plaintext", "secure"}));
    run->add_option("--runs", runs)->check(CLI::PositiveNumber);
    run->add_option("--seed", seed);
    run->add_option("--pop", pop)->check(CLI::PositiveNumber);
    run->add_option("--gens", gens)->check(CLI::NonNegativeNumber);
    run->add_option("--ring-bits", ring_bits)->check(CLI::Range(24u, 64u));
    run->add_option("--frac-bits", frac_bits)->check(CLI::Range(4u, 24u));
    run->add_option("--transport", transport)->check(CLI::IsMember({"inproc", "tcp"}));
    run->add_option("--out", out, "output path prefix for .csv/.json");

    CLI::App* verify = app.add_subcommand("verify", "run the quick oracle self-checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(benchmark, mode, runs, seed, pop, gens, ring_bits, frac_bits,
                               transport, out);
        if (verify->parsed()) return verify_command();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
