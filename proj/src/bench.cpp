#include "mpcsr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mpcsr/tcp.hpp"

namespace mpcsr {

namespace {

ExprPtr x(int k) { return Expr::variable(k); }
ExprPtr num(double v) { return Expr::constant(v); }

std::vector<BenchmarkSpec> build_suite() {
    std::vector<BenchmarkSpec> suite;
    // sin(x1) + sin(x2^2)
    suite.push_back(BenchmarkSpec{
        "nguyen9", 2, Expr::add(Expr::sin(x(1)), Expr::sin(Expr::mul(x(2), x(2)))), 20,
        {{1}, {2}}});
    // 2 sin(x1) cos(x2)
    suite.push_back(BenchmarkSpec{
        "nguyen10", 2, Expr::mul(num(2.0), Expr::mul(Expr::sin(x(1)), Expr::cos(x(2)))), 20,
        {{1}, {2}}});
    // x1^4 - x1^3 + x2^2/2 - x2
    const ExprPtr x1_2 = Expr::mul(x(1), x(1));
    const ExprPtr x1_3 = Expr::mul(x1_2, x(1));
    const ExprPtr x1_4 = Expr::mul(x1_2, x1_2);
    suite.push_back(BenchmarkSpec{
        "nguyen12", 2,
        Expr::add(Expr::sub(x1_4, x1_3),
                  Expr::sub(Expr::mul(num(0.5), Expr::mul(x(2), x(2))), x(2))),
        20,
        {{1}, {2}}});
    // 10 sin(pi x1 x2) + 20 (x3 - 1/2)^2 + 10 x4 + 5 x5
    const ExprPtr x3c = Expr::sub(x(3), num(0.5));
    suite.push_back(BenchmarkSpec{
        "friedman2", 5,
        Expr::add(Expr::add(Expr::mul(num(10.0),
                                      Expr::sin(Expr::mul(num(std::numbers::pi),
                                                          Expr::mul(x(1), x(2))))),
                            Expr::mul(num(20.0), Expr::mul(x3c, x3c))),
                  Expr::add(Expr::mul(num(10.0), x(4)), Expr::mul(num(5.0), x(5)))),
        20,
        {{1, 2, 3}, {4, 5}}});
    return suite;
}

}  // namespace

const std::vector<BenchmarkSpec>& benchmark_suite() {
    static const std::vector<BenchmarkSpec> suite = build_suite();
    return suite;
}

const BenchmarkSpec& benchmark_by_name(std::string_view name) {
    for (const BenchmarkSpec& spec : benchmark_suite())
        if (spec.name == name) return spec;
    throw MpcError("unknown benchmark: " + std::string(name));
}

namespace {

Dataset sample_dataset(const BenchmarkSpec& spec, u64 seed) {
    Rng rng(seed);
    Dataset data;
    data.x.resize(spec.sample_count, spec.n_vars);
    for (Eigen::Index i = 0; i < data.x.rows(); ++i)
        for (Eigen::Index j = 0; j < data.x.cols(); ++j) data.x(i, j) = rng.real01();
    data.y = eval_columns(*spec.ground_truth, data.x);
    return data;
}

}  // namespace

std::pair<Dataset, Dataset> generate_datasets(const BenchmarkSpec& spec, u64 seed) {
    return {sample_dataset(spec, seed), sample_dataset(spec, seed ^ 1)};
}

std::vector<ClientDataset> vertical_split(const Dataset& data,
                                          const std::vector<std::vector<int>>& assignment) {
    const int n = data.n_vars();
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    int covered = 0;
    for (const auto& vars : assignment) {
        for (const int v : vars) {
            if (v < 1 || v > n || used[v - 1])
                throw IncompletePartition("assignment is not a partition of the variables");
            used[v - 1] = true;
            ++covered;
        }
    }
    if (covered != n) throw IncompletePartition("assignment leaves variables unassigned");

    std::vector<ClientDataset> out;
    out.reserve(assignment.size());
    for (std::size_t c = 0; c < assignment.size(); ++c) {
        ClientDataset part;
        part.vars = assignment[c];
        part.x.resize(data.x.rows(), static_cast<Eigen::Index>(assignment[c].size()));
        for (std::size_t j = 0; j < assignment[c].size(); ++j)
            part.x.col(static_cast<Eigen::Index>(j)) = data.x.col(assignment[c][j] - 1);
        if (c + 1 == assignment.size()) part.y = data.y;
        out.push_back(std::move(part));
    }
    return out;
}

Dataset merge_clients(const std::vector<ClientDataset>& parts) {
    int n = 0;
    for (const ClientDataset& p : parts) n += static_cast<int>(p.vars.size());
    Dataset data;
    data.x.resize(parts.front().x.rows(), n);
    for (const ClientDataset& p : parts) {
        for (std::size_t j = 0; j < p.vars.size(); ++j)
            data.x.col(p.vars[j] - 1) = p.x.col(static_cast<Eigen::Index>(j));
        if (p.y) data.y = *p.y;
    }
    return data;
}

namespace {

const char* mode_name(RunMode mode) { return mode == RunMode::Plaintext ? "plaintext" : "secure"; }

RunRecord plaintext_run(const BenchmarkSpec& spec, const ExperimentOptions& options,
                        u64 master_seed, const Dataset& train, const Dataset& test) {
    GpConfig gp = options.gp;
    gp.n_vars = spec.n_vars;
    gp.rng_seed = derive_seed(master_seed, "gp");
    Rng rng(gp.rng_seed);
    const RunResult rr = evolve(gp, plaintext_oracle(train), rng);

    RunRecord rec;
    rec.train_mse = rr.best.fitness.value();
    rec.test_mse = fitness_mse(*rr.best.tree, test);
    rec.train_r2 = metric_r2(rec.train_mse, sst_over_m(train.y));
    rec.test_r2 = metric_r2(rec.test_mse, sst_over_m(test.y));
    rec.best_expr = format(*rr.best.tree);
    rec.generations = rr.generations;
    rec.recovered = equivalent(rr.best.tree, spec.ground_truth, spec.n_vars);
    return rec;
}

RunRecord secure_run(const BenchmarkSpec& spec, const ExperimentOptions& options, u64 master_seed,
                     const Dataset& train, const Dataset& test) {
    const std::vector<ClientDataset> train_parts = vertical_split(train, spec.client_vars);
    const std::vector<ClientDataset> test_parts = vertical_split(test, spec.client_vars);
    std::vector<ClientData> clients(train_parts.size());
    for (std::size_t c = 0; c < train_parts.size(); ++c) {
        clients[c].x_train = train_parts[c].x;
        clients[c].x_test = test_parts[c].x;
        if (train_parts[c].y) {
            clients[c].y_train = *train_parts[c].y;
            clients[c].y_test = *test_parts[c].y;
        }
    }

    SessionConfig session;
    session.session_id = master_seed;
    session.codec = options.codec;
    session.gp = options.gp;
    session.gp.n_vars = spec.n_vars;
    session.master_seed = master_seed;
    session.n_clients = static_cast<int>(clients.size());

    SecureRunSummary summary;
    if (options.transport == TransportKind::Tcp) {
        std::vector<Endpoint> endpoints{p0(), p1(), p2(), p3()};
        for (std::size_t j = 0; j < clients.size(); ++j)
            endpoints.push_back(client(static_cast<u8>(j)));
        TcpTransport transport(endpoints);
        summary = run_secure_session(session, clients, transport);
    } else {
        InProcTransport transport;
        summary = run_secure_session(session, clients, transport);
    }

    RunRecord rec;
    rec.train_mse = summary.train_mse;
    rec.test_mse = summary.test_mse;
    rec.train_r2 = summary.train_r2;
    rec.test_r2 = summary.test_r2;
    rec.best_expr = format(*summary.gp.best.tree);
    rec.generations = summary.gp.generations;
    rec.recovered = equivalent(summary.gp.best.tree, spec.ground_truth, spec.n_vars);
    rec.triples_used = summary.triples_used;
    return rec;
}

}  // namespace

RunRecord run_single(const BenchmarkSpec& spec, const ExperimentOptions& options,
                     u64 master_seed) {
    const auto started = std::chrono::steady_clock::now();
    auto [train, test] = generate_datasets(spec, derive_seed(master_seed, "data"));
    RunRecord rec = options.mode == RunMode::Plaintext
                        ? plaintext_run(spec, options, master_seed, train, test)
                        : secure_run(spec, options, master_seed, train, test);
    rec.benchmark = spec.name;
    rec.mode = mode_name(options.mode);
    rec.seed = master_seed;
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    return rec;
}

ExperimentResult run_experiment(const BenchmarkSpec& spec, const ExperimentOptions& options) {
    ExperimentResult result;
    result.runs.reserve(static_cast<std::size_t>(options.runs));
    int recovered = 0;
    for (int i = 0; i < options.runs; ++i) {
        RunRecord rec = run_single(spec, options, options.seed + static_cast<u64>(i));
        recovered += rec.recovered ? 1 : 0;
        result.runs.push_back(std::move(rec));
    }
    result.recovery_rate = options.runs > 0 ? static_cast<double>(recovered) / options.runs : 0.0;
    return result;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr const char* kCsvHeader =
    "benchmark,mode,seed,best_expr,train_mse,test_mse,train_r2,test_r2,recovered,generations,"
    "wall_ms,triples_used";

}  // namespace

std::string to_csv(const std::vector<RunRecord>& records) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const RunRecord& r : records) {
        if (r.best_expr.find(',') != std::string::npos)
            throw MpcError("expression text must not contain commas");
        out += r.benchmark + ',' + r.mode + ',' + std::to_string(r.seed) + ',' + r.best_expr +
               ',' + fmt_double(r.train_mse) + ',' + fmt_double(r.test_mse) + ',' +
               fmt_double(r.train_r2) + ',' + fmt_double(r.test_r2) + ',' +
               (r.recovered ? "1" : "0") + ',' + std::to_string(r.generations) + ',' +
               std::to_string(r.wall_ms) + ',' + std::to_string(r.triples_used) + '\n';
    }
    return out;
}

std::vector<RunRecord> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw MpcError("bad CSV header");
    std::vector<RunRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 12) throw MpcError("bad CSV row");
        RunRecord r;
        r.benchmark = fields[0];
        r.mode = fields[1];
        r.seed = std::stoull(fields[2]);
        r.best_expr = fields[3];
        r.train_mse = std::stod(fields[4]);
        r.test_mse = std::stod(fields[5]);
        r.train_r2 = std::stod(fields[6]);
        r.test_r2 = std::stod(fields[7]);
        r.recovered = fields[8] == "1";
        r.generations = std::stoi(fields[9]);
        r.wall_ms = std::stoll(fields[10]);
        r.triples_used = std::stoull(fields[11]);
        out.push_back(std::move(r));
    }
    return out;
}

u64 experiment_config_hash(const BenchmarkSpec& spec, const ExperimentOptions& options) {
    SessionConfig session;
    session.codec = options.codec;
    session.gp = options.gp;
    session.gp.n_vars = spec.n_vars;
    session.master_seed = options.seed;
    session.n_clients = static_cast<int>(spec.client_vars.size());
    u64 h = session.config_hash();
    h = fnv1a(spec.name, h);
    h = fnv1a(mode_name(options.mode), h);
    h = fnv1a(std::to_string(options.runs), h);
    return h;
}

std::string summary_json(const BenchmarkSpec& spec, const ExperimentOptions& options,
                         const ExperimentResult& result) {
    nlohmann::json j;
    j["benchmark"] = spec.name;
    j["mode"] = mode_name(options.mode);
    j["runs"] = options.runs;
    j["base_seed"] = options.seed;
    j["transport"] = options.transport == TransportKind::Tcp ? "tcp" : "inproc";
    char hash_hex[20];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(experiment_config_hash(spec, options)));
    j["config_hash"] = hash_hex;
    j["config"] = {{"population_size", options.gp.population_size},
                   {"tournament_size", options.gp.tournament_size},
                   {"mutation_prob", options.gp.mutation_prob},
                   {"crossover_prob", options.gp.crossover_prob},
                   {"min_subtree_depth", options.gp.min_subtree_depth},
                   {"max_subtree_depth", options.gp.max_subtree_depth},
                   {"max_depth", options.gp.max_depth},
                   {"max_length", options.gp.max_length},
                   {"max_generations", options.gp.max_generations},
                   {"elitism_count", options.gp.elitism_count},
                   {"n_vars", spec.n_vars},
                   {"ring_bits", options.codec.ring.bits},
                   {"frac_bits", options.codec.frac_bits}};
    j["ground_truth"] = format(*spec.ground_truth);

    double train_mse = 0, test_mse = 0, train_r2 = 0, test_r2 = 0, wall = 0;
    u64 triples = 0;
    int recovered = 0;
    for (const RunRecord& r : result.runs) {
        train_mse += r.train_mse;
        test_mse += r.test_mse;
        train_r2 += r.train_r2;
        test_r2 += r.test_r2;
        wall += static_cast<double>(r.wall_ms);
        triples += r.triples_used;
        recovered += r.recovered ? 1 : 0;
    }
    const double n = result.runs.empty() ? 1.0 : static_cast<double>(result.runs.size());
    j["recovered_runs"] = recovered;
    j["recovery_rate"] = result.recovery_rate;
    j["mean_train_mse"] = train_mse / n;
    j["mean_test_mse"] = test_mse / n;
    j["mean_train_r2"] = train_r2 / n;
    j["mean_test_r2"] = test_r2 / n;
    j["mean_wall_ms"] = wall / n;
    j["total_triples_used"] = triples;
    return j.dump(2);
}

}  // namespace mpcsr
