#pragma once

#include "mpcsr/protocol.hpp"

namespace mpcsr {

struct BenchmarkSpec {
    std::string name;
    int n_vars = 2;
    ExprPtr ground_truth;
    int sample_count = 20;
    // 1-based variable indices per client; the last client also owns y
    std::vector<std::vector<int>> client_vars;
};

const std::vector<BenchmarkSpec>& benchmark_suite();
const BenchmarkSpec& benchmark_by_name(std::string_view name);  // throws MpcError

// train uses `seed`, test uses `seed ^ 1`; every variable is uniform in [0,1)
std::pair<Dataset, Dataset> generate_datasets(const BenchmarkSpec& spec, u64 seed);

struct ClientDataset {
    std::vector<int> vars;  // column indices into the joint matrix, 1-based
    MatrixXd x;
    std::optional<VectorXd> y;  // last client only
};

// throws IncompletePartition unless the assignment partitions 1..n_vars
std::vector<ClientDataset> vertical_split(const Dataset& data,
                                          const std::vector<std::vector<int>>& assignment);
// inverse of vertical_split (restores column order); test helper
Dataset merge_clients(const std::vector<ClientDataset>& parts);

enum class RunMode : u8 { Plaintext = 0, Secure = 1 };
enum class TransportKind : u8 { InProc = 0, Tcp = 1 };

struct ExperimentOptions {
    RunMode mode = RunMode::Plaintext;
    TransportKind transport = TransportKind::InProc;
    int runs = 1;
    u64 seed = 1;
    GpConfig gp{};  // n_vars is overwritten per benchmark
    FixedCodec codec{};
};

struct RunRecord {
    std::string benchmark;
    std::string mode;
    u64 seed = 0;
    std::string best_expr;
    double train_mse = 0, test_mse = 0;
    double train_r2 = 0, test_r2 = 0;
    bool recovered = false;
    int generations = 0;
    i64 wall_ms = 0;
    u64 triples_used = 0;
};

struct ExperimentResult {
    std::vector<RunRecord> runs;
    double recovery_rate = 0;
};

// run i uses master seed options.seed + i; every stream inside derives from it
RunRecord run_single(const BenchmarkSpec& spec, const ExperimentOptions& options, u64 master_seed);
ExperimentResult run_experiment(const BenchmarkSpec& spec, const ExperimentOptions& options);

std::string to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_csv(const std::string& text);
std::string summary_json(const BenchmarkSpec& spec, const ExperimentOptions& options,
                         const ExperimentResult& result);
u64 experiment_config_hash(const BenchmarkSpec& spec, const ExperimentOptions& options);

}  // namespace mpcsr
