#pragma once

#include <optional>

#include "mpcsr/gp.hpp"
#include "mpcsr/ring.hpp"
#include "mpcsr/transport.hpp"

namespace mpcsr {

// Fitness values P3 reconstructs outside this window are wraparound evidence
// and become the worst-fitness sentinel; small negatives are truncation noise
// and clamp to zero.
inline constexpr double kFitnessNoiseFloor = -0.5;
inline constexpr double kFitnessPlausibleMax = 1e9;

struct SessionConfig {
    u64 session_id = 1;
    FixedCodec codec{};
    GpConfig gp{};
    u64 master_seed = 1;
    int n_clients = 2;
    u64 triple_batch = u64{1} << 14;
    u64 triple_budget = ~u64{0};  // total triples P2 will deal
    FitnessTag fitness = FitnessTag::Mse;

    u64 config_hash() const;
    void validate() const;
};

// One client's private vertical slice (same rows, its own columns); only the
// last client carries y.
struct ClientData {
    MatrixXd x_train, x_test;
    std::optional<VectorXd> y_train, y_test;
};

struct SecureRunSummary {
    RunResult gp;
    double train_mse = 0, test_mse = 0;
    double train_r2 = 0, test_r2 = 0;
    u64 triples_used = 0;
    u64 opening_rounds = 0;
    u64 predicted_rounds = 0;  // sum of fitness_rounds over every evaluated tree
};

// Party state machines. Each runs single-threaded over the transport.
void client_main(Transport& transport, const SessionConfig& config, u8 index,
                 const ClientData& data);
void dealer_main(Transport& transport, const SessionConfig& config);
void compute_main(Transport& transport, const SessionConfig& config, int party);
SecureRunSummary coordinator_main(Transport& transport, const SessionConfig& config);

// Spawns clients, dealer and compute parties on threads, runs the coordinator
// inline, joins everything and propagates the first failure.
SecureRunSummary run_secure_session(const SessionConfig& config,
                                    const std::vector<ClientData>& clients,
                                    Transport& transport);

}  // namespace mpcsr
