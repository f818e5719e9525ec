#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mpcsr {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// Dense containers. Ring values live in uint64 (wraparound is the ring
// arithmetic); reals use double.
using RingVector = Eigen::Matrix<u64, Eigen::Dynamic, 1>;
using RingMatrix = Eigen::Matrix<u64, Eigen::Dynamic, Eigen::Dynamic>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct MpcError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MagnitudeOverflow : MpcError {
    using MpcError::MpcError;
};
struct IndexMismatch : MpcError {
    using MpcError::MpcError;
};
struct TripleExhausted : MpcError {
    using MpcError::MpcError;
};
struct ChannelFailure : MpcError {
    using MpcError::MpcError;
};
struct DimensionMismatch : MpcError {
    using MpcError::MpcError;
};
struct DegenerateTarget : MpcError {
    using MpcError::MpcError;
};
struct IncompletePartition : MpcError {
    using MpcError::MpcError;
};
struct ProtocolError : MpcError {
    using MpcError::MpcError;
};

// Expression text that does not parse; offset is the byte position of the
// first offending character.
struct ParseError : MpcError {
    ParseError(const std::string& what, std::size_t offset)
        : MpcError(what + " at offset " + std::to_string(offset)), offset(offset) {}
    std::size_t offset;
};

}  // namespace mpcsr
