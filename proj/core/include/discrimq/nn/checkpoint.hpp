#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discrimq/nn/param_store.hpp"

namespace discrimq::nn {

/// Container layout (all integers little-endian):
///
///   "DQCK" | u32 format version | u64 manifest length | manifest JSON | payload
///
/// The manifest lists format_version, dtype, step, and per tensor its name,
/// rows, cols and trainable flag; `meta` carries model hyperparameters. The
/// payload holds each tensor's values in manifest order as raw IEEE-754
/// little-endian floats of the declared dtype.
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
struct Checkpoint {
    ParamStore<T> params;
    nlohmann::json meta = nlohmann::json::object();
};

template <typename T>
std::vector<std::uint8_t> encode_checkpoint(ParamStore<T> const& params, nlohmann::json const& meta);

template <typename T>
Checkpoint<T> decode_checkpoint(std::vector<std::uint8_t> const& bytes);

template <typename T>
void save_checkpoint(std::filesystem::path const& path, ParamStore<T> const& params, nlohmann::json const& meta);

template <typename T>
Checkpoint<T> load_checkpoint(std::filesystem::path const& path);

/// Copies values of every tensor in `source` into the same-named tensor of
/// `target`; names and shapes must agree exactly.
template <typename T>
void assign_params(ParamStore<T>& target, ParamStore<T> const& source);

}  // namespace discrimq::nn
