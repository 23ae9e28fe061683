#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gancomm/nn/tape.hpp"

namespace gancomm::nn {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Container layout, all integers little-endian:
//   "GCKP" | u32 version | u64 count
//   count x ( u64 name_len | name bytes (UTF-8) | u64 rank | rank x u64 extent
//             | extent-product x f64 )
inline constexpr char kCheckpointMagic[4] = {'G', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_tensors(std::ostream& os, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensors(std::istream& is);

void save_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_tensors(const std::filesystem::path& path);

/// Values plus Adam state: "<name>", "<name>#m", "<name>#v", "<name>#t".
std::vector<NamedTensor> export_parameters(std::span<Parameter* const> params);

/// Restores every parameter by name; throws ConfigError on a missing entry or
/// a shape mismatch. Adam state is restored when present.
void import_parameters(const std::vector<NamedTensor>& tensors, std::span<Parameter* const> params);

}  // namespace gancomm::nn
