#pragma once

#include <filesystem>

namespace gancomm::tools {

/// Writes hamming74.csv, rsc57.csv and viterbi_ml.csv into `dir`, computed
/// by brute-force oracles that share no code with the library decoders.
void write_goldens(const std::filesystem::path& dir);

}  // namespace gancomm::tools
