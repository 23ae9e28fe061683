#include "gancomm/rng.hpp"

#include <bit>
#include <sstream>

#include "gancomm/errors.hpp"

namespace gancomm {

// Text form: "<engine state> | <cached bits> <has_cached>". The cached
// deviate is stored as raw bits so restoring is exact.
std::string Rng::serialize() const {
  std::ostringstream os;
  os << engine_ << " | " << std::bit_cast<std::uint64_t>(cached_) << ' ' << (has_cached_ ? 1 : 0);
  return os.str();
}

Rng Rng::deserialize(const std::string& text) {
  const auto bar = text.find(" | ");
  if (bar == std::string::npos) throw ConfigError("malformed rng state");
  Rng rng;
  std::istringstream es(text.substr(0, bar));
  es >> rng.engine_;
  std::istringstream cs(text.substr(bar + 3));
  std::uint64_t bits = 0;
  int flag = 0;
  cs >> bits >> flag;
  if (es.fail() || cs.fail()) throw ConfigError("malformed rng state");
  rng.cached_ = std::bit_cast<double>(bits);
  rng.has_cached_ = flag != 0;
  return rng;
}

}  // namespace gancomm
