#include "gancomm/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "gancomm/errors.hpp"

namespace gancomm::nn {

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw ConfigError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

constexpr std::uint64_t kMaxRank = 16;
constexpr std::uint64_t kMaxName = 4096;

}  // namespace

void write_tensors(std::ostream& os, const std::vector<NamedTensor>& tensors) {
  os.write(kCheckpointMagic, 4);
  const std::uint32_t ver = kCheckpointVersion;
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((ver >> (8 * i)) & 0xff));
  put_u64(os, tensors.size());
  for (const auto& [name, value] : tensors) {
    put_u64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(os, value.rank());
    for (auto e : value.shape()) put_u64(os, e);
    for (double d : value.data()) put_u64(os, std::bit_cast<std::uint64_t>(d));
  }
  if (!os) throw ConfigError("failed writing checkpoint");
}

std::vector<NamedTensor> read_tensors(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) throw ConfigError("not a checkpoint file");
  unsigned char vb[4];
  if (!is.read(reinterpret_cast<char*>(vb), 4)) throw ConfigError("checkpoint truncated");
  const std::uint32_t ver = vb[0] | (vb[1] << 8) | (vb[2] << 16) | (static_cast<std::uint32_t>(vb[3]) << 24);
  if (ver != kCheckpointVersion) throw ConfigError("unsupported checkpoint version " + std::to_string(ver));
  const std::uint64_t count = get_u64(is);
  std::vector<NamedTensor> out;
  for (std::uint64_t n = 0; n < count; ++n) {
    const std::uint64_t len = get_u64(is);
    if (len > kMaxName) throw ConfigError("checkpoint name too long");
    std::string name(len, '\0');
    if (!is.read(name.data(), static_cast<std::streamsize>(len))) throw ConfigError("checkpoint truncated");
    const std::uint64_t rank = get_u64(is);
    if (rank == 0 || rank > kMaxRank) throw ConfigError("checkpoint entry '" + name + "' has bad rank");
    Shape shape(rank);
    for (auto& e : shape) e = get_u64(is);
    std::vector<double> data(shape_size(shape));
    for (double& d : data) d = std::bit_cast<double>(get_u64(is));
    out.push_back({std::move(name), Tensor(std::move(shape), std::move(data))});
  }
  return out;
}

void save_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  write_tensors(os, tensors);
}

std::vector<NamedTensor> load_tensors(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint " + path.string());
  return read_tensors(is);
}

std::vector<NamedTensor> export_parameters(std::span<Parameter* const> params) {
  std::vector<NamedTensor> out;
  for (const Parameter* p : params) {
    out.push_back({p->name, p->value});
    out.push_back({p->name + "#m", p->m});
    out.push_back({p->name + "#v", p->v});
    out.push_back({p->name + "#t", Tensor({1}, static_cast<double>(p->step))});
  }
  return out;
}

void import_parameters(const std::vector<NamedTensor>& tensors, std::span<Parameter* const> params) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& t : tensors) by_name[t.name] = &t.value;
  auto fetch = [&](const std::string& name, const Shape& shape, bool required) -> const Tensor* {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      if (required) throw ConfigError("checkpoint has no entry '" + name + "'");
      return nullptr;
    }
    if (it->second->shape() != shape)
      throw ConfigError("checkpoint entry '" + name + "' has shape " + shape_string(it->second->shape()) +
                        ", expected " + shape_string(shape));
    return it->second;
  };
  for (Parameter* p : params) {
    p->value = *fetch(p->name, p->value.shape(), true);
    if (auto* m = fetch(p->name + "#m", p->value.shape(), false)) p->m = *m;
    if (auto* v = fetch(p->name + "#v", p->value.shape(), false)) p->v = *v;
    if (auto* t = fetch(p->name + "#t", Shape{1}, false)) p->step = static_cast<std::int64_t>((*t)[0]);
    p->grad = Tensor(p->value.shape(), 0.0);
  }
}

}  // namespace gancomm::nn
