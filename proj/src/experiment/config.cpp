#include "gancomm/experiment/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gancomm/errors.hpp"
#include "gancomm/model/network.hpp"

namespace gancomm::experiment {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::size_t read_count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

channel::ChannelProfile parse_channel(const json& c, channel::ChannelProfile p, const std::string& where) {
  reject_unknown(c, {"kind", "pdp", "taps", "pilot_len", "fading"}, where);
  if (c.contains("kind")) p.kind = channel::parse_channel_kind(c.at("kind").get<std::string>());
  if (c.contains("pdp")) p.pdp = channel::parse_pdp(c.at("pdp").get<std::string>());
  if (c.contains("fading")) p.fading = channel::parse_fading_mode(c.at("fading").get<std::string>());
  p.taps = read_count(c, "taps", p.taps);
  p.pilot_len = read_count(c, "pilot_len", p.pilot_len);
  if (p.taps == 0) throw ConfigError(where + ": taps must be positive");
  return p;
}

json channel_json(const channel::ChannelProfile& p) {
  return {{"kind", channel::to_string(p.kind)},
          {"pdp", channel::to_string(p.pdp)},
          {"taps", p.taps},
          {"pilot_len", p.pilot_len},
          {"fading", p.fading == channel::FadingMode::block ? "block" : "symbol"}};
}

}  // namespace

SystemKind parse_system(std::string_view s) {
  if (s == "e2e_fcn") return SystemKind::e2e_fcn;
  if (s == "e2e_cnn") return SystemKind::e2e_cnn;
  if (s == "baseline_uncoded") return SystemKind::baseline_uncoded;
  if (s == "baseline_hamming") return SystemKind::baseline_hamming;
  if (s == "baseline_rsc") return SystemKind::baseline_rsc;
  if (s == "baseline_ofdm") return SystemKind::baseline_ofdm;
  if (s == "baseline_ofdm_coded") return SystemKind::baseline_ofdm_coded;
  throw ConfigError("unknown system '" + std::string(s) + "'");
}

std::string_view to_string(SystemKind k) {
  switch (k) {
    case SystemKind::e2e_fcn:
      return "e2e_fcn";
    case SystemKind::e2e_cnn:
      return "e2e_cnn";
    case SystemKind::baseline_uncoded:
      return "baseline_uncoded";
    case SystemKind::baseline_hamming:
      return "baseline_hamming";
    case SystemKind::baseline_rsc:
      return "baseline_rsc";
    case SystemKind::baseline_ofdm:
      return "baseline_ofdm";
    case SystemKind::baseline_ofdm_coded:
      return "baseline_ofdm_coded";
  }
  return "?";
}

bool is_learned(SystemKind k) { return k == SystemKind::e2e_fcn || k == SystemKind::e2e_cnn; }

std::vector<double> parse_snr_range(const std::string& spec) {
  double a = 0, b = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(spec);
  if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !(is >> std::ws).eof())
    throw ConfigError("SNR range must look like a:b:step, got '" + spec + "'");
  if (!(step > 0.0) || b < a) throw ConfigError("SNR range needs step > 0 and b >= a");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

namespace {

ExperimentConfig from_json(const json& j) {
  reject_unknown(j, {"name", "system", "seed", "channel", "block", "train", "eval", "model_dir"}, "config");
  ExperimentConfig cfg;
  read(j, "name", cfg.name);
  cfg.model_dir = "runs/" + cfg.name;
  if (j.contains("system")) cfg.system = parse_system(j.at("system").get<std::string>());
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("model_dir")) cfg.model_dir = j.at("model_dir").get<std::string>();
  if (j.contains("channel")) cfg.channel = parse_channel(j.at("channel"), {}, "channel");

  if (j.contains("block")) {
    const json& b = j.at("block");
    reject_unknown(b, {"n", "k", "real_symbols"}, "block");
    cfg.n = read_count(b, "n", cfg.n);
    cfg.k = read_count(b, "k", cfg.k);
    read(b, "real_symbols", cfg.real_symbols);
  }
  if (cfg.n == 0 || cfg.k == 0) throw ConfigError("block sizes must be positive");

  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t,
                   {"batch", "snr_db", "steps_r", "steps_t", "steps_gan", "warmup_gan", "outer", "plateau_window",
                    "plateau_tol", "lr_tx", "lr_rx", "lr_gan", "gan_beta1", "k_d", "surrogate", "gan_inputs", "width_scale",
                    "checkpoint_every", "log_every"},
                   "train");
    auto& tc = cfg.train;
    tc.batch = read_count(t, "batch", tc.batch);
    read(t, "snr_db", tc.snr_db);
    tc.steps_r = read_count(t, "steps_r", tc.steps_r);
    tc.steps_t = read_count(t, "steps_t", tc.steps_t);
    tc.steps_gan = read_count(t, "steps_gan", tc.steps_gan);
    tc.warmup_gan = read_count(t, "warmup_gan", tc.warmup_gan);
    tc.outer = read_count(t, "outer", tc.outer);
    tc.plateau_window = read_count(t, "plateau_window", tc.plateau_window);
    read(t, "plateau_tol", tc.plateau_tol);
    read(t, "lr_tx", tc.lr_tx);
    read(t, "lr_rx", tc.lr_rx);
    read(t, "lr_gan", tc.lr_gan);
    read(t, "gan_beta1", tc.gan_beta1);
    read(t, "k_d", tc.k_d);
    if (t.contains("surrogate")) {
      const auto s = t.at("surrogate").get<std::string>();
      if (s == "gan") tc.surrogate = Surrogate::gan;
      else if (s == "direct") tc.surrogate = Surrogate::direct;
      else throw ConfigError("unknown surrogate '" + s + "'");
    }
    if (t.contains("gan_inputs")) {
      const auto s = t.at("gan_inputs").get<std::string>();
      if (s == "transmitter") tc.gan_on_qam16 = false;
      else if (s == "qam16") tc.gan_on_qam16 = true;
      else throw ConfigError("unknown gan_inputs '" + s + "'");
    }
    read(t, "width_scale", tc.width_scale);
    tc.checkpoint_every = read_count(t, "checkpoint_every", tc.checkpoint_every);
    tc.log_every = read_count(t, "log_every", tc.log_every);
    if (tc.batch == 0) throw ConfigError("train.batch must be positive");
    if (tc.k_d < 1) throw ConfigError("train.k_d must be at least 1");
    if (!(tc.lr_tx > 0 && tc.lr_rx > 0 && tc.lr_gan > 0)) throw ConfigError("learning rates must be positive");
    if (!(tc.gan_beta1 >= 0 && tc.gan_beta1 < 1)) throw ConfigError("train.gan_beta1 must be in [0, 1)");
    if (!(tc.width_scale > 0)) throw ConfigError("train.width_scale must be positive");
    if (tc.log_every == 0) tc.log_every = 1;
  }

  cfg.eval.channel = cfg.channel;
  cfg.eval.snr_list = parse_snr_range("0:12:1");
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    reject_unknown(e, {"snr_list", "snr", "min_errors", "max_blocks", "unit_blocks", "workers", "csi", "channel"},
                   "eval");
    auto& ec = cfg.eval;
    if (e.contains("snr_list") && e.contains("snr")) throw ConfigError("give eval.snr_list or eval.snr, not both");
    read(e, "snr_list", ec.snr_list);
    if (e.contains("snr")) ec.snr_list = parse_snr_range(e.at("snr").get<std::string>());
    ec.min_errors = read_count(e, "min_errors", ec.min_errors);
    ec.max_blocks = read_count(e, "max_blocks", ec.max_blocks);
    ec.unit_blocks = read_count(e, "unit_blocks", ec.unit_blocks);
    ec.workers = read_count(e, "workers", ec.workers);
    if (e.contains("csi")) {
      const auto s = e.at("csi").get<std::string>();
      if (s == "perfect") ec.csi = classical::CsiMode::perfect;
      else if (s == "estimated") ec.csi = classical::CsiMode::estimated;
      else throw ConfigError("unknown csi mode '" + s + "'");
    }
    if (e.contains("channel")) ec.channel = parse_channel(e.at("channel"), cfg.channel, "eval.channel");
    if (ec.snr_list.empty()) throw ConfigError("eval SNR list is empty");
    if (ec.unit_blocks == 0 || ec.max_blocks == 0) throw ConfigError("eval block counts must be positive");
    if (ec.workers == 0) ec.workers = 1;
  }
  if (is_learned(cfg.system)) {
    cfg.layout();  // validates the block/channel combination
    if (cfg.eval.channel.kind != cfg.channel.kind || cfg.eval.channel.taps != cfg.channel.taps ||
        cfg.eval.channel.pilot_len != cfg.channel.pilot_len)
      throw ConfigError("a learned system can only be evaluated on a channel with the same kind and shape");
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

model::Layout ExperimentConfig::layout() const {
  const auto arch = system == SystemKind::e2e_cnn ? model::Arch::cnn : model::Arch::fcn;
  return model::Layout::make(arch, n, k, real_symbols, channel);
}

std::string ExperimentConfig::canonical_json() const {
  const json j = {
      {"name", name},
      {"system", to_string(system)},
      {"seed", seed},
      {"channel", channel_json(channel)},
      {"block", {{"n", n}, {"k", k}, {"real_symbols", real_symbols}}},
      {"train",
       {{"batch", train.batch},
        {"snr_db", train.snr_db},
        {"steps_r", train.steps_r},
        {"steps_t", train.steps_t},
        {"steps_gan", train.steps_gan},
        {"warmup_gan", train.warmup_gan},
        {"outer", train.outer},
        {"plateau_window", train.plateau_window},
        {"plateau_tol", train.plateau_tol},
        {"lr_tx", train.lr_tx},
        {"lr_rx", train.lr_rx},
        {"lr_gan", train.lr_gan},
        {"gan_beta1", train.gan_beta1},
        {"k_d", train.k_d},
        {"surrogate", train.surrogate == Surrogate::gan ? "gan" : "direct"},
        {"gan_inputs", train.gan_on_qam16 ? "qam16" : "transmitter"},
        {"width_scale", train.width_scale},
        {"checkpoint_every", train.checkpoint_every},
        {"log_every", train.log_every}}},
      {"eval",
       {{"snr_list", eval.snr_list},
        {"min_errors", eval.min_errors},
        {"max_blocks", eval.max_blocks},
        {"unit_blocks", eval.unit_blocks},
        {"csi", eval.csi == classical::CsiMode::perfect ? "perfect" : "estimated"},
        {"channel", channel_json(eval.channel)}}},
  };
  return j.dump();
}

namespace {

std::string hex_hash(const std::string& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(model::fnv1a(s.data(), s.size())));
  return buf;
}

}  // namespace

std::string ExperimentConfig::hash() const { return hex_hash(canonical_json()); }

std::string ExperimentConfig::train_hash() const {
  json j = json::parse(canonical_json());
  j.erase("eval");
  return hex_hash(j.dump());
}

}  // namespace gancomm::experiment
