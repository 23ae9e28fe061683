#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "gancomm/errors.hpp"
#include "gancomm/experiment/diagnostics.hpp"
#include "gancomm/experiment/evaluate.hpp"
#include "gancomm/experiment/trainer.hpp"
#include "gancomm/nn/gradcheck.hpp"
#include "support/reference.hpp"

using namespace gancomm;
using namespace gancomm::experiment;
using channel::cd;
using channel::ChannelKind;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gancomm_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ExperimentConfig small_fcn(ChannelKind kind = ChannelKind::awgn) {
  ExperimentConfig c;
  c.name = "small";
  c.system = SystemKind::e2e_fcn;
  c.channel.kind = kind;
  c.eval.channel = c.channel;
  c.n = 4;
  c.k = 4;
  c.train.batch = 32;
  c.train.steps_r = c.train.steps_t = c.train.steps_gan = 4;
  c.train.warmup_gan = 3;
  c.train.outer = 3;
  c.train.plateau_window = 0;
  c.train.log_every = 2;
  return c;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"({"name": "a", "system": "e2e_cnn", "block": {"n": 8, "k": 8},
                                     "channel": {"kind": "multipath", "pdp": "exponential", "pilot_len": 3},
                                     "train": {"surrogate": "direct", "width_scale": 0.5},
                                     "eval": {"snr": "0:10:2", "channel": {"pdp": "equal"}}})");
  CHECK(cfg.name == "a");
  CHECK(cfg.system == SystemKind::e2e_cnn);
  CHECK(cfg.model_dir == "runs/a");
  CHECK(cfg.channel.pdp == channel::PdpKind::exponential);
  CHECK(cfg.eval.channel.pdp == channel::PdpKind::equal);
  CHECK(cfg.eval.channel.pilot_len == 3);
  CHECK(cfg.train.surrogate == Surrogate::direct);
  CHECK(cfg.train.batch == 320);
  CHECK(cfg.eval.snr_list == std::vector<double>{0, 2, 4, 6, 8, 10});
  CHECK(parse_config("{}").eval.snr_list.size() == 13);

  CHECK_THROWS_AS(parse_config(R"({"nmae": "typo"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"train": {"lr": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"system": "e2e_rnn"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"block": {"n": -1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"train": {"lr_tx": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"eval": {"snr": "0:10"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  // A learned system cannot be evaluated on a channel of another shape.
  CHECK_THROWS_AS(parse_config(R"({"system": "e2e_fcn", "eval": {"channel": {"kind": "rayleigh"}}})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("snr ranges") {
  CHECK(parse_snr_range("0:12:1").size() == 13);
  CHECK(parse_snr_range("-2:2:0.5").size() == 9);
  CHECK(parse_snr_range("0:0.3:0.1").size() == 4);
  CHECK(parse_snr_range("5:5:1") == std::vector<double>{5});
  CHECK_THROWS_AS(parse_snr_range("3:1:1"), ConfigError);
  CHECK_THROWS_AS(parse_snr_range("0:1:0"), ConfigError);
  CHECK_THROWS_AS(parse_snr_range("0:1:1x"), ConfigError);
}

TEST_CASE("config hashes") {
  const auto a = parse_config(R"({"seed": 3})");
  CHECK(a.hash() == parse_config(R"({"seed": 3})").hash());
  CHECK(a.hash().size() == 16);
  CHECK(a.hash() != parse_config(R"({"seed": 4})").hash());
  CHECK(a.hash() == parse_config(R"({"seed": 3, "eval": {"workers": 8}})").hash());
  CHECK(a.hash() == parse_config(R"({"seed": 3, "model_dir": "elsewhere"})").hash());
  const auto b = parse_config(R"({"seed": 3, "eval": {"min_errors": 10}})");
  CHECK(a.hash() != b.hash());
  CHECK(a.train_hash() == b.train_hash());
  CHECK(a.train_hash() != parse_config(R"({"seed": 3, "train": {"batch": 10}})").train_hash());
  // Round trip through the canonical form.
  CHECK(parse_config(a.canonical_json()).hash() == a.hash());
}

TEST_CASE("training batches") {
  Rng rng(1);
  const auto cfg = small_fcn(ChannelKind::rayleigh);
  const auto l = cfg.layout();
  const auto tr = model::build_from_table(l, rng);
  const Batch b = generate_batch(l, cfg.channel, tr.tx, 4000, 3.0, rng);
  CHECK(b.bits.shape() == nn::Shape{4000, 4});
  CHECK(b.y.shape() == l.y_shape(4000));
  REQUIRE(b.pilots);
  CHECK(b.realizations.size() == 4000);
  double ones = 0.0;
  for (double v : b.bits.data()) ones += v;
  CHECK(std::abs(ones / 16000.0 - 0.5) < 0.02);
  // y is the noiseless response plus the stored noise.
  for (std::size_t i : {0, 17, 3999}) {
    channel::ComplexBlock x(l.k);
    for (std::size_t k = 0; k < l.k; ++k) x[k] = {b.x.at(i, k, 0), b.x.at(i, k, 1)};
    const auto clean = propagate(x, b.realizations[i]);
    for (std::size_t k = 0; k < l.y_len; ++k) {
      CHECK(b.y.at(i, k, 0) == doctest::Approx(clean[k].real() + b.noise.at(i, k, 0)).epsilon(1e-12));
      CHECK(b.y.at(i, k, 1) == doctest::Approx(clean[k].imag() + b.noise.at(i, k, 1)).epsilon(1e-12));
    }
  }
  // Noise power matches sigma^2 = K / (N 10^(snr/10)).
  double p = 0.0;
  for (double v : b.noise.data()) p += v * v;
  CHECK(p / (4000.0 * l.y_len) == doctest::Approx(channel::snr_to_noise_var(3.0, 4, 4)).epsilon(0.03));

  Rng r1(5), r2(5);
  CHECK(generate_batch(l, cfg.channel, tr.tx, 8, 3.0, r1).y == generate_batch(l, cfg.channel, tr.tx, 8, 3.0, r2).y);
}

TEST_CASE("differentiable channel gradient") {
  for (auto kind : {ChannelKind::awgn, ChannelKind::rayleigh, ChannelKind::multipath}) {
    CAPTURE(channel::to_string(kind));
    for (auto fading : {channel::FadingMode::block, channel::FadingMode::symbol}) {
      Rng rng(11);
      channel::ChannelProfile prof{.kind = kind, .fading = fading, .pilot_len = kind == ChannelKind::multipath ? 3u : 1u};
      const auto l = model::Layout::make(model::Arch::fcn, 4, 5, false, prof);
      std::vector<channel::ChannelRealization> reals;
      for (int b = 0; b < 3; ++b) reals.push_back(channel::draw_realization(prof, l.k, 0.0, rng));
      nn::Parameter px("x", ref::random_tensor(l.x_shape(3), rng));
      const nn::Tensor w = ref::random_tensor(l.y_shape(3), rng);
      {
        nn::Tape tape;
        tape.backward(nn::weighted_sum(propagate_var(tape.param(px), reals, l), w));
      }
      auto f = [&] {
        nn::Tape t(false);
        return nn::weighted_sum(propagate_var(t.param(px), reals, l), w).value()[0];
      };
      CHECK(nn::max_relative_error(px.grad, nn::finite_difference_grad(f, px)) < 1e-6);
    }
  }
}

TEST_CASE("trainer phases are isolated") {
  Trainer t(small_fcn(ChannelKind::rayleigh));
  auto hashes = [&] {
    return std::array{t.transceiver().tx.hash(), t.transceiver().rx.hash(), t.gan().gen.hash(), t.gan().disc.hash()};
  };
  auto before = hashes();
  t.receiver_step(t.generate_batch());
  auto after = hashes();
  CHECK(after[0] == before[0]);
  CHECK(after[1] != before[1]);
  CHECK(after[2] == before[2]);
  CHECK(after[3] == before[3]);

  before = after;
  t.transmitter_step(t.generate_batch());
  after = hashes();
  CHECK(after[0] != before[0]);
  CHECK(after[1] == before[1]);
  CHECK(after[2] == before[2]);
  CHECK(after[3] == before[3]);

  before = after;
  t.gan_step(t.generate_gan_batch());
  after = hashes();
  CHECK(after[0] == before[0]);
  CHECK(after[1] == before[1]);
  CHECK(after[2] != before[2]);
  CHECK(after[3] != before[3]);
}

TEST_CASE("direct surrogate trains transmitter and receiver jointly") {
  auto cfg = small_fcn();
  cfg.train.surrogate = Surrogate::direct;
  Trainer t(cfg);
  const auto g = t.gan().gen.hash(), d = t.gan().disc.hash();
  const auto tx = t.transceiver().tx.hash(), rx = t.transceiver().rx.hash();
  t.transmitter_step(t.generate_batch());
  CHECK(t.transceiver().tx.hash() != tx);
  CHECK(t.transceiver().rx.hash() != rx);
  CHECK(t.gan().gen.hash() == g);
  CHECK(t.gan().disc.hash() == d);
  t.run();
  for (const auto& row : t.log()) CHECK(row.phase != "gan");
  CHECK(t.gan().gen.hash() == g);
}

TEST_CASE("receiver loss falls on a fixed batch") {
  Trainer t(small_fcn());
  const Batch b = t.generate_batch(256);
  const double first = t.receiver_step(b);
  double last = first;
  for (int i = 0; i < 200; ++i) last = t.receiver_step(b);
  CHECK(last < 0.8 * first);
}

TEST_CASE("schedule, stopping rule and logs") {
  auto cfg = small_fcn();
  Trainer t(cfg);
  t.run();
  CHECK(t.finished());
  CHECK(t.outer_done() == 3);
  CHECK(t.outer_losses().size() == 3);
  CHECK(t.log().front().phase == "warmup");
  // Per outer iteration: 2 log rows each for receiver, transmitter and gan.
  CHECK(t.log().size() == 2 + 3 * 6);
  CHECK_FALSE(t.run_outer_iteration());

  cfg.train.outer = 100;
  cfg.train.plateau_window = 1;
  cfg.train.plateau_tol = 10.0;  // any relative improvement is too small
  Trainer p(cfg);
  p.run();
  CHECK(p.outer_done() == 2);

  std::ostringstream os;
  t.write_log_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "outer_iter,phase,step,loss,d_loss,g_loss,wall_ms");
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(rows == t.log().size());
}

TEST_CASE("interrupted and resumed training equals an uninterrupted run") {
  const auto cfg = small_fcn(ChannelKind::rayleigh);
  Trainer whole(cfg);
  whole.run();

  const auto dir = scratch("resume");
  {
    Trainer first(cfg);
    first.run_outer_iteration();
    first.save(dir);
  }
  CHECK(std::filesystem::exists(dir / "model.gckp"));
  CHECK(std::filesystem::exists(dir / "train_log.csv"));
  Trainer resumed = Trainer::load(dir, cfg);
  CHECK(resumed.outer_done() == 1);
  resumed.run();
  CHECK(resumed.outer_losses() == whole.outer_losses());
  CHECK(resumed.transceiver().tx.hash() == whole.transceiver().tx.hash());
  CHECK(resumed.transceiver().rx.hash() == whole.transceiver().rx.hash());
  CHECK(resumed.gan().gen.hash() == whole.gan().gen.hash());
  CHECK(resumed.gan().disc.hash() == whole.gan().disc.hash());
  CHECK(resumed.log().size() == whole.log().size());

  auto other = cfg;
  other.seed = 99;
  CHECK_THROWS_AS(Trainer::load(dir, other), ConfigError);
  auto eval_only = cfg;
  eval_only.eval.min_errors = 7;
  CHECK_NOTHROW(Trainer::load(dir, eval_only));
  CHECK_THROWS_AS(Trainer::load(scratch("missing"), cfg), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("non-finite values abort with a diagnostic checkpoint") {
  const auto dir = scratch("nan");
  Trainer t(small_fcn());
  t.transceiver().rx.parameters()[0]->value[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(t.run(dir), NumericalError);
  CHECK(std::filesystem::exists(dir / "diagnostic" / "model.gckp"));
  CHECK(std::filesystem::exists(dir / "diagnostic" / "state.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("only learned systems train") {
  auto cfg = small_fcn();
  cfg.system = SystemKind::baseline_rsc;
  CHECK_THROWS_AS(Trainer{cfg}, ConfigError);
}

TEST_CASE("uncoded 4-QAM on AWGN follows Q(sqrt(2 Eb/N0))") {
  ExperimentConfig cfg;
  cfg.system = SystemKind::baseline_uncoded;
  cfg.n = 64;
  cfg.eval.min_errors = 4000;
  cfg.eval.unit_blocks = 200;
  cfg.eval.snr_list = {0.0, 4.0, 6.0};
  const auto points = monte_carlo_curve(*make_baseline(cfg), cfg.eval);
  for (const auto& p : points) {
    const double expect = q_function(std::sqrt(2.0 * std::pow(10.0, p.snr_db / 10.0)));
    CAPTURE(p.snr_db);
    CHECK(std::abs(p.ber - expect) < 3.0 * p.ci95);
    CHECK(p.bit_errors >= cfg.eval.min_errors);
    CHECK_FALSE(p.capped);
    CHECK(p.blocks % cfg.eval.unit_blocks == 0);
  }
  CHECK(points[0].ber > points[1].ber);
  CHECK(points[1].ber > points[2].ber);
}

TEST_CASE("baselines are error free at very high SNR") {
  for (auto sys : {SystemKind::baseline_uncoded, SystemKind::baseline_hamming, SystemKind::baseline_rsc,
                   SystemKind::baseline_ofdm, SystemKind::baseline_ofdm_coded}) {
    for (auto kind : {ChannelKind::awgn, ChannelKind::rayleigh, ChannelKind::multipath}) {
      const bool ofdm = sys == SystemKind::baseline_ofdm || sys == SystemKind::baseline_ofdm_coded;
      if (kind == ChannelKind::multipath && !ofdm) continue;
      CAPTURE(to_string(sys));
      CAPTURE(channel::to_string(kind));
      ExperimentConfig cfg;
      cfg.system = sys;
      cfg.n = ofdm ? 128 : 16;
      cfg.eval.channel.kind = kind;
      cfg.eval.max_blocks = 200;
      cfg.eval.unit_blocks = 100;
      cfg.eval.snr_list = {300.0};
      const auto p = monte_carlo_curve(*make_baseline(cfg), cfg.eval).front();
      CHECK(p.bit_errors == 0);
      CHECK(p.blocks == 200);
      CHECK(p.capped);
    }
  }
}

TEST_CASE("baseline framing and channel errors") {
  ExperimentConfig cfg;
  cfg.system = SystemKind::baseline_uncoded;
  cfg.n = 5;
  CHECK_THROWS_AS(make_baseline(cfg), ConfigError);
  cfg.system = SystemKind::baseline_hamming;
  cfg.n = 6;
  CHECK_THROWS_AS(make_baseline(cfg), ConfigError);
  cfg.system = SystemKind::baseline_rsc;
  cfg.eval.channel.kind = ChannelKind::multipath;
  CHECK_THROWS_AS(make_baseline(cfg), ConfigError);
  cfg.system = SystemKind::e2e_fcn;
  CHECK_THROWS_AS(make_baseline(cfg), ConfigError);
}

TEST_CASE("coding gain ordering on AWGN at 6 dB") {
  auto run = [](SystemKind sys) {
    ExperimentConfig cfg;
    cfg.system = sys;
    cfg.n = 64;
    cfg.eval.min_errors = 500;
    cfg.eval.snr_list = {6.0};
    return monte_carlo_curve(*make_baseline(cfg), cfg.eval).front().ber;
  };
  const double uncoded = run(SystemKind::baseline_uncoded);
  const double rsc = run(SystemKind::baseline_rsc);
  CHECK(rsc < uncoded);
}

TEST_CASE("results do not depend on the worker count") {
  ExperimentConfig cfg;
  cfg.system = SystemKind::baseline_rsc;
  cfg.n = 32;
  cfg.eval.channel.kind = ChannelKind::rayleigh;
  cfg.eval.min_errors = 300;
  cfg.eval.unit_blocks = 37;
  cfg.eval.snr_list = {2.0, 5.0};
  const auto serial = monte_carlo_curve(*make_baseline(cfg), cfg.eval);
  cfg.eval.workers = 3;
  const auto parallel = monte_carlo_curve(*make_baseline(cfg), cfg.eval);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].bits == parallel[i].bits);
    CHECK(serial[i].bit_errors == parallel[i].bit_errors);
    CHECK(serial[i].block_errors == parallel[i].block_errors);
  }

  Trainer t(small_fcn());
  t.run();
  auto lc = small_fcn();
  lc.eval.min_errors = 100;
  lc.eval.unit_blocks = 64;
  lc.eval.snr_list = {0.0};
  const auto ls = monte_carlo_curve(*make_learned(lc, t.transceiver(), true), lc.eval);
  lc.eval.workers = 4;
  const auto lp = monte_carlo_curve(*make_learned(lc, t.transceiver(), true), lc.eval);
  CHECK(ls[0].bit_errors == lp[0].bit_errors);
  CHECK(ls[0].blocks == lp[0].blocks);
  CHECK_THROWS_AS(make_learned(lc, t.transceiver(), false), ContractError);
}

TEST_CASE("wilson interval") {
  CHECK(wilson_halfwidth(0, 0) == 0.0);
  // Reference values from the closed form with z = 1.96.
  CHECK(wilson_halfwidth(50, 100) == doctest::Approx(0.09617).epsilon(1e-3));
  CHECK(wilson_halfwidth(0, 100) == doctest::Approx(0.0185).epsilon(1e-2));
  CHECK(wilson_halfwidth(10, 1000) < wilson_halfwidth(10, 100));
}

TEST_CASE("curve csv schema") {
  ExperimentConfig cfg;
  cfg.name = "csv";
  cfg.system = SystemKind::baseline_uncoded;
  std::vector<BerPoint> pts(2);
  pts[0] = {.snr_db = 0, .bits = 1000, .bit_errors = 80, .blocks = 250, .block_errors = 70, .ber = 0.08, .bler = 0.28};
  pts[1] = {.snr_db = 1.5, .bits = 10, .bit_errors = 0, .blocks = 2, .capped = true};
  std::ostringstream os;
  write_curve_csv(os, pts, cfg);
  std::istringstream is(os.str());
  std::string line;
  std::vector<std::string> comments, data;
  while (std::getline(is, line)) (line[0] == '#' ? comments : data).push_back(line);
  REQUIRE(data.size() == 3);
  CHECK(data[0] == "snr_db,ber,bler,bits,blocks,ci95");
  CHECK(data[1].rfind("0,8.0000000000e-02,2.8000000000e-01,1000,250,", 0) == 0);
  CHECK(os.str().find("config_hash=" + cfg.hash()) != std::string::npos);
  CHECK(os.str().find("Eb/N0") != std::string::npos);
  CHECK(comments.back().find("1.5") != std::string::npos);

  const auto dir = scratch("gnuplot");
  std::filesystem::create_directories(dir);
  write_gnuplot(dir / "curve", pts);
  CHECK(std::filesystem::exists(dir / "curve.ber.dat"));
  CHECK(std::filesystem::exists(dir / "curve.bler.dat"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("constellation dump") {
  auto cfg = small_fcn(ChannelKind::rayleigh);
  cfg.k = 1;
  cfg.train.gan_on_qam16 = true;
  Trainer t(cfg);
  Rng rng(3);
  const auto conds = default_conditions(cfg.channel);
  CHECK(conds.size() == 24);
  CHECK(default_conditions({}).size() == 1);
  const auto rows = constellation_dump(t, conds, 5, rng);
  std::size_t real = 0, fake = 0;
  for (const auto& r : rows) (r.gan ? fake : real) += 1;
  CHECK(real == 24 * 16 * 5);
  CHECK(fake == real);

  // Real rows cluster at h x with noise variance sigma^2 at the training SNR.
  const double var = channel::snr_to_noise_var(cfg.train.snr_db, cfg.n, cfg.k);
  double err = 0.0;
  for (const auto& r : rows)
    if (!r.gan) err += std::norm(r.y - r.pilot * r.x);
  CHECK(err / static_cast<double>(real) == doctest::Approx(var).epsilon(0.15));

  std::ostringstream os;
  write_constellation_csv(os, rows);
  CHECK(os.str().rfind("condition_id,source,x_re,x_im,pilot_re,pilot_im,re,im\n", 0) == 0);

  auto bad = small_fcn(ChannelKind::multipath);
  bad.channel.pilot_len = 3;
  bad.eval.channel = bad.channel;
  Trainer m(bad);
  CHECK_THROWS_AS(constellation_dump(m, {cd{1.0, 0.0}}, 1, rng), ConfigError);
}

TEST_CASE("gradcheck suite passes") {
  for (const auto& r : gradcheck_suite(20)) {
    CAPTURE(r.kind);
    CHECK(r.max_rel_error < 1e-4);
    CHECK(r.trials == 20);
  }
}
