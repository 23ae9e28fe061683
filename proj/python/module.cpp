#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gancomm/classical/coding.hpp"
#include "gancomm/classical/ofdm.hpp"
#include "gancomm/classical/qam.hpp"
#include "gancomm/errors.hpp"
#include "gancomm/experiment/diagnostics.hpp"
#include "gancomm/experiment/evaluate.hpp"
#include "gancomm/experiment/trainer.hpp"
#include "gancomm/runtime.hpp"

namespace py = pybind11;
using namespace gancomm;
using namespace gancomm::experiment;
using classical::BitBlock;
using cd = std::complex<double>;

namespace {

// Configs arrive as JSON text or as a dict.
ExperimentConfig to_config(const py::object& cfg) {
  if (py::isinstance<ExperimentConfig>(cfg)) return cfg.cast<ExperimentConfig>();
  if (py::isinstance<py::str>(cfg)) return parse_config(cfg.cast<std::string>());
  return parse_config(py::module_::import("json").attr("dumps")(cfg).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "GAN-bridged end-to-end transceiver lab";
  tune_allocator();

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FramingError>(m, "FramingError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());

  m.def("snr_to_noise_var", &channel::snr_to_noise_var, py::arg("snr_db"), py::arg("bits_per_block"),
        py::arg("symbols_per_block"));
  m.def("wilson_halfwidth", [](std::size_t e, std::size_t n) { return wilson_halfwidth(e, n); }, py::arg("errors"),
        py::arg("trials"));

  m.def("qam_mod", [](const BitBlock& bits, int order) { return classical::qam_mod(bits, order); }, py::arg("bits"),
        py::arg("order") = 4);
  m.def(
      "qam_demod",
      [](const std::vector<cd>& y, int order, double noise_var, const std::vector<cd>& gains) {
        auto d = classical::qam_demod(y, gains, order, noise_var);
        return py::make_tuple(d.hard, d.llr);
      },
      py::arg("y"), py::arg("order") = 4, py::arg("noise_var") = 1.0, py::arg("gains") = std::vector<cd>{},
      "Returns (hard bits, max-log LLRs log P(0)/P(1)).");
  m.def("hamming74_encode", [](const BitBlock& info) { return classical::hamming74_encode_stream(info); },
        py::arg("info"));
  m.def(
      "hamming74_mld",
      [](const std::vector<double>& y, const std::vector<double>& gains) { return classical::hamming74_mld(y, gains); },
      py::arg("y"), py::arg("gains") = std::vector<double>{});
  m.def("rsc_encode", [](const BitBlock& info) { return classical::rsc_encode(info); }, py::arg("info"));
  m.def("viterbi_decode", [](const std::vector<double>& llr) { return classical::viterbi_decode(llr); },
        py::arg("llr"));
  m.def("fft", &classical::fft, py::arg("x"));
  m.def("ifft", &classical::ifft, py::arg("x"));

  m.def(
      "gradcheck",
      [](std::size_t seeds) {
        py::dict out;
        for (const auto& r : gradcheck_suite(seeds)) out[py::str(r.kind)] = r.max_rel_error;
        return out;
      },
      py::arg("seeds") = 100, "Largest relative error against finite differences, per layer kind.");

  py::class_<ExperimentConfig>(m, "Config")
      .def_readonly("name", &ExperimentConfig::name)
      .def_property_readonly("system", [](const ExperimentConfig& c) { return std::string(to_string(c.system)); })
      .def_readonly("seed", &ExperimentConfig::seed)
      .def_readonly("n", &ExperimentConfig::n)
      .def_readonly("k", &ExperimentConfig::k)
      .def_property_readonly("snr_list", [](const ExperimentConfig& c) { return c.eval.snr_list; })
      .def("hash", &ExperimentConfig::hash)
      .def("train_hash", &ExperimentConfig::train_hash)
      .def("canonical_json", &ExperimentConfig::canonical_json);
  m.def("parse_config", &to_config, py::arg("config"), "Parses JSON text or a dict into a validated Config.");

  py::class_<BerPoint>(m, "BerPoint")
      .def_readonly("snr_db", &BerPoint::snr_db)
      .def_readonly("bits", &BerPoint::bits)
      .def_readonly("bit_errors", &BerPoint::bit_errors)
      .def_readonly("blocks", &BerPoint::blocks)
      .def_readonly("block_errors", &BerPoint::block_errors)
      .def_readonly("ber", &BerPoint::ber)
      .def_readonly("bler", &BerPoint::bler)
      .def_readonly("ci95", &BerPoint::ci95)
      .def_readonly("capped", &BerPoint::capped)
      .def("__repr__", [](const BerPoint& p) {
        return "BerPoint(snr_db=" + std::to_string(p.snr_db) + ", ber=" + std::to_string(p.ber) +
               ", bler=" + std::to_string(p.bler) + ", blocks=" + std::to_string(p.blocks) + ")";
      });

  m.def(
      "baseline_curve",
      [](const py::object& cfg) {
        const ExperimentConfig c = to_config(cfg);
        py::gil_scoped_release release;
        return monte_carlo_curve(*make_baseline(c), c.eval);
      },
      py::arg("config"));

  py::class_<Trainer>(m, "Trainer")
      .def(py::init([](const py::object& cfg) { return Trainer(to_config(cfg)); }), py::arg("config"))
      .def(
          "run",
          [](Trainer& t, std::optional<std::filesystem::path> dir) {
            py::gil_scoped_release release;
            t.run(dir);
          },
          py::arg("checkpoint_dir") = py::none())
      .def("run_outer_iteration", &Trainer::run_outer_iteration)
      .def("save", &Trainer::save, py::arg("dir"))
      .def_static(
          "load", [](const std::filesystem::path& dir, const py::object& cfg) { return Trainer::load(dir, to_config(cfg)); },
          py::arg("dir"), py::arg("config"))
      .def_property_readonly("config", &Trainer::config)
      .def_property_readonly("finished", &Trainer::finished)
      .def_property_readonly("outer_done", &Trainer::outer_done)
      .def_property_readonly("outer_losses", &Trainer::outer_losses)
      .def_property_readonly("log",
                             [](const Trainer& t) {
                               py::list rows;
                               for (const auto& r : t.log())
                                 rows.append(py::dict(py::arg("outer_iter") = r.outer, py::arg("phase") = r.phase,
                                                      py::arg("step") = r.step, py::arg("loss") = r.loss,
                                                      py::arg("d_loss") = r.d_loss, py::arg("g_loss") = r.g_loss));
                               return rows;
                             })
      .def(
          "constellation",
          [](const Trainer& t, std::size_t samples, std::uint64_t seed) {
            Rng rng(seed);
            py::list rows;
            for (const auto& r : constellation_dump(t, default_conditions(t.config().channel), samples, rng))
              rows.append(py::make_tuple(r.condition, r.gan ? "gan" : "real", r.x, r.pilot, r.y));
            return rows;
          },
          py::arg("samples") = 100, py::arg("seed") = 0,
          "Rows (condition_id, source, x, pilot, y) from the real channel and the generator.");

  m.def(
      "learned_curve",
      [](const Trainer& t, const py::object& snr_list) {
        ExperimentConfig c = t.config();
        if (!snr_list.is_none()) c.eval.snr_list = snr_list.cast<std::vector<double>>();
        py::gil_scoped_release release;
        return monte_carlo_curve(*make_learned(c, t.transceiver(), t.outer_done() > 0), c.eval);
      },
      py::arg("trainer"), py::arg("snr_list") = py::none(), "BER/BLER over the real channel.");
}
