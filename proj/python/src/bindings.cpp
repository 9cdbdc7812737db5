#include "cadepth/code_eval.hpp"
#include "cadepth/commands.hpp"
#include "cadepth/config.hpp"
#include "cadepth/data_io.hpp"
#include "cadepth/learner.hpp"
#include "cadepth/optics.hpp"
#include "cadepth/parallel.hpp"
#include "cadepth/simulator.hpp"
#include "cadepth/wiener_depth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace cadepth;

namespace {

WienerConfig wiener_config(double nsr, const std::optional<std::vector<int>>& scales, const std::string& boundary,
                           double texture_floor) {
  WienerConfig w;
  w.nsr = nsr;
  if (scales) w.scales = *scales;
  w.boundary = parse_deconv_boundary(boundary);
  w.texture_floor = texture_floor;
  return w;
}

Config config_from(const py::dict& settings) {
  Config cfg;
  for (const auto& [k, v] : settings) cfg.set(py::str(k), py::str(v));
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_cadepth, m) {
  m.doc() = "Coded-aperture depth from defocus core";

  static py::exception<Error> base(m, "Error");
  static py::exception<InvalidConfiguration> invalid_config(m, "InvalidConfiguration", base.ptr());
  static py::exception<InvalidArgument> invalid_arg(m, "InvalidArgument", base.ptr());
  static py::exception<DegenerateKernel> degenerate(m, "DegenerateKernel", base.ptr());
  static py::exception<DivisionGuard> division(m, "DivisionGuard", base.ptr());
  static py::exception<IoError> io(m, "IoError", base.ptr());
  static py::exception<cli::UsageError> usage(m, "UsageError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const cli::UsageError& e) {
      usage(e.what());
    } catch (const InvalidConfiguration& e) {
      invalid_config(e.what());
    } catch (const InvalidArgument& e) {
      invalid_arg(e.what());
    } catch (const DegenerateKernel& e) {
      degenerate(e.what());
    } catch (const DivisionGuard& e) {
      division(e.what());
    } catch (const IoError& e) {
      io(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  py::class_<CameraConfig>(m, "CameraConfig")
      .def(py::init<>())
      .def_readwrite("focal_length_mm", &CameraConfig::focal_length_mm)
      .def_readwrite("pixel_pitch_um", &CameraConfig::pixel_pitch_um)
      .def_readwrite("f_number", &CameraConfig::f_number)
      .def_readwrite("focus_distance_m", &CameraConfig::focus_distance_m)
      .def_readwrite("max_kernel_size", &CameraConfig::max_kernel_size)
      .def("validate", &CameraConfig::validate)
      .def_property_readonly("num_classes", &CameraConfig::num_classes);

  py::class_<ApertureCode>(m, "ApertureCode")
      .def(py::init<Grid>(), py::arg("values"))
      .def_static("open", &ApertureCode::open, py::arg("side") = 11)
      .def_static("load", [](const std::filesystem::path& p) { return load_code(p); })
      .def("save", [](const ApertureCode& c, const std::filesystem::path& p) { save_code(p, c); })
      .def_property_readonly("values", &ApertureCode::values)
      .def_property_readonly("side", &ApertureCode::side)
      .def("is_binary", &ApertureCode::is_binary);

  m.def("depth_to_blur_size", &depth_to_blur_size, py::arg("depth_m"), py::arg("camera") = CameraConfig{});
  m.def("blur_radius_pixels", &blur_radius_pixels, py::arg("depth_m"), py::arg("camera") = CameraConfig{});
  m.def("discretize_depth", &discretize_depth, py::arg("depth"), py::arg("camera") = CameraConfig{});
  m.def(
      "scale_code", [](const ApertureCode& c, int s) { return scale_code(c, s).values; }, py::arg("code"),
      py::arg("size"));

  m.def(
      "convolve_patch",
      [](const Grid& patch, const ApertureCode& code, int s, const std::string& boundary) {
        return convolve_patch(patch, scale_code(code, s), parse_boundary(boundary));
      },
      py::arg("patch"), py::arg("code"), py::arg("size"), py::arg("boundary") = "reflect");

  m.def(
      "simulate_coded_image",
      [](const Grid& image, const IntGrid& sizes, const ApertureCode& code, const CameraConfig& cam,
         const std::string& boundary, double noise_sigma, std::uint64_t seed) {
        SimulationOptions o;
        o.boundary = parse_boundary(boundary);
        o.noise_sigma = noise_sigma;
        o.seed = seed;
        return simulate_coded_image(image, sizes, code, cam, o);
      },
      py::arg("image"), py::arg("sizes"), py::arg("code"), py::arg("camera") = CameraConfig{},
      py::arg("boundary") = "reflect", py::arg("noise_sigma") = 0.0, py::arg("seed") = 0);

  m.def(
      "kl_report",
      [](const ApertureCode& code, const std::optional<std::vector<int>>& scales, double amplitude, double epsilon,
         double noise_sigma) {
        const auto r = kl_report(code, scales ? *scales : all_sizes(13),
                                 PriorSpectrum::gradient_prior(kPatchSize, amplitude, epsilon, noise_sigma));
        py::dict d;
        d["scales"] = r.scales;
        d["kl"] = r.kl;
        d["score_min"] = r.score_min;
        d["score_mean"] = r.score_mean;
        return d;
      },
      py::arg("code"), py::arg("scales") = py::none(), py::arg("amplitude") = 1.0, py::arg("epsilon") = 1e-6,
      py::arg("noise_sigma") = 0.01);

  m.def(
      "wiener_deconvolve",
      [](const Grid& patch, const ApertureCode& code, int s, double nsr, const std::string& boundary) {
        return wiener_deconvolve(patch, scale_code(code, s), nsr, parse_deconv_boundary(boundary));
      },
      py::arg("patch"), py::arg("code"), py::arg("size"), py::arg("nsr") = 1e-3, py::arg("boundary") = "valid");

  m.def(
      "estimate_patch_scale",
      [](const Grid& patch, const ApertureCode& code, double nsr, const std::optional<std::vector<int>>& scales,
         const std::string& boundary, double texture_floor) {
        const auto e = estimate_patch_scale(patch, code, wiener_config(nsr, scales, boundary, texture_floor));
        py::dict d;
        d["best_scale"] = e.best_scale;
        d["confident"] = e.confident;
        d["residuals"] = e.residuals;
        d["scores"] = e.scores;
        return d;
      },
      py::arg("patch"), py::arg("code"), py::arg("nsr") = 1e-3, py::arg("scales") = py::none(),
      py::arg("boundary") = "valid", py::arg("texture_floor") = 0.01);

  m.def(
      "estimate_depth_map_wiener",
      [](const Grid& image, const ApertureCode& code, int stride, double nsr, const std::string& boundary,
         double texture_floor, int max_kernel_size, int threads) {
        const WienerConfig cfg = wiener_config(nsr, all_sizes(max_kernel_size), boundary, texture_floor);
        DepthEstimate est;
        {
          py::gil_scoped_release release;
          est = estimate_depth_map_wiener(image, code, cfg, stride, max_kernel_size, threads);
        }
        size_t low = 0;
        for (const auto& v : est.votes) low += !v.confident;
        return py::make_tuple(est.sizes, est.votes.empty() ? 0.0 : double(low) / double(est.votes.size()));
      },
      py::arg("image"), py::arg("code"), py::arg("stride") = 8, py::arg("nsr") = 1e-3, py::arg("boundary") = "valid",
      py::arg("texture_floor") = 0.01, py::arg("max_kernel_size") = 13, py::arg("threads") = 1);

  m.def(
      "estimate_depth_map_cnn",
      [](const Grid& image, const std::filesystem::path& checkpoint, int stride, int threads) {
        return estimate_depth_map_cnn(image, load_checkpoint(checkpoint).params, stride, threads).sizes;
      },
      py::arg("image"), py::arg("checkpoint"), py::arg("stride") = 8, py::arg("threads") = 1);

  m.def(
      "make_synthetic_scene",
      [](const std::vector<double>& depths, const std::string& layout, const std::string& texture, int height,
         int width, std::uint64_t seed) {
        SyntheticSpec s;
        s.depths = depths;
        s.layout = parse_layout(layout);
        s.texture = parse_texture(texture);
        s.height = height;
        s.width = width;
        s.seed = seed;
        const Scene scene = make_synthetic_scene(s);
        return py::make_tuple(scene.image, *scene.depth);
      },
      py::arg("depths"), py::arg("layout") = "planes", py::arg("texture") = "noise", py::arg("height") = 160,
      py::arg("width") = 160, py::arg("seed") = 0);

  m.def(
      "run",
      [](const std::string& command, const py::dict& settings) {
        const Config cfg = config_from(settings);
        set_default_threads(static_cast<int>(cfg.get_long("threads", 1)));
        py::gil_scoped_release release;
        if (command == "simulate") {
          cli::cmd_simulate(cfg);
        } else if (command == "eval-code") {
          cli::cmd_eval_code(cfg);
        } else if (command == "estimate") {
          cli::cmd_estimate(cfg);
        } else if (command == "train") {
          cli::cmd_train(cfg);
        } else if (command == "compare") {
          cli::cmd_compare(cfg);
        } else if (command == "make-scenes") {
          cli::cmd_make_scenes(cfg);
        } else {
          throw cli::UsageError("unknown command: " + command);
        }
      },
      py::arg("command"), py::arg("settings"),
      "Run a command-line subcommand in process; settings are config keys (out, code, seed, ...).");
}
