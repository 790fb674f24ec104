#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "trackforge/entropy.hpp"
#include "trackforge/error.hpp"
#include "trackforge/flow.hpp"
#include "trackforge/geometry.hpp"
#include "trackforge/io.hpp"
#include "trackforge/pipeline.hpp"
#include "trackforge/ranking.hpp"
#include "trackforge/suppression.hpp"
#include "trackforge/synth.hpp"
#include "trackforge/track_builder.hpp"

namespace py = pybind11;
using namespace trackforge;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

FlowField field_from_arrays(const FloatArray& dx, const FloatArray& dy, int frame_index) {
  if (dx.ndim() != 2 || dy.ndim() != 2 || dx.shape(0) != dy.shape(0) || dx.shape(1) != dy.shape(1)) {
    throw DimensionMismatch("dx and dy must be 2-d arrays of equal shape (height, width)");
  }
  FlowField f(static_cast<int>(dx.shape(1)), static_cast<int>(dx.shape(0)), frame_index);
  std::memcpy(f.dx.data(), dx.data(), f.dx.size() * sizeof(float));
  std::memcpy(f.dy.data(), dy.data(), f.dy.size() * sizeof(float));
  return f;
}

FloatArray to_array(const std::vector<float>& v, int width, int height) {
  FloatArray out({height, width});
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(float));
  return out;
}

// None -> zero motion, str/path -> directory of .tflo files, list -> in-memory fields.
std::unique_ptr<FlowProvider> make_provider(const py::object& flow) {
  if (flow.is_none()) return std::make_unique<ZeroFlow>();
  if (py::isinstance<py::str>(flow) || py::hasattr(flow, "__fspath__")) {
    return std::make_unique<DirectoryFlow>(flow.cast<std::filesystem::path>());
  }
  return std::make_unique<FieldFlow>(flow.cast<std::vector<FlowField>>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Unsupervised object discovery by linking region proposals into tracks.";
  m.attr("__version__") = kToolVersion;

  static py::exception<Error> error(m, "TrackforgeError");
  static py::exception<ParseError> parse_error(m, "ParseError", error.ptr());
  static py::exception<MissingFlow> missing_flow(m, "MissingFlow", error.ptr());
  static py::exception<InvalidDistribution> invalid_distribution(m, "InvalidDistribution", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::set_error(parse_error, e.what());
    } catch (const MissingFlow& e) {
      py::set_error(missing_flow, e.what());
    } catch (const InvalidDistribution& e) {
      py::set_error(invalid_distribution, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<Box>(m, "Box")
      .def(py::init<double, double, double, double, double>(), py::arg("x"), py::arg("y"), py::arg("w"),
           py::arg("h"), py::arg("score") = 1.0)
      .def_readwrite("x", &Box::x)
      .def_readwrite("y", &Box::y)
      .def_readwrite("w", &Box::w)
      .def_readwrite("h", &Box::h)
      .def_readwrite("score", &Box::score)
      .def_property_readonly("area", &Box::area)
      .def(py::self == py::self)
      .def("__repr__", [](const Box& b) {
        return "Box(" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " + std::to_string(b.w) + ", " +
               std::to_string(b.h) + ", score=" + std::to_string(b.score) + ")";
      });

  py::enum_<Provenance>(m, "Provenance")
      .value("MATCHED", Provenance::Matched)
      .value("INTERPOLATED", Provenance::Interpolated);

  py::class_<TrackEntry>(m, "TrackEntry")
      .def(py::init<>())
      .def_readwrite("frame", &TrackEntry::frame)
      .def_readwrite("box", &TrackEntry::box)
      .def_readwrite("provenance", &TrackEntry::provenance)
      .def_readwrite("match_iou", &TrackEntry::match_iou)
      .def_readwrite("box_index", &TrackEntry::box_index)
      .def_property_readonly("matched", &TrackEntry::matched);

  py::class_<Track>(m, "Track")
      .def(py::init<>())
      .def_readwrite("id", &Track::id)
      .def_readwrite("video", &Track::video)
      .def_readwrite("entries", &Track::entries)
      .def_readwrite("e_score", &Track::e_score)
      .def_readwrite("i_score", &Track::i_score)
      .def_readwrite("rank_score", &Track::rank_score)
      .def_property_readonly("length", &Track::length)
      .def_property_readonly("first_frame", &Track::first_frame)
      .def_property_readonly("last_frame", &Track::last_frame)
      .def("__len__", &Track::length)
      .def(py::self == py::self)
      .def("to_json", [](const Track& t) { return track_to_json(t).dump(); })
      .def_static("from_json", [](const std::string& s) { return track_from_json(nlohmann::json::parse(s)); });

  py::class_<FrameProposals>(m, "FrameProposals")
      .def(py::init([](std::string video, int frame, std::vector<Box> boxes) {
             return FrameProposals{std::move(video), frame, std::move(boxes), {0.0, 1.0}};
           }),
           py::arg("video"), py::arg("frame"), py::arg("boxes"))
      .def_readwrite("video", &FrameProposals::video_id)
      .def_readwrite("frame", &FrameProposals::frame)
      .def_readwrite("boxes", &FrameProposals::boxes);

  py::class_<FlowField>(m, "FlowField")
      .def(py::init(&field_from_arrays), py::arg("dx"), py::arg("dy"), py::arg("frame_index") = 0)
      .def_static("uniform", &FlowField::uniform, py::arg("width"), py::arg("height"), py::arg("frame_index"),
                  py::arg("dx"), py::arg("dy"))
      .def_readonly("width", &FlowField::width)
      .def_readonly("height", &FlowField::height)
      .def_readwrite("frame_index", &FlowField::frame_index)
      .def_property_readonly("dx", [](const FlowField& f) { return to_array(f.dx, f.width, f.height); })
      .def_property_readonly("dy", [](const FlowField& f) { return to_array(f.dy, f.width, f.height); });

  m.def("read_flow", &read_flow, py::arg("path"));
  m.def("write_flow", &write_flow, py::arg("field"), py::arg("path"));
  m.def("mean_offset", [](const FlowField& f, const Box& b) {
    const Displacement d = mean_offset(f, b);
    return py::make_tuple(d.dx, d.dy);
  });
  m.def("mean_magnitude", &mean_magnitude, py::arg("field"), py::arg("box"));

  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def("viou", &viou, py::arg("a"), py::arg("b"));

  py::class_<BuilderConfig>(m, "BuilderConfig")
      .def(py::init([](double theta_tau, int gamma, int top_k) { return BuilderConfig{theta_tau, gamma, top_k}; }),
           py::arg("theta_tau") = 0.5, py::arg("gamma") = 5, py::arg("top_k") = 25)
      .def_readwrite("theta_tau", &BuilderConfig::theta_tau)
      .def_readwrite("gamma", &BuilderConfig::gamma)
      .def_readwrite("top_k", &BuilderConfig::top_k);

  m.def(
      "build_tracks",
      [](const std::vector<FrameProposals>& frames, const py::object& flow, const BuilderConfig& cfg) {
        auto provider = make_provider(flow);
        py::gil_scoped_release release;
        return build_tracks(frames, *provider, cfg);
      },
      py::arg("frames"), py::arg("flow") = py::none(), py::arg("config") = BuilderConfig{},
      "Link proposals into tracks. `flow` is None (zero motion), a directory of .tflo files "
      "or a list of FlowField.");

  m.def(
      "run_pipeline",
      [](const std::vector<FrameProposals>& frames, const py::object& flow, const BuilderConfig& builder,
         int min_length, double static_thresh, double lambda_, double nms_viou) {
        PipelineConfig cfg;
        cfg.builder = builder;
        cfg.suppression = {nms_viou, min_length, static_thresh};
        cfg.rank.lambda = lambda_;
        cfg.static_filter = !flow.is_none();
        auto provider = make_provider(flow);
        py::gil_scoped_release release;
        return run_pipeline(frames, *provider, cfg);
      },
      py::arg("frames"), py::arg("flow") = py::none(), py::arg("builder") = BuilderConfig{},
      py::arg("min_length") = 10, py::arg("static_thresh") = 1.0, py::arg("lambda_") = 0.5,
      py::arg("nms_viou") = 0.5);

  m.def("filter_short", &filter_short, py::arg("tracks"), py::arg("min_length") = 10);
  m.def(
      "filter_static",
      [](std::vector<Track> tracks, const py::object& flow, double thresh) {
        return filter_static(std::move(tracks), *make_provider(flow), thresh);
      },
      py::arg("tracks"), py::arg("flow"), py::arg("static_thresh") = 1.0);
  m.def(
      "track_motion", [](const Track& t, const py::object& flow) { return track_motion(t, *make_provider(flow)); },
      py::arg("track"), py::arg("flow"));
  m.def("temporal_nms", &temporal_nms, py::arg("tracks"), py::arg("nms_viou") = 0.5);
  m.def("rank_tracks", &rank_tracks, py::arg("tracks"), py::arg("lambda_") = 0.5);
  m.def("interpolate_gap", &interpolate_gap, py::arg("before"), py::arg("after"));

  m.def(
      "shannon_entropy",
      [](const std::vector<double>& p, std::optional<double> base) {
        return shannon_entropy(p, base.value_or(std::exp(1.0)));
      },
      py::arg("probs"), py::arg("base") = py::none());
  m.def(
      "validate_distribution", [](const std::vector<double>& p) { validate_distribution(p); }, py::arg("probs"));
  m.def(
      "track_representative", [](const Track& t) { return track_representative(t); }, py::arg("track"));
  m.def(
      "load_probabilities",
      [](const std::filesystem::path& path) {
        py::dict out;
        for (ProbVector& p : load_probabilities(path)) {
          out[py::make_tuple(p.ref.video, p.ref.frame, p.ref.box_index)] = std::move(p.probs);
        }
        return out;
      },
      py::arg("path"), "Returns {(video, frame, box_index): probabilities}.");

  m.def(
      "load_proposals", &load_proposals, py::arg("path"), py::arg("top_k") = 25,
      "Reads a proposal file; scores are min-max normalised per video and each frame keeps its top_k boxes.");
  m.def("load_tracks", &load_tracks, py::arg("path"));
  m.def(
      "write_tracks",
      [](const std::vector<Track>& tracks, const std::filesystem::path& path) { write_tracks(tracks, path); },
      py::arg("tracks"), py::arg("path"));

  py::class_<Scene>(m, "Scene")
      .def_readonly("frames", &Scene::frames)
      .def_readonly("flows", &Scene::flows)
      .def_readonly("ground_truth", &Scene::ground_truth)
      .def_property_readonly("spec", [](const Scene& s) { return s.spec.to_json().dump(); });
  m.def(
      "generate_scene",
      [](std::uint64_t seed, int objects, int logos, int frames, double jitter, int decoys, int width, int height) {
        return generate_scene(random_scene_spec(seed, objects, logos, frames, jitter, decoys, width, height));
      },
      py::arg("seed") = 1, py::arg("objects") = 3, py::arg("logos") = 1, py::arg("frames") = 60,
      py::arg("jitter") = 0.1, py::arg("decoys") = 10, py::arg("width") = 320, py::arg("height") = 240);
  m.def(
      "scene_from_json", [](const std::string& s) { return generate_scene(SceneSpec::from_json(nlohmann::json::parse(s))); },
      py::arg("spec"));
  m.def(
      "temporal_recall",
      [](const std::vector<Track>& predicted, const std::vector<Track>& truth, double thresh) {
        return temporal_recall(predicted, truth, thresh);
      },
      py::arg("predicted"), py::arg("ground_truth"), py::arg("iou_thresh") = 0.5);
}
