// Copyright 2026 The Viewspan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/iostream.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>
#include <vector>

#include "commands.hpp"
#include "viewspan/analysis.hpp"
#include "viewspan/detector.hpp"
#include "viewspan/error.hpp"
#include "viewspan/metrics.hpp"
#include "viewspan/pointmap_io.hpp"
#include "viewspan/rng.hpp"
#include "viewspan/synthetic.hpp"

namespace py = pybind11;
using namespace viewspan;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <typename Vec>
py::array_t<double> vectors_to_numpy(const Grid<Vec>& g) {
  constexpr int n = Vec::RowsAtCompileTime;
  py::array_t<double> out({g.height(), g.width(), n});
  double* dst = out.mutable_data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (int c = 0; c < n; ++c) dst[i * n + c] = g[i][c];
  }
  return out;
}

template <typename T>
py::array_t<T> scalars_to_numpy(const Grid<T>& g) {
  py::array_t<T> out({g.height(), g.width()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

py::array_t<bool> mask_to_numpy(const Mask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  bool* dst = out.mutable_data();
  for (std::size_t i = 0; i < m.size(); ++i) dst[i] = m[i] != 0;
  return out;
}

void require_shape(const Array& a, int ndim, int last, const char* what) {
  if (a.ndim() != ndim || (last > 0 && a.shape(ndim - 1) != last)) {
    throw InvalidArgument(std::string(what) + ": expected an array of shape " +
                          (ndim == 3 ? "(H, W, " + std::to_string(last) + ")" : "(H, W)"));
  }
}

template <typename G>
G vectors_from_numpy(const Array& a, const char* what) {
  require_shape(a, 3, 3, what);
  G g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  const double* src = a.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = Eigen::Vector3d(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
  }
  return g;
}

template <typename G>
G scalars_from_numpy(const Array& a, const char* what) {
  require_shape(a, 2, 0, what);
  G g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + g.size(), g.values().begin());
  return g;
}

ImageFrame frame_from_numpy(const Array& a) {
  ImageFrame f = vectors_from_numpy<ImageFrame>(a, "frame");
  f.validate();
  return f;
}

std::vector<ImageFrame> frames_from_list(const std::vector<Array>& frames) {
  std::vector<ImageFrame> out;
  for (const Array& a : frames) out.push_back(frame_from_numpy(a));
  return out;
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::span<const std::uint8_t> byte_view(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

py::dict trace_dict(const ScoreTrace& t) {
  py::dict d;
  d["frame_scores"] = t.frame_scores;
  d["video_score"] = t.video_score;
  d["threshold"] = t.threshold;
  d["predicted"] = std::string(to_string(t.predicted));
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-view consistency analysis and temporal forgery detection.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy) {
             return CameraIntrinsics{fx, fy, cx, cy};
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"))
      .def_static("centered", &centered_intrinsics, py::arg("focal"), py::arg("height"),
                  py::arg("width"))
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def("validate", &CameraIntrinsics::validate, py::arg("height"), py::arg("width"))
      .def(py::self == py::self)
      .def("__repr__", [](const CameraIntrinsics& k) {
        return "CameraIntrinsics(fx=" + std::to_string(k.fx) + ", fy=" + std::to_string(k.fy) +
               ", cx=" + std::to_string(k.cx) + ", cy=" + std::to_string(k.cy) + ")";
      });

  py::class_<PairRecord>(m, "PairRecord")
      .def(py::init([](const Array& x11, const Array& x21, const Array& c11, const Array& c21,
                       std::optional<CameraIntrinsics> k1) {
             PairRecord r{vectors_from_numpy<PointMap>(x11, "x11"),
                          vectors_from_numpy<PointMap>(x21, "x21"),
                          scalars_from_numpy<ConfidenceMap>(c11, "c11"),
                          scalars_from_numpy<ConfidenceMap>(c21, "c21"), k1};
             r.validate();
             return r;
           }),
           py::arg("x11"), py::arg("x21"), py::arg("c11"), py::arg("c21"),
           py::arg("k1") = py::none())
      .def_property_readonly("x11", [](const PairRecord& r) { return vectors_to_numpy(r.x11); })
      .def_property_readonly("x21", [](const PairRecord& r) { return vectors_to_numpy(r.x21); })
      .def_property_readonly("c11", [](const PairRecord& r) { return scalars_to_numpy<double>(r.c11); })
      .def_property_readonly("c21", [](const PairRecord& r) { return scalars_to_numpy<double>(r.c21); })
      .def_readwrite("k1", &PairRecord::k1)
      .def_property_readonly("height", &PairRecord::height)
      .def_property_readonly("width", &PairRecord::width)
      .def("validate", &PairRecord::validate);

  m.def("read_pointmap", &read_pointmap_file, py::arg("path"));
  m.def("write_pointmap", &write_pointmap_file, py::arg("path"), py::arg("record"));
  m.def("encode_pointmap", [](const PairRecord& r) {
    return to_bytes(encode_tensor_file(to_tensor_file(r)));
  }, py::arg("record"));
  m.def("decode_pointmap", [](const py::bytes& b) {
    const std::string s = b;
    return pair_record_from(decode_tensor_file(byte_view(s), kPointMapMagic));
  }, py::arg("data"));
  m.def("read_frame", [](const std::filesystem::path& p) {
    return vectors_to_numpy(read_frame_file(p));
  }, py::arg("path"));
  m.def("write_frame", [](const std::filesystem::path& p, const Array& frame) {
    write_frame_file(p, frame_from_numpy(frame));
  }, py::arg("path"), py::arg("frame"));

  m.def("project_points", [](const Array& points, const CameraIntrinsics& k) {
    const ProjectedPoints p = project_points(vectors_from_numpy<PointMap>(points, "points"), k);
    return py::make_tuple(vectors_to_numpy(p.pixels), scalars_to_numpy<double>(p.depth),
                          mask_to_numpy(p.valid));
  }, py::arg("points"), py::arg("intrinsics"),
        "Returns (pixels (H, W, 2) as (u, v), depth (H, W), valid (H, W)).");
  m.def("backproject", [](const CameraIntrinsics& k, const Array& depth) {
    return vectors_to_numpy(backproject(k, scalars_from_numpy<Grid<double>>(depth, "depth")));
  }, py::arg("intrinsics"), py::arg("depth"));
  m.def("estimate_focal", [](const Array& points) {
    return estimate_focal(vectors_from_numpy<PointMap>(points, "points"));
  }, py::arg("points"));
  m.def("analyze_pair", [](const Array& frame1, const Array& frame2, const PairRecord& r) {
    const PairAnalysis a = analyze_pair(frame_from_numpy(frame1), frame_from_numpy(frame2), r);
    py::dict d;
    d["intrinsics"] = a.intrinsics;
    d["warped"] = vectors_to_numpy(a.warp.warped);
    d["residual"] = scalars_to_numpy<double>(a.residual.values);
    d["validity"] = mask_to_numpy(a.residual.validity);
    d["mean"] = a.summary.mean;
    d["weighted_mean"] = a.summary.weighted_mean;
    d["valid_fraction"] = a.summary.valid_fraction;
    d["high_frequency_energy"] = a.summary.high_frequency_energy;
    return d;
  }, py::arg("frame1"), py::arg("frame2"), py::arg("record"),
        "Reprojects frame2 into view 1 and summarizes the residual against frame1.");

  m.def("synthesize_sequence", [](std::uint64_t seed, int frames, double geometry_sigma,
                                  double texture_drift, double flicker_amp) {
    SyntheticSequence s;
    {
      py::gil_scoped_release release;
      s = make_sequence(make_scene(seed), make_trajectory(frames, seed), SequenceOptions{});
      s = perturb(s, PerturbationSpec{geometry_sigma, texture_drift, flicker_amp,
                                      derive_seed(seed, "perturb")});
    }
    std::vector<py::array_t<double>> out;
    for (const ImageFrame& f : s.frames) out.push_back(vectors_to_numpy(f));
    return py::make_tuple(out, s.pairs);
  }, py::arg("seed"), py::arg("frames") = 6, py::arg("geometry_sigma") = 0.0,
        py::arg("texture_drift") = 0.0, py::arg("flicker_amp") = 0.0,
        "Renders a 64x64 sequence; returns (frames, pair records).");
  m.def("load_video", [](const std::filesystem::path& dir) {
    const VideoData v = load_video(scan_video_dir(dir));
    std::vector<py::array_t<double>> frames;
    for (const ImageFrame& f : v.frames) frames.push_back(vectors_to_numpy(f));
    return py::make_tuple(frames, v.pairs);
  }, py::arg("dir"));
  m.def("write_video", [](const std::filesystem::path& dir, const std::vector<Array>& frames,
                          const std::vector<PairRecord>& pairs) {
    write_video(dir, frames_from_list(frames), pairs);
  }, py::arg("dir"), py::arg("frames"), py::arg("pairs"));

  py::class_<DetectorConfig>(m, "DetectorConfig")
      .def(py::init<>())
      .def_readwrite("patch", &DetectorConfig::patch)
      .def_readwrite("dim", &DetectorConfig::dim)
      .def_readwrite("memory_capacity", &DetectorConfig::memory_capacity);

  py::class_<DetectorParams>(m, "Detector")
      .def_static("initialize", &DetectorParams::initialize,
                  py::arg("config") = DetectorConfig{}, py::arg("seed") = 7)
      .def_static("load", [](const std::filesystem::path& p) {
        return decode_checkpoint(read_file_bytes(p));
      }, py::arg("path"))
      .def_static("from_bytes", [](const py::bytes& b) {
        const std::string s = b;
        return decode_checkpoint(byte_view(s));
      }, py::arg("data"))
      .def("save", [](const DetectorParams& p, const std::filesystem::path& path) {
        write_file_atomic(path, encode_checkpoint(p));
      }, py::arg("path"))
      .def("to_bytes", [](const DetectorParams& p) { return to_bytes(encode_checkpoint(p)); })
      .def_readonly("config", &DetectorParams::config)
      .def("detect", [](const DetectorParams& p, const std::vector<Array>& frames,
                        const std::vector<PairRecord>& pairs, double threshold) {
        const std::vector<ImageFrame> f = frames_from_list(frames);
        ScoreTrace t;
        {
          py::gil_scoped_release release;
          t = detect_video(prepare_video(f, pairs, p.config), p, threshold);
        }
        return trace_dict(t);
      }, py::arg("frames"), py::arg("pairs"), py::arg("threshold") = 0.5)
      .def("detect_dir", [](const DetectorParams& p, const std::filesystem::path& dir,
                            double threshold) {
        ScoreTrace t;
        {
          py::gil_scoped_release release;
          const VideoData v = load_video(scan_video_dir(dir));
          t = detect_video(prepare_video(v.frames, v.pairs, p.config), p, threshold);
        }
        return trace_dict(t);
      }, py::arg("dir"), py::arg("threshold") = 0.5)
      .def(py::self == py::self);

  m.def("train_detector", [](const std::vector<std::vector<Array>>& frames,
                             const std::vector<std::vector<PairRecord>>& pairs,
                             const std::vector<bool>& fake, int epochs, double learning_rate,
                             std::uint64_t seed, const DetectorConfig& config) {
    if (frames.size() != pairs.size() || frames.size() != fake.size()) {
      throw InvalidArgument("frames, pairs and labels differ in length");
    }
    std::vector<PreparedVideo> videos;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      videos.push_back(prepare_video(frames_from_list(frames[i]), pairs[i], config));
    }
    TrainResult result;
    {
      py::gil_scoped_release release;
      std::vector<LabeledVideo> labeled;
      for (std::size_t i = 0; i < videos.size(); ++i) labeled.push_back({&videos[i], fake[i]});
      TrainConfig train;
      train.epochs = epochs;
      train.learning_rate = learning_rate;
      train.seed = seed;
      result = train_detector(labeled, config, train);
    }
    return py::make_tuple(result.params, result.loss_curve);
  }, py::arg("frames"), py::arg("pairs"), py::arg("fake"), py::arg("epochs") = 100,
        py::arg("learning_rate") = 0.01, py::arg("seed") = 7,
        py::arg("config") = DetectorConfig{},
        "Trains from scratch; returns (detector, loss curve).");

  m.def("average_precision", [](const std::vector<double>& scores, const std::vector<bool>& positive) {
    const std::unique_ptr<bool[]> labels(new bool[positive.size()]);
    std::copy(positive.begin(), positive.end(), labels.get());
    return average_precision(scores, std::span<const bool>(labels.get(), positive.size()));
  }, py::arg("scores"), py::arg("positive"));
  m.def("f1_score", [](std::size_t tp, std::size_t fp, std::size_t fn) {
    Confusion c;
    c.tp = tp;
    c.fp = fp;
    c.fn = fn;
    return f1_score(c);
  }, py::arg("tp"), py::arg("fp"), py::arg("fn"));

  m.def("main", [](std::vector<std::string> args) {
    args.insert(args.begin(), "viewspan");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    py::scoped_ostream_redirect out;
    py::scoped_estream_redirect err;
    return cli::run_cli(static_cast<int>(argv.size()), argv.data());
  }, py::arg("args"), "Runs the command-line tool; returns its exit code.");
}
