// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "h2ot/analysis.hpp"
#include "h2ot/cli_io.hpp"
#include "h2ot/errors.hpp"
#include "h2ot/pipeline.hpp"
#include "h2ot/token_pruning.hpp"
#include "h2ot/token_recovering.hpp"
#include "h2ot/vpt_model.hpp"

namespace py = pybind11;
using namespace h2ot;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

void expect_ndim(const Array& a, py::ssize_t ndim, const char* what) {
  if (a.ndim() != ndim) {
    throw ShapeError(std::string(what) + " must have " + std::to_string(ndim) + " dimensions, got " +
                     std::to_string(a.ndim()));
  }
}

std::vector<double> copy_out(const Array& a) { return {a.data(), a.data() + a.size()}; }

template <std::size_t Dims>
PoseArray<Dims> to_poses(const Array& a) {
  expect_ndim(a, 3, "poses");
  if (a.shape(2) != static_cast<py::ssize_t>(Dims)) {
    throw ShapeError("poses last axis must be " + std::to_string(Dims));
  }
  return PoseArray<Dims>(a.shape(0), a.shape(1), copy_out(a));
}

template <std::size_t Dims>
Array from_poses(const PoseArray<Dims>& p) {
  Array out({p.frames(), p.joints(), Dims});
  std::copy(p.data().begin(), p.data().end(), out.mutable_data());
  return out;
}

PoseTokens to_tokens(const Array& a) {
  expect_ndim(a, 3, "tokens");
  PoseTokens t(a.shape(0), a.shape(1), a.shape(2));
  std::copy(a.data(), a.data() + a.size(), t.data().begin());
  return t;
}

Matrix to_matrix(const Array& a) {
  expect_ndim(a, 2, "matrix");
  return Matrix(a.shape(0), a.shape(1), copy_out(a));
}

py::dict trace_dict(const SelectionTrace& t) {
  py::list stages;
  for (const auto& s : t.stages) {
    py::dict d;
    d["block"] = s.block;
    d["frames"] = s.frames;
    d["local"] = s.local;
    d["scores"] = s.scores;
    d["pinned_inserted"] = s.pinned_inserted;
    stages.append(d);
  }
  py::dict out;
  out["input_frames"] = t.input_frames;
  out["block_tokens"] = t.block_tokens;
  out["stages"] = stages;
  return out;
}

/// Preset or config file plus the usual overrides, with weights held in memory.
class Pipeline {
 public:
  Pipeline(std::optional<std::string> preset_name, std::optional<std::string> config_path,
           std::optional<std::size_t> dim, std::optional<std::size_t> heads,
           std::optional<std::string> strategy, std::optional<std::string> recovery,
           std::uint64_t seed) {
    if (preset_name.has_value() == config_path.has_value()) {
      throw ConfigError("pass exactly one of preset= or config=");
    }
    cfg_ = preset_name ? preset(*preset_name).pipeline : load_run_config(*config_path).pipeline;
    if (dim) cfg_.model.dim = *dim;
    if (heads) cfg_.model.heads = *heads;
    if (strategy) cfg_.schedule.strategy = parse_strategy(*strategy);
    if (recovery) cfg_.recovery = parse_recovery(*recovery);
    cfg_.validate();
    Rng rng(seed);
    weights_ = init_pipeline_weights(cfg_, rng);
  }

  py::tuple forward(const Array& poses) const {
    const PoseSequence2D p = to_poses<2>(poses);
    if (p.frames() != cfg_.model.frames || p.joints() != cfg_.model.joints) {
      throw ConfigError("input shape does not match the configured frames and joints");
    }
    py::gil_scoped_release release;
    if (cfg_.mode == PipelineMode::kSeq2Seq) {
      SequenceOutput out = seq2seq_forward(p, cfg_, weights_);
      py::gil_scoped_acquire acquire;
      return py::make_tuple(from_poses(out.poses), trace_dict(out.trace));
    }
    FrameOutput out = seq2frame_forward(p, cfg_, weights_);
    py::gil_scoped_acquire acquire;
    return py::make_tuple(from_poses(out.pose), trace_dict(out.trace));
  }

  Array forward_unpruned(const Array& poses) const {
    const PoseSequence2D p = to_poses<2>(poses);
    return from_poses(unpruned_forward(p, weights_));
  }

  void save(const std::string& path) const { save_weights(weights_, path); }

  const PipelineConfig& config() const { return cfg_; }
  std::size_t parameter_count() const { return weights_.parameter_count(); }

 private:
  PipelineConfig cfg_;
  ModelWeights weights_;
};

py::dict flops_dict(const FlopsReport& r) {
  py::dict d;
  d["total"] = r.total;
  d["baseline_total"] = r.baseline_total;
  d["reduction_ratio"] = r.reduction_ratio;
  d["embed_flops"] = r.embed_flops;
  d["head_flops"] = r.head_flops;
  std::vector<std::size_t> tokens;
  for (const auto& b : r.per_block) tokens.push_back(b.tokens);
  d["block_tokens"] = tokens;
  return d;
}

}  // namespace

PYBIND11_MODULE(_h2ot, m) {
  m.doc() = "Token pruning and recovery for video pose transformers";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ScheduleError>(m, "ScheduleError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<RecoveryError>(m, "RecoveryError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());

  m.def("preset_names", &preset_names);

  m.def("tps_select", &tps_select, py::arg("n"), py::arg("r"));
  m.def(
      "tpc_select",
      [](const Array& tokens, std::size_t r, std::size_t k) {
        return tpc_select(to_tokens(tokens), r, k);
      },
      py::arg("tokens"), py::arg("r"), py::arg("k") = 2);
  m.def(
      "dpc_knn_scores",
      [](const Array& pooled, std::size_t k) {
        const DensityPeaks dp = dpc_knn_scores(to_matrix(pooled), k);
        return py::make_tuple(dp.density, dp.distance, dp.score);
      },
      py::arg("pooled"), py::arg("k"), "Returns (density, distance, score).");
  m.def(
      "tpa_select", [](const Array& alpha, std::size_t r) { return tpa_select(to_matrix(alpha), r); },
      py::arg("alpha"), py::arg("r"));
  m.def(
      "motion_scores",
      [](const Array& poses) {
        const PoseSequence2D p = to_poses<2>(poses);
        std::vector<std::size_t> all(p.frames());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return motion_scores(compute_motion(flatten_frames(p, all)));
      },
      py::arg("poses"));
  m.def(
      "tpmo_select",
      [](const Array& poses, std::size_t r) {
        const PoseSequence2D p = to_poses<2>(poses);
        std::vector<std::size_t> all(p.frames());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return tpmo_select(compute_motion(flatten_frames(p, all)), r);
      },
      py::arg("poses"), py::arg("r"));
  m.def(
      "tri_recover",
      [](const Array& poses, const std::vector<std::size_t>& kept, std::size_t frames) {
        return from_poses(tri_recover(to_poses<3>(poses), kept, frames));
      },
      py::arg("poses"), py::arg("kept"), py::arg("frames"));

  m.def(
      "flops",
      [](const std::string& name, std::optional<std::size_t> dim) {
        PipelineConfig cfg = preset(name).pipeline;
        if (dim) cfg.model.dim = *dim;
        return flops_dict(schedule_flops(cfg.model, cfg.schedule));
      },
      py::arg("preset"), py::arg("dim") = py::none());
  m.def(
      "mpjpe",
      [](const Array& pred, const Array& gt) { return mpjpe(to_poses<3>(pred), to_poses<3>(gt)); },
      py::arg("pred"), py::arg("gt"));

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init<std::optional<std::string>, std::optional<std::string>,
                    std::optional<std::size_t>, std::optional<std::size_t>,
                    std::optional<std::string>, std::optional<std::string>, std::uint64_t>(),
           py::arg("preset") = py::none(), py::arg("config") = py::none(),
           py::arg("dim") = py::none(), py::arg("heads") = py::none(),
           py::arg("strategy") = py::none(), py::arg("recovery") = py::none(),
           py::arg("seed") = 0)
      .def("forward", &Pipeline::forward, py::arg("poses"),
           "Returns (poses_3d, trace) for an (F, J, 2) array.")
      .def("forward_unpruned", &Pipeline::forward_unpruned, py::arg("poses"))
      .def("save_weights", &Pipeline::save, py::arg("path"))
      .def_property_readonly("parameter_count", &Pipeline::parameter_count)
      .def_property_readonly("frames", [](const Pipeline& p) { return p.config().model.frames; })
      .def_property_readonly("joints", [](const Pipeline& p) { return p.config().model.joints; })
      .def_property_readonly("mode",
                             [](const Pipeline& p) { return std::string(to_string(p.config().mode)); })
      .def_property_readonly("block_tokens", [](const Pipeline& p) {
        return token_count_profile(p.config().model, p.config().schedule);
      });
}
