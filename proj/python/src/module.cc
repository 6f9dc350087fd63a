// Copyright 2026 The cotrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings for the cotrec library.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cotrec/config.h"
#include "cotrec/cot.h"
#include "cotrec/errors.h"
#include "cotrec/eval.h"
#include "cotrec/pipeline.h"
#include "cotrec/synthetic.h"
#include "cotrec/text.h"

namespace py = pybind11;
using namespace cotrec;

namespace {

std::vector<std::string> paths_to_strings(const std::vector<std::filesystem::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

}  // namespace

PYBIND11_MODULE(_cotrec, m) {
  m.doc() = "Sequential recommendation with aligned collaborative and semantic embeddings.";

  // Translators run newest first, so the base class is registered first.
  const auto base = py::register_exception<Error>(m, "CotrecError");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DataError>(m, "DataError", base);
  py::register_exception<TrainingError>(m, "TrainingError", base);
  py::register_exception<DependencyError>(m, "DependencyError", base);
  py::register_exception<ContractError>(m, "ContractError", base);
  py::register_exception<TransportError>(m, "TransportError", base);

  m.def("word_tokens", [](const std::string& text) { return word_tokens(text); });

  m.def(
      "hit_rate_at_k",
      [](const std::vector<std::vector<int>>& rankings, const std::vector<int>& targets, int k) {
        return hit_rate_at_k(rankings, targets, k);
      },
      py::arg("rankings"), py::arg("targets"), py::arg("k"));
  m.def(
      "ndcg_at_k",
      [](const std::vector<std::vector<int>>& rankings, const std::vector<int>& targets, int k) {
        return ndcg_at_k(rankings, targets, k);
      },
      py::arg("rankings"), py::arg("targets"), py::arg("k"));
  m.def(
      "bleu",
      [](const std::vector<std::string>& cand, const std::vector<std::string>& ref, int n) {
        return bleu(cand, ref, n);
      },
      py::arg("candidate"), py::arg("reference"), py::arg("max_n") = 4);
  m.def(
      "rouge_1",
      [](const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
        return rouge(cand, ref, RougeVariant::kRouge1);
      },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "rouge_l",
      [](const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
        return rouge(cand, ref, RougeVariant::kRougeL);
      },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "composite_score",
      [](const std::array<double, 4>& dims, const std::array<double, 4>& weights) {
        return composite_score(dims, weights);
      },
      py::arg("dims"), py::arg("weights") = kEqualWeights);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static(
          "parse",
          [](const std::string& text, const std::filesystem::path& base_dir) {
            return parse_run_config(text, base_dir);
          },
          py::arg("text"), py::arg("base_dir") = std::filesystem::path())
      .def_static("load", &load_run_config, py::arg("path"))
      .def("set", [](RunConfig& c, const std::string& k, const std::string& v) { c.set(k, v); })
      .def("validate", &RunConfig::validate)
      .def("serialize", &RunConfig::serialize)
      .def("digest", &RunConfig::digest)
      .def_property(
          "out", [](const RunConfig& c) { return c.paths.out; },
          [](RunConfig& c, const std::filesystem::path& p) { c.paths.out = p; })
      .def_readwrite("seed", &RunConfig::seed)
      .def("__repr__", [](const RunConfig& c) { return "<RunConfig " + c.digest() + ">"; });

  m.def("stages", [] {
    std::vector<std::string> out;
    for (Stage s : all_stages()) out.push_back(to_string(s));
    return out;
  });
  m.def(
      "run_stage",
      [](const std::string& stage, const RunConfig& cfg, bool force) {
        RunOptions opts;
        opts.force = force;
        StageResult r;
        {
          py::gil_scoped_release release;
          r = run_stage(parse_stage(stage), cfg, opts);
        }
        py::dict out;
        out["written"] = paths_to_strings(r.written);
        out["unchanged"] = paths_to_strings(r.unchanged);
        out["summary"] = r.summary;
        return out;
      },
      py::arg("stage"), py::arg("config"), py::arg("force") = false);

  m.def(
      "write_planted_dataset",
      [](const std::filesystem::path& dir, int users, int items, int blocks,
         const std::string& user_prefix, const std::string& item_prefix, std::uint64_t seed) {
        PlantedConfig pc;
        pc.users = users;
        pc.items = items;
        pc.blocks = blocks;
        pc.user_prefix = user_prefix;
        pc.item_prefix = item_prefix;
        pc.seed = seed;
        write_planted_dataset(dir, make_planted_dataset(pc));
      },
      py::arg("dir"), py::arg("users") = 200, py::arg("items") = 100, py::arg("blocks") = 2,
      py::arg("user_prefix") = "u", py::arg("item_prefix") = "i", py::arg("seed") = 11);
}
