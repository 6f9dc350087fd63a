# Copyright 2026 The cotrec Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
import os
from pathlib import Path

import pytest

import cotrec


def test_metrics_match_hand_values():
    assert cotrec.hit_rate_at_k([[3, 1, 2], [2, 3, 1]], [1, 1], 2) == 0.5
    assert cotrec.ndcg_at_k([[3, 1, 2]], [1], 2) == pytest.approx(1 / math.log2(3))
    toks = cotrec.word_tokens("The cat sat, on the mat.")
    assert toks == ["the", "cat", "sat", "on", "the", "mat"]
    assert cotrec.bleu(toks, toks) == pytest.approx(1.0)
    assert cotrec.rouge_l(toks[:3], toks) == pytest.approx(2 * 0.5 * 1.0 / 1.5)


def test_composite_score_and_errors():
    assert cotrec.composite_score([0.77, 0.74, 0.76, 0.73]) == pytest.approx(0.75, abs=1e-12)
    with pytest.raises(cotrec.ContractError):
        cotrec.rouge_1(["a"], [])
    with pytest.raises(cotrec.ConfigError):
        cotrec.RunConfig.parse("no.such.key = 1\n")
    assert issubclass(cotrec.DependencyError, cotrec.CotrecError)


def test_prepare_and_dependencies(tmp_path):
    data = tmp_path / "data"
    cotrec.write_planted_dataset(data, users=30, items=24)
    cfg = cotrec.RunConfig.parse(
        "paths.interactions = interactions.tsv\n"
        "paths.catalog = catalog.tsv\n"
        "paths.embeddings = embeddings.tsv\n"
        "seed = 2\n",
        data,
    )
    cfg.out = tmp_path / "out"
    with pytest.raises(cotrec.DependencyError):
        cotrec.run_stage("train-cf", cfg)
    first = cotrec.run_stage("prepare", cfg)
    assert any(p.endswith("split.tsv") for p in first["written"])
    again = cotrec.run_stage("prepare", cfg)
    assert again["written"] == [] and len(again["unchanged"]) == len(first["written"])
    assert "users 30" in (tmp_path / "out" / "prepare_report.txt").read_text()


def test_bundled_config_loads():
    data = Path(os.environ.get("COTREC_DATA", Path(__file__).parents[2] / "data"))
    cfg = cotrec.RunConfig.load(data / "planted.conf")
    cfg.validate()
    assert cfg.seed == 5
    assert cotrec.stages()[0] == "prepare"
