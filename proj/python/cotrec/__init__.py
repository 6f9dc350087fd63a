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

"""Python interface to the cotrec recommender pipeline."""

from cotrec._cotrec import (  # noqa: F401
    ConfigError,
    ContractError,
    CotrecError,
    DataError,
    DependencyError,
    RunConfig,
    TrainingError,
    TransportError,
    bleu,
    composite_score,
    hit_rate_at_k,
    ndcg_at_k,
    rouge_1,
    rouge_l,
    run_stage,
    stages,
    word_tokens,
    write_planted_dataset,
)

__version__ = "0.1.0"


def run_all(config, force=False):
    """Runs every stage in order and returns the per-stage results."""
    return {name: run_stage(name, config, force) for name in stages()}
