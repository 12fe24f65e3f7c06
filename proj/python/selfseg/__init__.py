# Copyright 2026 The SelfSeg Authors
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

from selfseg._core import (
    DataError,
    Error,
    ModelMismatchError,
    NonFiniteLossError,
    Scorer,
    ScorerConfig,
    UsageError,
    Vocab,
    build_bpe_vocab,
    count_words,
    dif_corpus,
    dif_word,
    normalize,
    segment_file,
    segment_text,
    segment_text_regularized,
    stats,
    train,
)

__all__ = [
    "DataError",
    "Error",
    "ModelMismatchError",
    "NonFiniteLossError",
    "Scorer",
    "ScorerConfig",
    "UsageError",
    "Vocab",
    "build_bpe_vocab",
    "count_words",
    "dif_corpus",
    "dif_word",
    "normalize",
    "segment_file",
    "segment_text",
    "segment_text_regularized",
    "stats",
    "train",
]
