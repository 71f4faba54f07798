/*
 * Copyright 2026 The tabreg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace tabreg {

struct RankEntry {
  std::string feature;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
  std::string flag;      // e.g. "zero_variance", "capped"; empty when clean
};

// Higher score is better. Entries are sorted by score descending with ties
// broken by position in `universe` (the feature column order).
struct SelectorRanking {
  std::string method_id;
  std::vector<RankEntry> entries;
  std::vector<std::string> universe;

  const RankEntry& entry(const std::string& feature) const;
  std::vector<std::string> top(std::size_t k) const;
};

// NaN scores become 0 and are flagged "undefined".
SelectorRanking make_ranking(std::string method_id, std::vector<std::string> universe,
                             std::vector<double> scores, std::vector<std::string> flags = {});

nlohmann::json to_json(const SelectorRanking& r);
SelectorRanking ranking_from_json(const nlohmann::json& j);
// Long format: method_id,feature,score,rank
void write_rankings_csv(const std::vector<SelectorRanking>& rankings,
                        const std::filesystem::path& path);

}  // namespace tabreg
