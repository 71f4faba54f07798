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

#include "tabreg/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "tabreg/common.hpp"

namespace tabreg {

const RankEntry& SelectorRanking::entry(const std::string& feature) const {
  for (const auto& e : entries) {
    if (e.feature == feature) return e;
  }
  throw ValidationError("ranking '" + method_id + "' has no feature '" + feature + "'");
}

std::vector<std::string> SelectorRanking::top(std::size_t k) const {
  if (k > entries.size()) throw ValidationError("top: k exceeds feature count");
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(entries[i].feature);
  return out;
}

SelectorRanking make_ranking(std::string method_id, std::vector<std::string> universe,
                             std::vector<double> scores, std::vector<std::string> flags) {
  if (scores.size() != universe.size()) {
    throw ValidationError("make_ranking: score count does not match feature count");
  }
  if (flags.empty()) flags.assign(universe.size(), "");
  if (flags.size() != universe.size()) {
    throw ValidationError("make_ranking: flag count does not match feature count");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) {
      scores[i] = 0.0;
      if (flags[i].empty()) flags[i] = "undefined";
    }
  }
  std::vector<std::size_t> order(universe.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  SelectorRanking r;
  r.method_id = std::move(method_id);
  r.entries.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    r.entries.push_back(RankEntry{universe[i], scores[i], pos + 1, flags[i]});
  }
  r.universe = std::move(universe);
  return r;
}

nlohmann::json to_json(const SelectorRanking& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    nlohmann::json je{{"feature", e.feature}, {"score", e.score}, {"rank", e.rank}};
    if (!e.flag.empty()) je["flag"] = e.flag;
    entries.push_back(std::move(je));
  }
  return {{"method_id", r.method_id}, {"universe", r.universe}, {"entries", std::move(entries)}};
}

SelectorRanking ranking_from_json(const nlohmann::json& j) {
  try {
    SelectorRanking r;
    r.method_id = j.at("method_id").get<std::string>();
    r.universe = j.at("universe").get<std::vector<std::string>>();
    for (const auto& je : j.at("entries")) {
      RankEntry e;
      e.feature = je.at("feature").get<std::string>();
      e.score = je.at("score").get<double>();
      e.rank = je.at("rank").get<std::size_t>();
      e.flag = je.value("flag", std::string{});
      r.entries.push_back(std::move(e));
    }
    if (r.entries.size() != r.universe.size()) {
      throw ArtifactError("ranking entries do not cover the feature universe");
    }
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      if (r.entries[i].rank != i + 1) throw ArtifactError("ranking ranks are not 1..n in order");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed ranking JSON: ") + e.what());
  }
}

void write_rankings_csv(const std::vector<SelectorRanking>& rankings,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << "method_id,feature,score,rank\n";
  for (const auto& r : rankings) {
    for (const auto& e : r.entries) {
      out << r.method_id << ',' << e.feature << ',' << format_double(e.score) << ',' << e.rank
          << '\n';
    }
  }
}

}  // namespace tabreg
