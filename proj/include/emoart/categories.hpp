// Copyright 2026 The emoart Authors
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

#ifndef EMOART_CATEGORIES_HPP
#define EMOART_CATEGORIES_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emoart {

inline constexpr std::size_t kNumCategories = 26;
inline constexpr std::size_t kNumVadDims = 3;

/// The discrete emotion vocabulary, in index order. Shared by ingestion,
/// training, checkpoints and reports.
inline constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "Affection",     "Anger",       "Annoyance",  "Anticipation",
    "Aversion",      "Confidence",  "Disapproval", "Disconnection",
    "Disquietment",  "Doubt/Confusion", "Embarrassment", "Engagement",
    "Esteem",        "Excitement",  "Fatigue",    "Fear",
    "Happiness",     "Pain",        "Peace",      "Pleasure",
    "Sadness",       "Sensitivity", "Suffering",  "Surprise",
    "Sympathy",      "Yearning",
};

inline constexpr std::array<std::string_view, kNumVadDims> kVadNames = {
    "valence", "arousal", "dominance"};

struct EmotionCategory {
  int id = 0;

  std::string_view name() const { return kCategoryNames.at(static_cast<std::size_t>(id)); }
  friend bool operator==(EmotionCategory, EmotionCategory) = default;
};

/// Index of a canonical category name, or nullopt for unknown names.
/// Matching is exact (case-sensitive).
std::optional<int> category_index(std::string_view name);

std::vector<std::string> canonical_category_list();

}  // namespace emoart

#endif  // EMOART_CATEGORIES_HPP
