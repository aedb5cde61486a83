#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace promptbench {

enum class ConditionCategory { formatting, semantic };

std::string_view to_string(ConditionCategory category);

/// A fixed template with one word slot: the rendered input is
/// prefix + word + suffix, so rendering is injective in the word.
struct PromptCondition {
  std::string id;
  ConditionCategory category;
  std::string prefix;
  std::string suffix;

  /// Template text with the slot shown as `{word}`.
  std::string template_text() const { return prefix + "{word}" + suffix; }

  friend bool operator==(const PromptCondition&, const PromptCondition&) = default;
};

namespace condition_id {
inline constexpr std::string_view bare = "bare";
inline constexpr std::string_view leading_space = "leading_space";
inline constexpr std::string_view trailing_space = "trailing_space";
inline constexpr std::string_view both_spaces = "both_spaces";
inline constexpr std::string_view the_word = "the_word";
inline constexpr std::string_view word_colon = "word_colon";
inline constexpr std::string_view meaning_colon = "meaning_colon";
inline constexpr std::string_view instruct_semantic = "instruct_semantic";
}  // namespace condition_id

/// The eight canonical conditions: four formatting variants followed by four
/// semantic prompts. This order is also the column order of every grid.
const std::vector<PromptCondition>& all_conditions();

/// The four formatting conditions (bare first).
std::span<const PromptCondition> formatting_conditions();

std::optional<PromptCondition> find_condition(std::string_view id);

/// Builds an extra condition from a template containing exactly one `{word}`
/// slot. Throws ConfigInvalid otherwise, or when `id` clashes with a
/// canonical condition.
PromptCondition make_condition(std::string id, std::string_view template_text);

/// Exact string sent to the provider. Throws EmptyWord for an empty word.
std::string render(const PromptCondition& condition, std::string_view word);

/// Position of a condition id in the canonical order, or the size of the
/// canonical list for extra conditions.
std::size_t canonical_rank(std::string_view id);

}  // namespace promptbench
