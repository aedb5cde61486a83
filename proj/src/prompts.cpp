#include "promptbench/prompts.hpp"

#include <algorithm>

#include "promptbench/error.hpp"

namespace promptbench {

std::string_view to_string(ConditionCategory category) {
  return category == ConditionCategory::formatting ? "formatting" : "semantic";
}

const std::vector<PromptCondition>& all_conditions() {
  using C = ConditionCategory;
  static const std::vector<PromptCondition> conditions = {
      {std::string(condition_id::bare), C::formatting, "", ""},
      {std::string(condition_id::leading_space), C::formatting, " ", ""},
      {std::string(condition_id::trailing_space), C::formatting, "", " "},
      {std::string(condition_id::both_spaces), C::formatting, " ", " "},
      {std::string(condition_id::the_word), C::semantic, "the word ", ""},
      {std::string(condition_id::word_colon), C::semantic, "word: ", ""},
      {std::string(condition_id::meaning_colon), C::semantic, "meaning: ", ""},
      {std::string(condition_id::instruct_semantic), C::semantic,
       "Represent the semantic concept: ", ""},
  };
  return conditions;
}

std::span<const PromptCondition> formatting_conditions() {
  return std::span<const PromptCondition>(all_conditions()).first(4);
}

std::optional<PromptCondition> find_condition(std::string_view id) {
  const auto& all = all_conditions();
  auto it = std::find_if(all.begin(), all.end(), [&](const auto& c) { return c.id == id; });
  if (it == all.end()) return std::nullopt;
  return *it;
}

PromptCondition make_condition(std::string id, std::string_view template_text) {
  static constexpr std::string_view slot = "{word}";
  if (id.empty()) throw Error(ErrorCode::ConfigInvalid, "extra condition needs an id");
  if (find_condition(id)) {
    throw Error(ErrorCode::ConfigInvalid, "extra condition '" + id + "' shadows a canonical one");
  }
  auto pos = template_text.find(slot);
  if (pos == std::string_view::npos ||
      template_text.find(slot, pos + slot.size()) != std::string_view::npos) {
    throw Error(ErrorCode::ConfigInvalid,
                "template for '" + id + "' must contain exactly one {word} slot");
  }
  std::string prefix(template_text.substr(0, pos));
  std::string suffix(template_text.substr(pos + slot.size()));
  auto only_spaces = [](const std::string& s) {
    return s.find_first_not_of(' ') == std::string::npos;
  };
  auto category = only_spaces(prefix) && only_spaces(suffix) ? ConditionCategory::formatting
                                                             : ConditionCategory::semantic;
  return PromptCondition{std::move(id), category, std::move(prefix), std::move(suffix)};
}

std::string render(const PromptCondition& condition, std::string_view word) {
  if (word.empty()) throw Error(ErrorCode::EmptyWord, "cannot render an empty word");
  std::string out;
  out.reserve(condition.prefix.size() + word.size() + condition.suffix.size());
  out.append(condition.prefix).append(word).append(condition.suffix);
  return out;
}

std::size_t canonical_rank(std::string_view id) {
  const auto& all = all_conditions();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].id == id) return i;
  }
  return all.size();
}

}  // namespace promptbench
