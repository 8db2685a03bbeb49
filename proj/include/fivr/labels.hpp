#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace fivr {

// Relation of a candidate video to a query.
enum class Label : std::uint8_t { ND, DS, CS, IS, DI };

inline constexpr std::array<Label, 5> kAllLabels{Label::ND, Label::DS, Label::CS, Label::IS, Label::DI};

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::ND: return "ND";
    case Label::DS: return "DS";
    case Label::CS: return "CS";
    case Label::IS: return "IS";
    case Label::DI: return "DI";
  }
  return "DI";
}

inline std::optional<Label> parse_label(std::string_view s) {
  for (auto l : kAllLabels)
    if (to_string(l) == s) return l;
  return std::nullopt;
}

inline bool is_relevant(Label l) { return l != Label::DI; }

}  // namespace fivr
