#pragma once

#include <string>

namespace stereogen {

enum class OutputLayout { side_by_side, top_bottom, anaglyph_red_cyan, separate };

/// Short names as used on the command line: sbs, tb, anaglyph, separate.
std::string to_string(OutputLayout layout);
/// Accepts the short names and side_by_side / top_bottom / anaglyph_red_cyan.
OutputLayout parse_layout(const std::string& text);

}  // namespace stereogen
