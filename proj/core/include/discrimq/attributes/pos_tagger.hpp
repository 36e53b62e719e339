#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace discrimq::attributes {

enum class PosTag { NN, JJ, VB, CD, IN, OTHER };

std::string_view tag_name(PosTag tag);
/// Throws ParseError for an unknown name.
PosTag parse_tag(std::string_view name);

/// Lexicon lookup with suffix fallbacks; context free, so a token always
/// gets the same tag. Unknown words default to NN.
PosTag tag_token(std::string_view token);
std::vector<PosTag> pos_tag_lite(std::vector<std::string> const& tokens);

}  // namespace discrimq::attributes
